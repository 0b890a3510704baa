#include <doctest.h>

#include <cmath>

#include "pslab/dynamics.hpp"
#include "pslab/fft.hpp"
#include "pslab/hamiltonian.hpp"
#include "pslab/state.hpp"
#include "pslab/transforms.hpp"

using namespace pslab;

TEST_CASE("grid construction and dual axis") {
  PhaseSpaceGrid g = make_grid(1, 0.1, -10, 10, 256);
  CHECK(g.dx() == doctest::Approx(20.0 / 256).epsilon(1e-14));
  CHECK(g.dp() == doctest::Approx(2 * M_PI * 0.1 / 20).epsilon(1e-14));
  CHECK_THROWS_AS(make_grid(1, 0.1, -10, 10, 255), DomainError);
  CHECK_THROWS_AS(make_grid(1, -0.1, -10, 10, 256), DomainError);
  CHECK_THROWS_AS(make_grid(1, 0.1, 10, -10, 256), DomainError);

  PhaseSpaceGrid g2 = make_grid(1, 1.0, -8, 8, 128);
  VectorXd p = g2.p_axis();
  CHECK(p(0) == doctest::Approx(-M_PI * 128 / 16.0).epsilon(1e-12));
  CHECK(p(127) == doctest::Approx(M_PI * 128 / 16.0 - g2.dp()).epsilon(1e-12));
}

TEST_CASE("flatten/unflatten roundtrip at D=2") {
  PhaseSpaceGrid g = make_grid(2, 0.1, -5, 5, 32);
  int idx[2];
  for (long f : {0L, 31L, 32L, 1023L}) {
    g.unflatten(f, idx);
    CHECK(g.flatten(idx) == f);
  }
  CHECK(g.total_points() == 1024);
}

TEST_CASE("coherent state matches the unit-norm Gaussian form") {
  const double hbar = 0.1;
  PhaseSpaceGrid g = make_grid(1, hbar, -8, 8, 256);
  QuantumState s = coherent_state(g, PhasePoint::zero(1));
  CHECK(l2_norm(g, s.branches[0].psi) == doctest::Approx(1.0).epsilon(1e-10));
  // alpha = 0: real positive Gaussian; the numerically consistent prefactor
  // is (pi hbar)^{-1/4} (the convention-resolution protocol measures this;
  // the displayed (2 pi hbar)^{-1/4} would break <alpha|alpha> = 1)
  const double pref = std::pow(M_PI * hbar, -0.25);
  for (long i = 120; i < 136; ++i) {
    double x = g.point(i)(0);
    Complex v = s.branches[0].psi(i);
    CHECK(std::abs(v.imag()) < 1e-12);
    CHECK(v.real() == doctest::Approx(pref * std::exp(-x * x / (2 * hbar))).epsilon(1e-6));
  }
}

TEST_CASE("coherent overlap: closed form vs grid quadrature") {
  const double hbar = 0.5;
  PhaseSpaceGrid g = make_grid(1, hbar, -10, 10, 256);
  VectorXcd a = coherent_amplitudes(g, PhasePoint::of({1, 0}));
  VectorXcd b = coherent_amplitudes(g, PhasePoint::of({0, 0}));
  double overlap = std::abs(inner(g, b, a));
  CHECK(overlap == doctest::Approx(std::exp(-1.0 / (4 * hbar))).epsilon(1e-8));
}

TEST_CASE("coherent center margin is enforced") {
  PhaseSpaceGrid g = make_grid(1, 0.1, -8, 8, 256);
  CHECK_THROWS_AS(coherent_state(g, PhasePoint::of({7.9, 0})), DomainError);
  CHECK_THROWS_AS(coherent_state(g, PhasePoint::of({0, g.p_max() * 0.99})), DomainError);
}

TEST_CASE("translate reproduces coherent states and composes with Weyl phase") {
  const double hbar = 0.1;
  PhaseSpaceGrid g = make_grid(1, hbar, -8, 8, 512);
  QuantumState vac = coherent_state(g, PhasePoint::zero(1));
  PhasePoint al = PhasePoint::of({1.0, 0.7});

  QuantumState moved = translate(vac, al);
  QuantumState direct = coherent_state(g, al);
  CHECK(fidelity(moved, direct) == doctest::Approx(1.0).epsilon(1e-8));

  QuantumState same = translate(vac, PhasePoint::zero(1));
  CHECK((same.branches[0].psi - vac.branches[0].psi).norm() == doctest::Approx(0.0));

  // norm preservation and inverse up to a global phase
  QuantumState back = translate(moved, PhasePoint::of({-1.0, -0.7}));
  CHECK(l2_norm(g, back.branches[0].psi) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(inner(g, vac.branches[0].psi, back.branches[0].psi)) ==
        doctest::Approx(1.0).epsilon(1e-8));

  // tau_al tau_be = exp(-i omega(al,be)/2hbar) tau_{al+be}: measure the phase
  PhasePoint be = PhasePoint::of({-0.4, 0.9});
  QuantumState seq = translate(translate(vac, be), al);
  QuantumState jump = translate(vac, PhasePoint::of({0.6, 1.6}));
  Complex z = inner(g, jump.branches[0].psi, seq.branches[0].psi);
  CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-8));
  double omega = al.alpha(0) * be.alpha(1) - al.alpha(1) * be.alpha(0);
  double expected = std::remainder(omega / (2 * hbar), 2 * M_PI);
  CHECK(std::abs(std::arg(z)) == doctest::Approx(std::abs(expected)).epsilon(1e-6));
}

TEST_CASE("overlap is maximized at the coherent center") {
  PhaseSpaceGrid g = make_grid(1, 0.1, -8, 8, 256);
  PhasePoint al = PhasePoint::of({0.5, -0.3});
  QuantumState s = coherent_state(g, al);
  double at_center = std::abs(inner(g, coherent_amplitudes(g, al), s.branches[0].psi));
  for (double dx : {-0.4, -0.2, 0.2, 0.4})
    for (double dp : {-0.4, 0.0, 0.4}) {
      if (dx == 0 && dp == 0) continue;
      PhasePoint b = PhasePoint::of({0.5 + dx, -0.3 + dp});
      CHECK(std::abs(inner(g, coherent_amplitudes(g, b), s.branches[0].psi)) < at_center);
    }
}

TEST_CASE("mixtures: degenerate, two-branch, Husimi linearity") {
  PhaseSpaceGrid g = make_grid(1, 0.1, -8, 8, 256);
  PhasePoint a1 = PhasePoint::of({0.5, 0}), a2 = PhasePoint::of({-0.5, 0.3});

  QuantumState single = mix_coherent(g, {{a1, 1.0}});
  CHECK(single.pure());
  CHECK(fidelity(single, coherent_state(g, a1)) == doctest::Approx(1.0).epsilon(1e-12));

  QuantumState two = mix_coherent(g, {{a1, 0.5}, {a2, 0.5}});
  CHECK(two.branches.size() == 2);
  CHECK(two.trace() == doctest::Approx(1.0).epsilon(1e-10));

  QuantumState nine = mix_coherent_gaussian(g, PhasePoint::zero(1), 0.2, 3);
  CHECK(nine.branches.size() == 9);
  CHECK(nine.trace() == doctest::Approx(1.0).epsilon(1e-10));
  PhasePoint probe = PhasePoint::of({0.3, -0.1});
  double direct = husimi_at(nine, probe);
  double linear = 0;
  for (const Branch& b : nine.branches) {
    QuantumState pure{g, {{1.0, b.psi}}};
    linear += b.weight * husimi_at(pure, probe);
  }
  CHECK(direct == doctest::Approx(linear).epsilon(1e-10));

  CHECK_THROWS_AS(mix_coherent(g, {{a1, 0.7}, {a2, 0.7}}), DomainError);
}

TEST_CASE("Lipschitz constants of the canonical models") {
  CHECK(estimate_lipschitz(free_model(1)).lambda_H == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(estimate_lipschitz(pendulum_model(1)).lambda_H == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(estimate_lipschitz(quartic_model(1, 3.0)).lambda_H ==
        doctest::Approx(0.5 * (1 + 108)).epsilon(0.01));
  AdmissibilityReport rep = estimate_lipschitz(pendulum_model(1));
  CHECK(rep.sup_partial.at(2) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(rep.sup_partial.at(3) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("boundary monitor") {
  PhaseSpaceGrid g = make_grid(1, 0.1, -8, 8, 256);
  QuantumState ok = coherent_state(g, PhasePoint::zero(1));
  CHECK(boundary_mass(ok) < 1e-10);
  // wide flat-top state reaching the walls must trip the monitor
  VectorXcd psi = VectorXcd::Constant(g.total_points(), 1.0);
  psi /= l2_norm(g, psi);
  QuantumState bad{g, {{1.0, psi}}};
  CHECK(boundary_mass(bad) > kBoundaryAbort);
  CHECK_THROWS_AS(check_boundary(bad, "test"), DomainError);
}

TEST_CASE("momentum representation roundtrip and Gaussian shape") {
  const double hbar = 0.1;
  PhaseSpaceGrid g = make_grid(1, hbar, -8, 8, 256);
  PhasePoint al = PhasePoint::of({0.4, 0.9});
  VectorXcd psi = coherent_amplitudes(g, al);
  VectorXcd phi = to_momentum(g, psi);
  VectorXcd rt = from_momentum(g, phi);
  CHECK((rt - psi).norm() < 1e-10);
  // |phi(p)|^2 peaks at alpha_p
  VectorXd p = g.p_axis();
  long best = 0;
  for (long i = 1; i < phi.size(); ++i)
    if (std::norm(phi(i)) > std::norm(phi(best))) best = i;
  CHECK(std::abs(p(best) - 0.9) <= g.dp());
}

TEST_CASE("mean center matches the coherent center") {
  PhaseSpaceGrid g = make_grid(1, 0.05, -8, 8, 256);
  PhasePoint al = PhasePoint::of({0.7, -0.4});
  PhasePoint m = mean_center(coherent_state(g, al));
  CHECK((m.alpha - al.alpha).norm() < 1e-8);
}
