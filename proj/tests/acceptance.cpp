// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pslab/experiments.hpp"
#include "pslab/norms.hpp"

using namespace pslab;

namespace {

int g_failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void criterion(int id, const std::string& what, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(id, what, pass, detail);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool crit1_meanfield(std::string& detail) {
  Scenario s;
  s.name = "acc-meanfield";
  s.check = "meanfield";
  s.model = "pendulum";
  s.initial = "mixture";
  s.mixture_nodes = 3;  // 9 atoms at D = 1
  s.hbar_list = {0.1, 0.05, 0.025};
  s.T_list = {0.5, 1.0};
  auto t0 = std::chrono::steady_clock::now();
  SweepReport rep = run_meanfield_check(s);
  double per_row = seconds_since(t0) / rep.rows.size();
  bool pass = rep.all_pass && per_row < 600;

  // D = 2 spot check, one row
  Scenario s2 = s;
  s2.dim = 2;
  s2.mixture_nodes = 2;
  s2.hbar_list = {0.1};
  s2.T_list = {0.5};
  SweepReport rep2 = run_meanfield_check(s2);
  pass = pass && rep2.all_pass;
  double worst = 0;
  for (const auto& r : rep.rows) worst = std::max(worst, r.distance / (r.bound / 1.10));
  detail = fmt("worst D=1 ratio %.3f (slack cap 1.10), %.0f s/row, D=2 row ratio %.3f", worst,
               per_row, rep2.rows.empty() ? -1 : rep2.rows[0].distance / (rep2.rows[0].bound / 1.10));
  return pass;
}

bool crit2_coherent_identity(std::string& detail) {
  double worst = 0;
  for (int dim : {1, 2})
    for (double hbar : {0.1, 0.01}) {
      double hw = dim == 2 ? 2.0 : 4.0;
      int n = dim == 2 ? (hbar < 0.05 ? 128 : 64) : (hbar < 0.05 ? 512 : 256);
      PhaseSpaceGrid g = make_grid(dim, hbar, -hw, hw, n);
      PhasePoint al = PhasePoint::zero(dim);
      QuantumState st = coherent_state(g, al);
      PhaseLattice lat;
      double half = 6 * std::sqrt(hbar);
      double step = std::sqrt(hbar) / (dim == 2 ? 4.0 : 16.0);
      int cnt = 2 * static_cast<int>(std::floor(half / step)) + 1;
      lat.lo = VectorXd::Constant(2 * dim, -half);
      lat.step = VectorXd::Constant(2 * dim, step);
      lat.count.assign(2 * dim, cnt);
      PhaseSpaceMeasure h = husimi(st, lat);
      h.masses /= h.total_mass();  // tail truncation is < 1e-7 of the mass
      double d = wasserstein_to_point(h, al.alpha, 2);
      double rel = std::abs(d * d / (2.0 * dim * hbar) - 1.0);
      worst = std::max(worst, rel);
    }
  detail = fmt("worst relative error %.4f (cap 0.02)", worst);
  return worst <= 0.02;
}

bool crit3_localization(std::string& detail) {
  Scenario s;
  s.name = "acc-localization";
  s.check = "localization";
  s.model = "pendulum";
  s.initial = "coherent";
  s.sobolev_k = 2;
  s.hbar_list = {0.05};
  s.T_list = {0.5, 1.0, 2.0};
  SweepReport rep = run_localization_check(s);
  double worst_ratio = 0, worst_margin = 0;
  for (const auto& r : rep.rows) {
    if (r.note == "chain")
      worst_margin = std::min(worst_margin, r.distance);
    else
      worst_ratio = std::max(worst_ratio, r.distance / (r.bound / 1.05));
  }
  detail = fmt("worst Q-ratio/e^{2LT} %.3f (cap 1.05), min chain margin %.2e", worst_ratio,
               worst_margin);
  return rep.all_pass && worst_margin >= -1e-10;
}

bool crit4_egorov(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  Scenario s;
  s.name = "acc-egorov";
  s.check = "egorov";
  s.model = "pendulum";
  s.initial = "cat";
  s.cat_separation = 2.0;
  s.hbar_list = {0.2, 0.1, 0.05, 0.025, 0.0125};
  s.T_list = {1.0};
  s.p_list = {1, 2};
  SweepReport rep = run_egorov_sweep(s);
  bool pass = rep.all_pass;
  double min_slope = 10;
  for (const auto& f : rep.fits) {
    min_slope = std::min(min_slope, f.second.slope);
    pass = pass && f.second.slope >= 0.45;
  }
  // ratio d/sqrt(hbar) must not rise above its hbar = 0.2 calibration
  double worst_rr = 0;
  for (int p : {1, 2}) {
    double r0 = -1;
    for (const auto& r : rep.rows) {
      if (r.p != p || r.T != 1.0) continue;
      double ratio = r.distance / std::sqrt(r.hbar);
      if (r.hbar == 0.2) r0 = ratio;
      else worst_rr = std::max(worst_rr, ratio / r0);
    }
    pass = pass && r0 > 0;
  }
  pass = pass && worst_rr <= 1.05;

  // D = 2 spot check: calibrated ratio still controlled at the finer hbar
  Scenario s2 = s;
  s2.dim = 2;
  s2.hbar_list = {0.2, 0.1};
  s2.p_list = {2};
  SweepReport rep2 = run_egorov_sweep(s2);
  double r2[2] = {0, 0};
  int i = 0;
  for (const auto& r : rep2.rows)
    if (r.T == 1.0 && i < 2) r2[i++] = r.distance / std::sqrt(r.hbar);
  bool d2ok = i == 2 && r2[1] <= r2[0] * 1.05;

  double elapsed = seconds_since(t0);
  detail = fmt("min slope %.3f, worst ratio/calibration %.3f", min_slope, worst_rr) +
           fmt(", D=2 ratio step %.3f, %.0f s (cap 3600)", i == 2 ? r2[1] / r2[0] : -1, elapsed);
  return pass && d2ok && elapsed < 3600;
}

bool crit5_operator_egorov(std::string& detail) {
  Scenario s;
  s.name = "acc-op-egorov";
  s.check = "operator_egorov";
  s.model = "pendulum";
  s.observable = "sin_x";
  s.n_x = 512;
  s.hbar_list = {0.2, 0.1, 0.05, 0.025, 0.0125};
  s.T_list = {0.5, 1.0};
  SweepReport rep = run_scenario(s);
  double min_slope = 10, worst_moll = 0;
  for (const auto& f : rep.fits)
    if (f.first.rfind("moll", 0) != 0) min_slope = std::min(min_slope, f.second.slope);
  for (const auto& r : rep.rows)
    if (r.T < 0) {  // mollification rows
      worst_moll = std::max(worst_moll, r.distance / (1.1 * (1 - std::exp(-r.hbar / 2))));
    }
  detail = fmt("min slope %.3f (gate 0.45), worst moll/closed-form %.3f (cap 1.0)", min_slope,
               worst_moll);
  return rep.all_pass && min_slope >= 0.45 && worst_moll <= 1.0;
}

bool crit6_local_unitary(std::string& detail) {
  Scenario s;
  s.name = "acc-local-unitary";
  s.check = "local_unitary";
  s.model = "pendulum";
  s.initial = "coherent";
  s.alpha_mags = {1.0, 2.0};
  s.hbar_list = {0.2, 0.1, 0.05};
  s.T_list = {0.0, 1.0};
  SweepReport rep = run_local_unitary_check(s);
  double worst_t0 = 0, worst_shape = 0;
  for (const auto& r : rep.rows) {
    if (r.T == 0)
      worst_t0 = std::max(worst_t0, std::abs(r.distance - r.aux) - r.gap);
    else
      worst_shape = std::max(worst_shape, r.distance / (r.bound / 1.10));
  }
  detail = fmt("worst T=0 |d-|alpha|| beyond gap %.2e, worst shape ratio %.3f (cap 1.10)",
               worst_t0, worst_shape);
  return rep.all_pass;
}

bool crit7_transform_identities(std::string& detail) {
  const double hbar = 0.1;
  ConventionReport conv = resolve_conventions(hbar);
  PhaseSpaceGrid g = make_grid(1, hbar, -8, 8, 512);

  std::vector<QuantumState> states;
  states.push_back(coherent_state(g, PhasePoint::of({0.4, -0.3})));
  VectorXcd cat = coherent_amplitudes(g, PhasePoint::of({1, 0.2})) +
                  coherent_amplitudes(g, PhasePoint::of({-1, -0.2}));
  cat /= l2_norm(g, cat);
  states.push_back(QuantumState{g, {{1.0, cat}}});
  states.push_back(random_low_rank(g, 2026, 3));

  double worst_h = 0, worst_n = 0;
  for (const QuantumState& st : states) {
    PhaseSpaceMeasure w = wigner(st);
    PhaseSpaceMeasure hs = gaussian_convolve(w, conv.c_husimi * hbar);
    for (long i = 0; i < hs.size(); i += 3) {
      double hv = husimi_at(st, PhasePoint(hs.location(i)));
      worst_h = std::max(worst_h, std::abs(hv - hs.density(i)));
    }
    PhaseSpaceMeasure wn = wigner(noising_channel(st));
    PhaseSpaceMeasure wref = gaussian_convolve(w, conv.c_noising * hbar);
    worst_n = std::max(worst_n, sup_density_diff(wn, wref));
  }
  detail = fmt("c_husimi %.4f, c_noising %.4f, ", conv.c_husimi, conv.c_noising) +
           fmt("sup errs: husimi %.2e, noising %.2e (cap 1e-5)", worst_h, worst_n);
  return worst_h <= 1e-5 && worst_n <= 1e-5;
}

bool crit8_ot_soundness(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(808);
  auto cloud = [&](int n) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> wdist(0.1, 1.0);
    MatrixXd locs(n, 2);
    VectorXd masses(n);
    for (int i = 0; i < n; ++i) {
      locs.row(i) << u(rng), u(rng);
      masses(i) = wdist(rng);
    }
    masses /= masses.sum();
    return particle_measure(1, 0.1, locs, masses);
  };
  int instances = 0, bad = 0;
  std::string first_bad;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) {
      ++bad;
      if (first_bad.empty()) first_bad = what;
    }
  };

  // 140 exact instances: duals feasible, gap certified, symmetry
  for (int t = 0; t < 70; ++t) {
    PhaseSpaceMeasure x = cloud(20 + t % 15), y = cloud(18 + t % 17);
    int p = (t % 3 == 0) ? 1 : 2;
    TransportResult r = wasserstein(TransportProblem{x, y, p}, "exact");
    ++instances;
    expect(r.bound_gap <= 1e-8 * std::max(1.0, r.distance), "exact gap");
    bool feas = true;
    for (long i = 0; i < x.size() && feas; ++i)
      for (long j = 0; j < y.size(); ++j)
        if (r.dual_f(i) + r.dual_g(j) > std::pow((x.location(i) - y.location(j)).norm(), p) + 1e-8) {
          feas = false;
          break;
        }
    expect(feas, "dual feasibility");
    TransportResult rs = wasserstein(TransportProblem{y, x, p}, "exact");
    ++instances;
    expect(std::abs(rs.distance - r.distance) <= 1e-8 * std::max(1.0, r.distance), "symmetry");
  }
  // 20 triangle-inequality triples
  for (int t = 0; t < 10; ++t) {
    PhaseSpaceMeasure x = cloud(15), y = cloud(15), z = cloud(15);
    for (int p : {1, 2}) {
      ++instances;
      double dxy = wasserstein(TransportProblem{x, y, p}).distance;
      double dyz = wasserstein(TransportProblem{y, z, p}).distance;
      double dxz = wasserstein(TransportProblem{x, z, p}).distance;
      expect(dxz <= dxy + dyz + 1e-8, "triangle");
    }
  }
  // 20 p-monotonicity instances
  for (int t = 0; t < 20; ++t) {
    PhaseSpaceMeasure x = cloud(20), y = cloud(20);
    ++instances;
    double d1 = wasserstein(TransportProblem{x, y, 1}).distance;
    double d2 = wasserstein(TransportProblem{x, y, 2}).distance;
    double d4 = wasserstein(TransportProblem{x, y, 4}).distance;
    expect(d1 <= d2 + 1e-9 && d2 <= d4 + 1e-9, "p-monotonicity");
  }
  // 20 exact-vs-entropic instances
  for (int t = 0; t < 20; ++t) {
    PhaseSpaceMeasure x = cloud(30 + t), y = cloud(30 + t);
    int p = (t % 2) ? 1 : 2;
    ++instances;
    double de = wasserstein(TransportProblem{x, y, p}, "exact").distance;
    TransportResult en = wasserstein(TransportProblem{x, y, p}, "entropic");
    expect(std::abs(en.distance - de) <= 0.01 * de + 1e-9, "exact-vs-entropic");
    expect(en.lower <= de + 1e-9 && en.distance >= de - 1e-9, "entropic bracket");
  }
  double elapsed = seconds_since(t0);
  detail = fmt("%.0f instances, %.0f violations, %.0f s (cap 300)", instances, bad, elapsed);
  if (!first_bad.empty()) detail += " first: " + first_bad;
  return instances >= 200 && bad == 0 && elapsed < 300;
}

bool crit9_dynamics(std::string& detail) {
  const double hbar = 0.1;
  PhaseSpaceGrid g = make_grid(1, hbar, -8, 8, 512);
  QuantumState s0 = coherent_state(g, PhasePoint::of({1, 0}));
  HamiltonianModel h = harmonic_model(1);
  double worst_fid = 1;
  for (double T : {0.5, 1.0, 2.0}) {
    QuantumState e = propagate_quantum(s0, h, T, 1e-3);
    PhasePoint aT = PhasePoint::of({std::cos(T), -std::sin(T)});
    worst_fid = std::min(worst_fid, fidelity(e, coherent_state(g, aT)));
  }

  double worst_det = 0;
  for (auto& m : {harmonic_model(1), pendulum_model(1), quartic_model(1)})
    worst_det = std::max(worst_det,
                         std::abs(step_jacobian_det(PhasePoint::of({0.4, -0.3}), m, 1e-3) - 1.0));

  HamiltonianModel pend = pendulum_model(1);
  QuantumState sp = coherent_state(g, PhasePoint::of({0.6, 0.2}));
  QuantumState ref = propagate_quantum(sp, pend, 1.0, 1e-4);
  auto err = [&](double dt) {
    return l2_norm(g, propagate_quantum(sp, pend, 1.0, dt).branches[0].psi -
                          ref.branches[0].psi);
  };
  double order = std::log2(err(0.02) / err(0.01));
  detail = fmt("min fidelity %.8f, max |det-1| %.1e, order %.2f", worst_fid, worst_det, order);
  return worst_fid >= 1 - 1e-6 && worst_det <= 1e-10 && order >= 1.8;
}

bool crit10_offdiagonal(std::string& detail) {
  const int k = 2;
  std::vector<std::pair<PhasePoint, PhasePoint>> pairs;
  for (double r : {0.6, 1.0, 1.6, 2.2})
    pairs.push_back({PhasePoint::of({-r / 2, 0.15}), PhasePoint::of({r / 2, 0.15})});

  auto ratio = [&](double hbar, bool translated) {
    PhaseSpaceGrid g = make_grid(1, hbar, -8, 8, 256);
    PhaseSpaceBox box{VectorXd::Constant(2, -1.5), VectorXd::Constant(2, 1.5)};
    std::vector<PhasePoint> centers = z_norm_centers(g, box);
    OperatorMatrix w{g, MatrixXcd::Identity(g.total_points(), g.total_points()), true};
    if (translated) {
      for (long j = 0; j < g.total_points(); ++j) {
        VectorXcd e = VectorXcd::Zero(g.total_points());
        e(j) = 1.0;
        translate_amplitudes(g, e, PhasePoint::of({0.4, 0.2}));
        w.entries.col(j) = e;
      }
      w.hermitian_flag = false;
    }
    return offdiagonal_decay_check(w, k, pairs, centers).max_ratio;
  };

  double rid0 = ratio(0.1, false), rid1 = ratio(0.05, false);
  double rt0 = ratio(0.1, true), rt1 = ratio(0.05, true);
  double vid = std::max(rid0, rid1) / std::min(rid0, rid1);
  double vt = std::max(rt0, rt1) / std::min(rt0, rt1);
  detail = fmt("Id ratios %.3f/%.3f, ", rid0, rid1) + fmt("tau ratios %.3f/%.3f, ", rt0, rt1) +
           fmt("variation Id %.2fx tau %.2fx (cap 2x)", vid, vt);
  return vid < 2.0 && vt < 2.0;
}

}  // namespace

int main() {
  criterion(1, "explicit-constant mean-field bound (pendulum mixture)", crit1_meanfield);
  criterion(2, "coherent-state W2 identity 2Dhbar", crit2_coherent_identity);
  criterion(3, "localization Gronwall + H^2 chain", crit3_localization);
  criterion(4, "Egorov sqrt(hbar) scaling (cat state)", crit4_egorov);
  criterion(5, "operator-norm Egorov (sin x, dense)", crit5_operator_egorov);
  criterion(6, "local-unitary transport", crit6_local_unitary);
  criterion(7, "transform convolution identities", crit7_transform_identities);
  criterion(8, "optimal-transport solver soundness", crit8_ot_soundness);
  criterion(9, "dynamics oracles", crit9_dynamics);
  criterion(10, "off-diagonal decay stability", crit10_offdiagonal);
  std::printf("%d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
