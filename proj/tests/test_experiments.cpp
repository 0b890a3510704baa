#include <doctest.h>

#include <cmath>
#include <random>

#include "pslab/experiments.hpp"
#include "pslab/io.hpp"

using namespace pslab;

TEST_CASE("fit_scaling recovers power laws") {
  std::vector<double> x = {0.0125, 0.025, 0.05, 0.1, 0.2};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::sqrt(v));
  FitResult f = fit_scaling(x, y);
  CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.ci < 1e-10);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 0.02);
  y.clear();
  for (double v : x) y.push_back(3.0 * std::sqrt(v) * std::exp(nd(rng)));
  FitResult fn = fit_scaling(x, y);
  CHECK(fn.slope > 0.45);
  CHECK(fn.slope < 0.55);

  y.assign(x.size(), 2.0);
  CHECK(std::abs(fit_scaling(x, y).slope) < 1e-10);

  CHECK_THROWS_AS(fit_scaling({0.1, 0.2, 0.3}, {1, 2, 3}), DomainError);
  CHECK_THROWS_AS(fit_scaling({0.1, 0.11, 0.12, 0.13}, {1, 2, 3, 4}), DomainError);
  CHECK_THROWS_AS(fit_scaling({0.0125, 0.025, 0.05, 0.1, 0.2}, {1, 2, 3, 0, 5}), DomainError);
}

TEST_CASE("scenario json: defaults, round trip, strict keys") {
  nlohmann::json j = {{"check", "meanfield"}, {"model", "pendulum"}};
  Scenario s = scenario_from_json(j);
  CHECK(s.dim == 1);
  CHECK(s.alpha0.size() == 2);
  CHECK(s.alpha0(0) == doctest::Approx(0.8));
  CHECK(s.hbar_list.size() == 5);

  nlohmann::json bad = j;
  bad["hbar_lst"] = {0.1};
  CHECK_THROWS_AS(scenario_from_json(bad), DomainError);

  nlohmann::json badal = j;
  badal["alpha0"] = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(scenario_from_json(badal), DomainError);

  CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"model", "pendulum"}}), DomainError);

  s.hbar_list = {0.2, 0.1};
  s.initial = "mixture";
  nlohmann::ordered_json out = scenario_to_json(s);
  Scenario back = scenario_from_json(nlohmann::json::parse(out.dump()));
  CHECK(back.check == s.check);
  CHECK(back.hbar_list == s.hbar_list);
  CHECK(back.initial == "mixture");
  CHECK((back.alpha0 - s.alpha0).norm() == 0);
}

TEST_CASE("scenario grid policy") {
  Scenario s = bundled_scenario("harmonic-sanity");
  CHECK(s.check == "meanfield");
  for (double hbar : s.hbar_list) {
    PhaseSpaceGrid g = scenario_grid(s, hbar);
    CHECK(is_power_of_two(g.n_x));
    CHECK(g.p_max() >= s.p_need + 5 * std::sqrt(hbar));
    CHECK(g.dx() <= std::sqrt(hbar) / 2);
  }
  Scenario dense = s;
  dense.check = "operator_egorov";
  dense.model = "pendulum";
  CHECK(scenario_grid(dense, 0.0125).n_x <= kDenseCap);
  CHECK_THROWS_AS(bundled_scenario("nope"), DomainError);
}

TEST_CASE("random_low_rank is seeded and produces Wigner negativity") {
  PhaseSpaceGrid g = make_grid(1, 0.1, -8, 8, 256);
  QuantumState a = random_low_rank(g, 77, 4);
  QuantumState b = random_low_rank(g, 77, 4);
  CHECK(a.branches.size() == b.branches.size());
  for (size_t i = 0; i < a.branches.size(); ++i) {
    CHECK(a.branches[i].weight == b.branches[i].weight);
    CHECK((a.branches[i].psi - b.branches[i].psi).norm() == 0);
  }
  CHECK(a.trace() == doctest::Approx(1.0).epsilon(1e-10));
  QuantumState c = random_low_rank(g, 78, 4);
  CHECK((a.branches[0].psi - c.branches[0].psi).norm() > 1e-6);
  CHECK(wigner(a).masses.minCoeff() < 0);
}

TEST_CASE("measure_distance reduction pipeline is certified") {
  const double hbar = 0.1;
  PhaseSpaceGrid g = make_grid(1, hbar, -8, 8, 256);
  QuantumState s = coherent_state(g, PhasePoint::of({0.3, 0.1}));
  PhaseSpaceMeasure h = husimi(s, default_husimi_lattice(s));
  QuantumState t = coherent_state(g, PhasePoint::of({0.9, 0.1}));
  PhaseSpaceMeasure ht = husimi(t, default_husimi_lattice(t));
  double gap = 0;
  double d = measure_distance(h, ht, 2, &gap);
  // translation by 0.6 between equal-width Gaussians
  CHECK(d == doctest::Approx(0.6).epsilon(0.02));
  CHECK(gap >= 0);
  CHECK(gap < 0.05 * d);
}

TEST_CASE("meanfield sweep on the bundled scenario passes its explicit gate") {
  Scenario s = bundled_scenario("harmonic-sanity");
  s.hbar_list = {0.2, 0.1};
  s.T_list = {0.5};
  preflight(s);
  SweepReport rep = run_meanfield_check(s);
  CHECK(rep.all_pass);
  CHECK(rep.rows.size() == 2);
  for (const auto& r : rep.rows) {
    CHECK(r.distance <= r.bound);
    CHECK(r.lambda_h == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("egorov sweep smoke run with calibration gate") {
  Scenario s;
  s.check = "egorov";
  s.model = "harmonic";
  s.initial = "coherent";
  s.hbar_list = {0.2, 0.1, 0.05};
  s.T_list = {0.0, 0.5};
  s.p_list = {2};
  SweepReport rep = run_scenario(s);
  CHECK(rep.all_pass);
  bool saw_t0 = false;
  for (const auto& r : rep.rows)
    if (r.T == 0) {
      saw_t0 = true;
      CHECK(r.distance <= r.gap + 1e-9);
    }
  CHECK(saw_t0);
}

TEST_CASE("triangle decomposition holds") {
  Scenario s;
  s.check = "egorov";
  s.model = "pendulum";
  s.initial = "coherent";
  TriangleReport tr = run_triangle_check(s, 0.1, 0.5, 2);
  CHECK(tr.holds);
  CHECK(tr.direct <= tr.noise_leg + tr.mixture_leg + tr.classical_leg + tr.gap_total + 1e-9);
  CHECK(tr.noise_leg > 0);
}

TEST_CASE("noising leg scales like sqrt(hbar)") {
  Scenario s;
  s.check = "egorov";
  s.model = "pendulum";
  s.initial = "coherent";
  double gap0 = 0, gap1 = 0;
  auto leg = [&](double hbar, double* gap) {
    PhaseSpaceGrid g = scenario_grid(s, hbar);
    QuantumState st = initial_state(s, g);
    QuantumState evolved = propagate_quantum(st, model_by_name(s.model, s.dim), 0.5);
    QuantumState noised = noising_channel(evolved);
    PhaseSpaceMeasure h = husimi(evolved, default_husimi_lattice(evolved));
    PhaseSpaceMeasure hn = husimi(noised, default_husimi_lattice(evolved));
    return measure_distance(h, hn, 2, gap);
  };
  double d0 = leg(0.2, &gap0);
  double d1 = leg(0.05, &gap1);
  // calibrate at the coarse level, verify shape at the fine one
  double c_cal = d0 / std::sqrt(0.2);
  CHECK(d1 <= c_cal * std::sqrt(0.05) * 1.10 + gap1);
}

TEST_CASE("reports are byte-identical across runs") {
  Scenario s = bundled_scenario("harmonic-sanity");
  s.hbar_list = {0.2, 0.1};
  s.T_list = {0.5};
  SweepReport r1 = run_meanfield_check(s);
  SweepReport r2 = run_meanfield_check(s);
  CHECK(report_to_json(r1).dump(2) == report_to_json(r2).dump(2));
  CHECK(report_to_csv(r1) == report_to_csv(r2));
  // runtimes stay out of the canonical serialization
  CHECK(report_to_json(r1).dump().find("runtime") == std::string::npos);
}
