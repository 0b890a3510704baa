#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "pslab/io.hpp"
#include "pslab/norms.hpp"

namespace fs = std::filesystem;
using namespace pslab;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("PSLAB_OUT_DIR");
  return env ? env : ".";
}

Scenario load_scenario(const std::string& ref) {
  if (fs::exists(ref)) {
    std::ifstream is(ref);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw DomainError("scenario parse error in " + ref + ": " + e.what());
    }
    return scenario_from_json(j);
  }
  return bundled_scenario(ref);
}

void write_plots(const fs::path& dir, const Scenario& sc, const SweepReport& rep) {
  // log-log distance vs hbar, one series per (T, p), with the sqrt(hbar) line
  std::vector<PlotSeries> series;
  for (double T : sc.T_list) {
    for (int p : sc.p_list) {
      PlotSeries s;
      char label[64];
      std::snprintf(label, sizeof label, "T=%g p=%d", T, p);
      s.label = label;
      for (const auto& row : rep.rows)
        if (row.T == T && row.p == p && row.distance > 0 && row.hbar > 0) {
          s.x.push_back(row.hbar);
          s.y.push_back(row.distance);
        }
      if (!s.x.empty()) series.push_back(std::move(s));
    }
  }
  if (series.empty()) return;
  double c = 0;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) c = std::max(c, s.y[i] / std::sqrt(s.x[i]));
  std::vector<BoundLine> bounds = {{"C sqrt(hbar)", c, 0.5}};
  write_loglog_svg((dir / (rep.check + "_scaling.svg")).string(),
                   rep.scenario + " : " + rep.check, series, bounds);
}

void write_heatmaps(const fs::path& dir, const Scenario& sc) {
  if (sc.dim != 1) return;
  const double hbar = *std::max_element(sc.hbar_list.begin(), sc.hbar_list.end());
  const double t_max = *std::max_element(sc.T_list.begin(), sc.T_list.end());
  PhaseSpaceGrid g = scenario_grid(sc, hbar);
  QuantumState rho = initial_state(sc, g);
  write_heatmap_ppm((dir / "husimi_t0.ppm").string(),
                    husimi(rho, default_husimi_lattice(rho)));
  if (t_max > 0 && sc.check != "operator_egorov") {
    HamiltonianModel model = model_by_name(sc.model, sc.dim);
    QuantumState rho_t = propagate_quantum(rho, model, t_max);
    write_heatmap_ppm((dir / "husimi_tmax.ppm").string(),
                      husimi(rho_t, default_husimi_lattice(rho_t)));
  }
}

int cmd_run(const std::string& scenario_ref, const std::string& out_dir, unsigned seed,
            int parallel, bool preflight_only, bool timing) {
  Scenario sc = load_scenario(scenario_ref);
  if (seed != 0) sc.seed = seed;
  Eigen::setNbThreads(parallel);
  preflight(sc);
  if (preflight_only) {
    std::cout << "preflight ok: " << sc.name << "\n";
    return 0;
  }
  fs::create_directories(out_dir);
  SweepReport rep = run_scenario(sc);
  fs::path dir(out_dir);
  {
    std::ofstream os(dir / "report.json");
    os << report_to_json(rep).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "report.csv");
    os << report_to_csv(rep);
  }
  if (timing) {
    std::ofstream os(dir / "timing.csv");
    os << report_to_csv(rep, true);
  }
  {
    std::ofstream os(dir / "scenario.json");
    os << scenario_to_json(sc).dump(2) << "\n";
  }
  write_plots(dir, sc, rep);
  write_heatmaps(dir, sc);
  std::cout << rep.scenario << " [" << rep.check << "]: " << rep.summary << "\n";
  for (const auto& [label, fit] : rep.fits)
    std::cout << "  " << label << ": " << fit.slope << " +- " << fit.ci << "\n";
  std::cout << (rep.all_pass ? "ALL GATES PASS" : "GATE FAILURE") << "\n";
  return rep.all_pass ? 0 : 2;
}

VectorXd parse_vec(const std::string& csv) {
  std::vector<double> v;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  return Eigen::Map<VectorXd>(v.data(), static_cast<long>(v.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pslab: phase-space quantum-classical correspondence laboratory"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "execute a scenario sweep");
  std::string scenario_ref, out_dir = default_out_dir();
  unsigned seed = 0;
  int parallel = static_cast<int>(std::thread::hardware_concurrency());
  bool preflight_only = false, timing = false;
  run->add_option("scenario", scenario_ref, "scenario JSON path or bundled name")->required();
  run->add_option("--out", out_dir, "output directory (default $PSLAB_OUT_DIR or .)");
  run->add_option("--seed", seed, "override scenario seed");
  run->add_option("--parallel", parallel, "internal linear-algebra thread bound");
  run->add_flag("--preflight-only", preflight_only, "validate and exit");
  run->add_flag("--timing", timing, "also write timing.csv");

  // tool
  auto* tool = app.add_subcommand("tool", "one-shot module operations");
  tool->require_subcommand(1);
  std::string in_a, in_b, out_path = "-", model_name = "pendulum", alpha_csv = "0,0";
  std::string observable = "sin_x";
  double T = 1.0, hbar = 0.1, dt = -1;
  int p_order = 2, k_order = 1, n_x = 256;
  double hw = 6.0;

  auto* t_husimi = tool->add_subcommand("husimi", "Husimi measure of a state file");
  t_husimi->add_option("state", in_a)->required();
  t_husimi->add_option("--out", out_path);

  auto* t_wigner = tool->add_subcommand("wigner", "Wigner measure of a state file (D=1)");
  t_wigner->add_option("state", in_a)->required();
  t_wigner->add_option("--out", out_path);

  auto* t_prop = tool->add_subcommand("propagate", "quantum-propagate a state file");
  t_prop->add_option("state", in_a)->required();
  t_prop->add_option("--model", model_name);
  t_prop->add_option("--T", T)->required();
  t_prop->add_option("--dt", dt);
  t_prop->add_option("--out", out_path)->required();

  auto* t_flow = tool->add_subcommand("flow", "classical flow of a phase point");
  t_flow->add_option("--model", model_name);
  t_flow->add_option("--alpha", alpha_csv)->required();
  t_flow->add_option("--T", T)->required();
  t_flow->add_option("--traj", out_path);

  auto* t_wass = tool->add_subcommand("wasserstein", "W_p distance between measure files");
  t_wass->add_option("a", in_a)->required();
  t_wass->add_option("b", in_b)->required();
  t_wass->add_option("--p", p_order);

  auto* t_znorm = tool->add_subcommand("znorm", "Z^k norm of Op(observable)");
  t_znorm->add_option("--model", model_name);
  t_znorm->add_option("--observable", observable);
  t_znorm->add_option("--hbar", hbar);
  t_znorm->add_option("--n-x", n_x);
  t_znorm->add_option("--halfwidth", hw);
  t_znorm->add_option("--k", k_order);

  auto* t_sob = tool->add_subcommand("sobolev", "re-centered Sobolev norm of a state file");
  t_sob->add_option("state", in_a)->required();
  t_sob->add_option("--k", k_order);
  t_sob->add_option("--alpha", alpha_csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  try {
    if (*run) return cmd_run(scenario_ref, out_dir, seed, parallel, preflight_only, timing);

    if (*t_husimi) {
      QuantumState s = load_state(in_a);
      PhaseSpaceMeasure h = husimi(s, default_husimi_lattice(s));
      if (out_path == "-")
        std::cout << measure_to_json(h).dump(2) << "\n";
      else if (out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".csv")
        save_measure_csv(out_path, h);
      else
        save_measure(out_path, h);
      return 0;
    }
    if (*t_wigner) {
      QuantumState s = load_state(in_a);
      PhaseSpaceMeasure w = wigner(s);
      if (out_path == "-")
        std::cout << measure_to_json(w).dump(2) << "\n";
      else if (out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".csv")
        save_measure_csv(out_path, w);
      else
        save_measure(out_path, w);
      return 0;
    }
    if (*t_prop) {
      QuantumState s = load_state(in_a);
      HamiltonianModel model = model_by_name(model_name, s.grid.dim);
      save_state(out_path, propagate_quantum(s, model, T, dt));
      return 0;
    }
    if (*t_flow) {
      VectorXd a = parse_vec(alpha_csv);
      HamiltonianModel model = model_by_name(model_name, static_cast<int>(a.size()) / 2);
      PhasePoint pt(a);
      PhasePoint end = flow_point(pt, model, T);
      std::cout << end.alpha.transpose() << "\n";
      if (out_path != "-")
        write_trajectory_csv(out_path, flow_trajectory(pt, model, T, 1e-3));
      return 0;
    }
    if (*t_wass) {
      auto load = [](const std::string& path) {
        if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
          std::ifstream is(path);
          return measure_from_json(nlohmann::json::parse(is));
        }
        return load_measure(path);
      };
      TransportProblem prob{load(in_a), load(in_b), p_order};
      TransportResult res = wasserstein(prob);
      std::cout << "distance " << res.distance << "\ngap " << res.bound_gap << "\nsolver "
                << res.solver << "\n";
      return 0;
    }
    if (*t_znorm) {
      PhaseSpaceGrid g = make_grid(1, hbar, -hw, hw, n_x);
      SymbolFn G;
      if (observable == "sin_x")
        G = [](const VectorXd& al) { return std::sin(al(0)); };
      else if (observable == "x")
        G = [](const VectorXd& al) { return al(0); };
      else
        throw DomainError("unknown observable '" + observable + "'");
      OperatorMatrix op = weyl_quantize(G, g);
      double margin = center_margin(g);
      PhaseSpaceBox box{VectorXd::Constant(2, -hw + margin), VectorXd::Constant(2, hw - margin)};
      box.hi(1) = g.p_max() / 2;
      box.lo(1) = -g.p_max() / 2;
      std::cout << z_norm(op, k_order, z_norm_centers(g, box)) << "\n";
      return 0;
    }
    if (*t_sob) {
      QuantumState s = load_state(in_a);
      std::cout << sobolev_norm(s, k_order, PhasePoint(parse_vec(alpha_csv))) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 64;
}
