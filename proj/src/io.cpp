#include "pslab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pslab {

namespace {

void put(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void get(std::istream& is, void* p, size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw DomainError("truncated binary file");
}
template <typename T>
void put1(std::ostream& os, T v) {
  put(os, &v, sizeof v);
}
template <typename T>
T get1(std::istream& is) {
  T v;
  get(is, &v, sizeof v);
  return v;
}

}  // namespace

void save_state(const std::string& path, const QuantumState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  os.write("PSLB", 4);
  put1<unsigned>(os, kStateFormatVersion);
  put1<int>(os, s.grid.dim);
  put1<double>(os, s.grid.hbar);
  put1<double>(os, s.grid.x_min);
  put1<double>(os, s.grid.x_max);
  put1<int>(os, s.grid.n_x);
  put1<unsigned>(os, static_cast<unsigned>(s.branches.size()));
  for (const Branch& b : s.branches) {
    put1<double>(os, b.weight);
    put(os, b.psi.data(), sizeof(Complex) * b.psi.size());
  }
}

QuantumState load_state(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open '" + path + "'");
  char magic[4];
  get(is, magic, 4);
  if (std::string(magic, 4) != "PSLB") throw DomainError("not a state file: " + path);
  unsigned ver = get1<unsigned>(is);
  if (ver != kStateFormatVersion)
    throw DomainError("state format version mismatch in " + path);
  int dim = get1<int>(is);
  double hbar = get1<double>(is);
  double x_min = get1<double>(is), x_max = get1<double>(is);
  int n_x = get1<int>(is);
  PhaseSpaceGrid g = make_grid(dim, hbar, x_min, x_max, n_x);
  unsigned nb = get1<unsigned>(is);
  QuantumState s{g, {}};
  for (unsigned i = 0; i < nb; ++i) {
    Branch b;
    b.weight = get1<double>(is);
    b.psi.resize(g.total_points());
    get(is, b.psi.data(), sizeof(Complex) * b.psi.size());
    s.branches.push_back(std::move(b));
  }
  s.validate();
  return s;
}

void save_measure(const std::string& path, const PhaseSpaceMeasure& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  os.write("PSLM", 4);
  put1<unsigned>(os, kStateFormatVersion);
  put1<int>(os, m.dim);
  put1<double>(os, m.hbar);
  put1<char>(os, m.signed_allowed ? 1 : 0);
  PhaseSpaceMeasure pm = m.to_particles();
  put1<long>(os, pm.size());
  // columnar: each coordinate column, then masses
  for (int c = 0; c < 2 * m.dim; ++c) {
    VectorXd col = pm.locations.col(c);
    put(os, col.data(), sizeof(double) * col.size());
  }
  put(os, pm.masses.data(), sizeof(double) * pm.masses.size());
}

PhaseSpaceMeasure load_measure(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open '" + path + "'");
  char magic[4];
  get(is, magic, 4);
  if (std::string(magic, 4) != "PSLM") throw DomainError("not a measure file: " + path);
  unsigned ver = get1<unsigned>(is);
  if (ver != kStateFormatVersion)
    throw DomainError("measure format version mismatch in " + path);
  int dim = get1<int>(is);
  double hbar = get1<double>(is);
  bool sgn = get1<char>(is) != 0;
  long n = get1<long>(is);
  MatrixXd loc(n, 2 * dim);
  for (int c = 0; c < 2 * dim; ++c) {
    VectorXd col(n);
    get(is, col.data(), sizeof(double) * n);
    loc.col(c) = col;
  }
  VectorXd masses(n);
  get(is, masses.data(), sizeof(double) * n);
  PhaseSpaceMeasure m = particle_measure(dim, hbar, std::move(loc), std::move(masses));
  m.signed_allowed = sgn;
  return m;
}

void save_measure_csv(const std::string& path, const PhaseSpaceMeasure& m) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  os << "# dim=" << m.dim << " hbar=" << m.hbar << "\n";
  for (int d = 0; d < m.dim; ++d) os << "x" << d << ",";
  for (int d = 0; d < m.dim; ++d) os << "p" << d << ",";
  os << "mass\n";
  char buf[64];
  for (long i = 0; i < m.size(); ++i) {
    VectorXd z = m.location(i);
    for (long c = 0; c < z.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g,", z(c));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", m.masses(i));
    os << buf;
  }
}

nlohmann::ordered_json measure_to_json(const PhaseSpaceMeasure& m) {
  nlohmann::ordered_json j;
  j["dim"] = m.dim;
  j["hbar"] = m.hbar;
  j["signed"] = m.signed_allowed;
  auto atoms = nlohmann::ordered_json::array();
  for (long i = 0; i < m.size(); ++i) {
    VectorXd z = m.location(i);
    std::vector<double> row(z.data(), z.data() + z.size());
    row.push_back(m.masses(i));
    atoms.push_back(row);
  }
  j["atoms"] = atoms;
  return j;
}

PhaseSpaceMeasure measure_from_json(const nlohmann::json& j) {
  int dim = j.at("dim").get<int>();
  double hbar = j.at("hbar").get<double>();
  const auto& atoms = j.at("atoms");
  long n = static_cast<long>(atoms.size());
  MatrixXd loc(n, 2 * dim);
  VectorXd masses(n);
  for (long i = 0; i < n; ++i) {
    auto row = atoms[i].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != 2 * dim + 1)
      throw DomainError("measure atom row must have 2*dim+1 entries");
    for (int c = 0; c < 2 * dim; ++c) loc(i, c) = row[c];
    masses(i) = row[2 * dim];
  }
  PhaseSpaceMeasure m = particle_measure(dim, hbar, std::move(loc), std::move(masses));
  if (j.contains("signed")) m.signed_allowed = j.at("signed").get<bool>();
  return m;
}

nlohmann::ordered_json report_to_json(const SweepReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchemaVersion;
  j["scenario"] = r.scenario;
  j["check"] = r.check;
  j["all_pass"] = r.all_pass;
  j["summary"] = r.summary;
  auto rows = nlohmann::ordered_json::array();
  for (const SweepRow& row : r.rows) {
    nlohmann::ordered_json o;
    o["hbar"] = row.hbar;
    o["T"] = row.T;
    o["p"] = row.p;
    o["aux"] = row.aux;
    o["measured"] = row.distance;
    o["bound"] = row.bound;
    o["gap"] = row.gap;
    o["lambda_h"] = row.lambda_h;
    o["c_cal"] = row.c_cal;
    o["pass"] = row.pass;
    o["note"] = row.note;
    if (include_timing) o["runtime_s"] = row.runtime_s;
    rows.push_back(o);
  }
  j["rows"] = rows;
  auto fits = nlohmann::ordered_json::array();
  for (const auto& [label, fit] : r.fits) {
    nlohmann::ordered_json o;
    o["label"] = label;
    o["slope"] = fit.slope;
    o["intercept"] = fit.intercept;
    o["ci"] = fit.ci;
    fits.push_back(o);
  }
  j["fits"] = fits;
  return j;
}

std::string report_to_csv(const SweepReport& r, bool include_timing) {
  std::ostringstream os;
  os << "hbar,T,p,aux,measured,bound,gap,lambda_h,c_cal,pass,note";
  if (include_timing) os << ",runtime_s";
  os << "\n";
  char buf[256];
  for (const SweepRow& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,",
                  row.hbar, row.T, row.p, row.aux, row.distance, row.bound, row.gap,
                  row.lambda_h, row.c_cal, row.pass ? 1 : 0);
    os << buf << row.note;
    if (include_timing) {
      std::snprintf(buf, sizeof buf, ",%.3f", row.runtime_s);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectorySample>& traj) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  if (traj.empty()) throw DomainError("empty trajectory");
  const int d2 = static_cast<int>(traj.front().alpha.size());
  os << "t";
  for (int d = 0; d < d2 / 2; ++d) os << ",x" << d;
  for (int d = 0; d < d2 / 2; ++d) os << ",p" << d;
  os << ",energy\n";
  char buf[64];
  for (const TrajectorySample& ts : traj) {
    std::snprintf(buf, sizeof buf, "%.17g", ts.t);
    os << buf;
    for (int d = 0; d < d2; ++d) {
      std::snprintf(buf, sizeof buf, ",%.17g", ts.alpha(d));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", ts.energy);
    os << buf;
  }
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}

void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::vector<PlotSeries>& series,
                      const std::vector<BoundLine>& bounds) {
  double lx_min = 1e300, lx_max = -1e300, ly_min = 1e300, ly_max = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0 || s.y[i] <= 0) continue;
      lx_min = std::min(lx_min, std::log10(s.x[i]));
      lx_max = std::max(lx_max, std::log10(s.x[i]));
      ly_min = std::min(ly_min, std::log10(s.y[i]));
      ly_max = std::max(ly_max, std::log10(s.y[i]));
    }
  if (lx_min > lx_max) throw DomainError("write_loglog_svg: no positive data");
  for (const auto& b : bounds)
    for (double lx : {lx_min, lx_max}) {
      double ly = std::log10(b.coeff) + b.exponent * lx;
      ly_min = std::min(ly_min, ly);
      ly_max = std::max(ly_max, ly);
    }
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double padx = 0.05 * std::max(1e-3, lx_max - lx_min);
  double pady = 0.05 * std::max(1e-3, ly_max - ly_min);
  lx_min -= padx;
  lx_max += padx;
  ly_min -= pady;
  ly_max += pady;
  auto X = [&](double lx) { return ml + (lx - lx_min) / (lx_max - lx_min) * (W - ml - mr); };
  auto Y = [&](double ly) { return H - mb - (ly - ly_min) / (ly_max - ly_min) * (H - mt - mb); };

  std::ofstream os(path);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
     << "</text>\n";
  os << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
     << "' stroke='black'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
     << "' stroke='black'/>\n";
  for (int e = static_cast<int>(std::ceil(lx_min)); e <= static_cast<int>(std::floor(lx_max));
       ++e) {
    os << "<text x='" << X(e) << "' y='" << H - mb + 18
       << "' text-anchor='middle' font-size='11'>1e" << e << "</text>\n";
    os << "<line x1='" << X(e) << "' y1='" << mt << "' x2='" << X(e) << "' y2='" << H - mb
       << "' stroke='#dddddd'/>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly_min)); e <= static_cast<int>(std::floor(ly_max));
       ++e) {
    os << "<text x='" << ml - 8 << "' y='" << Y(e) + 4
       << "' text-anchor='end' font-size='11'>1e" << e << "</text>\n";
    os << "<line x1='" << ml << "' y1='" << Y(e) << "' x2='" << W - mr << "' y2='" << Y(e)
       << "' stroke='#dddddd'/>\n";
  }
  int ci = 0;
  double ly0 = mt + 14;
  for (const auto& b : bounds) {
    double y1 = std::log10(b.coeff) + b.exponent * lx_min;
    double y2 = std::log10(b.coeff) + b.exponent * lx_max;
    os << "<line x1='" << X(lx_min) << "' y1='" << Y(y1) << "' x2='" << X(lx_max) << "' y2='"
       << Y(y2) << "' stroke='#888888' stroke-dasharray='6,4'/>\n";
    os << "<text x='" << W - mr - 6 << "' y='" << ly0
       << "' text-anchor='end' font-size='11' fill='#888888'>" << b.label << "</text>\n";
    ly0 += 14;
  }
  for (const auto& s : series) {
    const char* col = kPalette[ci % 6];
    std::string pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0 || s.y[i] <= 0) continue;
      double px = X(std::log10(s.x[i])), py = Y(std::log10(s.y[i]));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px, py);
      pts += buf;
      os << "<circle cx='" << px << "' cy='" << py << "' r='3' fill='" << col << "'/>\n";
    }
    os << "<polyline points='" << pts << "' fill='none' stroke='" << col << "'/>\n";
    os << "<text x='" << W - mr - 6 << "' y='" << ly0 << "' text-anchor='end' font-size='11' fill='"
       << col << "'>" << s.label << "</text>\n";
    ly0 += 14;
    ++ci;
  }
  os << "</svg>\n";
}

void write_heatmap_ppm(const std::string& path, const PhaseSpaceMeasure& m) {
  if (!m.grid_supported() || m.lattice->dim2() != 2)
    throw DomainError("write_heatmap_ppm: needs a D=1 lattice-supported measure");
  const int nx = m.lattice->count[0], np = m.lattice->count[1];
  double vmax = m.masses.cwiseAbs().maxCoeff();
  if (vmax <= 0) vmax = 1;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  os << "P6\n" << nx << " " << np << "\n255\n";
  // rows: p descending; signed measures render blue-white-red
  for (int jp = np - 1; jp >= 0; --jp) {
    for (int ix = 0; ix < nx; ++ix) {
      double v = m.masses(static_cast<long>(ix) * np + jp) / vmax;
      unsigned char rgb[3];
      double t = std::min(1.0, std::abs(v));
      if (v >= 0) {
        rgb[0] = 255;
        rgb[1] = rgb[2] = static_cast<unsigned char>(255 * (1 - t));
      } else {
        rgb[2] = 255;
        rgb[0] = rgb[1] = static_cast<unsigned char>(255 * (1 - t));
      }
      os.write(reinterpret_cast<char*>(rgb), 3);
    }
  }
}

}  // namespace pslab
