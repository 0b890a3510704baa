#include "pslab/transforms.hpp"

#include <cmath>

#include "pslab/fft.hpp"

namespace pslab {

VectorXcd apply_operator(const OperatorMatrix& op, const VectorXcd& psi) {
  return op.entries * psi;
}

QuantumState apply_operator(const OperatorMatrix& op, const QuantumState& s) {
  QuantumState out = s;
  for (auto& b : out.branches) {
    b.psi = op.entries * b.psi;
    double n = l2_norm(s.grid, b.psi);
    if (n > 0) b.psi /= n;  // unitary application up to roundoff
  }
  return out;
}

OperatorMatrix weyl_quantize(const SymbolFn& A, const PhaseSpaceGrid& g) {
  if (g.dim != 1) throw DomainError("weyl_quantize: dense quantization is D=1 only");
  const long n = g.n_x;
  if (n > kDenseCap) throw DomainError("weyl_quantize: grid exceeds dense cap");
  const double hbar = g.hbar;
  const double dx = g.dx(), dp = g.dp();
  const Complex I(0, 1);

  // symmetric half-weighted p axis: s = -n/2..n/2, w = 1/2 at both endpoints
  const long np = n + 1;
  VectorXd pgrid(np), w(np);
  for (long s = 0; s <= n; ++s) {
    pgrid[s] = dp * (static_cast<double>(s) - n / 2);
    w[s] = (s == 0 || s == n) ? 0.5 : 1.0;
  }
  // symbol table over midpoints u = j+l (0..2n-2), x_mid = x_min + u*dx/2
  MatrixXd At(np, 2 * n - 1);
  VectorXd a2(2);
  for (long u = 0; u < 2 * n - 1; ++u) {
    a2[0] = g.x_min + 0.5 * u * dx;
    for (long s = 0; s < np; ++s) {
      a2[1] = pgrid[s];
      double v = A(a2);
      if (!std::isfinite(v)) throw DomainError("weyl_quantize: non-finite symbol value");
      At(s, u) = v;
    }
  }
  // phase table over offsets d = j-l (-(n-1)..n-1)
  MatrixXcd E(np, 2 * n - 1);
  for (long d = 0; d < 2 * n - 1; ++d)
    for (long s = 0; s < np; ++s)
      E(s, d) = std::exp(I * (pgrid[s] * (static_cast<double>(d) - (n - 1)) * dx / hbar));

  const double scale = dx * dp / (2 * M_PI * hbar);
  OperatorMatrix op;
  op.grid = g;
  op.entries.resize(n, n);
  for (long l = 0; l < n; ++l) {
    for (long j = 0; j < n; ++j) {
      Complex acc = 0;
      const long u = j + l, d = j - l + (n - 1);
      for (long s = 0; s < np; ++s) acc += w[s] * E(s, d) * At(s, u);
      op.entries(j, l) = scale * acc;
    }
  }
  op.entries = 0.5 * (op.entries + op.entries.adjoint()).eval();  // real symbol
  op.hermitian_flag = true;
  return op;
}

OperatorMatrix wavepacket_quantize(const SymbolFn& f, const PhaseSpaceGrid& g,
                                   const PhaseLattice& centers) {
  const long total = g.total_points();
  if (total > kDenseCap) throw DomainError("wavepacket_quantize: grid exceeds dense cap");
  const double cap = std::sqrt(g.hbar) / 2 + 1e-12;
  for (int a = 0; a < centers.dim2(); ++a)
    if (centers.step[a] > cap)
      throw DomainError("wavepacket_quantize: center lattice spacing exceeds sqrt(hbar)/2");
  const long nc = centers.total();
  MatrixXcd bpos(total, nc), bneg(total, 0);
  std::vector<double> fneg;
  long ipos = 0;
  std::vector<std::pair<long, double>> negs;
  for (long i = 0; i < nc; ++i) {
    VectorXd a = centers.point(i);
    double fi = f(a);
    if (!std::isfinite(fi)) throw DomainError("wavepacket_quantize: non-finite symbol value");
    VectorXcd v = coherent_amplitudes(g, PhasePoint(a));
    if (fi >= 0)
      bpos.col(ipos++) = std::sqrt(fi) * v;
    else {
      negs.emplace_back(i, fi);
      bneg.conservativeResize(total, bneg.cols() + 1);
      bneg.col(bneg.cols() - 1) = std::sqrt(-fi) * v;
    }
  }
  bpos.conservativeResize(total, ipos);
  const double scale =
      centers.cell_volume() * g.cell_volume() / std::pow(2 * M_PI * g.hbar, g.dim);
  OperatorMatrix op;
  op.grid = g;
  op.entries = scale * (bpos * bpos.adjoint());
  if (bneg.cols() > 0) op.entries -= scale * (bneg * bneg.adjoint());
  op.hermitian_flag = true;
  return op;
}

PhaseSpaceMeasure wigner(const QuantumState& s) {
  const PhaseSpaceGrid& g = s.grid;
  if (g.dim != 1) throw DomainError("wigner: D=1 only");
  check_boundary(s, "wigner");
  const long n = g.n_x;
  const long nf = 2 * n;
  const double dx = g.dx();
  const Complex I(0, 1);

  // band-limited upsampling of each branch to the 2n fine grid
  PhaseSpaceGrid gf = g;
  gf.n_x = static_cast<int>(nf);

  // correlation matrix C(r, j) = sum_b w_b psif(2j+m) conj(psif(2j-m)), m = r-(nf-1)
  MatrixXcd C = MatrixXcd::Zero(2 * nf - 1, n);
  for (const auto& br : s.branches) {
    VectorXcd phi = to_momentum(g, br.psi);
    VectorXcd phif = VectorXcd::Zero(nf);
    phif.segment(n / 2, n) = phi;  // natural order: central band
    VectorXcd psif = from_momentum(gf, phif);
    for (long j = 0; j < n; ++j) {
      const long fj = 2 * j;
      const long mmax = std::min(fj, nf - 1 - fj);
      for (long m = -mmax; m <= mmax; ++m)
        C(m + nf - 1, j) += br.weight * psif[fj + m] * std::conj(psif[fj - m]);
    }
  }
  // W = Re(E * C), E(k, r) = exp(-i p_k m dx / hbar) * dx / (2 pi hbar)
  MatrixXcd E(n, 2 * nf - 1);
  VectorXd p = g.p_axis();
  const double scale = dx / (2 * M_PI * g.hbar);
  for (long r = 0; r < 2 * nf - 1; ++r) {
    const double y = (static_cast<double>(r) - (nf - 1)) * dx;
    for (long k = 0; k < n; ++k) E(k, r) = scale * std::exp(-I * (p[k] * y / g.hbar));
  }
  MatrixXcd Wc = E * C;

  PhaseSpaceMeasure out;
  out.dim = 1;
  out.hbar = g.hbar;
  out.signed_allowed = true;
  PhaseLattice lat;
  lat.lo = VectorXd(2);
  lat.lo << g.x_min, -g.p_max();
  lat.step = VectorXd(2);
  lat.step << dx, g.dp();
  lat.count = {static_cast<int>(n), static_cast<int>(n)};
  out.lattice = lat;
  out.masses.resize(n * n);
  const double cell = lat.cell_volume();
  for (long j = 0; j < n; ++j)
    for (long k = 0; k < n; ++k) out.masses[j * n + k] = Wc(k, j).real() * cell;
  return out;
}

namespace {

Complex coherent_overlap_direct(const PhaseSpaceGrid& g, const VectorXcd& psi,
                                const VectorXd& alpha) {
  // <alpha|psi> without boundary-margin enforcement (quadrature only)
  const int D = g.dim;
  const long total = g.total_points();
  const Complex I(0, 1);
  const double norm_c = std::pow(M_PI * g.hbar, -D / 4.0);
  Complex acc = 0;
  int idx[8];
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    double q = 0, phase = 0;
    for (int d = 0; d < D; ++d) {
      double x = g.x_min + idx[d] * g.dx();
      double xc = x - alpha[d];
      q += xc * xc;
      phase += alpha[D + d] * (x - 0.5 * alpha[d]);
    }
    acc += std::exp(-I * (phase / g.hbar)) * std::exp(-q / (2 * g.hbar)) * psi[flat];
  }
  return norm_c * acc * g.cell_volume();
}

// 1e-9-aligned index of value v on axis (lo0 + k*step0), or -1
long aligned_index(double v, double lo0, double step0, long n) {
  double k = (v - lo0) / step0;
  long kr = std::lround(k);
  if (kr < 0 || kr >= n) return -1;
  if (std::abs(k - kr) > 1e-6) return -1;
  return kr;
}

}  // namespace

double husimi_at(const QuantumState& s, const PhasePoint& alpha) {
  double h = 0;
  for (const auto& b : s.branches)
    h += b.weight * std::norm(coherent_overlap_direct(s.grid, b.psi, alpha.alpha));
  return h / std::pow(2 * M_PI * s.grid.hbar, s.grid.dim);
}

PhaseSpaceMeasure husimi(const QuantumState& s, const PhaseLattice& centers) {
  const PhaseSpaceGrid& g = s.grid;
  const int D = g.dim;
  if (centers.dim2() != 2 * D) throw DomainError("husimi: lattice dimension mismatch");
  const double cap = std::sqrt(g.hbar) / 2 + 1e-12;
  for (int a = 0; a < 2 * D; ++a)
    if (centers.step[a] > cap) throw DomainError("husimi: lattice spacing exceeds sqrt(hbar)/2");

  // windowed-FFT path requires the p-part of the lattice to sit on the grid's
  // dual axis; fall back to direct summation otherwise.
  bool aligned = true;
  std::vector<std::vector<long>> pidx(D);
  for (int d = 0; d < D && aligned; ++d) {
    const int ax = D + d;
    for (int i = 0; i < centers.count[ax]; ++i) {
      long k = aligned_index(centers.lo[ax] + i * centers.step[ax], -g.p_max(), g.dp(), g.n_x);
      if (k < 0) {
        aligned = false;
        break;
      }
      pidx[d].push_back(k);
    }
  }

  const long nc = centers.total();
  VectorXd density = VectorXd::Zero(nc);
  const double hnorm = std::pow(2 * M_PI * g.hbar, -D) * std::pow(M_PI * g.hbar, -D / 2.0);

  if (aligned) {
    // iterate over the x-part of the lattice; one FFT per x-center per branch
    long nx_centers = 1, np_centers = 1;
    for (int d = 0; d < D; ++d) nx_centers *= centers.count[d];
    for (int d = 0; d < D; ++d) np_centers *= centers.count[D + d];
    const long total = g.total_points();
    VectorXcd win(total);
    int idx[8];
    for (long xc = 0; xc < nx_centers; ++xc) {
      VectorXd ax(D);
      long rem = xc;
      for (int d = D - 1; d >= 0; --d) {
        int i = static_cast<int>(rem % centers.count[d]);
        rem /= centers.count[d];
        ax[d] = centers.lo[d] + i * centers.step[d];
      }
      for (const auto& b : s.branches) {
        for (long flat = 0; flat < total; ++flat) {
          g.unflatten(flat, idx);
          double q = 0;
          for (int d = 0; d < D; ++d) {
            double x = g.x_min + idx[d] * g.dx();
            q += (x - ax[d]) * (x - ax[d]);
          }
          win[flat] = b.psi[flat] * std::exp(-q / (2 * g.hbar));
        }
        VectorXcd phi = to_momentum(g, win);
        // pick lattice p points
        for (long pc = 0; pc < np_centers; ++pc) {
          long prem = pc, gflat = 0;
          for (int d = 0; d < D; ++d) {
            long cnt = 1;
            for (int e = d + 1; e < D; ++e) cnt *= centers.count[D + e];
            int i = static_cast<int>((prem / cnt) % centers.count[D + d]);
            gflat = gflat * g.n_x + pidx[d][i];
          }
          density[xc * np_centers + pc] += b.weight * hnorm * std::norm(phi[gflat]);
        }
      }
    }
  } else {
    for (long i = 0; i < nc; ++i) {
      VectorXd a = centers.point(i);
      double h = 0;
      for (const auto& b : s.branches)
        h += b.weight * std::norm(coherent_overlap_direct(g, b.psi, a));
      density[i] = h * std::pow(2 * M_PI * g.hbar, -D);
    }
  }

  PhaseSpaceMeasure out;
  out.dim = D;
  out.hbar = g.hbar;
  out.lattice = centers;
  out.masses = density * centers.cell_volume();
  return out;
}

PhaseLattice default_husimi_lattice(const QuantumState& s, double spacing_cap) {
  const PhaseSpaceGrid& g = s.grid;
  const int D = g.dim;
  if (spacing_cap <= 0) spacing_cap = std::sqrt(g.hbar) / 2;
  const double pad = 6.0 * std::sqrt(g.hbar);
  const double tail = 1e-10;

  // per-axis marginal supports
  VectorXd lo(2 * D), hi(2 * D);
  const long total = g.total_points();
  int idx[8];
  for (int d = 0; d < D; ++d) {
    VectorXd marg = VectorXd::Zero(g.n_x);
    for (const auto& b : s.branches)
      for (long flat = 0; flat < total; ++flat) {
        g.unflatten(flat, idx);
        marg[idx[d]] += b.weight * std::norm(b.psi[flat]);
      }
    marg /= marg.sum();
    int i0 = 0, i1 = g.n_x - 1;
    double acc = 0;
    while (i0 < g.n_x && (acc += marg[i0]) < tail) ++i0;
    acc = 0;
    while (i1 >= 0 && (acc += marg[i1]) < tail) --i1;
    lo[d] = g.x_min + i0 * g.dx() - pad;
    hi[d] = g.x_min + i1 * g.dx() + pad;
  }
  for (int d = 0; d < D; ++d) {
    VectorXd marg = VectorXd::Zero(g.n_x);
    for (const auto& b : s.branches) {
      VectorXcd phi = to_momentum(g, b.psi);
      for (long flat = 0; flat < total; ++flat) {
        g.unflatten(flat, idx);
        marg[idx[d]] += b.weight * std::norm(phi[flat]);
      }
    }
    marg /= marg.sum();
    int i0 = 0, i1 = g.n_x - 1;
    double acc = 0;
    while (i0 < g.n_x && (acc += marg[i0]) < tail) ++i0;
    acc = 0;
    while (i1 >= 0 && (acc += marg[i1]) < tail) --i1;
    lo[D + d] = g.dp() * (i0 - g.n_x / 2) - pad;
    hi[D + d] = g.dp() * (i1 - g.n_x / 2) + pad;
  }

  PhaseLattice lat;
  lat.lo.resize(2 * D);
  lat.step.resize(2 * D);
  lat.count.resize(2 * D);
  for (int d = 0; d < D; ++d) {  // x axes: free placement
    lat.step[d] = spacing_cap;
    lat.lo[d] = lo[d];
    lat.count[d] = std::max(2, static_cast<int>(std::ceil((hi[d] - lo[d]) / spacing_cap)) + 1);
  }
  for (int d = 0; d < D; ++d) {  // p axes: aligned with the dual grid axis
    const int ax = D + d;
    long stride = std::max(1L, static_cast<long>(std::floor(spacing_cap / g.dp())));
    lat.step[ax] = stride * g.dp();
    long k0 = std::max(0L, static_cast<long>(std::floor((lo[ax] + g.p_max()) / g.dp())));
    lat.lo[ax] = -g.p_max() + k0 * g.dp();
    int cnt = static_cast<int>(std::ceil((hi[ax] - lat.lo[ax]) / lat.step[ax])) + 1;
    while (k0 + static_cast<long>(cnt - 1) * stride >= g.n_x) --cnt;
    lat.count[ax] = std::max(2, cnt);
  }
  return lat;
}

QuantumState noising_channel(const QuantumState& s) {
  PhaseLattice lat = default_husimi_lattice(s);
  PhaseSpaceMeasure h = husimi(s, lat);
  if (std::abs(h.total_mass() - 1.0) > 1e-4)
    throw DomainError("noising_channel: Husimi coverage violation, mass = " +
                      std::to_string(h.total_mass()));
  const double thresh = 1e-9 * h.masses.maxCoeff();
  // only lattice sites that admit a representable coherent state can carry a
  // branch; sites skipped for being too close to the box edge hold tail mass
  // only, which the coverage check below bounds
  const double cm = center_margin(s.grid);
  auto viable = [&](const PhasePoint& a) {
    for (int d = 0; d < s.grid.dim; ++d) {
      if (a.x()[d] < s.grid.x_min + cm || a.x()[d] > s.grid.x_max - cm) return false;
      if (std::abs(a.p()[d]) > s.grid.p_max() - cm) return false;
    }
    return true;
  };
  std::vector<std::pair<PhasePoint, double>> atoms;
  double skipped = 0;
  for (long i = 0; i < h.size(); ++i) {
    if (h.masses[i] <= thresh) continue;
    PhasePoint a(h.lattice->point(i));
    if (viable(a))
      atoms.emplace_back(a, h.masses[i]);
    else
      skipped += h.masses[i];
  }
  if (skipped > 1e-4)
    throw DomainError("noising_channel: mass " + std::to_string(skipped) +
                      " sits outside the representable center box");
  if (atoms.size() > kMixtureBranchCap)
    throw DomainError("noising_channel: branch cap exceeded (" + std::to_string(atoms.size()) + ")");
  double mass = 0;
  for (auto& [a, m] : atoms) mass += m;
  for (auto& [a, m] : atoms) m /= mass;
  return mix_coherent(s.grid, atoms);
}

VectorXd mollify_symbol(const SymbolFn& G, const PhaseLattice& lat, double cov) {
  const int axes = lat.dim2();
  PhaseLattice padded = lat;
  std::vector<int> radius(axes);
  for (int a = 0; a < axes; ++a) {
    radius[a] = static_cast<int>(std::ceil(8.0 * std::sqrt(cov) / lat.step[a]));
    padded.lo[a] -= radius[a] * lat.step[a];
    padded.count[a] += 2 * radius[a];
  }
  PhaseSpaceMeasure work;
  work.dim = axes / 2;
  work.hbar = cov;
  work.signed_allowed = true;
  work.lattice = padded;
  work.masses.resize(padded.total());
  for (long i = 0; i < padded.total(); ++i) {
    double v = G(padded.point(i));
    if (!std::isfinite(v)) throw DomainError("mollify_symbol: non-finite symbol value");
    work.masses[i] = v;
  }
  work = gaussian_convolve(work, cov);
  // crop back to the original lattice
  VectorXd out(lat.total());
  int idx[8];
  for (long i = 0; i < lat.total(); ++i) {
    lat.unflatten(i, idx);
    long flat = 0;
    for (int a = 0; a < axes; ++a) flat = flat * padded.count[a] + (idx[a] + radius[a]);
    out[i] = work.masses[flat];
  }
  return out;
}

Complex trace_against(const OperatorMatrix& op, const QuantumState& s) {
  Complex t = 0;
  for (const auto& b : s.branches)
    t += b.weight * inner(s.grid, b.psi, VectorXcd(op.entries * b.psi));
  return t;
}

namespace {
double lattice_axis_variance(const PhaseSpaceMeasure& m, int axis) {
  double mean = 0, mass = 0;
  for (long i = 0; i < m.size(); ++i) {
    mean += m.masses[i] * m.location(i)[axis];
    mass += m.masses[i];
  }
  mean /= mass;
  double var = 0;
  for (long i = 0; i < m.size(); ++i) {
    double d = m.location(i)[axis] - mean;
    var += m.masses[i] * d * d;
  }
  return var / mass;
}
}  // namespace

ConventionReport resolve_conventions(double hbar) {
  // Measured on a coherent state from the definitional integrals.
  const double margin = 2.0 * std::sqrt(hbar * std::log(1e8));
  const double xh = 1.0 + margin + 5 * std::sqrt(hbar) + 2.0;
  int n = 64;
  while (M_PI * hbar * n / (2 * xh) < 1.0 + margin + 5 * std::sqrt(hbar) + 1.0 && n < 4096) n *= 2;
  PhaseSpaceGrid g = make_grid(1, hbar, -xh, xh, std::max(n, 128));
  QuantumState coh = coherent_state(g, PhasePoint::of({0.4, -0.3}));

  PhaseSpaceMeasure w = wigner(coh);
  PhaseSpaceMeasure h = husimi(coh, *w.lattice);
  double var_w = 0.5 * (lattice_axis_variance(w, 0) + lattice_axis_variance(w, 1));
  double var_h = 0.5 * (lattice_axis_variance(h, 0) + lattice_axis_variance(h, 1));

  ConventionReport rep;
  rep.c_husimi = (var_h - var_w) / hbar;
  rep.husimi_identity_sup_err = sup_density_diff(h, gaussian_convolve(w, rep.c_husimi * hbar));

  QuantumState noised = noising_channel(coh);
  PhaseSpaceMeasure wn = wigner(noised);
  double var_wn = 0.5 * (lattice_axis_variance(wn, 0) + lattice_axis_variance(wn, 1));
  rep.c_noising = (var_wn - var_w) / hbar;
  rep.noising_identity_sup_err = sup_density_diff(wn, gaussian_convolve(w, rep.c_noising * hbar));
  return rep;
}

}  // namespace pslab
