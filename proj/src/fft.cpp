#include "pslab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace pslab {

namespace {
std::mutex g_plan_mutex;
}

Fft::Fft(int dim, int n) {
  total_ = 1;
  for (int d = 0; d < dim; ++d) total_ *= n;
  std::vector<int> shape(dim, n);
  VectorXcd buf(total_);
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto* b = reinterpret_cast<fftw_complex*>(buf.data());
  fwd_ = fftw_plan_dft(dim, shape.data(), b, b, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  bwd_ = fftw_plan_dft(dim, shape.data(), b, b, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft::forward(VectorXcd& v) const {
  auto* d = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), d, d);
}

void Fft::backward(VectorXcd& v) const {
  auto* d = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), d, d);
}

const Fft& fft_for(int dim, int n) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<Fft>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[{dim, n}];
  if (!slot) slot = std::make_unique<Fft>(dim, n);
  return *slot;
}

double fft_order_p(const PhaseSpaceGrid& g, int k) {
  return k < g.n_x / 2 ? g.dp() * k : g.dp() * (k - g.n_x);
}

VectorXcd momentum_multiplier(const PhaseSpaceGrid& g,
                              const std::function<Complex(const VectorXd&)>& f) {
  const long total = g.total_points();
  VectorXcd m(total);
  int idx[8];
  VectorXd p(g.dim);
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    for (int d = 0; d < g.dim; ++d) p[d] = fft_order_p(g, idx[d]);
    m[flat] = f(p);
  }
  return m;
}

VectorXd momentum_multiplier_real(const PhaseSpaceGrid& g,
                                  const std::function<double(const VectorXd&)>& f) {
  const long total = g.total_points();
  VectorXd m(total);
  int idx[8];
  VectorXd p(g.dim);
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    for (int d = 0; d < g.dim; ++d) p[d] = fft_order_p(g, idx[d]);
    m[flat] = f(p);
  }
  return m;
}

void apply_momentum_multiplier(const PhaseSpaceGrid& g, VectorXcd& psi, const VectorXcd& mult) {
  const Fft& fft = fft_for(g.dim, g.n_x);
  fft.forward(psi);
  psi.array() *= mult.array();
  fft.backward(psi);
  psi /= static_cast<double>(g.total_points());
}

void shift_position(const PhaseSpaceGrid& g, VectorXcd& psi, const VectorXd& a) {
  const Complex I(0, 1);
  VectorXcd mult = momentum_multiplier(
      g, [&](const VectorXd& p) { return std::exp(-I * p.dot(a) / g.hbar); });
  apply_momentum_multiplier(g, psi, mult);
}

VectorXcd to_momentum(const PhaseSpaceGrid& g, const VectorXcd& psi) {
  const long total = g.total_points();
  const Complex I(0, 1);
  VectorXcd buf(total);
  int idx[8];
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    int s = 0;
    for (int d = 0; d < g.dim; ++d) s += idx[d];
    buf[flat] = (s % 2 == 0) ? psi[flat] : -psi[flat];
  }
  fft_for(g.dim, g.n_x).forward(buf);
  // natural index m per axis corresponds to p_m = dp*(m - n/2)
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    double px_min = 0;
    for (int d = 0; d < g.dim; ++d) px_min += g.dp() * (idx[d] - g.n_x / 2) * g.x_min;
    buf[flat] *= g.cell_volume() * std::exp(-I * px_min / g.hbar);
  }
  return buf;
}

VectorXcd from_momentum(const PhaseSpaceGrid& g, const VectorXcd& phi) {
  const long total = g.total_points();
  const Complex I(0, 1);
  VectorXcd buf(total);
  int idx[8];
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    double px_min = 0;
    for (int d = 0; d < g.dim; ++d) px_min += g.dp() * (idx[d] - g.n_x / 2) * g.x_min;
    buf[flat] = phi[flat] * std::exp(I * px_min / g.hbar) / g.cell_volume();
  }
  fft_for(g.dim, g.n_x).backward(buf);
  buf /= static_cast<double>(total);
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    int s = 0;
    for (int d = 0; d < g.dim; ++d) s += idx[d];
    if (s % 2 != 0) buf[flat] = -buf[flat];
  }
  return buf;
}

}  // namespace pslab
