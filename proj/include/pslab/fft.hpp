#ifndef PSLAB_FFT_HPP
#define PSLAB_FFT_HPP

#include <functional>

#include "pslab/grid.hpp"

namespace pslab {

/// Cached FFTW plan pair for a rank-`dim` transform with `n` points per axis.
/// Execution is thread-safe on distinct arrays; plan creation is serialized.
class Fft {
 public:
  Fft(int dim, int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  // Unnormalized in-place DFTs, sign conventions exp(-i..)/exp(+i..).
  void forward(VectorXcd& v) const;
  void backward(VectorXcd& v) const;

 private:
  long total_;
  void* fwd_;  // fftw_plan
  void* bwd_;
};

const Fft& fft_for(int dim, int n);

/// Momentum value at FFT-order index k on one axis: k < n/2 ? dp*k : dp*(k-n).
double fft_order_p(const PhaseSpaceGrid& g, int k);

/// Flat vector over the momentum grid in FFT order, f evaluated at p in R^D.
VectorXcd momentum_multiplier(const PhaseSpaceGrid& g,
                              const std::function<Complex(const VectorXd&)>& f);
VectorXd momentum_multiplier_real(const PhaseSpaceGrid& g,
                                  const std::function<double(const VectorXd&)>& f);

/// psi <- IFFT( mult .* FFT(psi) ), normalized.  mult is in FFT order.
void apply_momentum_multiplier(const PhaseSpaceGrid& g, VectorXcd& psi, const VectorXcd& mult);

/// Band-limited translation psi(x) -> psi(x - a) via Fourier phase shift.
void shift_position(const PhaseSpaceGrid& g, VectorXcd& psi, const VectorXd& a);

/// Continuum-normalized momentum representation in natural order
/// (p_k = dp*(k - n/2)):  phi(p) = sum_j psi_j exp(-i p.x_j / hbar) dx^D.
VectorXcd to_momentum(const PhaseSpaceGrid& g, const VectorXcd& psi);
VectorXcd from_momentum(const PhaseSpaceGrid& g, const VectorXcd& phi);

}  // namespace pslab

#endif
