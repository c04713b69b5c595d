#ifndef FISE_FFT_HPP
#define FISE_FFT_HPP

#include <complex>
#include <span>
#include <vector>

namespace fise {

/// In-place complex FFT workspace around FFTW.
///
/// Plans are created with FFTW_ESTIMATE so planning is deterministic and the
/// same build always produces bit-identical transforms. forward()/backward()
/// are unnormalized (round trip scales by N); callers fold the 1/N where it is
/// cheapest. Plan creation is serialized internally, execution is not.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(int n);
  ~SpectralWorkspace();

  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;
  SpectralWorkspace(SpectralWorkspace&& other) noexcept;
  SpectralWorkspace& operator=(SpectralWorkspace&& other) noexcept;

  int size() const { return n_; }
  std::complex<double>* data() { return buf_; }
  const std::complex<double>* data() const { return buf_; }

  void forward();   // e^{-ikx} convention, unnormalized
  void backward();  // e^{+ikx} convention, unnormalized

 private:
  int n_ = 0;
  std::complex<double>* buf_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

/// Unitary transform pair (each direction carries 1/sqrt(N)), so Parseval
/// holds without correction factors.
std::vector<std::complex<double>> unitary_fft(std::span<const std::complex<double>> in);
std::vector<std::complex<double>> unitary_ifft(std::span<const std::complex<double>> in);

}  // namespace fise

#endif
