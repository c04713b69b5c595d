#include "fise/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

#include "fise/errors.hpp"

namespace fise {

namespace {
// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralWorkspace::SpectralWorkspace(int n) : n_(n) {
  if (n <= 0) throw config_error("SpectralWorkspace: size must be positive");
  buf_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (buf_ == nullptr) throw numeric_error("SpectralWorkspace: allocation failed");
  auto* raw = reinterpret_cast<fftw_complex*>(buf_);
  std::lock_guard<std::mutex> lock(plan_mutex());
  plan_fwd_ = fftw_plan_dft_1d(n, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_1d(n, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
}

SpectralWorkspace::~SpectralWorkspace() {
  if (plan_fwd_ != nullptr || plan_bwd_ != nullptr) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  }
  if (buf_) fftw_free(buf_);
}

SpectralWorkspace::SpectralWorkspace(SpectralWorkspace&& other) noexcept
    : n_(other.n_), buf_(other.buf_), plan_fwd_(other.plan_fwd_), plan_bwd_(other.plan_bwd_) {
  other.buf_ = nullptr;
  other.plan_fwd_ = nullptr;
  other.plan_bwd_ = nullptr;
  other.n_ = 0;
}

SpectralWorkspace& SpectralWorkspace::operator=(SpectralWorkspace&& other) noexcept {
  if (this != &other) {
    this->~SpectralWorkspace();
    new (this) SpectralWorkspace(std::move(other));
  }
  return *this;
}

void SpectralWorkspace::forward() { fftw_execute(static_cast<fftw_plan>(plan_fwd_)); }
void SpectralWorkspace::backward() { fftw_execute(static_cast<fftw_plan>(plan_bwd_)); }

std::vector<std::complex<double>> unitary_fft(std::span<const std::complex<double>> in) {
  SpectralWorkspace ws(static_cast<int>(in.size()));
  std::memcpy(ws.data(), in.data(), in.size() * sizeof(std::complex<double>));
  ws.forward();
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  std::vector<std::complex<double>> out(in.size());
  for (size_t i = 0; i < in.size(); ++i) out[i] = ws.data()[i] * scale;
  return out;
}

std::vector<std::complex<double>> unitary_ifft(std::span<const std::complex<double>> in) {
  SpectralWorkspace ws(static_cast<int>(in.size()));
  std::memcpy(ws.data(), in.data(), in.size() * sizeof(std::complex<double>));
  ws.backward();
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  std::vector<std::complex<double>> out(in.size());
  for (size_t i = 0; i < in.size(); ++i) out[i] = ws.data()[i] * scale;
  return out;
}

}  // namespace fise
