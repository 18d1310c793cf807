#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "gaugelab/core/field.hpp"

namespace gaugelab {

namespace detail {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

/// Forward/backward 2D plans for one size. Plans are created with
/// FFTW_ESTIMATE so the chosen algorithm, and hence every bit of output,
/// does not depend on timing.
class Plan2D {
 public:
  explicit Plan2D(int n) : n_(n) {
    FftwBuffer a(static_cast<std::size_t>(n) * n), b(static_cast<std::size_t>(n) * n);
    forward_ = fftw_plan_dft_2d(n, n, a.ptr, b.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(n, n, a.ptr, b.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!forward_ || !backward_) throw std::runtime_error("fftw plan creation failed");
  }
  ~Plan2D() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  Plan2D(const Plan2D&) = delete;
  Plan2D& operator=(const Plan2D&) = delete;

  void execute(const cplx* in, cplx* out, bool forward) const {
    const std::size_t count = static_cast<std::size_t>(n_) * n_;
    FftwBuffer a(count), b(count);
    std::memcpy(static_cast<void*>(a.ptr), static_cast<const void*>(in), count * sizeof(cplx));
    fftw_execute_dft(forward ? forward_ : backward_, a.ptr, b.ptr);
    std::memcpy(static_cast<void*>(out), static_cast<const void*>(b.ptr), count * sizeof(cplx));
  }

 private:
  int n_;
  fftw_plan forward_;
  fftw_plan backward_;
};

inline const Plan2D& plan_for(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Plan2D>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Plan2D>(n);
  return *slot;
}

}  // namespace detail

/// Unnormalized forward DFT: F[k] = sum_n f[n] exp(-i k.n 2pi/N).
inline std::vector<cplx> fft_forward(const ComplexField2D& f) {
  std::vector<cplx> out(f.size());
  detail::plan_for(f.grid().n()).execute(f.data(), out.data(), true);
  return out;
}

/// Inverse DFT including the 1/N^2 factor.
inline ComplexField2D fft_inverse(const PeriodicGrid2D& grid, const std::vector<cplx>& spectrum) {
  ComplexField2D out(grid);
  detail::plan_for(grid.n()).execute(spectrum.data(), out.data(), false);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : out.values()) v *= scale;
  return out;
}

}  // namespace gaugelab
