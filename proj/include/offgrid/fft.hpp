// Thin FFTW3 wrapper: complex 2-D transforms on row-major grids, plus helpers
// for moving between centered coefficient grids and DFT-ordered arrays.
#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "offgrid/core.hpp"

namespace offgrid {

namespace detail {

// FFTW planning is not reentrant; executions are. Plans are cached per
// (nx, ny, sign) and reused for the life of the process.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  void run(cd* data, long nx, long ny, int sign) {
    fftw_plan p;
    {
      std::lock_guard<std::mutex> lk(m_);
      auto key = std::make_tuple(nx, ny, sign);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        // FFTW_UNALIGNED: plans are executed on caller arrays (std::vector
        // storage) which need not have SIMD alignment.
        p = fftw_plan_dft_2d(static_cast<int>(nx), static_cast<int>(ny),
                             reinterpret_cast<fftw_complex*>(buf(nx * ny)),
                             reinterpret_cast<fftw_complex*>(buf(nx * ny)),
                             sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
      } else {
        p = it->second;
      }
    }
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    fftw_free(scratch_);
  }
  // Planning buffer kept large enough for the biggest request so far.
  cd* buf(long n) {
    if (n > cap_) {
      fftw_free(scratch_);
      scratch_ = static_cast<cd*>(fftw_malloc(sizeof(cd) * static_cast<size_t>(n)));
      cap_ = n;
    }
    return scratch_;
  }

  std::mutex m_;
  std::map<std::tuple<long, long, int>, fftw_plan> plans_;
  cd* scratch_ = nullptr;
  long cap_ = 0;
};

}  // namespace detail

// In-place unnormalized DFT over a row-major nx x ny complex grid.
inline void fft2(std::vector<cd>& a, long nx, long ny) {
  detail::PlanCache::instance().run(a.data(), nx, ny, FFTW_FORWARD);
}
inline void ifft2_unnormalized(std::vector<cd>& a, long nx, long ny) {
  detail::PlanCache::instance().run(a.data(), nx, ny, FFTW_BACKWARD);
}
// In-place inverse DFT with 1/(nx ny) normalization (round trip is identity).
inline void ifft2(std::vector<cd>& a, long nx, long ny) {
  ifft2_unnormalized(a, nx, ny);
  double s = 1.0 / static_cast<double>(nx * ny);
  for (auto& z : a) z *= s;
}

// Scatter a coefficient grid into a DFT-ordered nx x ny array: coefficient at
// frequency k lands at index (k mod n) per axis. Grid must fit without alias.
inline std::vector<cd> embed_dft(const CoefficientGrid& g, long nx, long ny) {
  if (g.support.dims.x > nx || g.support.dims.y > ny)
    throw ValidationError("embed_dft: grid larger than target");
  std::vector<cd> out(static_cast<size_t>(nx * ny));
  for (long ix = 0; ix < g.support.dims.x; ++ix) {
    long kx = g.support.kmin.x + ix;
    long px = ((kx % nx) + nx) % nx;
    for (long iy = 0; iy < g.support.dims.y; ++iy) {
      long ky = g.support.kmin.y + iy;
      long py = ((ky % ny) + ny) % ny;
      out[static_cast<size_t>(px * ny + py)] =
          g.values[static_cast<size_t>(ix * g.support.dims.y + iy)];
    }
  }
  return out;
}

// Gather the rect from a DFT-ordered array (inverse of embed_dft).
inline CoefficientGrid extract_dft(const std::vector<cd>& a, long nx, long ny,
                                   const IndexRect& rect) {
  CoefficientGrid g(rect);
  for (long ix = 0; ix < rect.dims.x; ++ix) {
    long kx = rect.kmin.x + ix;
    long px = ((kx % nx) + nx) % nx;
    for (long iy = 0; iy < rect.dims.y; ++iy) {
      long ky = rect.kmin.y + iy;
      long py = ((ky % ny) + ny) % ny;
      g.values[static_cast<size_t>(ix * rect.dims.y + iy)] =
          a[static_cast<size_t>(px * ny + py)];
    }
  }
  return g;
}

}  // namespace offgrid
