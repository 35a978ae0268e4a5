#pragma once

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "nslab/field.hpp"

namespace nslab {
namespace fft {

/// RAII buffer with FFTW-compatible alignment.
template <typename T>
class Buffer {
  public:
    Buffer() = default;
    explicit Buffer(std::size_t count) { resize(count); }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    Buffer(Buffer&& o) noexcept : p_(o.p_), count_(o.count_) { o.p_ = nullptr; o.count_ = 0; }
    ~Buffer() {
        if (p_) fftw_free(p_);
    }
    void resize(std::size_t count) {
        if (count == count_) return;
        if (p_) fftw_free(p_);
        p_ = static_cast<T*>(fftw_malloc(sizeof(T) * count));
        count_ = count;
        if (!p_) throw Error("fftw_malloc failed");
    }
    T* data() { return p_; }
    const T* data() const { return p_; }
    std::size_t size() const { return count_; }
    void zero() { std::memset(p_, 0, sizeof(T) * count_); }

  private:
    T* p_ = nullptr;
    std::size_t count_ = 0;
};

using RealBuf = Buffer<double>;
using ComplexBuf = Buffer<fftw_complex>;

/// Per-grid-size r2c/c2r plan pair, executed through the new-array interface
/// on any fftw_malloc'd buffers of matching size.
class Plans {
  public:
    explicit Plans(int m) : m_(m) {
        RealBuf r(real_count(m));
        ComplexBuf c(complex_count(m));
        r2c_ = fftw_plan_dft_r2c_3d(m, m, m, r.data(), c.data(), FFTW_ESTIMATE);
        c2r_ = fftw_plan_dft_c2r_3d(m, m, m, c.data(), r.data(), FFTW_ESTIMATE);
        if (!r2c_ || !c2r_) throw Error("fftw plan creation failed");
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
    ~Plans() {
        fftw_destroy_plan(r2c_);
        fftw_destroy_plan(c2r_);
    }

    void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(r2c_, in, out); }
    void inverse(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(c2r_, in, out); }

    static std::size_t real_count(int m) { return std::size_t(m) * m * m; }
    static std::size_t complex_count(int m) { return std::size_t(m) * m * (m / 2 + 1); }

  private:
    int m_;
    fftw_plan r2c_ = nullptr;
    fftw_plan c2r_ = nullptr;
};

/// Plan creation is not thread-safe; executions on distinct buffers are.
inline const Plans& plans_for(int m) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Plans>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, std::make_unique<Plans>(m)).first;
    return *it->second;
}

/// Padded grid size for exact (dealiased) quadratic products at resolution n.
inline int pad_size(int n) {
    int m = (3 * n + 1) / 2;
    if (m % 2 != 0) ++m;
    return m;
}

inline std::size_t half_index(int m, int i1, int i2, int k3) {
    return (std::size_t(i1) * m + i2) * (m / 2 + 1) + k3;
}

/// Read mode k from a half-spectrum array, folding k3 < 0 through conjugation.
inline Complex half_mode(const fftw_complex* w, int m, int k1, int k2, int k3) {
    bool flip = k3 < 0;
    if (flip) {
        k1 = -k1;
        k2 = -k2;
        k3 = -k3;
    }
    const std::size_t idx = half_index(m, slot_of(k1, m), slot_of(k2, m), k3);
    Complex c(w[idx][0], w[idx][1]);
    return flip ? std::conj(c) : c;
}

/// Inverse-transform one component of f onto an m^3 collocation grid (m >= f.n).
/// Scatters the k3 >= 0 half of the mode cube; k3 < 0 is implied by Hermitian
/// symmetry of the source.
inline void to_physical(const SpectralField& f, int comp, int m, ComplexBuf& scratch,
                        RealBuf& out) {
    scratch.resize(Plans::complex_count(m));
    out.resize(Plans::real_count(m));
    scratch.zero();
    const int n = f.n, half = n / 2;
    fftw_complex* w = scratch.data();
    for (int k1 = -half + 1; k1 < half; ++k1)
        for (int k2 = -half + 1; k2 < half; ++k2)
            for (int k3 = 0; k3 < half; ++k3) {
                const Complex c = f.at(comp, slot_of(k1, n), slot_of(k2, n), slot_of(k3, n));
                if (c == Complex(0.0, 0.0)) continue;
                const std::size_t idx = half_index(m, slot_of(k1, m), slot_of(k2, m), k3);
                w[idx][0] = c.real();
                w[idx][1] = c.imag();
            }
    plans_for(m).inverse(w, out.data());
}

} // namespace fft
} // namespace nslab
