#pragma once

#include <optional>

#include "nslab/fft.hpp"
#include "nslab/field.hpp"

namespace nslab {

/// Norms of a velocity field at one instant. laplacian_l2 and d2_l2 coincide on
/// the torus for solenoidal mean-zero fields. `sup` is the collocation-grid
/// maximum of |v| (a lower estimate); `sup_l1` = sum_k |coeff(k)| is a certified
/// upper bound of the true sup norm and is what inequality checks consume.
struct NormBundle {
    double t = 0.0;
    double l2 = 0.0;
    double dirichlet = 0.0;
    double laplacian_l2 = 0.0;
    double d2_l2 = 0.0;
    double sup = 0.0;
    double sup_l1 = 0.0;
    double vt_l2 = std::numeric_limits<double>::quiet_NaN();

    bool has_vt() const { return std::isfinite(vt_l2); }
};

/// Collocation-grid maximum of |v(x)| on the field's own n^3 grid.
inline double grid_sup(const SpectralField& f) {
    const int m = f.n;
    const std::size_t mg = fft::Plans::real_count(m);
    thread_local fft::ComplexBuf scratch;
    thread_local fft::RealBuf phys[3];
    for (int c = 0; c < 3; ++c) fft::to_physical(f, c, m, scratch, phys[c]);
    double best = 0.0;
    for (std::size_t p = 0; p < mg; ++p) {
        const double v2 = phys[0].data()[p] * phys[0].data()[p] +
                          phys[1].data()[p] * phys[1].data()[p] +
                          phys[2].data()[p] * phys[2].data()[p];
        best = std::max(best, v2);
    }
    return std::sqrt(best);
}

/// l1 coefficient sum: sum_k sqrt(|c1|^2+|c2|^2+|c3|^2) >= ||v||_inf.
inline double l1_coefficient_sum(const SpectralField& f) {
    double s = 0.0;
    const std::size_t nm = f.modes();
    for (std::size_t p = 0; p < nm; ++p)
        s += std::sqrt(std::norm(f.data[p]) + std::norm(f.data[p + nm]) +
                       std::norm(f.data[p + 2 * nm]));
    return s;
}

inline NormBundle norms(const SpectralField& f, const SpectralField* f_t = nullptr) {
    NormBundle b;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    detail::for_each_mode(f.n, [&](int i, int j, int l, int k1, int k2, int k3) {
        const double kk = double(k1) * k1 + double(k2) * k2 + double(k3) * k3;
        const double cc = std::norm(f.at(0, i, j, l)) + std::norm(f.at(1, i, j, l)) +
                          std::norm(f.at(2, i, j, l));
        s0 += cc;
        s1 += kk * cc;
        s2 += kk * kk * cc;
    });
    b.l2 = std::sqrt(box_volume * s0);
    b.dirichlet = std::sqrt(box_volume * s1);
    b.laplacian_l2 = std::sqrt(box_volume * s2);
    b.d2_l2 = b.laplacian_l2;
    b.sup = grid_sup(f);
    b.sup_l1 = l1_coefficient_sum(f);
    if (f_t) {
        double st = 0.0;
        for (const Complex& c : f_t->data) st += std::norm(c);
        b.vt_l2 = std::sqrt(box_volume * st);
    }
    return b;
}

} // namespace nslab
