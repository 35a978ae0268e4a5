#pragma once

#include "nslab/fft.hpp"
#include "nslab/field.hpp"

namespace nslab {

/// Leray projector: coeff(k) -> (I - k k^T/|k|^2) coeff(k), coeff(0) -> 0.
/// Annihilates gradients, acts as the identity on solenoidal fields.
inline SpectralField leray_project(const SpectralField& f) {
    SpectralField out = f;
    detail::for_each_mode(out.n, [&](int i, int j, int l, int k1, int k2, int k3) {
        const double kk = double(k1) * k1 + double(k2) * k2 + double(k3) * k3;
        if (kk == 0.0) {
            for (int c = 0; c < 3; ++c) out.at(c, i, j, l) = 0.0;
            return;
        }
        const Complex kdotc = static_cast<double>(k1) * out.at(0, i, j, l) +
                              static_cast<double>(k2) * out.at(1, i, j, l) +
                              static_cast<double>(k3) * out.at(2, i, j, l);
        out.at(0, i, j, l) -= double(k1) * (kdotc / kk);
        out.at(1, i, j, l) -= double(k2) * (kdotc / kk);
        out.at(2, i, j, l) -= double(k3) * (kdotc / kk);
    });
    return out;
}

/// Friedrichs mollifier as a radial Fourier multiplier rho(|k|/m) with the
/// Gaussian symbol rho(r) = exp(-r^2/2). rho(0) = 1, 0 < rho <= 1, monotone;
/// the physical kernel is a periodized Gaussian, so the mollifier is also a
/// sup-norm contraction. Commutes with the projector and with -Delta.
inline double mollifier_symbol(double r) { return std::exp(-0.5 * r * r); }

inline SpectralField mollify(const SpectralField& f, double m) {
    if (m < 1.0) throw Error("mollify: index must be >= 1");
    SpectralField out = f;
    detail::for_each_mode(out.n, [&](int i, int j, int l, int k1, int k2, int k3) {
        const double kn = std::sqrt(double(k1) * k1 + double(k2) * k2 + double(k3) * k3);
        const double rho = mollifier_symbol(kn / m);
        for (int c = 0; c < 3; ++c) out.at(c, i, j, l) *= rho;
    });
    return out;
}

/// -Delta multiplier: coeff(k) -> |k|^2 coeff(k) (scaled by `factor`).
inline SpectralField laplacian(const SpectralField& f, double factor = 1.0) {
    SpectralField out = f;
    detail::for_each_mode(out.n, [&](int i, int j, int l, int k1, int k2, int k3) {
        const double kk = factor * (double(k1) * k1 + double(k2) * k2 + double(k3) * k3);
        for (int c = 0; c < 3; ++c) out.at(c, i, j, l) *= kk;
    });
    return out;
}

namespace detail {

struct ConvectionWorkspace {
    fft::RealBuf phys_a[3];
    fft::RealBuf phys_u[3];
    fft::RealBuf prod;
    fft::ComplexBuf spec;
};

inline ConvectionWorkspace& convection_workspace() {
    thread_local ConvectionWorkspace ws;
    return ws;
}

/// (a . grad) u computed pseudospectrally on the 3/2-padded grid in divergence
/// form d_j(a_j u_i), exact for solenoidal a: the result equals the exact
/// Galerkin truncation of the quadratic term. No projection applied.
inline SpectralField convective_raw(const SpectralField& a, const SpectralField& u) {
    if (a.n != u.n) throw Error("convective term: resolution mismatch");
    const int n = u.n;
    const int m = fft::pad_size(n);
    const std::size_t mg = fft::Plans::real_count(m);
    const double inv_m3 = 1.0 / double(mg);
    ConvectionWorkspace& ws = convection_workspace();
    const bool same = &a == &u;

    for (int c = 0; c < 3; ++c) {
        ws.phys_a[c].resize(mg);
        fft::to_physical(a, c, m, ws.spec, ws.phys_a[c]);
        if (!same) {
            ws.phys_u[c].resize(mg);
            fft::to_physical(u, c, m, ws.spec, ws.phys_u[c]);
        }
    }
    const auto u_phys = [&](int c) -> const double* {
        return same ? ws.phys_a[c].data() : ws.phys_u[c].data();
    };

    SpectralField out(n);
    ws.prod.resize(mg);
    const int half = n / 2;
    const auto accumulate = [&](int comp, int kdir) {
        // out_comp(k) += i k_{kdir} FT[a_{kdir} u_comp](k) over retained modes
        const fftw_complex* w = ws.spec.data();
        for (int k1 = -half + 1; k1 < half; ++k1)
            for (int k2 = -half + 1; k2 < half; ++k2)
                for (int k3 = -half + 1; k3 < half; ++k3) {
                    const int k[3] = {k1, k2, k3};
                    const Complex wh = fft::half_mode(w, m, k1, k2, k3);
                    out.at(comp, slot_of(k1, n), slot_of(k2, n), slot_of(k3, n)) +=
                        Complex(0.0, k[kdir] * inv_m3) * wh;
                }
    };

    if (same) {
        // w_ij = u_i u_j is symmetric: 6 forward transforms
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                const double* ui = ws.phys_a[i].data();
                const double* uj = ws.phys_a[j].data();
                for (std::size_t p = 0; p < mg; ++p) ws.prod.data()[p] = ui[p] * uj[p];
                fft::plans_for(m).forward(ws.prod.data(), ws.spec.data());
                accumulate(i, j);
                if (i != j) accumulate(j, i);
            }
    } else {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double* aj = ws.phys_a[j].data();
                const double* ui = u_phys(i);
                for (std::size_t p = 0; p < mg; ++p) ws.prod.data()[p] = aj[p] * ui[p];
                fft::plans_for(m).forward(ws.prod.data(), ws.spec.data());
                accumulate(i, j);
            }
    }
    return out;
}

} // namespace detail

/// P[(advecting . grad) u], dealiased by 3/2-rule zero padding.
inline SpectralField nonlinear_term(const SpectralField& advecting, const SpectralField& u) {
    SpectralField out = leray_project(detail::convective_raw(advecting, u));
    enforce_symmetry(out);
    return out;
}

/// Pressure gradient of the mollified/convective system:
/// (I - P)[-(advecting . grad) u]; a pure gradient field, parallel to k per mode.
inline SpectralField pressure_gradient(const SpectralField& advecting, const SpectralField& u) {
    SpectralField raw = detail::convective_raw(advecting, u);
    enforce_symmetry(raw);
    SpectralField sol = leray_project(raw);
    raw -= sol;
    raw *= -1.0;
    return raw;
}

} // namespace nslab
