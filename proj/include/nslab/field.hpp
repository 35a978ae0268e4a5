#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nslab {

inline constexpr double two_pi = 6.28318530717958647692528676656;
/// Volume of the periodic box [0, 2*pi)^3.
inline constexpr double box_volume = two_pi * two_pi * two_pi;

using Complex = std::complex<double>;
using Vec3c = std::array<Complex, 3>;
using Vec3i = std::array<int, 3>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Wavenumber carried by FFT slot `idx` on an n-point axis: 0,1,...,n/2,-n/2+1,...,-1.
inline int wavenumber(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

/// FFT slot for wavenumber k in [-n/2+1, n/2].
inline int slot_of(int k, int n) { return k >= 0 ? k : k + n; }

/// Truncated Fourier representation of a vector field on the torus.
///
/// Coefficients are stored component-major over the full n^3 mode cube,
/// k_i in {-n/2+1, ..., n/2}. The named operations keep three invariants:
/// Hermitian symmetry (the field is real-valued), zero mean, and a zero
/// Nyquist plane (k_i = n/2), so spectral derivatives stay real-valued.
/// Divergence-freeness is established by leray_project / make_field and
/// preserved by every operator that claims a solenoidal output.
struct SpectralField {
    int n = 0;
    std::vector<Complex> data;

    SpectralField() = default;
    explicit SpectralField(int resolution) : n(resolution) {
        if (n < 4 || n % 2 != 0)
            throw Error("SpectralField: resolution must be even and >= 4, got " + std::to_string(n));
        data.assign(static_cast<std::size_t>(3) * n * n * n, Complex(0.0, 0.0));
    }

    std::size_t modes() const { return static_cast<std::size_t>(n) * n * n; }

    std::size_t flat(int i, int j, int l) const {
        return (static_cast<std::size_t>(i) * n + j) * n + l;
    }

    Complex& at(int comp, int i, int j, int l) { return data[comp * modes() + flat(i, j, l)]; }
    const Complex& at(int comp, int i, int j, int l) const {
        return data[comp * modes() + flat(i, j, l)];
    }

    /// Coefficient vector at wavevector k (components in [-n/2+1, n/2]).
    Vec3c coeff(int k1, int k2, int k3) const {
        const int i = slot_of(k1, n), j = slot_of(k2, n), l = slot_of(k3, n);
        return {at(0, i, j, l), at(1, i, j, l), at(2, i, j, l)};
    }

    void set_coeff(int k1, int k2, int k3, const Vec3c& c) {
        const int i = slot_of(k1, n), j = slot_of(k2, n), l = slot_of(k3, n);
        at(0, i, j, l) = c[0];
        at(1, i, j, l) = c[1];
        at(2, i, j, l) = c[2];
    }

    bool finite() const {
        for (const Complex& c : data)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }
};

namespace detail {

template <typename F>
void for_each_mode(int n, F&& f) {
    for (int i = 0; i < n; ++i) {
        const int k1 = wavenumber(i, n);
        for (int j = 0; j < n; ++j) {
            const int k2 = wavenumber(j, n);
            for (int l = 0; l < n; ++l) f(i, j, l, k1, k2, wavenumber(l, n));
        }
    }
}

} // namespace detail

/// Zero the mean mode, the Nyquist planes, and symmetrize coeff(-k) = conj(coeff(k)).
inline void enforce_symmetry(SpectralField& f) {
    const int n = f.n, half = n / 2;
    for (int c = 0; c < 3; ++c) {
        f.at(c, 0, 0, 0) = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                f.at(c, half, i, j) = 0.0;
                f.at(c, i, half, j) = 0.0;
                f.at(c, i, j, half) = 0.0;
            }
    }
    detail::for_each_mode(n, [&](int i, int j, int l, int k1, int k2, int k3) {
        // visit each +/-k pair once
        if (k3 < 0 || (k3 == 0 && (k2 < 0 || (k2 == 0 && k1 < 0)))) return;
        if (k1 == 0 && k2 == 0 && k3 == 0) return;
        const int mi = slot_of(-k1, n), mj = slot_of(-k2, n), ml = slot_of(-k3, n);
        for (int c = 0; c < 3; ++c) {
            const Complex avg = 0.5 * (f.at(c, i, j, l) + std::conj(f.at(c, mi, mj, ml)));
            f.at(c, i, j, l) = avg;
            f.at(c, mi, mj, ml) = std::conj(avg);
        }
    });
}

/// Largest |coeff(k) + conj(coeff(-k))|/2 deviation, relative to the coefficient scale.
inline double hermitian_defect(const SpectralField& f) {
    double worst = 0.0, scale = 0.0;
    detail::for_each_mode(f.n, [&](int i, int j, int l, int k1, int k2, int k3) {
        const int mi = slot_of(-k1, f.n), mj = slot_of(-k2, f.n), ml = slot_of(-k3, f.n);
        for (int c = 0; c < 3; ++c) {
            const Complex a = f.at(c, i, j, l);
            scale = std::max(scale, std::abs(a));
            worst = std::max(worst, std::abs(a - std::conj(f.at(c, mi, mj, ml))));
        }
    });
    return scale > 0.0 ? worst / scale : 0.0;
}

/// Largest |k . coeff(k)| relative to |k| |coeff(k)| scale.
inline double divergence_defect(const SpectralField& f) {
    double worst = 0.0, scale = 0.0;
    detail::for_each_mode(f.n, [&](int i, int j, int l, int k1, int k2, int k3) {
        const Complex d = static_cast<double>(k1) * f.at(0, i, j, l) +
                          static_cast<double>(k2) * f.at(1, i, j, l) +
                          static_cast<double>(k3) * f.at(2, i, j, l);
        const double kn = std::sqrt(double(k1) * k1 + double(k2) * k2 + double(k3) * k3);
        const double cn = std::sqrt(std::norm(f.at(0, i, j, l)) + std::norm(f.at(1, i, j, l)) +
                                    std::norm(f.at(2, i, j, l)));
        worst = std::max(worst, std::abs(d));
        scale = std::max(scale, kn * cn);
    });
    return scale > 0.0 ? worst / scale : 0.0;
}

inline double mean_mode_magnitude(const SpectralField& f) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(f.at(c, 0, 0, 0)));
    return m;
}

/// Initial-datum descriptor for make_field.
struct DatumSpec {
    enum class Kind { zero, kolmogorov, taylor_green, random_field };
    Kind kind = Kind::zero;
    double amplitude = 1.0;     ///< preset amplitude a; L2 norm target for random data
    std::uint64_t seed = 1;     ///< random data only
    double slope = -2.0;        ///< spectral slope for random data, |coeff| ~ |k|^slope

    static DatumSpec parse(const std::string& name, double amplitude, std::uint64_t seed,
                           double slope) {
        DatumSpec d;
        d.amplitude = amplitude;
        d.seed = seed;
        d.slope = slope;
        if (name == "zero")
            d.kind = Kind::zero;
        else if (name == "kolmogorov")
            d.kind = Kind::kolmogorov;
        else if (name == "taylor_green")
            d.kind = Kind::taylor_green;
        else if (name == "random")
            d.kind = Kind::random_field;
        else
            throw Error("unknown preset '" + name + "'");
        return d;
    }

    std::string name() const {
        switch (kind) {
            case Kind::zero: return "zero";
            case Kind::kolmogorov: return "kolmogorov";
            case Kind::taylor_green: return "taylor_green";
            case Kind::random_field: return "random";
        }
        return "?";
    }
};

namespace detail {

/// Deterministic standard normal from a seeded mt19937_64 (Box-Muller; the
/// standard library distributions are implementation-defined).
class NormalSampler {
  public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(two_pi * u2);
        have_ = true;
        return r * std::cos(two_pi * u2);
    }

  private:
    double uniform() {
        return (gen_() >> 11) * (1.0 / 9007199254740992.0); // 53-bit mantissa in [0,1)
    }
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_ = false;
};

} // namespace detail

inline double l2_norm_squared(const SpectralField& f) {
    double s = 0.0;
    for (const Complex& c : f.data) s += std::norm(c);
    return box_volume * s;
}

/// Build an initial datum on an n^3 mode cube.
///
/// Presets: zero; kolmogorov(a) = (a sin x2, 0, 0);
/// taylor_green(a) = (a sin x1 cos x2 cos x3, -a cos x1 sin x2 cos x3, 0);
/// random(seed, slope, amplitude): solenoidal Gaussian modes with |coeff| ~ |k|^slope
/// for 0 < |k| <= max(1, n/3), rescaled so that ||v||_2 = amplitude.
inline SpectralField make_field(const DatumSpec& spec, int n) {
    if (n < 4 || n % 2 != 0)
        throw Error("make_field: resolution must be even and >= 4, got " + std::to_string(n));
    if (!std::isfinite(spec.amplitude)) throw Error("make_field: amplitude is not finite");
    SpectralField f(n);
    const double a = spec.amplitude;
    switch (spec.kind) {
        case DatumSpec::Kind::zero: break;
        case DatumSpec::Kind::kolmogorov: {
            // a sin x2 e1 = a/(2i) e^{i x2} e1 + c.c.
            const Complex c(0.0, -0.5 * a);
            f.set_coeff(0, 1, 0, {c, 0.0, 0.0});
            f.set_coeff(0, -1, 0, {std::conj(c), 0.0, 0.0});
            break;
        }
        case DatumSpec::Kind::taylor_green: {
            for (int s1 : {-1, 1})
                for (int s2 : {-1, 1})
                    for (int s3 : {-1, 1}) {
                        const Complex c1(0.0, -a * s1 / 8.0);
                        const Complex c2(0.0, a * s2 / 8.0);
                        f.set_coeff(s1, s2, s3, {c1, c2, 0.0});
                    }
            break;
        }
        case DatumSpec::Kind::random_field: {
            detail::NormalSampler normal(spec.seed);
            const int kmax = std::max(1, n / 3);
            for (int k1 = -kmax; k1 <= kmax; ++k1)
                for (int k2 = -kmax; k2 <= kmax; ++k2)
                    for (int k3 = -kmax; k3 <= kmax; ++k3) {
                        const double k2sum = double(k1) * k1 + double(k2) * k2 + double(k3) * k3;
                        if (k2sum == 0.0 || k2sum > double(kmax) * kmax) continue;
                        const double mag = std::pow(std::sqrt(k2sum), spec.slope);
                        Vec3c c;
                        for (int comp = 0; comp < 3; ++comp)
                            c[comp] = mag * Complex(normal(), normal());
                        f.set_coeff(k1, k2, k3, c);
                    }
            enforce_symmetry(f);
            // project onto solenoidal modes in place (leray_project lives downstream;
            // data construction must not depend on it)
            detail::for_each_mode(n, [&](int i, int j, int l, int q1, int q2, int q3) {
                const double kk = double(q1) * q1 + double(q2) * q2 + double(q3) * q3;
                if (kk == 0.0) return;
                const Complex kdotc = static_cast<double>(q1) * f.at(0, i, j, l) +
                                      static_cast<double>(q2) * f.at(1, i, j, l) +
                                      static_cast<double>(q3) * f.at(2, i, j, l);
                f.at(0, i, j, l) -= double(q1) * (kdotc / kk);
                f.at(1, i, j, l) -= double(q2) * (kdotc / kk);
                f.at(2, i, j, l) -= double(q3) * (kdotc / kk);
            });
            const double norm = std::sqrt(l2_norm_squared(f));
            if (norm > 0.0 && a >= 0.0) {
                const double scale = a / norm;
                for (Complex& c : f.data) c *= scale;
            }
            break;
        }
    }
    enforce_symmetry(f);
    return f;
}

/// Zero-pad or truncate a field to a new resolution; shared modes are copied
/// verbatim, so padding preserves every norm exactly.
inline SpectralField resample(const SpectralField& f, int n_new) {
    if (n_new == f.n) return f;
    SpectralField out(n_new);
    const int kmax = std::min(f.n, n_new) / 2 - 1;
    for (int k1 = -kmax; k1 <= kmax; ++k1)
        for (int k2 = -kmax; k2 <= kmax; ++k2)
            for (int k3 = -kmax; k3 <= kmax; ++k3) out.set_coeff(k1, k2, k3, f.coeff(k1, k2, k3));
    return out;
}

/// Drop all modes with |k| > cutoff (spherical Galerkin truncation).
inline SpectralField truncate_modes(const SpectralField& f, int cutoff) {
    SpectralField out(f.n);
    const double c2 = double(cutoff) * cutoff;
    detail::for_each_mode(f.n, [&](int i, int j, int l, int k1, int k2, int k3) {
        if (double(k1) * k1 + double(k2) * k2 + double(k3) * k3 > c2) return;
        for (int c = 0; c < 3; ++c) out.at(c, i, j, l) = f.at(c, i, j, l);
    });
    return out;
}

/// Largest |k| with a nonzero coefficient (0 for the zero field).
inline double support_radius(const SpectralField& f) {
    double r2 = 0.0;
    detail::for_each_mode(f.n, [&](int i, int j, int l, int k1, int k2, int k3) {
        for (int c = 0; c < 3; ++c)
            if (f.at(c, i, j, l) != Complex(0.0, 0.0)) {
                r2 = std::max(r2, double(k1) * k1 + double(k2) * k2 + double(k3) * k3);
                return;
            }
    });
    return std::sqrt(r2);
}

inline SpectralField& operator+=(SpectralField& a, const SpectralField& b) {
    if (a.n != b.n) throw Error("field resolution mismatch");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
    return a;
}

inline SpectralField& operator-=(SpectralField& a, const SpectralField& b) {
    if (a.n != b.n) throw Error("field resolution mismatch");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= b.data[i];
    return a;
}

inline SpectralField& operator*=(SpectralField& a, double s) {
    for (Complex& c : a.data) c *= s;
    return a;
}

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

/// Spectral L2 inner product (v, w) = (2*pi)^3 sum_k coeff_v(k) . conj(coeff_w(k)).
inline double inner_product(const SpectralField& a, const SpectralField& b) {
    if (a.n != b.n) throw Error("field resolution mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        s += a.data[i].real() * b.data[i].real() + a.data[i].imag() * b.data[i].imag();
    return box_volume * s;
}

} // namespace nslab
