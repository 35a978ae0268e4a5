#pragma once

#include <algorithm>
#include <cstdint>

#include "nslab/dynamics.hpp"

namespace nslab {

struct InequalitySample {
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Outcome of one a-priori-inequality check along a trajectory.
/// max_violation is the worst signed margin min_t (rhs - lhs); the check
/// passes iff max_violation >= -tolerance. Violations within tolerance are
/// warnings; a hard failure needs a violation beyond 10x tolerance.
struct InequalityReport {
    std::string name;
    std::vector<InequalitySample> series;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    bool applicable = true;
    std::string note;

    void finalize(double tol) {
        tolerance = tol;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& s : series) worst = std::min(worst, s.rhs - s.lhs);
        max_violation = series.empty() ? 0.0 : worst;
        pass = max_violation >= -tolerance;
    }

    bool hard_failure() const { return max_violation < -10.0 * tolerance; }
};

namespace detail {

inline std::vector<double> sample_times(const Trajectory& traj) {
    std::vector<double> t;
    t.reserve(traj.samples.size());
    for (const auto& s : traj.samples) t.push_back(s.t);
    return t;
}

/// Running trapezoid integral of f over the sample times; out[i] = int_{t0}^{ti}.
inline std::vector<double> running_trapezoid(const std::vector<double>& t,
                                             const std::vector<double>& f) {
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
    return out;
}

/// Composite Simpson on a uniform grid (trailing interval handled by the
/// 3-interval 3/8 rule); trapezoid fallback for non-uniform grids.
inline double integrate_simpson(const std::vector<double>& t, const std::vector<double>& f) {
    const std::size_t n = t.size();
    if (n < 2) return 0.0;
    const double h = t[1] - t[0];
    bool uniform = true;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (std::abs((t[i + 1] - t[i]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
            uniform = false;
            break;
        }
    if (!uniform || n < 4) {
        double s = 0.0;
        for (std::size_t i = 1; i < n; ++i) s += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
        return s;
    }
    std::size_t intervals = n - 1;
    std::size_t simpson_end = intervals % 2 == 0 ? n - 1 : n - 4; // leave 3 for the 3/8 rule
    double s = 0.0;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2)
        s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (intervals % 2 != 0) {
        const std::size_t i = n - 4;
        s += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
    }
    return s;
}

/// Derivative of the 3-point Lagrange interpolant, evaluated at `at`.
/// Second order on uniform and non-uniform stencils alike.
inline double three_point_derivative(double t0, double f0, double t1, double f1, double t2,
                                     double f2, double at) {
    const double g0 = ((at - t1) + (at - t2)) / ((t0 - t1) * (t0 - t2));
    const double g1 = ((at - t0) + (at - t2)) / ((t1 - t0) * (t1 - t2));
    const double g2 = ((at - t0) + (at - t1)) / ((t2 - t0) * (t2 - t1));
    return g0 * f0 + g1 * f1 + g2 * f2;
}

} // namespace detail

/// Energy relation (EW): ||v(t)||_2^2 + 2 int_0^t ||grad v||_2^2 <= ||v0||_2^2,
/// and ||v(t)||_2 nonincreasing, both up to the discrete-energy tolerance
/// max(energy_rel*E0, energy_c*dt^4*T*E0). Solver trajectories carry the
/// RK4-accumulated dissipation integral; loaded ones fall back to trapezoid.
inline InequalityReport energy_check(const Trajectory& traj) {
    if (traj.samples.size() < 2) throw Error("energy_check: need at least 2 samples");
    InequalityReport rep;
    rep.name = "energy";
    const double e0 = traj.v0_l2() * traj.v0_l2();
    const auto t = detail::sample_times(traj);
    std::vector<double> diss(t.size());
    if (traj.has_exact_dissipation) {
        for (std::size_t i = 0; i < t.size(); ++i) diss[i] = traj.samples[i].cum_dissipation;
    } else {
        std::vector<double> d2(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            d2[i] = traj.samples[i].norms.dirichlet * traj.samples[i].norms.dirichlet;
        diss = detail::running_trapezoid(t, d2);
        rep.note = "trapezoid dissipation integral (no solver quadrature available)";
    }
    double mono_violation = 0.0;
    double prev_l2sq = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double l2sq = traj.samples[i].norms.l2 * traj.samples[i].norms.l2;
        rep.series.push_back({t[i], l2sq + 2.0 * diss[i], e0});
        if (i > 0) mono_violation = std::max(mono_violation, l2sq - prev_l2sq);
        prev_l2sq = l2sq;
    }
    const auto& tol = traj.config.tol;
    const double dt = traj.config.dt;
    const double tolerance =
        std::max(tol.energy_rel * e0, tol.energy_c * dt * dt * dt * dt * traj.t_end() * e0);
    rep.finalize(std::max(tolerance, 1e-14));
    if (mono_violation > rep.tolerance) {
        rep.pass = false;
        rep.note += (rep.note.empty() ? "" : "; ") + std::string("||v||_2 not nonincreasing");
    }
    return rep;
}

/// Fractional second-derivative bound (DS): reports int_0^T ||D^2 v||_2^alpha dt
/// and, for alpha = 2/3, checks the arctan-form majorant
///   (1/2)[int ||PDv||^(2/3)]^3 <= [T + int ||grad v||^2]^2
///                                 [arctan(||grad v(0)||^2) + c int ||grad v||^2]
/// with the calibrated constant c = formula_c(). Series are running in T.
inline InequalityReport ds_bound_check(const Trajectory& traj, double alpha = 2.0 / 3.0) {
    if (traj.samples.empty()) throw Error("ds_bound_check: empty trajectory");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw Error("ds_bound_check: alpha must be in (0,2]");
    InequalityReport rep;
    rep.name = "ds_bound";
    const auto t = detail::sample_times(traj);
    std::vector<double> da(t.size()), g2(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        da[i] = std::pow(traj.samples[i].norms.d2_l2, alpha);
        g2[i] = traj.samples[i].norms.dirichlet * traj.samples[i].norms.dirichlet;
    }
    const auto ia = detail::running_trapezoid(t, da);
    const auto ig = detail::running_trapezoid(t, g2);
    const double c = traj.config.formula_c();
    const bool arctan_form = std::abs(alpha - 2.0 / 3.0) < 1e-12;
    double rhs_max = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (arctan_form) {
            const double lhs = 0.5 * ia[i] * ia[i] * ia[i];
            const double span = (t[i] - t[0]) + ig[i];
            const double rhs = span * span * (std::atan(g2[0]) + c * ig[i]);
            rep.series.push_back({t[i], lhs, rhs});
            rhs_max = std::max(rhs_max, rhs);
        } else {
            rep.series.push_back({t[i], ia[i], ia[i]}); // reported value, no majorant
        }
    }
    rep.note = "empirical A(T,||v0||_2) = " + std::to_string(ia.back());
    rep.finalize(traj.config.tol.ds_slack * (1.0 + rhs_max));
    return rep;
}

/// Dirichlet-norm differential inequality (DDN):
///   d/dt ||grad v||^2 + ||PDv||^2 + ||v_t||^2 <= ||v||_inf^2 ||grad v||^2.
/// The derivative uses 3-point stencils (centered inside, one-sided at the
/// ends); ||v||_inf uses the certified l1 bound when available. Tolerance
/// max(ddn_floor, ddn_c * h^2 * scale) covers the differencing error.
inline InequalityReport ddn_residual(const Trajectory& traj) {
    if (traj.samples.size() < 3) throw Error("ddn_residual: need at least 3 samples");
    InequalityReport rep;
    rep.name = "ddn";
    const auto t = detail::sample_times(traj);
    const std::size_t n = t.size();
    std::vector<double> g2(n), lap2(n), vt2(n), supb(n);
    bool have_l1 = true;
    for (std::size_t i = 0; i < n; ++i) {
        const NormBundle& b = traj.samples[i].norms;
        g2[i] = b.dirichlet * b.dirichlet;
        lap2[i] = b.laplacian_l2 * b.laplacian_l2;
        vt2[i] = b.has_vt() ? b.vt_l2 * b.vt_l2 : 0.0;
        if (b.sup_l1 > 0.0 || b.l2 == 0.0)
            supb[i] = b.sup_l1;
        else {
            supb[i] = b.sup;
            have_l1 = false;
        }
    }
    if (!have_l1) rep.note = "grid sup used for ||v||_inf (no l1 bound in input)";
    double scale = 0.0, hmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t a = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
        const double ddt = detail::three_point_derivative(t[a], g2[a], t[a + 1], g2[a + 1],
                                                          t[a + 2], g2[a + 2], t[i]);
        const double lhs = ddt + lap2[i] + vt2[i];
        const double rhs = supb[i] * supb[i] * g2[i];
        rep.series.push_back({t[i], lhs, rhs});
        scale = std::max(scale, lap2[i] + vt2[i] + rhs);
        if (i > 0) hmax = std::max(hmax, t[i] - t[i - 1]);
    }
    const auto& tol = traj.config.tol;
    rep.finalize(std::max(tol.ddn_floor, tol.ddn_c * hmax * hmax * scale));
    return rep;
}

/// Estimate of the Agmon constant in ||g||_inf <= c ||PDg||^(1/2) ||grad g||^(1/2):
/// the max of grid-sup / (||PDg|| ||grad g||)^(1/2) over random solenoidal
/// fields. A lower estimate; callers apply a safety margin (default 0.5).
inline double estimate_agmon_constant(int resolution, int trials, std::uint64_t seed) {
    if (trials < 1) throw Error("estimate_agmon_constant: need at least 1 trial");
    double best = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        DatumSpec spec;
        spec.kind = DatumSpec::Kind::random_field;
        spec.amplitude = 1.0;
        spec.seed = seed + std::uint64_t(trial) * 0x9e3779b97f4a7c15ull;
        // spectral shapes from broadband to nearly single-mode; the steep end
        // supplies the concentrated candidates that maximize the ratio
        spec.slope = -1.0 - (trial % 10) * 0.75;
        const SpectralField f = make_field(spec, resolution);
        const NormBundle b = norms(f);
        const double denom = std::sqrt(b.laplacian_l2 * b.dirichlet);
        if (!(denom > 0.0)) continue; // degenerate sample, skipped
        best = std::max(best, b.sup / denom);
    }
    return best;
}

/// Agmon ratio of a single field (0 for degenerate fields).
inline double agmon_ratio(const NormBundle& b) {
    const double denom = std::sqrt(b.laplacian_l2 * b.dirichlet);
    return denom > 0.0 ? b.sup / denom : 0.0;
}

/// C^1 time window, compactly supported in (t0, t1): sin^2(pi (t-t0)/(t1-t0)).
struct TimeWindow {
    double t0 = 0.0;
    double t1 = 1.0;

    double value(double t) const {
        if (t <= t0 || t >= t1) return 0.0;
        const double s = std::sin(0.5 * two_pi * (t - t0) / (t1 - t0));
        return s * s;
    }
    double derivative(double t) const {
        if (t <= t0 || t >= t1) return 0.0;
        const double w = 0.5 * two_pi / (t1 - t0);
        return w * std::sin(2.0 * w * (t - t0));
    }
};

/// One weak-form test function phi(t,x) = psi(t) a_k(x), where a_k is the real
/// solenoidal mode 2c cos(k.x + phase) e, e a polarization basis vector of the
/// plane orthogonal to k, normalized to ||a_k||_2 = 1.
struct WeakTestFunction {
    Vec3i mode{0, 1, 0};
    int polarization = 0;
    double phase = 0.0;
    TimeWindow window;
};

namespace detail {

inline SpectralField weak_test_field(const WeakTestFunction& w, int resolution) {
    const int k1 = w.mode[0], k2 = w.mode[1], k3 = w.mode[2];
    const int half = resolution / 2;
    if (std::abs(k1) >= half || std::abs(k2) >= half || std::abs(k3) >= half)
        throw Error("weak_form_residual: test mode beyond resolution");
    if (k1 == 0 && k2 == 0 && k3 == 0) throw Error("weak_form_residual: zero test mode");
    const double kk[3] = {double(k1), double(k2), double(k3)};
    const double kn = std::sqrt(kk[0] * kk[0] + kk[1] * kk[1] + kk[2] * kk[2]);
    // orthonormal pair orthogonal to k
    double ref[3] = {1.0, 0.0, 0.0};
    if (std::abs(kk[0]) >= std::abs(kk[1]) && std::abs(kk[0]) >= std::abs(kk[2]))
        ref[0] = 0.0, ref[1] = 1.0;
    double e1[3] = {kk[1] * ref[2] - kk[2] * ref[1], kk[2] * ref[0] - kk[0] * ref[2],
                    kk[0] * ref[1] - kk[1] * ref[0]};
    const double e1n = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (double& x : e1) x /= e1n;
    double e2[3] = {(kk[1] * e1[2] - kk[2] * e1[1]) / kn, (kk[2] * e1[0] - kk[0] * e1[2]) / kn,
                    (kk[0] * e1[1] - kk[1] * e1[0]) / kn};
    const double* e = w.polarization == 0 ? e1 : e2;

    SpectralField a(resolution);
    // a(x) = 2 c cos(k.x + phase) e with ||a||_2 = 1  =>  c = 1/sqrt(2 (2pi)^3)
    const Complex c = std::polar(1.0 / std::sqrt(2.0 * box_volume), w.phase);
    a.set_coeff(k1, k2, k3, {c * e[0], c * e[1], c * e[2]});
    a.set_coeff(-k1, -k2, -k3,
                {std::conj(c) * e[0], std::conj(c) * e[1], std::conj(c) * e[2]});
    return a;
}

} // namespace detail

/// Residual of Definition 2's integral identity against phi = psi(t) a_k(x):
///   int_s^t [psi'(v,a) - psi(grad v, grad a) + psi((v.grad a), v)] dtau
///     + psi(s)(v(s),a) - psi(t)(v(t),a) = 0.
/// Needs field snapshots at every sample. Simpson quadrature in time.
inline InequalityReport weak_form_residual(const Trajectory& traj,
                                           const std::vector<WeakTestFunction>& tests) {
    if (traj.samples.empty()) throw Error("weak_form_residual: empty trajectory");
    for (const auto& s : traj.samples)
        if (!s.field) throw Error("weak_form_residual: trajectory lacks field snapshots");
    InequalityReport rep;
    rep.name = "weak_form";
    const auto t = detail::sample_times(traj);
    const int n_res = traj.samples.front().field->n;
    double scale = std::max(1.0, traj.v0_l2());
    for (const auto& w : tests) {
        const SpectralField a = detail::weak_test_field(w, n_res);
        const SpectralField grad_a = laplacian(a); // (grad v, grad a) = (v, -Delta a)
        std::vector<double> integrand(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const SpectralField& v = *traj.samples[i].field;
            const double psi = w.window.value(t[i]);
            const double dpsi = w.window.derivative(t[i]);
            double term = dpsi * inner_product(v, a) - psi * inner_product(v, grad_a);
            if (psi != 0.0) {
                const SpectralField vgrad_a = nonlinear_term(v, a);
                term += psi * inner_product(vgrad_a, v);
            }
            integrand[i] = term;
        }
        const double integral = detail::integrate_simpson(t, integrand);
        const double boundary = w.window.value(t.front()) *
                                    inner_product(*traj.samples.front().field, a) -
                                w.window.value(t.back()) *
                                    inner_product(*traj.samples.back().field, a);
        const double residual = std::abs(integral + boundary);
        rep.series.push_back({t.back(), residual, 0.0});
    }
    rep.finalize(traj.config.tol.weak * scale);
    return rep;
}

} // namespace nslab
