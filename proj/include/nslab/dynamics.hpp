#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nslab/norms.hpp"
#include "nslab/operators.hpp"

namespace nslab {

struct Scheme {
    enum class Kind { galerkin, mollified };
    Kind kind = Kind::galerkin;
    int cutoff = 0;            ///< spherical mode cutoff K (galerkin)
    int mollifier_index = 1;   ///< m (mollified)

    static Scheme galerkin(int cutoff) { return {Kind::galerkin, cutoff, 1}; }
    static Scheme mollified(int m) { return {Kind::mollified, 0, m}; }

    std::string tag() const {
        return kind == Kind::galerkin ? "galerkin" + std::to_string(cutoff)
                                      : "mollified" + std::to_string(mollifier_index);
    }
};

struct Tolerances {
    double energy_rel = 1e-6;   ///< relative floor of the energy-deficit tolerance
    double energy_c = 1.0;      ///< C in max(energy_rel*E0, C*dt^4*T*E0)
    double ddn_floor = 1e-10;
    double ddn_c = 10.0;        ///< C in max(floor, C*h^2*scale)
    double ds_slack = 1e-9;     ///< round-off slack on the arctan-form inequality
    double weak = 1e-6;
    double conv_rel = 1e-4;     ///< tol_conv relative to ||grad v0||_2
};

struct SolverConfig {
    int resolution = 32;
    Scheme scheme = Scheme::galerkin(8);
    double dt = 1e-3;
    double horizon = 1.0;
    DatumSpec datum;
    int sample_every = 1;       ///< steps per recorded norm sample
    int field_every = 0;        ///< steps per retained field snapshot (0 = none)
    double eta = 1.0;
    double agmon_c = 0.25;      ///< c_A of the Agmon inequality; formulas use 0.5*c_A^4
    double blowup_guard = 1e8;  ///< sup-norm guard; exceeding it truncates the run
    Tolerances tol;

    /// Constant used in the arctan-form majorant, Riccati bounds and (by
    /// default) the epoch interval formula.
    double formula_c() const { return 0.5 * agmon_c * agmon_c * agmon_c * agmon_c; }

    void validate() const {
        std::vector<std::string> bad;
        if (resolution < 4 || resolution % 2 != 0) bad.push_back("N");
        if (!(dt > 0.0)) bad.push_back("dt");
        if (!(horizon > 0.0)) bad.push_back("T");
        if (sample_every < 1) bad.push_back("sample_every");
        if (!(eta > 0.0)) bad.push_back("eta");
        if (scheme.kind == Scheme::Kind::galerkin &&
            (scheme.cutoff < 1 || 3 * scheme.cutoff > resolution))
            bad.push_back("cutoff"); // exactness of the truncated quadratic term needs K <= N/3
        if (scheme.kind == Scheme::Kind::mollified && scheme.mollifier_index < 1)
            bad.push_back("m");
        if (!(blowup_guard > 0.0)) bad.push_back("blowup_guard");
        if (!std::isfinite(datum.amplitude)) bad.push_back("amplitude");
        if (!bad.empty()) {
            std::string msg = "invalid config key(s):";
            for (const auto& k : bad) msg += " " + k;
            throw Error(msg);
        }
    }
};

struct TrajectorySample {
    double t = 0.0;
    NormBundle norms;
    /// RK4-accumulated int_0^t ||grad v||_2^2 dtau (NaN for loaded trajectories).
    double cum_dissipation = std::numeric_limits<double>::quiet_NaN();
    std::optional<SpectralField> field;
};

struct Trajectory {
    SolverConfig config;
    std::vector<TrajectorySample> samples;
    bool blew_up = false;
    double blowup_time = std::numeric_limits<double>::quiet_NaN();
    std::string blowup_reason;
    bool has_exact_dissipation = false;

    bool empty() const { return samples.empty(); }
    double t_begin() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }
    double v0_l2() const { return samples.front().norms.l2; }
    double v0_dirichlet() const { return samples.front().norms.dirichlet; }
};

/// Right-hand side of the Galerkin system (NSG) at cutoff K:
/// rhs = Delta u - P[(u.grad)u] restricted to |k| <= K.
inline SpectralField galerkin_rhs(const SpectralField& u, int cutoff) {
    if (cutoff < 1) throw Error("galerkin_rhs: cutoff must be >= 1");
    if (support_radius(u) > double(cutoff) + 1e-12)
        throw Error("galerkin_rhs: state has support outside cutoff");
    SpectralField rhs = laplacian(u, -1.0);
    rhs -= nonlinear_term(u, u);
    return truncate_modes(rhs, cutoff);
}

/// Right-hand side of the mollified system (NSM):
/// rhs = Delta v - P[(J_m v . grad) v]; the pressure gradient is eliminated by
/// the projector inside the nonlinear term.
inline SpectralField mollified_rhs(const SpectralField& v, double m) {
    if (m < 1.0) throw Error("mollified_rhs: index must be >= 1");
    SpectralField adv = mollify(v, m);
    SpectralField rhs = laplacian(v, -1.0);
    rhs -= nonlinear_term(adv, v);
    return rhs;
}

namespace detail {

/// Nonlinear part only; the viscous part is handled exactly by the
/// integrating factor.
inline SpectralField scheme_nonlinear(const SpectralField& u, const Scheme& s) {
    if (s.kind == Scheme::Kind::galerkin) {
        SpectralField nl = nonlinear_term(u, u);
        nl = truncate_modes(nl, s.cutoff);
        nl *= -1.0;
        return nl;
    }
    SpectralField adv = mollify(u, double(s.mollifier_index));
    SpectralField nl = nonlinear_term(adv, u);
    nl *= -1.0;
    return nl;
}

/// Apply the exact heat multiplier e^{-|k|^2 h}. Multiplier tables are cached
/// per (n, h); a step uses only h/2 and h.
inline void heat_multiply(SpectralField& f, double h) {
    thread_local std::map<std::pair<int, double>, std::vector<double>> cache;
    auto it = cache.find({f.n, h});
    if (it == cache.end()) {
        std::vector<double> table(f.modes());
        for_each_mode(f.n, [&](int i, int j, int l, int k1, int k2, int k3) {
            table[f.flat(i, j, l)] =
                std::exp(-h * (double(k1) * k1 + double(k2) * k2 + double(k3) * k3));
        });
        it = cache.emplace(std::make_pair(f.n, h), std::move(table)).first;
    }
    const std::vector<double>& e = it->second;
    const std::size_t nm = f.modes();
    for (int c = 0; c < 3; ++c)
        for (std::size_t p = 0; p < nm; ++p) f.data[c * nm + p] *= e[p];
}

inline SpectralField heat_multiplied(const SpectralField& f, double h) {
    SpectralField out = f;
    heat_multiply(out, h);
    return out;
}

struct StepResult {
    SpectralField state;
    double dissipation_increment = 0.0; ///< RK4 quadrature of ||grad u||_2^2 over the step
};

/// One integrating-factor classical RK4 step. `k1` may pass a precomputed
/// nonlinear term at the initial state. Throws on non-finite input.
inline StepResult step_ifrk4(const SpectralField& u, double dt, const Scheme& scheme,
                             const SpectralField* k1_opt = nullptr) {
    if (!u.finite()) throw Error("step: state contains NaN/Inf");
    const double h = dt;

    const auto dirichlet_sq = [](const SpectralField& f) {
        double s = 0.0;
        for_each_mode(f.n, [&](int i, int j, int l, int k1, int k2, int k3) {
            const double kk = double(k1) * k1 + double(k2) * k2 + double(k3) * k3;
            s += kk * (std::norm(f.at(0, i, j, l)) + std::norm(f.at(1, i, j, l)) +
                       std::norm(f.at(2, i, j, l)));
        });
        return box_volume * s;
    };

    SpectralField k1 = k1_opt ? *k1_opt : scheme_nonlinear(u, scheme);

    SpectralField ua = u;
    {
        SpectralField tmp = k1;
        tmp *= 0.5 * h;
        ua += tmp;
        heat_multiply(ua, 0.5 * h);
    }
    SpectralField k2 = scheme_nonlinear(ua, scheme);

    SpectralField ub = heat_multiplied(u, 0.5 * h);
    {
        SpectralField tmp = k2;
        tmp *= 0.5 * h;
        ub += tmp;
    }
    SpectralField k3 = scheme_nonlinear(ub, scheme);

    SpectralField uc = heat_multiplied(u, h);
    {
        SpectralField tmp = k3;
        heat_multiply(tmp, 0.5 * h);
        tmp *= h;
        uc += tmp;
    }
    SpectralField k4 = scheme_nonlinear(uc, scheme);

    StepResult r{heat_multiplied(u, h), 0.0};
    {
        SpectralField acc = heat_multiplied(k1, h);
        SpectralField mid = k2;
        mid += k3;
        heat_multiply(mid, 0.5 * h);
        acc += mid;
        acc += mid; // 2 (k2 + k3) e^{-L h/2}
        acc += k4;
        acc *= h / 6.0;
        r.state += acc;
    }
    r.state = leray_project(r.state);
    enforce_symmetry(r.state);

    // the same stage combination integrates the dissipation rate to O(h^4)
    r.dissipation_increment =
        h / 6.0 * (dirichlet_sq(u) + 2.0 * dirichlet_sq(ua) + 2.0 * dirichlet_sq(ub) +
                   dirichlet_sq(uc));
    return r;
}

} // namespace detail

/// Advance one time step with the integrating-factor classical RK4 scheme.
/// The viscous multiplier e^{-|k|^2 dt} is exact; the nonlinear part is
/// explicit; the output is re-projected and symmetry-enforced.
inline SpectralField step(const SpectralField& state, double /*t*/, double dt,
                          const Scheme& scheme) {
    if (!(dt > 0.0)) throw Error("step: dt must be positive");
    return detail::step_ifrk4(state, dt, scheme).state;
}

/// Integrate the configured system to the horizon, recording norm samples (and
/// field snapshots at the field_every cadence). vt_l2 comes from the
/// semi-discrete right-hand side at sample times, never from differencing.
/// Blow-up truncates the trajectory and sets the diagnostic fields.
inline Trajectory run(const SolverConfig& config_in) {
    SolverConfig config = config_in;
    config.validate();

    SpectralField state = make_field(config.datum, config.resolution);
    Scheme scheme = config.scheme;

    if (scheme.kind == Scheme::Kind::galerkin) {
        // the Galerkin datum is the projection onto |k| <= K; integrate on the
        // smallest grid that keeps the truncated quadratic term exact
        state = truncate_modes(state, scheme.cutoff);
        int n_int = 2 * scheme.cutoff + 4;
        n_int += (4 - n_int % 4) % 4;
        n_int = std::min(n_int, config.resolution);
        state = resample(state, n_int);
    }

    Trajectory traj;
    traj.config = config_in;
    traj.has_exact_dissipation = true;

    const long total_steps = std::lround(config.horizon / config.dt);
    if (total_steps < 1) throw Error("run: horizon shorter than one step");

    double cum = 0.0;
    for (long k = 0;; ++k) {
        const double t = k * config.dt;
        const bool last = (k == total_steps);
        const bool sampling = last || (k % config.sample_every == 0);

        if (!state.finite()) {
            traj.blew_up = true;
            traj.blowup_time = t;
            traj.blowup_reason = "non-finite coefficients";
            break;
        }

        std::optional<SpectralField> nl;
        if (sampling) {
            NormBundle nb;
            if (l1_coefficient_sum(state) > config.blowup_guard) {
                traj.blew_up = true;
                traj.blowup_time = t;
                traj.blowup_reason = "sup-norm guard exceeded";
                break;
            }
            nl = detail::scheme_nonlinear(state, scheme);
            SpectralField rhs = laplacian(state, -1.0);
            rhs += *nl;
            nb = norms(state, &rhs);
            nb.t = t;
            TrajectorySample s;
            s.t = t;
            s.norms = nb;
            s.cum_dissipation = cum;
            if (config.field_every > 0 && (k % config.field_every == 0 || last))
                s.field = state;
            traj.samples.push_back(std::move(s));
        }
        if (last) break;

        try {
            detail::StepResult r =
                detail::step_ifrk4(state, config.dt, scheme, nl ? &*nl : nullptr);
            state = std::move(r.state);
            cum += r.dissipation_increment;
        } catch (const Error&) {
            traj.blew_up = true;
            traj.blowup_time = t;
            traj.blowup_reason = "non-finite state during step";
            break;
        }
    }
    return traj;
}

} // namespace nslab
