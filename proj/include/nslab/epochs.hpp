#pragma once

#include "nslab/estimates.hpp"

namespace nslab {

struct TrajectoryTooShort : Error {
    double required_horizon;
    explicit TrajectoryTooShort(double required)
        : Error("trajectory too short: requires horizon >= " + std::to_string(required) +
                " (= eta^-2 ||v0||_2^4)"),
          required_horizon(required) {}
};

/// Signals a broken energy estimate: no small-Dirichlet time exists although
/// the pigeonhole argument guarantees one.
struct PigeonholeContradiction : Error {
    using Error::Error;
};

/// Pigeonhole horizon theta = eta^-2 ||v0||_2^4.
inline double theta(double v0_l2, double eta) {
    if (!(eta > 0.0)) throw Error("theta: eta must be positive");
    if (v0_l2 < 0.0) throw Error("theta: negative norm");
    const double e2 = v0_l2 * v0_l2;
    return e2 * e2 / (eta * eta);
}

/// Guaranteed regularity-interval length c (||grad v||_2^2 + 1)^-2 from a seed.
inline double local_interval(double grad_l2_sq, double c) {
    if (grad_l2_sq < 0.0) throw Error("local_interval: negative Dirichlet energy");
    if (!(c > 0.0)) throw Error("local_interval: constant must be positive");
    const double d = grad_l2_sq + 1.0;
    return c / (d * d);
}

/// Earliest sample time t^m < theta with ||v0||_2 ||grad v(t^m)||_2 <= eta.
/// If no sample qualifies and the trajectory covers [0, theta), verifies that
/// 2 int_0^theta ||grad v||^2 indeed exceeds ||v0||_2^2 and raises the
/// contradiction as a solver-accuracy error; if coverage is missing, reports
/// the required horizon instead.
inline double find_small_dirichlet_time(const Trajectory& traj, double eta) {
    if (traj.samples.empty()) throw Error("find_small_dirichlet_time: empty trajectory");
    if (!(eta > 0.0)) throw Error("find_small_dirichlet_time: eta must be positive");
    const double v0 = traj.v0_l2();
    const double th = theta(v0, eta);
    for (const auto& s : traj.samples) {
        if (s.t >= th && th > 0.0) break; // t^m lies strictly inside [0, theta)
        if (v0 * s.norms.dirichlet <= eta) return s.t;
    }
    const double t_last = traj.t_end();
    if (t_last + 0.5 * traj.config.dt < th) throw TrajectoryTooShort(th);
    // clipped trapezoid of 2 int_0^theta ||grad v||^2
    double acc = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double t0 = traj.samples[i - 1].t, t1 = std::min(traj.samples[i].t, th);
        if (t1 <= t0) break;
        const double f0 = traj.samples[i - 1].norms.dirichlet * traj.samples[i - 1].norms.dirichlet;
        const double f1 = traj.samples[i].norms.dirichlet * traj.samples[i].norms.dirichlet;
        acc += 0.5 * (t1 - t0) * (f0 + f1);
    }
    throw PigeonholeContradiction(
        "no sample with ||v0||_2 ||grad v||_2 <= eta in [0, theta): 2*int_0^theta ||grad v||^2 = " +
        std::to_string(2.0 * acc) + " vs ||v0||_2^2 = " + std::to_string(v0 * v0) +
        " — energy relation violated by the data");
}

/// Global Riccati bound past theta (DDN-I/II):
///   ||grad v(t)||_2^2 <= eta^2 ||v0||_2^-2 (1 - 2 c eta^2)^-1 for t >= theta,
/// plus the intermediate form seeded at t^m when its bracket is positive.
/// Inapplicable (not an error) when 2 c eta^2 >= 1.
inline InequalityReport riccati_global_bound(const Trajectory& traj, double t_m, double eta,
                                             double c) {
    InequalityReport rep;
    rep.name = "riccati_global";
    if (traj.samples.empty()) throw Error("riccati_global_bound: empty trajectory");
    const double gate = 2.0 * c * eta * eta;
    if (gate >= 1.0) {
        rep.applicable = false;
        rep.note = "not applicable: 2 c eta^2 = " + std::to_string(gate) + " >= 1";
        rep.finalize(0.0);
        return rep;
    }
    const double v0 = traj.v0_l2();
    const double th = theta(v0, eta);
    const double bound = v0 > 0.0 ? eta * eta / (v0 * v0) / (1.0 - gate)
                                  : std::numeric_limits<double>::infinity();

    // intermediate form seeded at t^m
    double mid_bound = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.samples)
        if (s.t >= t_m) {
            const double g2 = s.norms.dirichlet * s.norms.dirichlet;
            const double bracket = 1.0 - c * g2 * s.norms.l2 * s.norms.l2;
            if (bracket > 0.0) mid_bound = g2 / bracket;
            break;
        }

    int checked = 0;
    for (const auto& s : traj.samples) {
        if (s.t < th) continue;
        const double g2 = s.norms.dirichlet * s.norms.dirichlet;
        rep.series.push_back({s.t, g2, std::min(bound, mid_bound)});
        ++checked;
    }
    rep.note = "samples past theta: " + std::to_string(checked) +
               (checked == 0 ? " (holds vacuously)" : "");
    rep.finalize(1e-12 * (1.0 + (std::isfinite(bound) ? bound : 0.0)));
    return rep;
}

/// Discrete stand-in for the set T of times where the cross-level limit
/// property holds: trajectory sample times flagged valid/invalid by the
/// convergence diagnostics.
struct SampledSet {
    std::vector<double> times;
    std::vector<double> dirichlet_sq; ///< ||grad v||_2^2 at each time
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return times.size(); }
};

struct Epoch {
    double start = 0.0;
    double end = 0.0;
    double seed = 0.0;
    double integral_laplacian = std::numeric_limits<double>::quiet_NaN();
    double integral_vt = std::numeric_limits<double>::quiet_NaN();

    double length() const { return end - start; }
};

struct GlobalBoundStatus {
    bool applicable = false;
    bool holds = false;
    double value = std::numeric_limits<double>::quiet_NaN();
};

struct EpochReport {
    double eta = 0.0;
    double theta = 0.0;
    std::optional<double> t_m;
    GlobalBoundStatus global_bound;
    std::vector<Epoch> epochs;
    double uncovered_measure = 0.0;
    double c = 0.0;
};

namespace detail {

/// Empirical right extension of a regularity interval seeded at sample `seed`:
/// the last contiguous valid sample s with ||grad v(s)||^2 under the Riccati
/// majorant g_a / sqrt(1 - 2 c g_a^2 (s - t_a)); invalid samples are skipped
/// (covered but never evaluated).
inline double empirical_extension(const SampledSet& series, std::size_t seed, double c) {
    const double ta = series.times[seed];
    const double ga = series.dirichlet_sq[seed];
    double end = ta;
    for (std::size_t i = seed + 1; i < series.size(); ++i) {
        if (!series.valid[i]) continue;
        const double bracket = 1.0 - 2.0 * c * ga * ga * (series.times[i] - ta);
        if (bracket <= 0.0) break;
        const double majorant = ga / std::sqrt(bracket);
        if (series.dirichlet_sq[i] > majorant * (1.0 + 1e-12)) break;
        end = series.times[i];
    }
    return end - ta;
}

inline void merge_epoch(std::vector<Epoch>& epochs, Epoch e) {
    // seeds arrive in increasing order, so only the tail can overlap
    while (!epochs.empty() && e.start <= epochs.back().end) {
        e.start = std::min(e.start, epochs.back().start);
        e.end = std::max(e.end, epochs.back().end);
        e.seed = epochs.back().seed; // keep the earliest seed
        epochs.pop_back();
    }
    epochs.push_back(e);
}

inline bool cell_covered(const std::vector<Epoch>& epochs, double a, double b) {
    for (const auto& e : epochs)
        if (e.start <= a + 1e-15 && b <= e.end + 1e-15) return true;
    return false;
}

} // namespace detail

/// Construct the epoch cover of [0, theta] by the paper's interval iteration:
/// valid sample times seed intervals [t, t + max(local_interval, empirical
/// extension)], scanned in increasing time order; overlapping or touching
/// intervals merge (disjoint-or-contained rule). Invalid samples cannot seed
/// but may be covered. uncovered_measure is the outer measure, on the sample
/// grid, of the cells of [0, theta] not fully covered. When `terminal_holds`,
/// the terminal epoch (theta, horizon] is appended.
inline EpochReport build_epoch_cover(const SampledSet& series, double theta_val, double c,
                                     double horizon = std::numeric_limits<double>::quiet_NaN(),
                                     bool terminal_holds = false) {
    if (series.size() == 0) throw Error("build_epoch_cover: empty series");
    if (!(c > 0.0)) throw Error("build_epoch_cover: constant must be positive");
    EpochReport rep;
    rep.theta = theta_val;
    rep.c = c;

    std::vector<Epoch> epochs;
    const std::size_t n = series.size();
    double uncovered = 0.0;

    std::size_t cell = 0;
    while (cell + 1 <= n && theta_val > 0.0) {
        const double a = series.times[std::min(cell, n - 1)];
        if (a >= theta_val) break;
        const double b = cell + 1 < n ? std::min(series.times[cell + 1], theta_val) : theta_val;
        if (b <= a) {
            ++cell;
            continue;
        }
        if (detail::cell_covered(epochs, a, b)) {
            ++cell;
            continue;
        }
        // seed at the first valid sample from the cell start onward
        std::size_t seed = cell;
        while (seed < n && (!series.valid[seed] || series.times[seed] >= theta_val)) ++seed;
        if (seed >= n || series.times[seed] >= theta_val) {
            uncovered += b - a; // no seed can ever cover this cell
            ++cell;
            continue;
        }
        const double ts = series.times[seed];
        const double len = std::max(local_interval(series.dirichlet_sq[seed], c),
                                    detail::empirical_extension(series, seed, c));
        detail::merge_epoch(epochs, Epoch{ts, ts + len, ts});
        if (!detail::cell_covered(epochs, a, b)) {
            uncovered += b - a; // the seeded interval was too short for this cell
            ++cell;
        }
    }

    if (terminal_holds && std::isfinite(horizon) && horizon > theta_val)
        detail::merge_epoch(epochs, Epoch{theta_val, horizon, theta_val});

    rep.epochs = std::move(epochs);
    rep.uncovered_measure = std::min(uncovered, theta_val);
    return rep;
}

/// (int ||PDv||_2^2, int ||v_t||_2^2) over an interval inside the trajectory
/// span (trapezoid with linear interpolation at the interval ends).
inline std::pair<double, double> regularity_integrals(const Trajectory& traj, double a,
                                                      double b) {
    if (traj.samples.size() < 2) throw Error("regularity_integrals: need at least 2 samples");
    const double eps = 1e-12 * std::max(1.0, std::abs(traj.t_end()));
    if (a < traj.t_begin() - eps || b > traj.t_end() + eps || b < a)
        throw Error("regularity_integrals: interval outside trajectory span");
    a = std::max(a, traj.t_begin());
    b = std::min(b, traj.t_end());

    const auto value_at = [&](std::size_t i, bool vt) {
        const NormBundle& nb = traj.samples[i].norms;
        const double x = vt ? (nb.has_vt() ? nb.vt_l2 : 0.0) : nb.laplacian_l2;
        return x * x;
    };
    double lap = 0.0, vt = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double t0 = traj.samples[i - 1].t, t1 = traj.samples[i].t;
        const double lo = std::max(a, t0), hi = std::min(b, t1);
        if (hi <= lo) continue;
        const auto clip = [&](bool which) {
            const double f0 = value_at(i - 1, which), f1 = value_at(i, which);
            const double w = (t1 - t0);
            const double g0 = f0 + (f1 - f0) * (lo - t0) / w;
            const double g1 = f0 + (f1 - f0) * (hi - t0) / w;
            return 0.5 * (hi - lo) * (g0 + g1);
        };
        lap += clip(false);
        vt += clip(true);
    }
    return {lap, vt};
}

/// Assemble the full epoch report for a trajectory: pigeonhole time, global
/// Riccati status, cover of [0, theta], per-epoch regularity integrals.
/// `valid_flags` (from the convergence diagnostics) marks the T-surrogate;
/// when absent every sample is treated as valid.
inline EpochReport make_epoch_report(const Trajectory& traj, double eta, double c,
                                     const std::vector<std::uint8_t>* valid_flags = nullptr) {
    if (traj.samples.empty()) throw Error("make_epoch_report: empty trajectory");
    EpochReport rep;
    rep.eta = eta;
    rep.c = c;
    const double v0 = traj.v0_l2();
    rep.theta = theta(v0, eta);

    if (rep.theta > traj.t_end() + 0.5 * traj.config.dt && rep.theta > 0.0)
        throw TrajectoryTooShort(rep.theta);

    const double t_m = find_small_dirichlet_time(traj, eta);
    rep.t_m = t_m;

    InequalityReport glob = riccati_global_bound(traj, t_m, eta, c);
    rep.global_bound.applicable = glob.applicable;
    rep.global_bound.holds = glob.applicable && glob.pass;
    if (glob.applicable && v0 > 0.0)
        rep.global_bound.value = eta * eta / (v0 * v0) / (1.0 - 2.0 * c * eta * eta);

    SampledSet series;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        series.times.push_back(traj.samples[i].t);
        series.dirichlet_sq.push_back(traj.samples[i].norms.dirichlet *
                                      traj.samples[i].norms.dirichlet);
        series.valid.push_back(valid_flags ? (*valid_flags)[i] : std::uint8_t(1));
    }
    EpochReport cover = build_epoch_cover(series, rep.theta, c, traj.t_end(),
                                          rep.global_bound.holds);
    rep.epochs = std::move(cover.epochs);
    rep.uncovered_measure = cover.uncovered_measure;

    for (Epoch& e : rep.epochs) {
        const double a = std::max(e.start, traj.t_begin());
        const double b = std::min(e.end, traj.t_end());
        if (b <= a) continue;
        const auto [lap, vt] = regularity_integrals(traj, a, b);
        e.integral_laplacian = lap;
        e.integral_vt = vt;
    }
    return rep;
}

} // namespace nslab
