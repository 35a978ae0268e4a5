#pragma once

#include "nslab/dynamics.hpp"
#include "nslab/estimates.hpp"

#include <future>
#include <thread>

namespace nslab {

struct CauchyPair {
    int level_a = 0;
    int level_b = 0;
    double lhs = 0.0; ///< int ||grad(u_a - u_b)||_2 dtau
    double rhs = 0.0; ///< int ||PD(u_a - u_b)||_2^(1/2) ||u_a - u_b||_2^(1/2) dtau
    std::vector<double> times;
    std::vector<double> grad_dist; ///< ||grad(u_a - u_b)||_2 per shared field time
};

struct ConvergenceReport {
    std::vector<int> levels;
    std::vector<CauchyPair> pairs;
    std::vector<double> times;
    std::vector<std::uint8_t> converged; ///< per-time T-surrogate flags
    bool interpolation_ok = true;        ///< lhs <= rhs held for every pair
    bool truncated = false;              ///< a level blew up; common valid span used
};

/// Interpolation diagnostic of Eq. (SPC) for one trajectory pair: integrals of
/// ||grad d||_2 and ||PD d||^(1/2) ||d||^(1/2) over the shared sample grid,
/// where d is the (zero-padding aligned) field difference. The per-time
/// inequality ||grad d||^2 <= ||PD d|| ||d|| is spectral Cauchy-Schwarz and is
/// asserted up to round-off.
inline CauchyPair cauchy_diagnostic(const Trajectory& a, const Trajectory& b) {
    CauchyPair pair;
    std::vector<double> lhs_i, rhs_i;
    std::size_t ia = 0, ib = 0;
    while (ia < a.samples.size() && ib < b.samples.size()) {
        const auto& sa = a.samples[ia];
        const auto& sb = b.samples[ib];
        if (std::abs(sa.t - sb.t) > 1e-12 * std::max(1.0, std::abs(sa.t))) {
            if (sa.t < sb.t)
                ++ia;
            else
                ++ib;
            continue;
        }
        if (sa.field && sb.field) {
            const int n_common = std::max(sa.field->n, sb.field->n);
            SpectralField d = resample(*sa.field, n_common);
            d -= resample(*sb.field, n_common);
            const NormBundle nb = norms(d);
            pair.times.push_back(sa.t);
            pair.grad_dist.push_back(nb.dirichlet);
            lhs_i.push_back(nb.dirichlet);
            rhs_i.push_back(std::sqrt(nb.laplacian_l2 * nb.l2));
            const double l2h = nb.dirichlet * nb.dirichlet;
            const double r2h = nb.laplacian_l2 * nb.l2;
            if (l2h > r2h + 1e-11 * std::max(1.0, r2h))
                throw Error("cauchy_diagnostic: interpolation inequality violated");
        }
        ++ia;
        ++ib;
    }
    if (pair.times.size() < 2)
        throw Error("cauchy_diagnostic: mismatched sample grids (fewer than 2 shared field samples)");
    pair.lhs = 0.0;
    pair.rhs = 0.0;
    for (std::size_t i = 1; i < pair.times.size(); ++i) {
        const double h = pair.times[i] - pair.times[i - 1];
        pair.lhs += 0.5 * h * (lhs_i[i] + lhs_i[i - 1]);
        pair.rhs += 0.5 * h * (rhs_i[i] + rhs_i[i - 1]);
    }
    return pair;
}

inline int max_parallel_runs() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("NS_LAB_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) hw = std::min<unsigned>(hw, unsigned(cap));
    }
    return int(hw);
}

/// Run all levels (Galerkin cutoffs or mollifier indices) from the same datum
/// and attest the Cauchy trend of Lemma 4: consecutive-pair diagnostics plus
/// per-time convergence flags (the last two pair distances decrease and the
/// last falls below tol_conv * ||grad v0||_2). Levels run in parallel, capped
/// by NS_LAB_THREADS.
inline ConvergenceReport convergence_sweep(const SolverConfig& base,
                                           const std::vector<int>& levels) {
    if (levels.size() < 3) throw Error("convergence_sweep: need at least 3 levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1])
            throw Error("convergence_sweep: levels must be strictly increasing");

    std::vector<SolverConfig> configs;
    for (int level : levels) {
        SolverConfig c = base;
        if (c.scheme.kind == Scheme::Kind::galerkin)
            c.scheme = Scheme::galerkin(level);
        else
            c.scheme = Scheme::mollified(level);
        if (c.field_every <= 0) c.field_every = c.sample_every;
        configs.push_back(c);
    }

    std::vector<Trajectory> runs(levels.size());
    const int batch = max_parallel_runs();
    for (std::size_t i = 0; i < configs.size(); i += batch) {
        std::vector<std::future<Trajectory>> futs;
        for (std::size_t j = i; j < std::min(configs.size(), i + batch); ++j)
            futs.push_back(std::async(std::launch::async,
                                      [&configs, j] { return run(configs[j]); }));
        for (std::size_t j = i; j < std::min(configs.size(), i + batch); ++j)
            runs[j] = futs[j - i].get();
    }

    ConvergenceReport rep;
    rep.levels = levels;

    double common_end = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
        if (r.samples.empty()) throw Error("convergence_sweep: a level produced no samples");
        if (r.blew_up) rep.truncated = true;
        common_end = std::min(common_end, r.t_end());
    }
    std::vector<Trajectory> clipped = std::move(runs);
    if (rep.truncated)
        for (auto& r : clipped)
            while (!r.samples.empty() && r.samples.back().t > common_end + 1e-12)
                r.samples.pop_back();

    for (std::size_t i = 0; i + 1 < clipped.size(); ++i) {
        CauchyPair p = cauchy_diagnostic(clipped[i], clipped[i + 1]);
        p.level_a = levels[i];
        p.level_b = levels[i + 1];
        if (p.lhs > p.rhs + 1e-11 * std::max(1.0, p.rhs)) rep.interpolation_ok = false;
        rep.pairs.push_back(std::move(p));
    }

    const CauchyPair& prev = rep.pairs[rep.pairs.size() - 2];
    const CauchyPair& last = rep.pairs.back();
    const double grad0 = clipped.front().v0_dirichlet();
    const double tol_abs = base.tol.conv_rel * std::max(grad0, 1e-300);
    rep.times = last.times;
    rep.converged.resize(last.times.size(), 0);
    for (std::size_t i = 0; i < last.times.size(); ++i) {
        const double d_prev = i < prev.grad_dist.size() ? prev.grad_dist[i] : 0.0;
        const double d_last = last.grad_dist[i];
        rep.converged[i] =
            (d_last <= d_prev * (1.0 + 1e-12) && d_last <= tol_abs) ? 1 : 0;
    }
    return rep;
}

} // namespace nslab
