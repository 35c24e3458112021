// bounds.hpp
//
// Asymptotic reference quantities and risk estimation. The effective
// information rate I*(M) is D(g||f) or D(f||g)/(M-1) with the delta-free
// partition (the offset vanishes in the small-c limit), and the scaled
// lower bound on the Bayes risk is theta / I*(M). Also houses the
// brute-force oracles the CLI and acceptance checks compare against.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "probelab/observation_model.hpp"
#include "probelab/policy.hpp"
#include "probelab/rng.hpp"
#include "probelab/trial_result.hpp"

namespace probelab {

inline double i_star(const ObservationModel& model, int m_cells) {
    if (m_cells < 2) throw std::invalid_argument("i_star: need at least two cells");
    const double d_gf = kl_or_infinity(model, KlDirection::GToF);
    const double split = kl_or_infinity(model, KlDirection::FToG) / static_cast<double>(m_cells - 1);
    return d_gf >= split ? d_gf : split;
}

// Lower bound divided by the observation cost: theta / I*(M).
inline double r_lb_scaled(double theta, double i_star_value) {
    if (!(theta > 0.0)) throw std::invalid_argument("r_lb_scaled: theta must be positive");
    if (!(i_star_value > 0.0)) throw std::invalid_argument("r_lb_scaled: i_star must be positive");
    return theta / i_star_value;
}

inline double relative_loss(double risk_scaled, double r_lb) {
    if (!(r_lb > 0.0)) throw std::invalid_argument("relative_loss: bound must be positive");
    return (risk_scaled - r_lb) / r_lb;
}

struct AsymptoticBound {
    double i_star = 0.0;
    double r_lb_scaled = 0.0;  // theta / i_star; 0 when the rate is infinite
};

inline AsymptoticBound asymptotic_bound(const ObservationModel& model, int m_cells, double theta) {
    const double rate = i_star(model, m_cells);
    return {rate, r_lb_scaled(theta, rate)};
}

struct ValueCi {
    double value = 0.0;
    double ci95 = 0.0;  // 95% half-width, normal approximation
};

struct RiskBreakdown {
    ValueCi pe;
    ValueCi mean_tau;
    ValueCi mean_tau_s;
    double risk_scaled = 0.0;    // pe e^theta + E[tau] + s_ratio E[tau_s]
    double relative_loss = 0.0;  // 0 when no positive bound was supplied
    double truncated_fraction = 0.0;
};

// Monte Carlo estimate of the scaled Bayes risk from stratified trials.
// Strata are the true hypotheses; with empty priors each present stratum
// gets equal weight. The pe e^theta term is evaluated in log space so a
// handful of errors at large theta cannot overflow prematurely.
inline RiskBreakdown estimate_risk(const std::vector<TrialResult>& trials, double theta,
                                   double s_ratio, const std::vector<double>& priors = {},
                                   double r_lb = 0.0) {
    if (trials.empty()) throw std::invalid_argument("estimate_risk: no trials");
    if (!(theta > 0.0)) throw std::invalid_argument("estimate_risk: theta must be positive");
    if (!(s_ratio >= 0.0)) throw std::invalid_argument("estimate_risk: s_ratio must be nonnegative");

    int strata = 0;
    for (const auto& t : trials) strata = std::max(strata, t.true_cell + 1);
    if (!priors.empty() && static_cast<int>(priors.size()) < strata)
        throw std::invalid_argument("estimate_risk: priors shorter than hypothesis range");

    struct Acc {
        std::int64_t n = 0, err = 0, trunc = 0;
        double st = 0.0, st2 = 0.0, ss = 0.0, ss2 = 0.0;
    };
    std::vector<Acc> acc(static_cast<std::size_t>(strata));
    for (const auto& t : trials) {
        auto& a = acc[static_cast<std::size_t>(t.true_cell)];
        a.n += 1;
        a.err += t.correct ? 0 : 1;
        a.trunc += t.truncated ? 1 : 0;
        const double tau = static_cast<double>(t.tau);
        const double tau_s = static_cast<double>(t.tau_s);
        a.st += tau;
        a.st2 += tau * tau;
        a.ss += tau_s;
        a.ss2 += tau_s * tau_s;
    }

    int present = 0;
    for (const auto& a : acc) present += a.n > 0 ? 1 : 0;

    double pe = 0.0, var_pe = 0.0;
    double mt = 0.0, var_mt = 0.0;
    double ms = 0.0, var_ms = 0.0;
    double trunc = 0.0;
    for (int m = 0; m < strata; ++m) {
        const auto& a = acc[static_cast<std::size_t>(m)];
        if (a.n == 0) {
            if (!priors.empty() && priors[static_cast<std::size_t>(m)] > 0.0)
                throw std::invalid_argument("estimate_risk: hypothesis with positive prior has no trials");
            continue;
        }
        const double w = priors.empty() ? 1.0 / static_cast<double>(present)
                                        : priors[static_cast<std::size_t>(m)];
        const double n = static_cast<double>(a.n);
        const double p = static_cast<double>(a.err) / n;
        pe += w * p;
        var_pe += w * w * p * (1.0 - p) / n;
        const double mean_t = a.st / n;
        const double svar_t = a.n > 1 ? std::max(0.0, (a.st2 - n * mean_t * mean_t) / (n - 1.0)) : 0.0;
        mt += w * mean_t;
        var_mt += w * w * svar_t / n;
        const double mean_s = a.ss / n;
        const double svar_s = a.n > 1 ? std::max(0.0, (a.ss2 - n * mean_s * mean_s) / (n - 1.0)) : 0.0;
        ms += w * mean_s;
        var_ms += w * w * svar_s / n;
        trunc += w * static_cast<double>(a.trunc) / n;
    }

    RiskBreakdown rb;
    rb.pe = {pe, 1.96 * std::sqrt(var_pe)};
    rb.mean_tau = {mt, 1.96 * std::sqrt(var_mt)};
    rb.mean_tau_s = {ms, 1.96 * std::sqrt(var_ms)};
    rb.truncated_fraction = trunc;
    const double pe_term = pe > 0.0 ? std::exp(theta + std::log(pe)) : 0.0;
    rb.risk_scaled = pe_term + mt + s_ratio * ms;
    rb.relative_loss = r_lb > 0.0 ? relative_loss(rb.risk_scaled, r_lb) : 0.0;
    return rb;
}

// ---- oracles -------------------------------------------------------------

enum class SprtCell { Target, Normal };

// Wald approximation of the single-cell SPRT mean sample size with
// boundaries +-theta: theta over the relevant drift. No overshoot term.
inline double sprt_wald_mean(const ObservationModel& model, double theta, SprtCell which) {
    if (!(theta > 0.0)) throw std::invalid_argument("sprt_wald_mean: theta must be positive");
    const double drift = which == SprtCell::Target ? kl_or_infinity(model, KlDirection::GToF)
                                                   : kl_or_infinity(model, KlDirection::FToG);
    return theta / drift;
}

// Empirical mean stopping time of the same SPRT: sample from g (target)
// or f (normal), accumulate the LLR, stop outside (-theta, theta).
inline double sprt_monte_carlo_mean(const ObservationModel& model, double theta, SprtCell which,
                                    std::int64_t n_trials, Rng& rng) {
    if (!(theta > 0.0)) throw std::invalid_argument("sprt_monte_carlo_mean: theta must be positive");
    if (n_trials < 1) throw std::invalid_argument("sprt_monte_carlo_mean: need at least one trial");
    const Dist source = which == SprtCell::Target ? Dist::G : Dist::F;
    double total = 0.0;
    for (std::int64_t i = 0; i < n_trials; ++i) {
        double s = 0.0;
        std::int64_t steps = 0;
        do {
            s += llr(model, sample(model, source, rng));
            ++steps;
        } while (s <= theta && s >= -theta);
        total += static_cast<double>(steps);
    }
    return total / static_cast<double>(n_trials);
}

// Grid search over the symmetric slice of the action simplex: mass x on
// the ML cell, the rest uniform. Independent of chernoff_lambda; used to
// cross-check it.
inline std::vector<double> chernoff_lambda_grid_search(double d_gf, double d_fg, int m_cells,
                                                       double step = 1e-3) {
    if (m_cells < 2) throw std::invalid_argument("chernoff_lambda_grid_search: need at least two cells");
    if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("chernoff_lambda_grid_search: bad step");
    double best_x = 0.0;
    double best_v = -std::numeric_limits<double>::infinity();
    const std::int64_t n_steps = static_cast<std::int64_t>(std::llround(1.0 / step));
    for (std::int64_t i = 0; i <= n_steps; ++i) {
        const double x = static_cast<double>(i) * step;
        const double rest = (1.0 - x) / static_cast<double>(m_cells - 1);
        const double v = x * d_gf + rest * d_fg;
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    std::vector<double> lam(static_cast<std::size_t>(m_cells),
                            (1.0 - best_x) / static_cast<double>(m_cells - 1));
    lam[0] = best_x;
    return lam;
}

}  // namespace probelab
