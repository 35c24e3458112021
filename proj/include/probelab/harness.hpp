// harness.hpp
//
// Reproducible Monte Carlo execution. Every trial draws its own seed from
// a counter-based mix of (master_seed, policy, theta, hypothesis, trial),
// so results are independent of execution order and of how many worker
// threads run them; aggregation always walks trials in canonical order.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "probelab/bounds.hpp"
#include "probelab/observation_model.hpp"
#include "probelab/policy.hpp"
#include "probelab/rng.hpp"
#include "probelab/trial_result.hpp"

namespace probelab {

struct ExperimentConfig {
    int m_cells = 2;
    ObservationModel model;
    std::vector<double> theta_grid;
    double s_ratio = 0.0;
    std::vector<PolicyKind> policies;
    std::int64_t trials_per_hypothesis = 1;
    std::vector<double> priors;  // empty means uniform
    std::uint64_t master_seed = 0;
    double max_steps_factor = 20.0;
};

inline void validate_config(const ExperimentConfig& config) {
    if (config.m_cells < 2) throw std::invalid_argument("config: m_cells must be at least 2");
    for (double t : config.theta_grid)
        if (!(t > 0.0) || !std::isfinite(t))
            throw std::invalid_argument("config: theta_grid entries must be positive and finite");
    if (!(config.s_ratio >= 0.0) || !std::isfinite(config.s_ratio))
        throw std::invalid_argument("config: s_ratio must be nonnegative and finite");
    if (config.trials_per_hypothesis < 1)
        throw std::invalid_argument("config: trials_per_hypothesis must be at least 1");
    if (!config.priors.empty()) {
        if (static_cast<int>(config.priors.size()) != config.m_cells)
            throw std::invalid_argument("config: priors must have one entry per cell");
        double sum = 0.0;
        for (double p : config.priors) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw std::invalid_argument("config: priors must be nonnegative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("config: priors must sum to 1 within 1e-12");
    }
    if (!(config.max_steps_factor > 0.0) || !std::isfinite(config.max_steps_factor))
        throw std::invalid_argument("config: max_steps_factor must be positive and finite");
}

inline std::vector<double> effective_priors(const ExperimentConfig& config) {
    if (!config.priors.empty()) return config.priors;
    return std::vector<double>(static_cast<std::size_t>(config.m_cells),
                               1.0 / static_cast<double>(config.m_cells));
}

// Chained bijective mixing of the five inputs; changing any single input
// always yields a different seed.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t policy_index,
                                 std::uint64_t theta_index, std::uint64_t hypothesis,
                                 std::uint64_t trial_index) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ policy_index);
    h = mix64(h ^ theta_index);
    h = mix64(h ^ hypothesis);
    h = mix64(h ^ trial_index);
    return h;
}

// One decide -> sample -> update step record, kept only in verbose mode.
struct TraceStep {
    std::int64_t n = 0;
    int cell = 0;
    int y = 0;
    double llr_value = 0.0;
    std::vector<double> sum_llr;
    bool switched = false;
    int b_size = 0;
};

namespace detail {

inline PolicyDecision decide(const PolicyKind& policy, const ProbeState& state,
                             const CaseDecision& case_dec, const CostParams& cost,
                             const std::vector<double>& lambda_canonical, Rng& rng) {
    switch (policy.family) {
        case PolicyKind::Family::Dbs: return dbs_decide(state, case_dec, cost);
        case PolicyKind::Family::Chernoff: return chernoff_decide(state, cost, lambda_canonical, rng);
        case PolicyKind::Family::Sluggish:
            return sluggish_decide(state, cost, lambda_canonical, policy.sluggish_p, rng);
        case PolicyKind::Family::Dgf: return dgf_decide(state, cost);
    }
    throw std::logic_error("decide: unknown policy family");
}

}  // namespace detail

// Runs one trial: start from the zero state, loop decide -> sample (from g
// when the probed cell hosts the target, f otherwise) -> update, until the
// policy stops or the step cap forces a truncated argmax declaration.
inline TrialResult run_trial(const ExperimentConfig& config, const PolicyKind& policy, double theta,
                             int true_cell, std::uint64_t seed,
                             std::vector<TraceStep>* trace = nullptr) {
    if (true_cell < 0 || true_cell >= config.m_cells)
        throw std::invalid_argument("run_trial: true_cell out of range");
    const CostParams cost(theta, config.s_ratio);
    Rng rng(seed);
    ProbeState state(config.m_cells);
    const CaseDecision case_dec = select_case(cost, config.m_cells, config.model);
    std::vector<double> lambda_canonical;
    if (policy.family == PolicyKind::Family::Chernoff || policy.family == PolicyKind::Family::Sluggish)
        lambda_canonical = chernoff_lambda(config.model, config.m_cells);
    const std::int64_t cap = max_trial_steps(cost, config.m_cells, config.model, config.max_steps_factor);

    TrialResult out;
    out.true_cell = true_cell;
    for (;;) {
        const PolicyDecision d = detail::decide(policy, state, case_dec, cost, lambda_canonical, rng);
        if (d.is_stop()) {
            out.declared = d.cell;
            out.truncated = d.degenerate;
            break;
        }
        if (state.n >= cap) {
            out.declared = argmax_lowest(state.sum_llr);
            out.truncated = true;
            break;
        }
        const Observation y = sample(config.model, d.cell == true_cell ? Dist::G : Dist::F, rng);
        const std::int64_t switches_before = state.switches;
        update_state(state, d.cell, y, config.model);
        if (trace)
            trace->push_back({state.n, d.cell, y.value, llr(config.model, y), state.sum_llr,
                              state.switches != switches_before,
                              static_cast<int>(b_set(state, cost).size())});
    }
    out.tau = state.n;
    out.tau_s = state.switches;
    out.correct = out.declared == out.true_cell;
    return out;
}

struct SweepRow {
    PolicyKind policy;
    int policy_index = 0;
    double theta = 0.0;
    CaseKind case_kind = CaseKind::CaseI;
    std::int64_t trials = 0;
    RiskBreakdown risk;
    double r_lb_scaled = 0.0;
    double switch_ratio = 0.0;  // mean tau_s / mean tau
};

namespace detail {

template <typename Fn>
inline void parallel_for(std::int64_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count < 2) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    const int n_workers = static_cast<int>(std::min<std::int64_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers - 1));
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

}  // namespace detail

// Stratified sweep: trials_per_hypothesis trials for every hypothesis at
// every (policy, theta), aggregated with prior weights. Output rows are
// ordered by policy roster then theta grid, and are byte-identical for a
// fixed config regardless of the thread count.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& config, int threads = 1) {
    validate_config(config);
    const std::vector<double> priors = effective_priors(config);
    const std::int64_t per_hyp = config.trials_per_hypothesis;
    const std::int64_t per_row = static_cast<std::int64_t>(config.m_cells) * per_hyp;

    std::vector<SweepRow> rows;
    rows.reserve(config.policies.size() * config.theta_grid.size());
    for (std::size_t pi = 0; pi < config.policies.size(); ++pi) {
        const PolicyKind& policy = config.policies[pi];
        for (std::size_t ti = 0; ti < config.theta_grid.size(); ++ti) {
            const double theta = config.theta_grid[ti];
            std::vector<TrialResult> results(static_cast<std::size_t>(per_row));
            detail::parallel_for(per_row, threads, [&](std::int64_t idx) {
                const int hyp = static_cast<int>(idx / per_hyp);
                const std::uint64_t trial = static_cast<std::uint64_t>(idx % per_hyp);
                const std::uint64_t seed = derive_seed(config.master_seed, pi, ti,
                                                       static_cast<std::uint64_t>(hyp), trial);
                results[static_cast<std::size_t>(idx)] = run_trial(config, policy, theta, hyp, seed);
            });
            const double rlb = asymptotic_bound(config.model, config.m_cells, theta).r_lb_scaled;
            SweepRow row;
            row.policy = policy;
            row.policy_index = static_cast<int>(pi);
            row.theta = theta;
            row.case_kind = select_case(CostParams(theta, config.s_ratio), config.m_cells, config.model).kind;
            row.trials = per_row;
            row.risk = estimate_risk(results, theta, config.s_ratio, priors, rlb);
            row.r_lb_scaled = rlb;
            row.switch_ratio = row.risk.mean_tau.value > 0.0
                                   ? row.risk.mean_tau_s.value / row.risk.mean_tau.value
                                   : 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace probelab
