// policy.hpp
//
// Per-trial decision state and the four probing policies. The bounded-
// switching policy partitions the problem by comparing D(g||f) + delta
// against D(f||g)/(M-1): in the first regime it probes the cell most
// likely to be the target and confirms it; in the second it probes the
// cell that looks most normal and eliminates the M-1 normal cells one
// at a time. The three baselines share a gap stopping rule: stop once
// the largest sum LLR leads the second-largest by theta.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "probelab/observation_model.hpp"
#include "probelab/rng.hpp"

namespace probelab {

// Costs in theta-scale: theta = -log c and s_ratio = s/c. Sweeps reach
// -log c = 300 where c itself underflows a double, so c never appears
// directly; every threshold comparison is against +-theta.
struct CostParams {
    double theta;
    double s_ratio;

    CostParams(double theta_, double s_ratio_) : theta(theta_), s_ratio(s_ratio_) {
        if (!(theta > 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("CostParams: theta must be positive and finite");
        if (!(s_ratio >= 0.0) || !std::isfinite(s_ratio))
            throw std::invalid_argument("CostParams: s_ratio must be nonnegative and finite");
    }
};

enum class CaseKind { CaseI, CaseII };

struct CaseDecision {
    double delta = 0.0;
    CaseKind kind = CaseKind::CaseI;
};

struct PolicyDecision {
    enum class Kind { Probe, Stop };
    Kind kind = Kind::Probe;
    int cell = 0;             // cell to probe, or cell to declare
    bool degenerate = false;  // stop forced by an all-cells-eliminated state

    static PolicyDecision probe(int cell) { return {Kind::Probe, cell, false}; }
    static PolicyDecision stop(int cell, bool degenerate = false) { return {Kind::Stop, cell, degenerate}; }
    bool is_stop() const { return kind == Kind::Stop; }
};

struct PolicyKind {
    enum class Family { Dbs, Chernoff, Sluggish, Dgf };
    Family family = Family::Dbs;
    double sluggish_p = 1.0;  // resample probability, Sluggish only

    static PolicyKind dbs() { return {Family::Dbs, 1.0}; }
    static PolicyKind chernoff() { return {Family::Chernoff, 1.0}; }
    static PolicyKind dgf() { return {Family::Dgf, 1.0}; }
    static PolicyKind sluggish(double p) {
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("PolicyKind: sluggish resample probability must be in (0, 1]");
        return {Family::Sluggish, p};
    }

    std::string label() const {
        switch (family) {
            case Family::Dbs: return "dbs";
            case Family::Chernoff: return "chernoff";
            case Family::Dgf: return "dgf";
            case Family::Sluggish: break;
        }
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, sluggish_p);
        return "sluggish(" + std::string(buf, r.ptr) + ")";
    }
};

// Sum-LLR state of one trial. S[m] accumulates the LLRs of exactly the
// observations drawn from cell m; switches counts steps whose probed cell
// differs from the previous one (the first probe is not a switch).
struct ProbeState {
    static constexpr int kNoAction = -1;

    std::int64_t n = 0;
    std::vector<double> sum_llr;
    std::vector<std::int64_t> probes;
    int last_action = kNoAction;  // kNoAction before the first probe
    std::int64_t switches = 0;

    explicit ProbeState(int m_cells)
        : sum_llr(static_cast<std::size_t>(m_cells), 0.0),
          probes(static_cast<std::size_t>(m_cells), 0) {
        if (m_cells < 1) throw std::invalid_argument("ProbeState: need at least one cell");
    }

    int cells() const { return static_cast<int>(sum_llr.size()); }
};

inline int argmax_lowest(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
    return best;
}

struct TopTwo {
    int best = 0;
    int second = 0;
    double best_value = 0.0;
    double second_value = 0.0;
};

// Largest and second-largest sum LLR, lowest index on ties.
inline TopTwo top_two(const std::vector<double>& values) {
    if (values.size() < 2) throw std::invalid_argument("top_two: need at least two cells");
    TopTwo t;
    t.best = argmax_lowest(values);
    t.best_value = values[static_cast<std::size_t>(t.best)];
    t.second = -1;
    for (int i = 0; i < static_cast<int>(values.size()); ++i) {
        if (i == t.best) continue;
        if (t.second < 0 || values[static_cast<std::size_t>(i)] > t.second_value) {
            t.second = i;
            t.second_value = values[static_cast<std::size_t>(i)];
        }
    }
    return t;
}

// delta = s_ratio (M-2) D(g||f) D(f||g) / ((M-1) theta). Vanishes for
// M = 2 and for zero switching cost; the early returns also keep 0 * inf
// out of the disjoint-support corner.
inline double delta_offset(const CostParams& cost, int m_cells, double d_gf, double d_fg) {
    if (m_cells < 2) throw std::invalid_argument("delta_offset: need at least two cells");
    if (m_cells == 2 || cost.s_ratio == 0.0) return 0.0;
    return cost.s_ratio * static_cast<double>(m_cells - 2) * d_gf * d_fg /
           (static_cast<double>(m_cells - 1) * cost.theta);
}

// Case I iff D(g||f) + delta >= D(f||g)/(M-1); equality goes to Case I.
inline CaseDecision select_case(const CostParams& cost, int m_cells, const ObservationModel& model) {
    const double d_gf = kl_or_infinity(model, KlDirection::GToF);
    const double d_fg = kl_or_infinity(model, KlDirection::FToG);
    const double delta = delta_offset(cost, m_cells, d_gf, d_fg);
    const CaseKind kind = (d_gf + delta >= d_fg / static_cast<double>(m_cells - 1))
                              ? CaseKind::CaseI
                              : CaseKind::CaseII;
    return {delta, kind};
}

// Cells reliably determined normal: {m : S_m < -theta}, strict.
inline std::vector<int> b_set(const ProbeState& state, const CostParams& cost) {
    std::vector<int> out;
    for (int m = 0; m < state.cells(); ++m)
        if (state.sum_llr[static_cast<std::size_t>(m)] < -cost.theta) out.push_back(m);
    return out;
}

inline PolicyDecision dbs_decide(const ProbeState& state, const CaseDecision& case_dec,
                                 const CostParams& cost) {
    const auto& s = state.sum_llr;
    const int m_cells = state.cells();
    if (m_cells < 2) throw std::invalid_argument("dbs_decide: need at least two cells");

    if (case_dec.kind == CaseKind::CaseI) {
        const int best = argmax_lowest(s);
        if (s[static_cast<std::size_t>(best)] > cost.theta) return PolicyDecision::stop(best);
        return PolicyDecision::probe(best);
    }

    int eliminated = 0;
    int survivor = -1;     // first cell not below -theta
    int lowest_alive = -1; // argmin of S over the not-eliminated cells
    for (int m = 0; m < m_cells; ++m) {
        const double v = s[static_cast<std::size_t>(m)];
        if (v < -cost.theta) {
            ++eliminated;
            continue;
        }
        if (survivor < 0) survivor = m;
        if (lowest_alive < 0 || v < s[static_cast<std::size_t>(lowest_alive)]) lowest_alive = m;
    }
    if (eliminated == m_cells)  // even the target crossed below; terminate and flag
        return PolicyDecision::stop(argmax_lowest(s), true);
    if (eliminated == m_cells - 1) return PolicyDecision::stop(survivor);
    return PolicyDecision::probe(lowest_alive);
}

// Maxmin action distribution in canonical order: position 0 is the current
// ML cell, positions 1..M-1 the remaining cells in index order. The inner
// minimum over rival cells makes the uniform split of the non-ML mass
// optimal, so the objective is linear in the ML mass and the optimum sits
// at a simplex corner: everything on the ML cell when D(g||f) >=
// D(f||g)/(M-1), otherwise uniform over the others.
inline std::vector<double> chernoff_lambda(const ObservationModel& model, int m_cells) {
    if (m_cells < 2) throw std::invalid_argument("chernoff_lambda: need at least two cells");
    const double d_gf = kl_or_infinity(model, KlDirection::GToF);
    const double d_fg = kl_or_infinity(model, KlDirection::FToG);
    std::vector<double> lam(static_cast<std::size_t>(m_cells), 0.0);
    if (d_gf >= d_fg / static_cast<double>(m_cells - 1))
        lam[0] = 1.0;
    else
        std::fill(lam.begin() + 1, lam.end(), 1.0 / static_cast<double>(m_cells - 1));
    return lam;
}

namespace detail {

// Map a draw from the canonical action distribution onto concrete cells
// for the current ML cell.
inline int draw_mapped_action(const std::vector<double>& lambda_canonical, int ml_cell, Rng& rng) {
    const int m_cells = static_cast<int>(lambda_canonical.size());
    const double u = rng.uniform01();
    double cum = 0.0;
    int chosen_pos = -1;
    int last_positive_pos = 0;
    for (int pos = 0; pos < m_cells; ++pos) {
        const double w = lambda_canonical[static_cast<std::size_t>(pos)];
        if (w <= 0.0) continue;
        last_positive_pos = pos;
        cum += w;
        if (u < cum) {
            chosen_pos = pos;
            break;
        }
    }
    if (chosen_pos < 0) chosen_pos = last_positive_pos;
    if (chosen_pos == 0) return ml_cell;
    // positions 1.. enumerate the non-ML cells in increasing index order
    int count = 0;
    for (int cell = 0; cell < m_cells; ++cell) {
        if (cell == ml_cell) continue;
        ++count;
        if (count == chosen_pos) return cell;
    }
    return ml_cell;
}

}  // namespace detail

inline PolicyDecision chernoff_decide(const ProbeState& state, const CostParams& cost,
                                      const std::vector<double>& lambda_canonical, Rng& rng) {
    const TopTwo t = top_two(state.sum_llr);
    if (t.best_value - t.second_value >= cost.theta) return PolicyDecision::stop(t.best);
    return PolicyDecision::probe(detail::draw_mapped_action(lambda_canonical, t.best, rng));
}

inline PolicyDecision sluggish_decide(const ProbeState& state, const CostParams& cost,
                                      const std::vector<double>& lambda_canonical, double p,
                                      Rng& rng) {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("sluggish_decide: resample probability must be in (0, 1]");
    const TopTwo t = top_two(state.sum_llr);
    if (t.best_value - t.second_value >= cost.theta) return PolicyDecision::stop(t.best);
    // First step resamples unconditionally; p = 1 consumes no Bernoulli
    // draw and is stream-identical to chernoff_decide.
    if (state.last_action == ProbeState::kNoAction || p >= 1.0 || rng.bernoulli(p))
        return PolicyDecision::probe(detail::draw_mapped_action(lambda_canonical, t.best, rng));
    return PolicyDecision::probe(state.last_action);
}

inline PolicyDecision dgf_decide(const ProbeState& state, const CostParams& cost) {
    const TopTwo t = top_two(state.sum_llr);
    if (t.best_value - t.second_value >= cost.theta) return PolicyDecision::stop(t.best);
    return PolicyDecision::probe(t.second);
}

inline void update_state(ProbeState& state, int cell, Observation y, const ObservationModel& model) {
    if (cell < 0 || cell >= state.cells()) throw std::invalid_argument("update_state: cell out of range");
    state.sum_llr[static_cast<std::size_t>(cell)] += llr(model, y);
    state.probes[static_cast<std::size_t>(cell)] += 1;
    state.n += 1;
    if (state.last_action != ProbeState::kNoAction && state.last_action != cell) state.switches += 1;
    state.last_action = cell;
}

// Safety cap: factor (M-1) theta / min(KL). The floor keeps degenerate
// models with an infinite divergence runnable (they identify cells in at
// most M observations).
inline std::int64_t max_trial_steps(const CostParams& cost, int m_cells,
                                    const ObservationModel& model, double factor = 20.0) {
    if (!(factor > 0.0)) throw std::invalid_argument("max_trial_steps: factor must be positive");
    const std::int64_t floor_steps = 4 * static_cast<std::int64_t>(m_cells);
    const double rate = std::min(kl_or_infinity(model, KlDirection::GToF),
                                 kl_or_infinity(model, KlDirection::FToG));
    if (!std::isfinite(rate)) return floor_steps;
    const double raw = std::ceil(factor * static_cast<double>(m_cells - 1) * cost.theta / rate);
    return std::max(floor_steps, static_cast<std::int64_t>(raw));
}

}  // namespace probelab
