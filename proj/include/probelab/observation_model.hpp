// observation_model.hpp
//
// The pair (f, g) of observation distributions: f governs a normal cell,
// g governs the target cell. Two families are supported: Poisson(lambda)
// and a finite discrete pmf over {0..K}. Everything downstream works on
// natural-log likelihood ratios and the two directed KL divergences.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "probelab/rng.hpp"

namespace probelab {

enum class Dist { F, G };
enum class KlDirection { FToG, GToF };

struct Observation {
    int value = 0;
};

namespace detail {

inline int poisson_knuth(double exp_neg_lambda, Rng& rng) {
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform01();
    } while (p > exp_neg_lambda);
    return k - 1;
}

// Exact for any rate: a Poisson(a + b) draw is the sum of independent
// Poisson(a) and Poisson(b) draws, so large rates are split into chunks
// that keep exp(-lambda) well away from underflow.
inline int sample_poisson(double lambda, Rng& rng) {
    int total = 0;
    while (lambda > 30.0) {
        total += poisson_knuth(std::exp(-30.0), rng);
        lambda -= 30.0;
    }
    return total + poisson_knuth(std::exp(-lambda), rng);
}

}  // namespace detail

class ObservationModel {
public:
    enum class Family { Poisson, FiniteDiscrete };

    static ObservationModel poisson(double lambda_f, double lambda_g) {
        if (!(lambda_f > 0.0) || !std::isfinite(lambda_f) ||
            !(lambda_g > 0.0) || !std::isfinite(lambda_g))
            throw std::invalid_argument("ObservationModel: Poisson rates must be positive and finite");
        ObservationModel m;
        m.family_ = Family::Poisson;
        m.lambda_f_ = lambda_f;
        m.lambda_g_ = lambda_g;
        m.log_lambda_f_ = std::log(lambda_f);
        m.log_lambda_g_ = std::log(lambda_g);
        m.exp_neg_f_ = lambda_f <= 30.0 ? std::exp(-lambda_f) : 0.0;
        m.exp_neg_g_ = lambda_g <= 30.0 ? std::exp(-lambda_g) : 0.0;
        m.require_distinct();
        return m;
    }

    static ObservationModel finite_discrete(std::vector<double> pmf_f, std::vector<double> pmf_g) {
        if (pmf_f.empty() || pmf_f.size() != pmf_g.size())
            throw std::invalid_argument("ObservationModel: pmf vectors must be nonempty and of equal length");
        for (const auto* pmf : {&pmf_f, &pmf_g}) {
            double sum = 0.0;
            for (double p : *pmf) {
                if (!(p >= 0.0) || !std::isfinite(p))
                    throw std::invalid_argument("ObservationModel: pmf entries must be nonnegative and finite");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("ObservationModel: pmf must sum to 1 within 1e-12");
        }
        ObservationModel m;
        m.family_ = Family::FiniteDiscrete;
        m.pmf_f_ = std::move(pmf_f);
        m.pmf_g_ = std::move(pmf_g);
        m.require_distinct();
        return m;
    }

    Family family() const { return family_; }
    double lambda(Dist which) const { return which == Dist::F ? lambda_f_ : lambda_g_; }
    double log_lambda(Dist which) const { return which == Dist::F ? log_lambda_f_ : log_lambda_g_; }
    double exp_neg_lambda(Dist which) const { return which == Dist::F ? exp_neg_f_ : exp_neg_g_; }
    const std::vector<double>& pmf(Dist which) const { return which == Dist::F ? pmf_f_ : pmf_g_; }
    int support_size() const { return static_cast<int>(pmf_f_.size()); }

private:
    ObservationModel() = default;
    void require_distinct();

    Family family_ = Family::Poisson;
    double lambda_f_ = 0.0, lambda_g_ = 0.0;
    double log_lambda_f_ = 0.0, log_lambda_g_ = 0.0;
    double exp_neg_f_ = 0.0, exp_neg_g_ = 0.0;
    std::vector<double> pmf_f_, pmf_g_;
};

inline double log_pmf(const ObservationModel& model, Dist which, Observation y) {
    if (y.value < 0) throw std::domain_error("log_pmf: negative observation");
    if (model.family() == ObservationModel::Family::Poisson) {
        const double lam = model.lambda(which);
        return static_cast<double>(y.value) * model.log_lambda(which) - lam -
               std::lgamma(static_cast<double>(y.value) + 1.0);
    }
    const auto& pmf = model.pmf(which);
    if (y.value >= static_cast<int>(pmf.size()))
        throw std::domain_error("log_pmf: observation outside finite support");
    const double p = pmf[static_cast<std::size_t>(y.value)];
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

// l(y) = log g(y) - log f(y). For Poisson pairs this collapses to
// y (log lg - log lf) + (lf - lg); the lgamma terms cancel.
inline double llr(const ObservationModel& model, Observation y) {
    if (model.family() == ObservationModel::Family::Poisson) {
        if (y.value < 0) throw std::domain_error("llr: negative observation");
        return static_cast<double>(y.value) * (model.log_lambda(Dist::G) - model.log_lambda(Dist::F)) +
               (model.lambda(Dist::F) - model.lambda(Dist::G));
    }
    return log_pmf(model, Dist::G, y) - log_pmf(model, Dist::F, y);
}

inline Observation sample(const ObservationModel& model, Dist which, Rng& rng) {
    if (model.family() == ObservationModel::Family::Poisson) {
        const double lam = model.lambda(which);
        if (lam <= 30.0) return Observation{detail::poisson_knuth(model.exp_neg_lambda(which), rng)};
        return Observation{detail::sample_poisson(lam, rng)};
    }
    const auto& pmf = model.pmf(which);
    const double u = rng.uniform01();
    double cum = 0.0;
    int last_positive = 0;
    for (int y = 0; y < static_cast<int>(pmf.size()); ++y) {
        if (pmf[static_cast<std::size_t>(y)] <= 0.0) continue;
        last_positive = y;
        cum += pmf[static_cast<std::size_t>(y)];
        if (u < cum) return Observation{y};
    }
    return Observation{last_positive};  // cumulative sum rounded below 1
}

// D(f||g) or D(g||f); +infinity when the leading distribution puts mass
// where the other has none (finite family only).
inline double kl_or_infinity(const ObservationModel& model, KlDirection direction) {
    if (model.family() == ObservationModel::Family::Poisson) {
        // D(Pois(a) || Pois(b)) = a log(a/b) + b - a
        const double a = model.lambda(direction == KlDirection::FToG ? Dist::F : Dist::G);
        const double b = model.lambda(direction == KlDirection::FToG ? Dist::G : Dist::F);
        return a * std::log(a / b) + b - a;
    }
    const auto& p = model.pmf(direction == KlDirection::FToG ? Dist::F : Dist::G);
    const auto& q = model.pmf(direction == KlDirection::FToG ? Dist::G : Dist::F);
    double sum = 0.0;
    for (std::size_t y = 0; y < p.size(); ++y) {
        if (p[y] == 0.0) continue;
        if (q[y] == 0.0) return std::numeric_limits<double>::infinity();
        sum += p[y] * std::log(p[y] / q[y]);
    }
    return sum;
}

inline double kl(const ObservationModel& model, KlDirection direction) {
    const double v = kl_or_infinity(model, direction);
    if (!std::isfinite(v))
        throw std::domain_error("kl: divergence is infinite (zero-mass mismatch in finite support)");
    return v;
}

inline void ObservationModel::require_distinct() {
    // f != g; +infinity qualifies as positive (disjoint supports are legal).
    const double d_fg = kl_or_infinity(*this, KlDirection::FToG);
    const double d_gf = kl_or_infinity(*this, KlDirection::GToF);
    if (!(d_fg > 0.0) || !(d_gf > 0.0))
        throw std::invalid_argument("ObservationModel: f and g must differ (both KL divergences positive)");
}

}  // namespace probelab
