// csv.hpp
#pragma once

#include <algorithm>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "probelab/harness.hpp"

namespace probelab {

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string_view case_label(CaseKind kind) {
    return kind == CaseKind::CaseI ? "I" : "II";
}

inline constexpr std::string_view kSweepCsvHeader =
    "policy,theta,case,trials,pe,pe_ci95,mean_tau,tau_ci95,mean_tau_s,"
    "switch_ratio,risk_scaled,r_lb_scaled,relative_loss,truncated_frac";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out{kSweepCsvHeader};
    out += '\n';
    for (const auto& r : rows) {
        out += r.policy.label();
        out += ',';
        out += format_double(r.theta);
        out += ',';
        out += case_label(r.case_kind);
        out += ',';
        out += std::to_string(r.trials);
        out += ',';
        out += format_double(r.risk.pe.value);
        out += ',';
        out += format_double(r.risk.pe.ci95);
        out += ',';
        out += format_double(r.risk.mean_tau.value);
        out += ',';
        out += format_double(r.risk.mean_tau.ci95);
        out += ',';
        out += format_double(r.risk.mean_tau_s.value);
        out += ',';
        out += format_double(r.switch_ratio);
        out += ',';
        out += format_double(r.risk.risk_scaled);
        out += ',';
        out += format_double(r.r_lb_scaled);
        out += ',';
        out += format_double(r.risk.relative_loss);
        out += ',';
        out += format_double(r.risk.truncated_fraction);
        out += '\n';
    }
    return out;
}

// Per-theta ranking by relative loss, best first.
inline std::string sweep_summary(const std::vector<SweepRow>& rows) {
    std::vector<double> thetas;
    for (const auto& r : rows)
        if (std::find(thetas.begin(), thetas.end(), r.theta) == thetas.end())
            thetas.push_back(r.theta);

    std::string out;
    for (double theta : thetas) {
        std::vector<const SweepRow*> group;
        for (const auto& r : rows)
            if (r.theta == theta) group.push_back(&r);
        std::sort(group.begin(), group.end(), [](const SweepRow* a, const SweepRow* b) {
            if (a->risk.relative_loss != b->risk.relative_loss)
                return a->risk.relative_loss < b->risk.relative_loss;
            return a->policy_index < b->policy_index;
        });
        out += "theta=" + format_double(theta) + " case=" + std::string(case_label(group.front()->case_kind)) +
               " ranking:";
        bool first = true;
        for (const SweepRow* r : group) {
            out += first ? " " : " | ";
            first = false;
            out += r->policy.label() + " loss=" + format_double(r->risk.relative_loss);
        }
        out += '\n';
    }
    return out;
}

}  // namespace probelab
