// acceptance.cpp
//
// End-to-end acceptance suite. Each numbered criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any criterion fails.
// Invoked by ctest with the CLI binary path and the experiments directory.
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "probelab/bounds.hpp"
#include "probelab/config.hpp"
#include "probelab/csv.hpp"
#include "probelab/harness.hpp"

using namespace probelab;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    if (!ok) ++failures;
}

std::string fd(double v) { return format_double(v); }

int run_cmd(const std::string& cmd) {
    const int raw = std::system(cmd.c_str());
    if (raw == -1) return -1;
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Conservative 95% half-width for the switch ratio (ratio of means).
double ratio_halfwidth(const SweepRow& row) {
    const double mt = row.risk.mean_tau.value;
    return (row.risk.mean_tau_s.ci95 + row.switch_ratio * row.risk.mean_tau.ci95) / mt;
}

// Combined 95% half-width of the scaled risk estimate.
double risk_halfwidth(const SweepRow& row, double s_ratio) {
    const double pe_part =
        row.risk.pe.ci95 > 0.0 ? std::exp(row.theta + std::log(row.risk.pe.ci95)) : 0.0;
    return pe_part + row.risk.mean_tau.ci95 + s_ratio * row.risk.mean_tau_s.ci95;
}

const SweepRow& find_row(const std::vector<SweepRow>& rows, const std::string& label,
                         double theta) {
    for (const auto& r : rows)
        if (r.policy.label() == label && r.theta == theta) return r;
    throw std::logic_error("row not found: " + label + " @ " + fd(theta));
}

// Independent transcription of the two rule sets (see the trial loop's
// dbs_decide) used for the exhaustive state comparison.
PolicyDecision dbs_rules_oracle(const std::vector<double>& s, CaseKind kind, double theta) {
    const int m_cells = static_cast<int>(s.size());
    if (kind == CaseKind::CaseI) {
        int m1 = 0;
        for (int i = 1; i < m_cells; ++i)
            if (s[i] > s[m1]) m1 = i;
        return s[m1] > theta ? PolicyDecision::stop(m1) : PolicyDecision::probe(m1);
    }
    std::vector<bool> in_b(s.size(), false);
    int b_count = 0;
    for (int i = 0; i < m_cells; ++i)
        if (s[i] < -theta) {
            in_b[i] = true;
            ++b_count;
        }
    if (b_count == m_cells) {
        int m1 = 0;
        for (int i = 1; i < m_cells; ++i)
            if (s[i] > s[m1]) m1 = i;
        return PolicyDecision::stop(m1, true);
    }
    if (b_count == m_cells - 1) {
        for (int i = 0; i < m_cells; ++i)
            if (!in_b[i]) return PolicyDecision::stop(i);
    }
    int pick = -1;
    for (int i = 0; i < m_cells; ++i) {
        if (in_b[i]) continue;
        if (pick < 0 || s[i] < s[pick]) pick = i;
    }
    return PolicyDecision::probe(pick);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <cli-binary> <experiments-dir>\n";
        return 2;
    }
    const std::string cli = std::string("\"") + argv[1] + "\"";
    const std::string exp_dir = argv[2];

    ExperimentConfig exp1 = parse_config(exp_dir + "/exp1.json");
    ExperimentConfig exp2 = parse_config(exp_dir + "/exp2.json");
    const int threads = 2;

    // 1. KL reproduction
    {
        const double d_gf_1 = kl(exp1.model, KlDirection::GToF);
        const double split_1 = kl(exp1.model, KlDirection::FToG) / 4.0;
        const double d_gf_2 = kl(exp2.model, KlDirection::GToF);
        const double split_2 = kl(exp2.model, KlDirection::FToG) / 4.0;
        const bool ok = std::abs(d_gf_1 - 6.697) <= 0.05 && std::abs(split_1 - 3.507) <= 0.05 &&
                        std::abs(d_gf_2 - 1.991) <= 0.05 && std::abs(split_2 - 3.301) <= 0.05;
        report(1, "KL reproduction", ok,
               "exp1 D(g||f)=" + fd(d_gf_1) + " D(f||g)/4=" + fd(split_1) + "; exp2 D(g||f)=" +
                   fd(d_gf_2) + " D(f||g)/4=" + fd(split_2));
    }

    // 2. Case-switch point
    {
        const CaseKind at150 = select_case(CostParams(150.0, exp2.s_ratio), 5, exp2.model).kind;
        const CaseKind at151 = select_case(CostParams(151.0, exp2.s_ratio), 5, exp2.model).kind;
        const bool ok = at150 == CaseKind::CaseI && at151 == CaseKind::CaseII;
        report(2, "case flips between theta=150 and 151", ok,
               std::string("theta=150 -> ") + std::string(case_label(at150)) + ", theta=151 -> " +
                   std::string(case_label(at151)));
    }

    // 3. Error-probability bound at theta=5
    {
        ExperimentConfig c = exp1;
        c.theta_grid = {5.0};
        c.policies = {PolicyKind::dbs()};
        c.trials_per_hypothesis = 2000;  // 10^4 stratified trials
        c.master_seed = 1003;
        const auto rows = run_sweep(c, threads);
        const double bound = 2.0 * 4.0 * std::exp(-5.0);
        const bool ok = rows[0].risk.pe.value <= bound;
        report(3, "error probability within the SPRT bound", ok,
               "pe=" + fd(rows[0].risk.pe.value) + " <= " + fd(bound) + " over 10000 trials");
    }

    std::vector<SweepRow> bound_rows;  // pooled for criterion 9

    // 4. Detection-time asymptotics, regime I
    {
        ExperimentConfig c = exp1;
        c.theta_grid = {100.0};
        c.policies = {PolicyKind::dbs()};
        c.trials_per_hypothesis = 1000;
        c.master_seed = 1004;
        const auto rows = run_sweep(c, threads);
        const double floor_steps = 100.0 / kl(exp1.model, KlDirection::GToF);
        const double ratio = rows[0].risk.mean_tau.value / floor_steps;
        const bool ok = ratio >= 1.0 && ratio <= 1.4;
        report(4, "regime-I detection time near theta/D(g||f)", ok,
               "mean_tau=" + fd(rows[0].risk.mean_tau.value) + " ratio=" + fd(ratio) +
                   " in [1.0,1.4]");
        bound_rows.insert(bound_rows.end(), rows.begin(), rows.end());
    }

    // 5 + 6. Regime-II detection time and switch-ratio ordering
    {
        ExperimentConfig c = exp2;
        c.theta_grid = {200.0, 250.0, 300.0};
        c.policies = {PolicyKind::dbs(), PolicyKind::chernoff(), PolicyKind::dgf()};
        c.trials_per_hypothesis = 1000;
        c.master_seed = 1005;
        const auto rows = run_sweep(c, threads);
        bound_rows.insert(bound_rows.end(), rows.begin(), rows.end());

        const auto& dbs250 = find_row(rows, "dbs", 250.0);
        const double floor_steps = 4.0 * 250.0 / kl(exp2.model, KlDirection::FToG);
        const double ratio = dbs250.risk.mean_tau.value / floor_steps;
        const bool ok5 = ratio >= 1.0 && ratio <= 1.35;
        report(5, "regime-II detection time near (M-1)theta/D(f||g)", ok5,
               "mean_tau=" + fd(dbs250.risk.mean_tau.value) + " ratio=" + fd(ratio) +
                   " in [1.0,1.35]");

        bool ok6 = true;
        std::string detail;
        for (double theta : {200.0, 250.0, 300.0}) {
            const auto& dbs = find_row(rows, "dbs", theta);
            const auto& che = find_row(rows, "chernoff", theta);
            const auto& dgf = find_row(rows, "dgf", theta);
            const bool below_che =
                che.switch_ratio - dbs.switch_ratio > ratio_halfwidth(che) + ratio_halfwidth(dbs);
            const bool below_dgf =
                dgf.switch_ratio - dbs.switch_ratio > ratio_halfwidth(dgf) + ratio_halfwidth(dbs);
            ok6 = ok6 && below_che && below_dgf;
            detail += "theta=" + fd(theta) + " dbs=" + fd(dbs.switch_ratio) + " chernoff=" +
                      fd(che.switch_ratio) + " dgf=" + fd(dgf.switch_ratio) + "; ";
        }
        report(6, "switch ratio: dbs below chernoff and dgf", ok6, detail);
    }

    // 7. Sluggish switch ratio near its resample probability
    {
        ExperimentConfig c = exp2;
        c.policies = {PolicyKind::sluggish(0.1)};
        c.trials_per_hypothesis = 1000;
        c.master_seed = 1007;
        const auto rows = run_sweep(c, threads);
        bound_rows.insert(bound_rows.end(), rows.begin(), rows.end());
        bool ok = true;
        std::string detail;
        for (const auto& r : rows) {
            ok = ok && r.switch_ratio >= 0.05 && r.switch_ratio <= 0.11;
            detail += fd(r.theta) + ":" + fd(r.switch_ratio) + " ";
        }
        report(7, "sluggish switch ratio in [0.05,0.11]", ok, detail);
    }

    // 8. Bayes-risk dominance
    {
        ExperimentConfig c = exp2;
        c.theta_grid = {50.0, 100.0, 200.0, 300.0};
        c.trials_per_hypothesis = 1000;
        c.master_seed = 1008;
        const auto rows = run_sweep(c, threads);
        bound_rows.insert(bound_rows.end(), rows.begin(), rows.end());
        bool ok = true;
        std::string detail;
        for (double theta : c.theta_grid) {
            const auto& dbs = find_row(rows, "dbs", theta);
            double best_other = std::numeric_limits<double>::infinity();
            for (const auto& r : rows)
                if (r.theta == theta && r.policy.label() != "dbs")
                    best_other = std::min(best_other, r.risk.relative_loss);
            ok = ok && dbs.risk.relative_loss < best_other;
            detail += "theta=" + fd(theta) + " dbs=" + fd(dbs.risk.relative_loss) +
                      " best_other=" + fd(best_other) + "; ";
        }
        report(8, "dbs has the smallest relative loss", ok, detail);
    }

    // 9. Lower-bound consistency over every sweep row above
    {
        bool ok = true;
        double worst_margin = std::numeric_limits<double>::infinity();
        for (const auto& r : bound_rows) {
            const double slack = 3.0 * risk_halfwidth(r, exp2.s_ratio);
            const double margin = r.risk.risk_scaled - (r.r_lb_scaled - slack);
            worst_margin = std::min(worst_margin, margin);
            ok = ok && margin >= 0.0;
        }
        report(9, "scaled risk never beats the lower bound", ok,
               std::to_string(bound_rows.size()) + " rows, worst margin=" + fd(worst_margin));
    }

    // 10. Oracle equivalence
    {
        bool ok_lambda = true;
        Rng rng(20250808);
        int done = 0;
        while (done < 20) {
            const double lf = 0.05 + 20.0 * rng.uniform01();
            const double lg = 0.05 + 20.0 * rng.uniform01();
            if (std::abs(lf - lg) < 1e-3) continue;
            const int m_cells = 2 + static_cast<int>(rng.next_u64() % 7);
            const auto m = ObservationModel::poisson(lf, lg);
            const double d_gf = kl(m, KlDirection::GToF);
            const double d_fg = kl(m, KlDirection::FToG);
            const double split = d_fg / (m_cells - 1);
            if (std::abs(d_gf - split) < 0.05 * (d_gf + split)) continue;  // flat objective
            const auto closed = chernoff_lambda(m, m_cells);
            const auto grid = chernoff_lambda_grid_search(d_gf, d_fg, m_cells);
            for (std::size_t i = 0; i < closed.size(); ++i)
                ok_lambda = ok_lambda && std::abs(closed[i] - grid[i]) <= 1e-2;
            ++done;
        }

        // exhaustive disjoint-support states: components of S live on
        // {-inf, 0, +inf} with M=3, theta=1; both regimes
        bool ok_states = true;
        const double inf = std::numeric_limits<double>::infinity();
        const double lattice[3] = {-inf, 0.0, inf};
        const CostParams cost(1.0, 10.0);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int cidx = 0; cidx < 3; ++cidx)
                    for (CaseKind kind : {CaseKind::CaseI, CaseKind::CaseII}) {
                        const std::vector<double> s{lattice[a], lattice[b], lattice[cidx]};
                        ProbeState st(3);
                        st.sum_llr = s;
                        const auto got = dbs_decide(st, CaseDecision{0.0, kind}, cost);
                        const auto want = dbs_rules_oracle(s, kind, cost.theta);
                        ok_states = ok_states && got.kind == want.kind && got.cell == want.cell &&
                                    got.degenerate == want.degenerate;
                    }

        // and the disjoint-support model end to end
        bool ok_trials = true;
        ExperimentConfig dc{
            .m_cells = 3,
            .model = ObservationModel::finite_discrete({1.0, 0.0}, {0.0, 1.0}),
            .theta_grid = {1.0},
            .s_ratio = 10.0,
            .policies = {PolicyKind::dbs()},
            .trials_per_hypothesis = 50,
            .priors = {},
            .master_seed = 1010,
            .max_steps_factor = 20.0,
        };
        for (int hyp = 0; hyp < 3; ++hyp)
            for (std::uint64_t t = 0; t < 50; ++t) {
                const auto r = run_trial(dc, PolicyKind::dbs(), 1.0, hyp,
                                         derive_seed(dc.master_seed, 0, 0, hyp, t));
                ok_trials = ok_trials && r.correct && r.tau <= 3;
            }

        report(10, "closed forms match brute-force oracles", ok_lambda && ok_states && ok_trials,
               std::string("lambda grid 20/20 ") + (ok_lambda ? "ok" : "FAIL") + ", 54 states " +
                   (ok_states ? "ok" : "FAIL") + ", disjoint trials " + (ok_trials ? "ok" : "FAIL"));
    }

    // 11. Byte-identical CLI sweeps across runs and thread counts
    {
        const std::string base =
            cli + " sweep --config \"" + exp_dir + "/exp2.json\" --seed 42 --out ";
        const int c1 = run_cmd(base + "acc_sweep_a.csv --threads 1 > acc_sweep_a.log 2>&1");
        const int c2 = run_cmd(base + "acc_sweep_b.csv --threads 4 > acc_sweep_b.log 2>&1");
        const int c3 = run_cmd(base + "acc_sweep_c.csv --threads 1 > acc_sweep_c.log 2>&1");
        const std::string a = slurp("acc_sweep_a.csv");
        const std::string b = slurp("acc_sweep_b.csv");
        const std::string c = slurp("acc_sweep_c.csv");
        const bool ok = c1 == 0 && c2 == 0 && c3 == 0 && !a.empty() && a == b && a == c;
        report(11, "sweep CSV byte-identical across runs and thread counts", ok,
               "bytes=" + std::to_string(a.size()) + " runs=" +
                   (c1 == 0 && c2 == 0 && c3 == 0 ? "ok" : "nonzero exit"));
    }

    std::printf("%d/11 criteria passed\n", 11 - failures);
    return failures == 0 ? 0 : 1;
}
