// probelab_main.cpp
//
// Command-line front end:
//   sweep       run a Monte Carlo sweep over (policy, theta) and write CSV
//   case-check  report the selection-regime criterion per theta
//   trial       run a single trial with a verbose per-step trace
//   oracle      compare closed forms against brute-force references
//
// Exit codes: 0 success, 1 usage/config error, 2 oracle tolerance failure.
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "probelab/bounds.hpp"
#include "probelab/config.hpp"
#include "probelab/csv.hpp"
#include "probelab/harness.hpp"

namespace {

using namespace probelab;

PolicyKind policy_from_name(const std::string& name, double sluggish_p) {
    if (name == "dbs") return PolicyKind::dbs();
    if (name == "chernoff") return PolicyKind::chernoff();
    if (name == "dgf") return PolicyKind::dgf();
    if (name == "sluggish") return PolicyKind::sluggish(sluggish_p);
    throw std::invalid_argument("unknown policy '" + name + "'");
}

int cmd_sweep(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::int64_t> trials, const std::string& out_path, int threads) {
    ExperimentConfig config = parse_config(config_path);
    if (seed) config.master_seed = *seed;
    if (trials) {
        config.trials_per_hypothesis = *trials;
        validate_config(config);
    }

    const std::vector<SweepRow> rows = run_sweep(config, threads);
    const std::string csv = sweep_csv(rows);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open output path '" << out_path << "'\n";
        return 1;
    }
    out << csv;
    out.flush();
    if (!out) {
        std::cerr << "error: failed writing '" << out_path << "'\n";
        return 1;
    }

    std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
    std::cout << sweep_summary(rows);
    return 0;
}

int cmd_case_check(const std::string& config_path) {
    const ExperimentConfig config = parse_config(config_path);
    const double d_gf = kl_or_infinity(config.model, KlDirection::GToF);
    const double d_fg = kl_or_infinity(config.model, KlDirection::FToG);
    const double split = d_fg / static_cast<double>(config.m_cells - 1);

    auto kind_at = [&](double theta) {
        return select_case(CostParams(theta, config.s_ratio), config.m_cells, config.model).kind;
    };

    std::cout << "theta,delta,d_gf_plus_delta,d_fg_over_m_minus_1,case\n";
    for (std::size_t i = 0; i < config.theta_grid.size(); ++i) {
        const double theta = config.theta_grid[i];
        const CaseDecision dec = select_case(CostParams(theta, config.s_ratio), config.m_cells, config.model);
        std::cout << format_double(theta) << ',' << format_double(dec.delta) << ','
                  << format_double(d_gf + dec.delta) << ',' << format_double(split) << ','
                  << case_label(dec.kind) << '\n';
        if (i > 0) {
            const double prev = config.theta_grid[i - 1];
            const CaseKind k_prev = kind_at(prev);
            if (k_prev != dec.kind) {
                double lo = prev, hi = theta;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (kind_at(mid) == k_prev ? lo : hi) = mid;
                }
                std::cout << "# case crossover between theta=" << format_double(prev)
                          << " and theta=" << format_double(theta)
                          << ": theta* ~= " << format_double(0.5 * (lo + hi)) << '\n';
            }
        }
    }
    return 0;
}

int cmd_trial(const std::string& config_path, const std::string& policy_name, double sluggish_p,
              double theta, int cell_one_based, std::uint64_t seed) {
    const ExperimentConfig config = parse_config(config_path);
    const PolicyKind policy = policy_from_name(policy_name, sluggish_p);
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (cell_one_based < 1 || cell_one_based > config.m_cells)
        throw std::invalid_argument("cell must be in 1.." + std::to_string(config.m_cells));

    const CaseDecision dec = select_case(CostParams(theta, config.s_ratio), config.m_cells, config.model);
    std::vector<TraceStep> trace;
    const TrialResult result = run_trial(config, policy, theta, cell_one_based - 1, seed, &trace);

    std::cout << "# trial policy=" << policy.label() << " theta=" << format_double(theta)
              << " cell=" << cell_one_based << " seed=" << seed << " case=" << case_label(dec.kind)
              << '\n';
    std::cout << "n,cell,y,llr";
    for (int m = 1; m <= config.m_cells; ++m) std::cout << ",S_" << m;
    std::cout << ",switched,b_size\n";
    for (const auto& step : trace) {
        std::cout << step.n << ',' << step.cell + 1 << ',' << step.y << ','
                  << format_double(step.llr_value);
        for (double s : step.sum_llr) std::cout << ',' << format_double(s);
        std::cout << ',' << (step.switched ? 1 : 0) << ',' << step.b_size << '\n';
    }
    std::cout << "stop,declared=" << result.declared + 1 << ",tau=" << result.tau
              << ",tau_s=" << result.tau_s << ",truncated=" << (result.truncated ? 1 : 0) << '\n';
    return 0;
}

int cmd_oracle_chernoff_lambda(const std::string& config_path, double step) {
    const ExperimentConfig config = parse_config(config_path);
    const std::vector<double> closed = chernoff_lambda(config.model, config.m_cells);
    const std::vector<double> grid = chernoff_lambda_grid_search(
        kl(config.model, KlDirection::GToF), kl(config.model, KlDirection::FToG),
        config.m_cells, step);

    double max_diff = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i)
        max_diff = std::max(max_diff, std::abs(closed[i] - grid[i]));

    auto print_vec = [](const char* tag, const std::vector<double>& v) {
        std::cout << tag;
        for (double x : v) std::cout << ',' << format_double(x);
        std::cout << '\n';
    };
    print_vec("closed_form", closed);
    print_vec("grid_search", grid);
    std::cout << "max_abs_diff," << format_double(max_diff) << '\n';
    std::cout << "tolerance,0.01\n";
    const bool ok = max_diff <= 0.01;
    std::cout << "status," << (ok ? "pass" : "fail") << '\n';
    return ok ? 0 : 2;
}

int cmd_oracle_sprt(const std::string& config_path, double theta, const std::string& which_name,
                    std::int64_t trials, std::uint64_t seed) {
    const ExperimentConfig config = parse_config(config_path);
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    SprtCell which;
    if (which_name == "target")
        which = SprtCell::Target;
    else if (which_name == "normal")
        which = SprtCell::Normal;
    else
        throw std::invalid_argument("--which must be 'target' or 'normal'");

    // A stopped test always takes at least one observation, so the Wald
    // value is floored at 1 before comparison.
    const double analytic = std::max(1.0, sprt_wald_mean(config.model, theta, which));
    Rng rng(seed);
    const double mc = sprt_monte_carlo_mean(config.model, theta, which, trials, rng);
    const double rel = std::abs(mc - analytic) / analytic;

    std::cout << "analytic," << format_double(analytic) << '\n';
    std::cout << "monte_carlo," << format_double(mc) << '\n';
    std::cout << "relative_diff," << format_double(rel) << '\n';
    std::cout << "tolerance,0.2\n";
    const bool ok = rel <= 0.2;
    std::cout << "status," << (ok ? "pass" : "fail") << '\n';
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequential anomaly-detection policy laboratory"};
    app.require_subcommand(1);

    // sweep
    std::string sweep_config;
    std::optional<std::uint64_t> sweep_seed;
    std::optional<std::int64_t> sweep_trials;
    std::string sweep_out = "sweep.csv";
    int sweep_threads = 1;
    auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep and write CSV");
    sweep->add_option("--config", sweep_config, "experiment configuration file")->required();
    sweep->add_option("--seed", sweep_seed, "override master_seed");
    sweep->add_option("--trials", sweep_trials, "override trials_per_hypothesis");
    sweep->add_option("--out", sweep_out, "output CSV path (default sweep.csv)");
    sweep->add_option("--threads", sweep_threads, "worker threads (default 1)")
        ->check(CLI::PositiveNumber);

    // case-check
    std::string case_config;
    auto* case_check = app.add_subcommand("case-check", "report the selection regime per theta");
    case_check->add_option("--config", case_config, "experiment configuration file")->required();

    // trial
    std::string trial_config, trial_policy;
    double trial_theta = 0.0, trial_p = 0.1;
    int trial_cell = 0;
    std::uint64_t trial_seed = 0;
    auto* trial = app.add_subcommand("trial", "run one trial with a per-step trace");
    trial->add_option("--config", trial_config, "experiment configuration file")->required();
    trial->add_option("--policy", trial_policy, "dbs | chernoff | sluggish | dgf")->required();
    trial->add_option("--theta", trial_theta, "theta = -log c")->required();
    trial->add_option("--cell", trial_cell, "true target cell (1-based)")->required();
    trial->add_option("--seed", trial_seed, "trial seed")->required();
    trial->add_option("--p", trial_p, "sluggish resample probability (default 0.1)");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "compare closed forms against brute force");
    oracle->require_subcommand(1);

    std::string ocl_config;
    double ocl_step = 1e-3;
    auto* ocl = oracle->add_subcommand("chernoff-lambda", "closed-form action distribution vs grid search");
    ocl->add_option("--config", ocl_config, "experiment configuration file")->required();
    ocl->add_option("--step", ocl_step, "grid step (default 1e-3)");

    std::string osp_config, osp_which = "target";
    double osp_theta = 0.0;
    std::int64_t osp_trials = 100000;
    std::uint64_t osp_seed = 12345;
    auto* osp = oracle->add_subcommand("sprt", "Wald mean sample size vs Monte Carlo");
    osp->add_option("--config", osp_config, "experiment configuration file")->required();
    osp->add_option("--theta", osp_theta, "theta = -log c")->required();
    osp->add_option("--which", osp_which, "target | normal");
    osp->add_option("--trials", osp_trials, "Monte Carlo trials (default 100000)")
        ->check(CLI::PositiveNumber);
    osp->add_option("--seed", osp_seed, "Monte Carlo seed (default 12345)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed())
            return cmd_sweep(sweep_config, sweep_seed, sweep_trials, sweep_out, sweep_threads);
        if (case_check->parsed()) return cmd_case_check(case_config);
        if (trial->parsed())
            return cmd_trial(trial_config, trial_policy, trial_p, trial_theta, trial_cell, trial_seed);
        if (oracle->parsed()) {
            if (ocl->parsed()) return cmd_oracle_chernoff_lambda(ocl_config, ocl_step);
            if (osp->parsed()) return cmd_oracle_sprt(osp_config, osp_theta, osp_which, osp_trials, osp_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
