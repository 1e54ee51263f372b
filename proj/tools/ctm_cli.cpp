// Command-line front end: run scenarios, verify win rates, print demos.

#include "ctm/fixtures.hpp"
#include "ctm/oracle.hpp"
#include "ctm/scenario.hpp"
#include "ctm/trace.hpp"
#include "ctm/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace ctm;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
};

Scenario load(const std::string& path, const Overrides& o) {
    Scenario s = parse_scenario(path);
    if (o.seed) s.config.seed = *o.seed;
    if (o.mode) s.config.mode = competition_mode_from_string(*o.mode);
    return s;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw RunError("cannot open " + path + " for writing", -1);
    return file;
}

int cmd_run(const std::string& scenario, const Overrides& o, std::optional<Tick> until, const std::string& out) {
    const Scenario s = load(scenario, o);
    std::ofstream file;
    std::ostream& os = open_out(out, file);
    const RunResult r = run(s.config, s.env, until.value_or(s.config.lifetime), &os);
    std::cerr << "ticks " << r.counters.ticks << ", records " << r.counters.records << '\n';
    for (const auto& e : r.unmet_expectations) {
        std::cerr << "unmet actuator expectation at tick " << e.t << ": " << e.command << '\n';
    }
    return r.unmet_expectations.empty() ? 0 : 1;
}

int cmd_verify(const std::string& scenario, const Overrides& o, std::uint64_t trials, bool allow_nonadditive,
               unsigned threads, const std::string& csv) {
    Scenario s = load(scenario, o);
    s.config.mode = CompetitionMode::probabilistic;
    const WinRateReport r = verify_theorem(s.config, {trials, allow_nonadditive, threads});
    std::ofstream file;
    write_report_csv(open_out(csv, file), r);
    std::cerr << "trials " << r.trials << ", max deviation " << r.max_deviation << ", chi-square " << r.chi_square
              << (r.within_tolerance ? ", within tolerance" : ", OUTSIDE tolerance") << '\n';
    if (!is_additive(s.config.f)) return 0;
    return r.within_tolerance ? 0 : 1;
}

int cmd_permute(const std::string& scenario, const Overrides& o, std::size_t permutations, std::uint64_t trials,
                bool allow_nonadditive) {
    const Scenario s = load(scenario, o);
    const auto leaves = static_leaf_chunks(s.config);
    const PermutationReport r = permutation_test(s.config, leaves, permutations, trials, allow_nonadditive);
    auto print = [](const std::vector<Rational>& p) {
        for (std::size_t i = 0; i < p.size(); ++i) std::cout << (i ? " " : "") << p[i];
    };
    std::cout << "baseline: ";
    print(r.baseline);
    std::cout << '\n';
    for (const auto& c : r.cases) {
        std::cout << "order";
        for (auto l : c.leaf_order) std::cout << ' ' << l;
        std::cout << ": ";
        print(c.probabilities);
        std::cout << (c.equal_to_baseline ? "  equal" : "  DIFFERENT");
        if (c.monte_carlo) std::cout << "  max deviation " << c.monte_carlo->max_deviation;
        std::cout << '\n';
    }
    std::cout << (r.all_equal ? "all placements agree" : "placements disagree") << '\n';
    return r.all_equal || allow_nonadditive ? 0 : 1;
}

int cmd_oracle(const std::string& scenario, const Overrides& o) {
    const Scenario s = load(scenario, o);
    const auto leaves = static_leaf_chunks(s.config);
    write_oracle_csv(std::cout, TreeShape::balanced(s.config.processor_count(), s.config.leaf_order), s.config.f,
                     leaves);
    return 0;
}

int cmd_figure3() {
    auto winner = [](std::vector<std::uint32_t> order) {
        const Scenario s = figure3_scenario(std::move(order));
        const auto leaves = static_leaf_chunks(s.config);
        const TreeShape shape = TreeShape::balanced(leaves.size(), s.config.leaf_order);
        return compete(shape, leaves, 0, CompetitionMode::deterministic, s.config.f, s.config.seed).gist.label();
    };
    std::cout << "order abcd: winner " << winner({}) << "; order acbd: winner " << winner({0, 2, 1, 3}) << '\n';
    return 0;
}

int cmd_spelling(double rule_power, double word_power) {
    SpellingSetup setup;
    setup.rule_power = rule_power;
    setup.word_power = word_power;
    const Scenario s = spelling_scenario(setup);
    const RunResult r = run(s.config, s.env, s.config.lifetime, nullptr, true);
    const SpellingOutcome out = analyze_spelling(r.records, setup.word);
    std::cout << "mistakes: " << out.mistakes;
    if (out.first_correct_after_last_mistake) {
        std::cout << "; converged at tick " << *out.first_correct_after_last_mistake;
    } else if (out.mistakes == 0) {
        std::cout << "; converged at tick 0";
    } else {
        std::cout << "; not converged";
    }
    std::cout << "; correct answers: " << out.correct_answers << '\n';
    return out.mistakes == 0 || out.first_correct_after_last_mistake ? 0 : 1;
}

int cmd_stats(const std::string& trace, const std::string& series, const std::string& shares) {
    std::ifstream in(trace);
    if (!in) throw ScenarioError("cannot open trace " + trace);
    const RunCounters c = counters_from_trace(in);
    if (series.empty() && shares.empty()) {
        write_series_csv(std::cout, c);
        std::cout << '\n';
        write_shares_csv(std::cout, c);
        return 0;
    }
    if (!series.empty()) {
        std::ofstream f;
        write_series_csv(open_out(series, f), c);
    }
    if (!shares.empty()) {
        std::ofstream f;
        write_shares_csv(open_out(shares, f), c);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-time Conscious Turing Machine simulator"};
    app.require_subcommand(1);

    std::string scenario, out = "-", csv = "-", trace, series, shares, mode;
    std::uint64_t seed = 0, trials = 200000, mc_trials = 0;
    Tick until = 0;
    std::size_t permutations = 20;
    unsigned threads = 1;
    bool allow_nonadditive = false;
    double rule_power = 8.0, word_power = 1.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override the scenario seed");
        sub->add_option("--mode", mode, "Override the competition mode")->check(CLI::IsMember({"det", "prob"}));
    };

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its JSONL trace");
    add_common(run_cmd);
    run_cmd->add_option("--until", until, "Number of ticks (default: scenario lifetime)");
    run_cmd->add_option("--out", out, "Trace file, '-' for stdout");

    auto* verify_cmd = app.add_subcommand("verify-theorem", "Monte Carlo win rates against f-shares");
    add_common(verify_cmd);
    verify_cmd->add_option("--trials", trials, "Independent competitions")->check(CLI::PositiveNumber);
    verify_cmd->add_flag("--allow-nonadditive", allow_nonadditive, "Run even when f is not additive");
    verify_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--csv", csv, "Report CSV, '-' for stdout");

    auto* permute_cmd = app.add_subcommand("permute-test", "Exact probabilities under random leaf placements");
    add_common(permute_cmd);
    permute_cmd->add_option("--permutations", permutations, "Random placements");
    permute_cmd->add_option("--trials", mc_trials, "Monte Carlo trials per placement (0 = exact only)");
    permute_cmd->add_flag("--allow-nonadditive", allow_nonadditive, "Run even when f is not additive");

    auto* oracle_cmd = app.add_subcommand("oracle", "Exact win probabilities as CSV");
    add_common(oracle_cmd);

    auto* figure3_cmd = app.add_subcommand("figure3", "Deterministic winner for two leaf orders");

    auto* spelling_cmd = app.add_subcommand("spelling-demo", "Learning run for the ie/ei rule versus one word");
    spelling_cmd->add_option("--rule-power", rule_power, "Initial power of the rule")->check(CLI::PositiveNumber);
    spelling_cmd->add_option("--word-power", word_power, "Initial power of the word memory")
        ->check(CLI::PositiveNumber);

    auto* stats_cmd = app.add_subcommand("stats", "Mood/intensity series and winner shares from a trace");
    stats_cmd->add_option("--trace", trace, "JSONL trace")->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--series", series, "Series CSV path");
    stats_cmd->add_option("--shares", shares, "Shares CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    Overrides o;
    auto collect = [&](CLI::App* sub) {
        if (sub->count("--seed")) o.seed = seed;
        if (sub->count("--mode")) o.mode = mode;
    };

    try {
        if (*run_cmd) {
            collect(run_cmd);
            return cmd_run(scenario, o, run_cmd->count("--until") ? std::optional<Tick>(until) : std::nullopt, out);
        }
        if (*verify_cmd) {
            collect(verify_cmd);
            return cmd_verify(scenario, o, trials, allow_nonadditive, threads, csv);
        }
        if (*permute_cmd) {
            collect(permute_cmd);
            return cmd_permute(scenario, o, permutations, mc_trials, allow_nonadditive);
        }
        if (*oracle_cmd) {
            collect(oracle_cmd);
            return cmd_oracle(scenario, o);
        }
        if (*figure3_cmd) return cmd_figure3();
        if (*spelling_cmd) return cmd_spelling(rule_power, word_power);
        if (*stats_cmd) return cmd_stats(trace, series, shares);
    } catch (const RunError& e) {
        std::cerr << "error: " << e.what() << " (last completed tick " << e.last_completed_tick() << ")\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
