#include "ctm/verify.hpp"

#include "ctm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

namespace ctm {

namespace {

constexpr std::uint64_t kPermutationStream = 0x7065726d75746521ULL;

void require_hypothesis(const MachineConfig& config, bool allow_nonadditive) {
    if (config.mode != CompetitionMode::probabilistic) {
        throw ConfigError("win-rate verification needs probabilistic mode");
    }
    if (!allow_nonadditive && !is_additive(config.f)) {
        throw ConfigError("competition function " + std::string(to_string(config.f.kind())) +
                          " is not additive, so proportional share is not guaranteed; "
                          "pass --allow-nonadditive to run it anyway");
    }
}

WinRateReport tally_report(const MachineConfig& config, const TreeShape& shape, std::span<const Chunk> leaves,
                           const std::vector<std::uint64_t>& wins, std::uint64_t trials) {
    const auto share = f_share<double>(config.f, leaves);
    const auto exact = exact_win_probabilities<Rational>(shape, config.f, leaves);
    WinRateReport r;
    r.trials = trials;
    const double k = static_cast<double>(trials);
    for (std::uint32_t a = 0; a < leaves.size(); ++a) {
        LeafRate lr;
        lr.address = Address{a};
        lr.f_value = f_value<double>(config.f, leaves[a].intensity, leaves[a].mood);
        lr.share = share[a];
        lr.exact = static_cast<double>(exact[a]);
        lr.wins = wins[a];
        lr.empirical = trials ? static_cast<double>(wins[a]) / k : 0.0;
        lr.deviation = std::fabs(lr.empirical - lr.share);
        lr.tolerance = trials ? 4.0 * std::sqrt(lr.exact * (1.0 - lr.exact) / k) : 0.0;
        r.max_deviation = std::max(r.max_deviation, lr.deviation);
        if (lr.exact > 0.0) {
            const double expected = k * lr.exact;
            r.chi_square += (static_cast<double>(wins[a]) - expected) * (static_cast<double>(wins[a]) - expected) / expected;
        }
        if (std::fabs(lr.empirical - lr.exact) > lr.tolerance) r.within_tolerance = false;
        r.leaves.push_back(lr);
    }
    return r;
}

std::vector<Chunk> retimed(std::span<const Chunk> leaves, Tick t) {
    std::vector<Chunk> out(leaves.begin(), leaves.end());
    for (auto& c : out) c.t = t;
    return out;
}

} // namespace

std::vector<Chunk> static_leaf_chunks(const MachineConfig& config) {
    MachineConfig one = config;
    one.lifetime = std::max<Tick>(one.lifetime, 1);
    Ctm machine(std::move(one));
    return machine.tick().submissions;
}

WinRateReport verify_theorem(const MachineConfig& config, std::span<const Chunk> leaves, const VerifyOptions& opt) {
    require_hypothesis(config, opt.allow_nonadditive);
    const TreeShape shape = TreeShape::balanced(config.processor_count(), config.leaf_order);
    if (leaves.size() != shape.leaf_count()) throw ConfigError("one leaf chunk per processor is required");

    const unsigned threads = std::max(1u, opt.threads);
    std::vector<std::vector<std::uint64_t>> tallies(threads, std::vector<std::uint64_t>(leaves.size(), 0));
    auto work = [&](unsigned w) {
        std::vector<Chunk> trial(leaves.begin(), leaves.end());
        for (std::uint64_t k = w; k < opt.trials; k += threads) {
            for (auto& c : trial) c.t = k;
            const Chunk winner = compete(shape, trial, k, CompetitionMode::probabilistic, config.f, config.seed);
            ++tallies[w][winner.address.id];
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    std::vector<std::uint64_t> wins(leaves.size(), 0);
    for (const auto& t : tallies) {
        for (std::size_t a = 0; a < wins.size(); ++a) wins[a] += t[a];
    }
    return tally_report(config, shape, leaves, wins, opt.trials);
}

WinRateReport verify_theorem(const MachineConfig& config, const VerifyOptions& opt) {
    const auto leaves = static_leaf_chunks(config);
    return verify_theorem(config, leaves, opt);
}

WinRateReport verify_pipelined(const MachineConfig& config, std::span<const Chunk> leaves, std::uint64_t ticks) {
    require_hypothesis(config, true);
    UpTree tree(TreeShape::balanced(config.processor_count(), config.leaf_order));
    const std::size_t h = tree.height();
    std::vector<std::uint64_t> wins(leaves.size(), 0);
    std::uint64_t warm = 0;
    for (Tick t = 0; t < ticks + h; ++t) {
        const Chunk& root = tree.step(retimed(leaves, t), t, CompetitionMode::probabilistic, config.f, config.seed);
        if (t >= h) {
            ++wins[root.address.id];
            ++warm;
        }
    }
    return tally_report(config, tree.shape(), leaves, wins, warm);
}

void write_report_csv(std::ostream& out, const WinRateReport& r) {
    out << "leaf,f_value,share,empirical,deviation\n";
    for (const auto& l : r.leaves) {
        out << l.address.id << ',' << nlohmann::json(l.f_value).dump() << ',' << nlohmann::json(l.share).dump() << ','
            << nlohmann::json(l.empirical).dump() << ',' << nlohmann::json(l.deviation).dump() << '\n';
    }
}

std::vector<std::uint32_t> random_permutation(std::size_t n, std::uint64_t seed, std::uint64_t index) {
    std::vector<std::uint32_t> p(n);
    for (std::uint32_t i = 0; i < n; ++i) p[i] = i;
    RngStream rng(seed, kPermutationStream + index);
    for (std::size_t i = n; i > 1; --i) {
        const std::uint64_t m = i;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
        std::uint64_t x;
        do {
            x = rng.next_u64();
        } while (x >= limit);
        std::swap(p[i - 1], p[x % m]);
    }
    return p;
}

PermutationReport permutation_test(const MachineConfig& config, std::span<const Chunk> leaves,
                                   std::size_t permutations, std::uint64_t trials, bool allow_nonadditive) {
    if (!allow_nonadditive && !is_additive(config.f)) {
        throw ConfigError("competition function " + std::string(to_string(config.f.kind())) +
                          " is not additive; placement independence is not guaranteed");
    }
    const std::size_t n = config.processor_count();
    PermutationReport report;
    report.baseline = exact_win_probabilities<Rational>(TreeShape::balanced(n, config.leaf_order), config.f, leaves);
    for (std::size_t i = 0; i < permutations; ++i) {
        PermutationCase c;
        c.leaf_order = random_permutation(n, config.seed, i);
        c.probabilities = exact_win_probabilities<Rational>(TreeShape::balanced(n, c.leaf_order), config.f, leaves);
        c.equal_to_baseline = c.probabilities == report.baseline;
        report.all_equal = report.all_equal && c.equal_to_baseline;
        if (trials > 0) {
            MachineConfig permuted = config;
            permuted.leaf_order = c.leaf_order;
            permuted.mode = CompetitionMode::probabilistic;
            c.monte_carlo = verify_theorem(permuted, leaves, {trials, true, 1});
        }
        report.cases.push_back(std::move(c));
    }
    return report;
}

} // namespace ctm
