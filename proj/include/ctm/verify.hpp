#pragma once

// Monte Carlo checks of proportional-share winning and of its independence
// from leaf placement.

#include "ctm/machine.hpp"
#include "ctm/oracle.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ctm {

/// The tick-0 submissions of a machine with no environment, indexed by address.
std::vector<Chunk> static_leaf_chunks(const MachineConfig& config);

struct LeafRate {
    Address address;
    double f_value = 0.0;
    /// f / sum f.
    double share = 0.0;
    /// Exact tree probability (equals share when f is additive).
    double exact = 0.0;
    std::uint64_t wins = 0;
    double empirical = 0.0;
    /// |empirical - share|
    double deviation = 0.0;
    /// 4 binomial standard errors around `exact`.
    double tolerance = 0.0;
};

struct WinRateReport {
    std::vector<LeafRate> leaves;
    std::uint64_t trials = 0;
    double max_deviation = 0.0;
    double chi_square = 0.0;
    /// Every leaf's |empirical - exact| is within its tolerance.
    bool within_tolerance = true;
};

struct VerifyOptions {
    std::uint64_t trials = 100000;
    bool allow_nonadditive = false;
    unsigned threads = 1;
};

/// Runs `trials` isolated probabilistic competitions over fixed leaves. Trial
/// k uses draw counter k, so trials are independent and the result does not
/// depend on `threads`. Throws ConfigError for deterministic mode or
/// non-additive f (unless allowed), ContractViolation when every f is zero.
WinRateReport verify_theorem(const MachineConfig& config, std::span<const Chunk> leaves, const VerifyOptions& opt);
WinRateReport verify_theorem(const MachineConfig& config, const VerifyOptions& opt);

/// Same tally over the warm ticks of a pipelined tree fed constant leaves.
WinRateReport verify_pipelined(const MachineConfig& config, std::span<const Chunk> leaves, std::uint64_t ticks);

/// CSV: leaf,f_value,share,empirical,deviation
void write_report_csv(std::ostream& out, const WinRateReport& r);

struct PermutationCase {
    /// leaf_order[address] = leaf position
    std::vector<std::uint32_t> leaf_order;
    std::vector<Rational> probabilities;
    bool equal_to_baseline = false;
    /// Present when Monte Carlo trials were requested.
    std::optional<WinRateReport> monte_carlo;
};

struct PermutationReport {
    std::vector<Rational> baseline;
    std::vector<PermutationCase> cases;
    bool all_equal = true;
};

/// Exact probabilities under `permutations` random leaf placements, compared
/// address-by-address with the configured placement.
PermutationReport permutation_test(const MachineConfig& config, std::span<const Chunk> leaves,
                                   std::size_t permutations, std::uint64_t trials = 0,
                                   bool allow_nonadditive = false);

/// Fisher-Yates from the counter-based stream, so placements are portable.
std::vector<std::uint32_t> random_permutation(std::size_t n, std::uint64_t seed, std::uint64_t index);

} // namespace ctm
