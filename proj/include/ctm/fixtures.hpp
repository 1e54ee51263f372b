#pragma once

// Built-in fixtures used by the CLI demos and the test suites. The JSON files
// under scenarios/ describe the same machines.

#include "ctm/scenario.hpp"
#include "ctm/trace.hpp"

#include <string>
#include <vector>

namespace ctm {

/// Four ConstEmitters a, b, c, d with weights 3, 3, 1, 4; f = intensity,
/// deterministic. leaf_order may transpose leaves.
Scenario figure3_scenario(std::vector<std::uint32_t> leaf_order = {});

/// Four ConstEmitters a, b, c, d with weights 1, 3, 2, 4; probabilistic.
Scenario figure6_scenario(std::uint64_t seed = 0);

struct SpellingSetup {
    double rule_power = 8.0;
    double word_power = 1.0;
    std::string word = "caffeine";
    Tick query_every = 10;
    std::size_t rounds = 110;
    /// Also judge the rule on every round (both can then be demoted/promoted).
    bool judge_rule = false;
};

/// InputRelay (0), SpellingRule (1), WordMemory (2). A query for the word's
/// skeleton arrives every query_every ticks; each answer is judged against
/// the correct spelling once it has been broadcast.
Scenario spelling_scenario(const SpellingSetup& setup = {});

struct SpellingOutcome {
    /// STM chunks that spelled the word wrongly.
    std::size_t mistakes = 0;
    std::optional<Tick> last_mistake;
    std::optional<Tick> first_correct_after_last_mistake;
    std::size_t correct_answers = 0;
};

SpellingOutcome analyze_spelling(const std::vector<TraceRecord>& records, const std::string& word);

} // namespace ctm
