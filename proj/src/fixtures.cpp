#include "ctm/fixtures.hpp"

#include "ctm/behaviors.hpp"

namespace ctm {

namespace {

ProcessorDecl emitter(std::uint32_t address, const std::string& name, double weight) {
    ProcessorDecl d;
    d.address = Address{address};
    d.kind = "ConstEmitter";
    d.params = {{"gist", name}, {"weight", weight}};
    return d;
}

} // namespace

Scenario figure3_scenario(std::vector<std::uint32_t> leaf_order) {
    Scenario s;
    s.config.lifetime = 10;
    s.config.mode = CompetitionMode::deterministic;
    s.config.f = CompetitionFunction::intensity();
    s.config.processors = {emitter(0, "a", 3), emitter(1, "b", 3), emitter(2, "c", 1), emitter(3, "d", 4)};
    s.config.leaf_order = std::move(leaf_order);
    return s;
}

Scenario figure6_scenario(std::uint64_t seed) {
    Scenario s;
    s.config.lifetime = 1000;
    s.config.mode = CompetitionMode::probabilistic;
    s.config.f = CompetitionFunction::intensity();
    s.config.seed = seed;
    s.config.processors = {emitter(0, "a", 1), emitter(1, "b", 3), emitter(2, "c", 2), emitter(3, "d", 4)};
    return s;
}

Scenario spelling_scenario(const SpellingSetup& setup) {
    Scenario s;
    s.config.mode = CompetitionMode::deterministic;
    s.config.f = CompetitionFunction::intensity();

    ProcessorDecl relay;
    relay.address = Address{0};
    relay.kind = "InputRelay";
    ProcessorDecl rule;
    rule.address = Address{1};
    rule.kind = "SpellingRule";
    rule.intensity_power = setup.rule_power;
    ProcessorDecl memory;
    memory.address = Address{2};
    memory.kind = "WordMemory";
    memory.params = {{"word", setup.word}};
    memory.intensity_power = setup.word_power;
    s.config.processors = {relay, rule, memory};

    const std::size_t h = TreeShape::balanced(3).height();
    const Tick round_trip = h + 1;
    if (setup.query_every <= 2 * round_trip) {
        throw ConfigError("query_every must exceed " + std::to_string(2 * round_trip) + " ticks");
    }
    s.config.lifetime = setup.rounds * setup.query_every;

    const Gist query = Gist::make(spelling_skeleton(setup.word), Modality::speech, std::string(kQueryLabel));
    const Gist truth = Gist::make(setup.word, Modality::speech);
    for (std::size_t i = 0; i < setup.rounds; ++i) {
        const Tick t = i * setup.query_every;
        s.env.sensor_events.push_back({t, Address{0}, query, 1.0});
        Judgment j;
        j.about = t + round_trip;
        j.at = j.about + round_trip;
        j.truth = truth;
        j.target = Address{2};
        s.env.judgments.push_back(j);
        if (setup.judge_rule) {
            j.target = Address{1};
            s.env.judgments.push_back(j);
        }
    }
    return s;
}

SpellingOutcome analyze_spelling(const std::vector<TraceRecord>& records, const std::string& word) {
    SpellingOutcome out;
    const std::string skeleton = spelling_skeleton(word);
    for (const auto& r : records) {
        if (r.kind != "stm" || !r.chunk || r.chunk->gist.is_nil()) continue;
        const Gist& g = r.chunk->gist;
        if (g.label() == kQueryLabel || spelling_skeleton(g.payload()) != skeleton) continue;
        if (g.payload() == word) {
            ++out.correct_answers;
            if (out.last_mistake && !out.first_correct_after_last_mistake) out.first_correct_after_last_mistake = r.tick;
        } else {
            ++out.mistakes;
            out.last_mistake = r.tick;
            out.first_correct_after_last_mistake.reset();
        }
    }
    return out;
}

} // namespace ctm
