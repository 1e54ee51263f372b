#include "ctm/fixtures.hpp"
#include "ctm/machine.hpp"
#include "ctm/trace.hpp"

#include "support/random_emitter.hpp"

#include <doctest.h>

#include <sstream>

using namespace ctm;
using ctm::testing::random_machine;
using ctm::testing::registry_with_random;

namespace {

ProcessorDecl decl(std::uint32_t a, const std::string& kind, nlohmann::json params = nlohmann::json::object(),
                   double power = 1.0) {
    ProcessorDecl d;
    d.address = Address{a};
    d.kind = kind;
    d.params = std::move(params);
    d.intensity_power = power;
    return d;
}

MachineConfig emitters(std::initializer_list<double> weights, Tick lifetime = 20) {
    MachineConfig cfg;
    cfg.lifetime = lifetime;
    std::uint32_t a = 0;
    for (double w : weights) {
        cfg.processors.push_back(decl(a, "ConstEmitter", {{"gist", std::string(1, static_cast<char>('a' + a))},
                                                          {"weight", w}}));
        ++a;
    }
    return cfg;
}

} // namespace

TEST_CASE("assembled machine exposes the seven components") {
    Ctm m(emitters({3, 3, 1, 4}));
    const WorkspaceState& stm = m.stm();
    const std::vector<Processor>& ltm = m.ltm();
    const DownTree& down = m.down_tree();
    const UpTree& up = m.up_tree();
    const LinkTable& links = m.links();
    const InputMap& input = m.input();
    const OutputMap& output = m.output();
    CHECK_FALSE(stm.stm.has_value());
    CHECK(ltm.size() == 4);
    CHECK(down.fan_out == 4);
    CHECK(up.height() == 2);
    CHECK_FALSE(links.has_active_link(Address{0}));
    CHECK(input.chunks_for(0, 1 << 14).empty());
    CHECK(output.log().empty());
    CHECK(m.awareness_delay() == 3);
    CHECK(up.root_chunk().is_nil());
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(Ctm{MachineConfig{}}, EmptyMachine);
    auto cfg = emitters({1, 2});
    cfg.delta = 1.2;
    CHECK_THROWS_AS((Ctm{cfg}), ConfigError);
    cfg.delta = 0.0;
    CHECK_THROWS_AS((Ctm{cfg}), ConfigError);
    cfg = emitters({1, 2});
    cfg.iota = 0;
    CHECK_THROWS_AS((Ctm{cfg}), ConfigError);
    cfg = emitters({1, 2});
    cfg.lifetime = 0;
    CHECK_THROWS_AS((Ctm{cfg}), ConfigError);
    cfg = emitters({1, 2});
    cfg.processors[1].address = Address{0};
    CHECK_THROWS_AS((Ctm{cfg}), ConfigError);
    cfg = emitters({1, 2});
    cfg.processors[1].address = Address{5};
    CHECK_THROWS_AS((Ctm{cfg}), ConfigError);
    cfg = emitters({1, 2});
    cfg.leaf_order = {0, 0};
    CHECK_THROWS_AS((Ctm{cfg}), ConfigError);
    cfg = emitters({1, 2});
    cfg.processors[0].kind = "Telepath";
    CHECK_THROWS_AS((Ctm{cfg}), ConfigError);
}

TEST_CASE("environment validation") {
    auto cfg = emitters({1, 2});
    EnvironmentScript env;
    env.sensor_events.push_back({0, Address{0}, Gist::make("x", Modality::vision), 1});
    CHECK_THROWS_AS((Ctm{cfg, env}), ScenarioError);

    cfg.processors[0] = decl(0, "InputRelay");
    CHECK_NOTHROW(Ctm(cfg, env));
    env.sensor_events[0].target = Address{7};
    CHECK_THROWS_AS((Ctm{cfg, env}), ScenarioError);

    env = {};
    Judgment j;
    j.target = Address{1};
    j.about = 2;
    j.at = 3;  // h = 1: needs at > about + 1
    j.stm_was_right = false;
    j.p_was_right = false;
    env.judgments.push_back(j);
    CHECK_THROWS_AS((Ctm{cfg, env}), ScenarioError);
    env.judgments[0].at = 4;
    CHECK_NOTHROW(Ctm(cfg, env));
    env.judgments[0].p_was_right.reset();
    CHECK_THROWS_AS((Ctm{cfg, env}), ScenarioError);
}

TEST_CASE("single processor: its chunk is always the conscious content") {
    Ctm m(emitters({2.5}, 5));
    for (Tick t = 0; t < 5; ++t) {
        const TickReport r = m.tick();
        CHECK(r.stm.gist.payload() == "a");
        CHECK(r.stm.t == t);
    }
    CHECK_THROWS_AS(m.tick(), ConfigError);
}

TEST_CASE("figure3 machine: every warm broadcast is chunk a") {
    const Scenario s = figure3_scenario();
    Ctm m(s.config, s.env);
    for (Tick t = 0; t < 10; ++t) {
        const TickReport r = m.tick();
        if (t < m.height()) {
            CHECK(r.stm.is_nil());
        } else {
            CHECK(r.stm.gist.payload() == "a");
            // Competitions from tick h + 1 on see a positive mood: every weight scales by 1 + delta.
            const bool modulated = t - m.height() >= m.awareness_delay();
            CHECK(r.stm.intensity == doctest::Approx(modulated ? 11 * (1 + s.config.delta) : 11.0));
        }
    }
}

TEST_CASE("all processors silent: NIL stream and zero mood") {
    MachineConfig cfg;
    cfg.lifetime = 30;
    for (std::uint32_t a = 0; a < 5; ++a) cfg.processors.push_back(decl(a, "Idle"));
    Ctm m(cfg);
    for (Tick t = 0; t < 30; ++t) {
        CHECK(m.tick().stm.is_nil());
        if (t > m.height() + 1) CHECK(m.current_mood(t) == 0.0);
    }
}

TEST_CASE("randomized runs: broadcast totality, conservation, mood identity, story completeness") {
    const auto registry = registry_with_random();
    for (auto mode : {CompetitionMode::deterministic, CompetitionMode::probabilistic}) {
        for (std::size_t n : {1, 2, 5, 8, 13}) {
            const auto cfg = random_machine(n, 150, mode, CompetitionFunction::intensity_plus_c_mood(0.25), 40 + n);
            Ctm m(cfg, {}, registry);
            const std::size_t h = m.height();
            std::vector<std::vector<Chunk>> submitted;
            std::vector<Chunk> stm;
            for (Tick t = 0; t < cfg.lifetime; ++t) {
                const TickReport r = m.tick();
                submitted.push_back(r.submissions);
                stm.push_back(r.stm);

                if (t >= 1) {
                    REQUIRE(r.delivered_broadcast.has_value());
                    CHECK(*r.delivered_broadcast == stm[t - 1]);
                    for (const Processor& p : m.ltm()) REQUIRE(p.story_at(t)->received_broadcast == stm[t - 1]);
                } else {
                    CHECK_FALSE(r.delivered_broadcast.has_value());
                }
                if (t >= h) {
                    double in = 0, mo = 0;
                    for (const Chunk& c : submitted[t - h]) {
                        in += c.intensity;
                        mo += c.mood;
                    }
                    REQUIRE(r.stm.intensity == in);
                    REQUIRE(r.stm.mood == mo);
                    REQUIRE(r.stm.t == t - h);
                }
                if (t > h + 1) {
                    double mo = 0, in = 0;
                    for (const Chunk& c : submitted[t - 1 - h]) {
                        mo += c.mood;
                        in += c.intensity;
                    }
                    REQUIRE(m.current_mood(t) == mo);
                    REQUIRE(m.current_intensity(t) == in);
                } else {
                    CHECK_THROWS_AS(m.current_mood(t), WarmupError);
                }
            }
            CHECK(m.stm().stream.size() == cfg.lifetime);
            for (const Processor& p : m.ltm()) {
                REQUIRE(p.story().size() == cfg.lifetime);
                for (Tick t = 0; t < cfg.lifetime; ++t) REQUIRE(p.story_at(t)->submitted == submitted[t][p.address().id]);
            }
            CHECK_THROWS_AS(m.current_mood(cfg.lifetime + 1), ContractViolation);
        }
    }
}

TEST_CASE("awareness delay: STM at t + h, every processor receives it at t + h + 1") {
    const auto registry = registry_with_random();
    const auto cfg = random_machine(6, 80, CompetitionMode::probabilistic, CompetitionFunction::intensity(), 5);
    Ctm m(cfg, {}, registry);
    const std::size_t h = m.height();
    std::vector<TickReport> reports;
    for (Tick t = 0; t < cfg.lifetime; ++t) reports.push_back(m.tick());
    for (Tick t = 0; t + h + 1 < cfg.lifetime; ++t) {
        const Chunk& winner = reports[t + h].stm;
        CHECK(winner.t == t);
        CHECK(winner.gist == reports[t].submissions[winner.address.id].gist);
        for (const Processor& p : m.ltm()) CHECK(p.story_at(t + h + 1)->received_broadcast == winner);
    }
}

TEST_CASE("mood modulation is applied to submissions with the delivered mood") {
    MachineConfig cfg = emitters({4, -8});
    cfg.delta = 0.25;
    cfg.processors.push_back(decl(2, "ConstEmitter", {{"gist", "u"}, {"weight", 2}, {"sign", "unclear"}}));
    Ctm m(cfg);
    TickReport r = m.tick();
    CHECK(r.submissions[0].weight == 4);
    CHECK(r.submissions[1].weight == -8);
    CHECK(r.submissions[2].weight == 2);
    // h = 2; the first real broadcast (mood 4 - 8 + 2 = -2) is delivered at tick 3.
    for (int i = 0; i < 3; ++i) r = m.tick();
    REQUIRE(r.delivered_broadcast);
    CHECK(r.delivered_broadcast->mood == -2);
    CHECK(r.submissions[0].weight == 3);
    CHECK(r.submissions[1].weight == -10);
    CHECK(r.submissions[2].weight == -2.5);
}

TEST_CASE("judgments: truth comparison against STM and the processor's submission") {
    const Scenario s = spelling_scenario({8.0, 1.0, "caffeine", 10, 3, false});
    Ctm m(s.config, s.env);
    std::vector<FeedbackEvent> events;
    for (Tick t = 0; t < s.config.lifetime; ++t) {
        for (auto& e : m.tick().feedback) events.push_back(e);
    }
    REQUIRE(events.size() == 3);
    for (const auto& e : events) {
        CHECK(e.processor == Address{2});
        CHECK_FALSE(e.feedback.stm_was_right);
        CHECK(e.feedback.p_was_right);
        CHECK(e.outcome == UpdateOutcome::promoted);
        CHECK(e.power_after == e.power_before * 1.5);
    }
    CHECK(m.processor(Address{2}).intensity_power() == 3.375);
    CHECK(m.processor(Address{1}).intensity_power() == 8.0);
}

TEST_CASE("spelling scenario: mistakes match the closed form") {
    struct Case {
        double rule;
        bool judge_rule;
        std::size_t mistakes;
    };
    // Expected counts come from the brute-force replay in test_ltm.cpp.
    for (const Case& c : {Case{8.0, false, 6}, Case{8.0, true, 2}, Case{1.5, false, 2}, Case{0.5, false, 0},
                          Case{2.0, false, 2}}) {
        SpellingSetup setup;
        setup.rule_power = c.rule;
        setup.judge_rule = c.judge_rule;
        setup.rounds = 30;
        const Scenario s = spelling_scenario(setup);
        const RunResult r = run(s.config, s.env, s.config.lifetime, nullptr, true);
        const SpellingOutcome out = analyze_spelling(r.records, "caffeine");
        CHECK(out.mistakes == c.mistakes);
        CHECK(out.mistakes + out.correct_answers == setup.rounds);
    }
}

TEST_CASE("interrupts reach every processor on the same tick") {
    MachineConfig cfg = emitters({5, 3, 1});
    cfg.lifetime = 40;
    cfg.iota = 100;
    cfg.processors.push_back(decl(3, "PainSource", {{"start", 10}, {"duration", 3}, {"magnitude", 1000}}));
    Ctm m(cfg);
    std::map<Tick, std::size_t> interrupted, resumed;
    for (Tick t = 0; t < cfg.lifetime; ++t) {
        const TickReport r = m.tick();
        for (const auto& e : r.interrupts) {
            if (e.transition == InterruptTransition::interrupted) ++interrupted[t];
            if (e.transition == InterruptTransition::resumed) ++resumed[t];
        }
        if (r.delivered_broadcast && r.delivered_broadcast->intensity >= cfg.iota) {
            for (const Processor& p : m.ltm()) CHECK(p.mode() == ProcessorMode::interrupted);
            for (std::uint32_t a = 0; a < 3; ++a) CHECK(r.submissions[a].is_nil());
        }
    }
    REQUIRE(interrupted.size() == 1);
    CHECK(interrupted.begin()->second == 4);
    CHECK(interrupted.begin()->first == 10 + m.height() + 1);
    REQUIRE(resumed.size() == 1);
    CHECK(resumed.begin()->second == 4);
    for (const Processor& p : m.ltm()) {
        CHECK(p.mode() == ProcessorMode::normal);
        CHECK(p.stack_depth() == 0);
    }
}

TEST_CASE("links: acks form a link, then chunks bypass STM") {
    MachineConfig cfg;
    cfg.lifetime = 20;
    cfg.processors = {decl(0, "ConstEmitter", {{"gist", "alpha"}, {"weight", 5}, {"prefer_links", true}}),
                      decl(1, "EchoProbe", {{"pattern", "alpha"}}),
                      decl(2, "ConstEmitter", {{"gist", "gamma"}, {"weight", 1}})};
    Ctm m(cfg);
    std::optional<Tick> first_send;
    std::vector<TickReport> reports;
    for (Tick t = 0; t < cfg.lifetime; ++t) {
        reports.push_back(m.tick());
        const TickReport& r = reports.back();
        if (!r.link_sends.empty() && !first_send) first_send = t;
    }
    REQUIRE(first_send);
    // h = 2: alpha's first broadcast is delivered at tick 3; acks at 3, 4, 5
    // activate the link before tick 5's submissions. Alphas of competitions 3
    // and 4 are still in the pipeline and get acked at 6 and 7.
    CHECK(*first_send == 5);
    CHECK(m.links().count(Address{0}, Address{1}) == 5);
    for (Tick t = *first_send; t < cfg.lifetime; ++t) {
        const TickReport& r = reports[t];
        REQUIRE(r.link_sends.size() == 1);
        CHECK(r.link_sends[0].recipients == std::vector<Address>{Address{1}});
        CHECK(r.submissions[0].is_nil());
        if (t + 1 < cfg.lifetime) {
            const auto& got = m.processor(Address{1}).story_at(t + 1)->received_links;
            REQUIRE(got.size() == 1);
            CHECK(got[0] == r.link_sends[0].chunk);
        }
        for (const TickReport& later : reports) {
            CHECK_FALSE((later.stm.address == Address{0} && later.stm.t == t));
        }
    }
}

TEST_CASE("actuators: command broadcasts become actuator records") {
    MachineConfig cfg;
    cfg.lifetime = 10;
    cfg.processors = {decl(0, "ConstEmitter", {{"gist", "grab"}, {"modality", "command"}, {"weight", 2}, {"from", 3},
                                               {"until", 4}}),
                      decl(1, "Idle")};
    EnvironmentScript env;
    env.actuator_expectations = {{4, "grab"}, {9, "release"}};
    Ctm m(cfg, env);
    std::vector<ActuatorCommand> got;
    for (Tick t = 0; t < cfg.lifetime; ++t) {
        if (auto a = m.tick().actuator) got.push_back(*a);
    }
    REQUIRE(got.size() == 1);
    CHECK(got[0].t == 4);
    CHECK(got[0].command == "grab");
    const auto unmet = m.unmet_actuator_expectations();
    REQUIRE(unmet.size() == 1);
    CHECK(unmet[0].command == "release");
}

TEST_CASE("sensor events reach relays and feed the fuel gauge") {
    MachineConfig cfg;
    cfg.lifetime = 30;
    cfg.processors = {decl(0, "FuelGauge", {{"capacity", 20}, {"burn_rate", 1}}), decl(1, "InputRelay")};
    EnvironmentScript env;
    env.sensor_events.push_back({10, Address{1}, Gist::make("food", Modality::vision), 50});
    Ctm m(cfg, env);
    std::vector<TickReport> rs;
    for (Tick t = 0; t < cfg.lifetime; ++t) rs.push_back(m.tick());
    // Deficit 9, pushed down by the negative mood of the hungry broadcast.
    CHECK(rs[9].submissions[0].weight == doctest::Approx(-9.9));
    CHECK(rs[10].submissions[1].gist.payload() == "food");
    CHECK(m.processor(Address{1}).story_at(10)->received_inputs.size() == 1);
    // The food broadcast (STM at 11, delivered at 12) refills the gauge.
    CHECK(rs[11].stm.gist.payload() == "food");
    CHECK(rs[12].submissions[0].is_nil());
    CHECK(rs[15].submissions[0].weight == doctest::Approx(-3.3));
}
