#pragma once

// Built-in processor kinds. Each is also registered by name in
// BehaviorRegistry::with_builtins() and configured from key-value parameters.

#include "ctm/ltm.hpp"

#include <map>
#include <optional>
#include <string>

namespace ctm {

/// Never says anything.
class Idle final : public Behavior {
public:
    std::string_view kind() const override { return "Idle"; }
    std::optional<Proposal> propose(const ProposalContext&) override { return std::nullopt; }
};

/// Fixed gist and weight, optionally limited to ticks [from, until).
class ConstEmitter final : public Behavior {
public:
    struct Params {
        std::string payload;
        std::string label;
        Modality modality = Modality::speech;
        double weight = 1.0;
        bool unclear_sign = false;
        /// Once any link is active, send over links instead of competing.
        bool prefer_links = false;
        Tick from = 0;
        std::optional<Tick> until;
    };

    explicit ConstEmitter(Params p);
    static std::unique_ptr<Behavior> from_json(const nlohmann::json& params);

    std::string_view kind() const override { return "ConstEmitter"; }
    std::optional<Proposal> propose(const ProposalContext& ctx) override;

private:
    Params params_;
    Gist gist_;
};

/// Forwards the strongest sensor chunk delivered this tick.
class InputRelay final : public Behavior {
public:
    explicit InputRelay(double gain = 1.0) : gain_(gain) {}
    static std::unique_ptr<Behavior> from_json(const nlohmann::json& params);

    std::string_view kind() const override { return "InputRelay"; }
    void observe_input(const Chunk& chunk, Tick t) override;
    std::optional<Proposal> propose(const ProposalContext& ctx) override;

private:
    double gain_;
    std::optional<Chunk> pending_;
};

/// Word with every "ie"/"ei" digraph replaced by '*'. Queries carry this form.
std::string spelling_skeleton(const std::string& word);

/// Fills each '*' (or rewrites each ie/ei) by "i before e except after c".
std::string apply_ie_rule(const std::string& word);

inline constexpr std::string_view kQueryLabel = "query";

/// Answers every spelling query by the ie/ei rule, once per query.
class SpellingRule final : public Behavior {
public:
    explicit SpellingRule(double magnitude = 1.0) : magnitude_(magnitude) {}
    static std::unique_ptr<Behavior> from_json(const nlohmann::json& params);

    std::string_view kind() const override { return "SpellingRule"; }
    void observe_broadcast(const Chunk& broadcast, Tick t) override;
    std::optional<Proposal> propose(const ProposalContext& ctx) override;

private:
    double magnitude_;
    std::optional<std::string> pending_;
};

/// Remembers correct spellings of specific words and answers queries for them.
class WordMemory final : public Behavior {
public:
    explicit WordMemory(const std::vector<std::string>& words, double magnitude = 1.0);
    static std::unique_ptr<Behavior> from_json(const nlohmann::json& params);

    std::string_view kind() const override { return "WordMemory"; }
    void observe_broadcast(const Chunk& broadcast, Tick t) override;
    std::optional<Proposal> propose(const ProposalContext& ctx) override;
    void apply_correction(const Gist& correction) override;

    std::optional<std::string> spelling_of(const std::string& skeleton) const;

private:
    double magnitude_;
    std::map<std::string, std::string> spellings_;
    std::optional<std::string> pending_;
};

/// Hunger signal: weight is minus the fuel deficit. Fuel burns at a fixed
/// rate and refills when a chunk with the feed label arrives, by input or
/// by broadcast.
class FuelGauge final : public Behavior {
public:
    FuelGauge(double capacity, double burn_rate, std::string feed_label);
    static std::unique_ptr<Behavior> from_json(const nlohmann::json& params);

    std::string_view kind() const override { return "FuelGauge"; }
    void observe_input(const Chunk& chunk, Tick t) override;
    void observe_broadcast(const Chunk& broadcast, Tick t) override { observe_input(broadcast, t); }
    std::optional<Proposal> propose(const ProposalContext& ctx) override;

    double deficit(Tick t) const;

private:
    double capacity_;
    double burn_rate_;
    std::string feed_label_;
    Tick last_fed_ = 0;
};

/// Emits a strongly negative gist during [start, start + duration).
class PainSource final : public Behavior {
public:
    PainSource(Tick start, Tick duration, double magnitude, std::string label);
    static std::unique_ptr<Behavior> from_json(const nlohmann::json& params);

    std::string_view kind() const override { return "PainSource"; }
    std::optional<Proposal> propose(const ProposalContext& ctx) override;
    bool relevant(const Chunk& interrupt) const override;
    std::string current_task() const override { return "monitor " + label_; }

private:
    Tick start_;
    Tick duration_;
    double magnitude_;
    std::string label_;
    Gist gist_;
};

/// Acknowledges every broadcast whose label contains the pattern.
class EchoProbe final : public Behavior {
public:
    explicit EchoProbe(std::string pattern) : pattern_(std::move(pattern)) {}
    static std::unique_ptr<Behavior> from_json(const nlohmann::json& params);

    std::string_view kind() const override { return "EchoProbe"; }
    std::optional<Proposal> propose(const ProposalContext&) override { return std::nullopt; }
    bool acknowledges(const Chunk& broadcast) const override;

private:
    std::string pattern_;
};

} // namespace ctm
