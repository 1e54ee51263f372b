#pragma once

// The assembled machine <STM, LTM, Down-Tree, Up-Tree, Links, Input, Output>
// and its global clock.

#include "ctm/behaviors.hpp"
#include "ctm/core.hpp"
#include "ctm/ltm.hpp"
#include "ctm/mood.hpp"
#include "ctm/uptree.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctm {

struct ProcessorDecl {
    Address address;
    std::string kind;
    nlohmann::json params = nlohmann::json::object();
    double intensity_power = 1.0;
    bool competes = true;
    LearningPolicy policy;
};

struct MachineConfig {
    Tick lifetime = 1;
    CompetitionMode mode = CompetitionMode::deterministic;
    CompetitionFunction f = CompetitionFunction::intensity();
    double iota = 1e9;
    double delta = 0.1;
    std::uint32_t link_threshold = 3;
    std::uint64_t seed = 0;
    std::size_t gist_size_limit_bits = kDefaultGistSizeLimitBits;
    /// One declaration per processor; addresses must be exactly 0..N-1.
    std::vector<ProcessorDecl> processors;
    /// leaf_order[address] = leaf position. Empty means identity.
    std::vector<std::uint32_t> leaf_order;

    std::size_t processor_count() const noexcept { return processors.size(); }

    /// Throws ConfigError (EmptyMachine for N = 0) naming the bad field.
    void validate() const;
};

struct SensorEvent {
    Tick t = 0;
    Address target;
    Gist gist;
    double weight = 0.0;
};

/// Ground-truth judgment delivered to `target` at tick `at` about the
/// submission it made at tick `about`. With `truth` set, correctness of STM
/// and of the processor is decided by comparing gists to it; explicit flags
/// override.
struct Judgment {
    Tick at = 0;
    Address target;
    Tick about = 0;
    std::optional<Gist> truth;
    std::optional<bool> stm_was_right;
    std::optional<bool> p_was_right;
    std::optional<Gist> correction;
};

struct ActuatorExpectation {
    Tick t = 0;
    std::string command;
};

struct EnvironmentScript {
    std::vector<SensorEvent> sensor_events;
    std::vector<Judgment> judgments;
    std::vector<ActuatorExpectation> actuator_expectations;

    /// Rejects unknown targets, sensor events aimed at processors that are
    /// not InputRelays, and judgments that arrive before the judged
    /// competition has been broadcast (about + h must be < at).
    void validate(const MachineConfig& config) const;
};

/// STM plus the stream of consciousness.
struct WorkspaceState {
    /// Content of STM after the most recent tick.
    std::optional<Chunk> stm;
    /// Chunk broadcast at each tick so far; index = tick.
    std::vector<Chunk> stream;
    /// Mood and intensity of the broadcast received this tick.
    double current_mood = 0.0;
    double current_intensity = 0.0;
};

/// One-tick fan-out from STM to every processor.
struct DownTree {
    std::size_t fan_out = 0;
    /// Broadcast emitted at the previous tick, awaiting delivery.
    std::optional<Chunk> pending;
};

/// Sensors folded into the input maps: scheduled gists for relay processors.
class InputMap {
public:
    InputMap() = default;
    explicit InputMap(const std::vector<SensorEvent>& events);
    std::vector<Chunk> chunks_for(Tick t, std::size_t gist_limit_bits) const;

private:
    std::map<Tick, std::vector<SensorEvent>> schedule_;
};

struct ActuatorCommand {
    Tick t = 0;
    Address originator;
    std::string command;
};

/// Actuators folded into the output maps: command gists become commands.
class OutputMap {
public:
    std::optional<ActuatorCommand> convert(const Chunk& broadcast, Tick t);
    const std::vector<ActuatorCommand>& log() const noexcept { return log_; }

private:
    std::vector<ActuatorCommand> log_;
};

struct InterruptEvent {
    Address processor;
    InterruptTransition transition = InterruptTransition::none;
    std::size_t stack_depth = 0;
};

struct AckEvent {
    Address from;
    Address originator;
    LinkTable::AckResult result;
};

struct FeedbackEvent {
    Address processor;
    Feedback feedback;
    UpdateOutcome outcome = UpdateOutcome::unchanged;
    double power_before = 0.0;
    double power_after = 0.0;
};

struct LinkSend {
    Chunk chunk;
    std::vector<Address> recipients;
};

/// Everything that happened during one tick, in phase order.
struct TickReport {
    Tick t = 0;
    std::optional<Chunk> delivered_broadcast;
    std::vector<InterruptEvent> interrupts;
    std::vector<AckEvent> acks;
    std::vector<FeedbackEvent> feedback;
    std::vector<Chunk> submissions;
    std::vector<LinkSend> link_sends;
    Chunk stm;
    std::optional<ActuatorCommand> actuator;
    std::vector<std::string> warnings;
};

class Ctm {
public:
    /// Builds the seven components. Throws ConfigError / ScenarioError.
    explicit Ctm(MachineConfig config, EnvironmentScript env = {},
                 const BehaviorRegistry& registry = BehaviorRegistry::with_builtins());

    const MachineConfig& config() const noexcept { return config_; }
    Tick now() const noexcept { return now_; }
    std::size_t height() const noexcept { return up_tree_.height(); }
    /// Delay from submission to conscious awareness: h + 1.
    std::size_t awareness_delay() const noexcept { return height() + 1; }

    const WorkspaceState& stm() const noexcept { return workspace_; }
    const std::vector<Processor>& ltm() const noexcept { return processors_; }
    std::vector<Processor>& ltm() noexcept { return processors_; }
    const DownTree& down_tree() const noexcept { return down_tree_; }
    const UpTree& up_tree() const noexcept { return up_tree_; }
    const LinkTable& links() const noexcept { return links_; }
    LinkTable& links() noexcept { return links_; }
    const InputMap& input() const noexcept { return input_; }
    const OutputMap& output() const noexcept { return output_; }

    const Processor& processor(Address a) const { return processors_.at(a.id); }

    /// Runs one tick through all phases. Throws ConfigError once now() == T.
    TickReport tick();

    /// Mood / intensity of the broadcast received at t. Requires h + 1 < t <= now().
    double current_mood(Tick t) const;
    double current_intensity(Tick t) const;

    /// Broadcasts whose command did not match the script's expectations.
    std::vector<ActuatorExpectation> unmet_actuator_expectations() const;

private:
    Feedback resolve(const Judgment& j) const;
    const Chunk& received_at(Tick t) const;

    MachineConfig config_;
    EnvironmentScript env_;
    std::vector<Processor> processors_;
    UpTree up_tree_;
    LinkTable links_;
    DownTree down_tree_;
    InputMap input_;
    OutputMap output_;
    WorkspaceState workspace_;
    std::map<Tick, std::vector<Judgment>> judgments_;
    std::vector<std::pair<Chunk, std::vector<Address>>> pending_link_chunks_;
    Tick now_ = 0;
};

} // namespace ctm
