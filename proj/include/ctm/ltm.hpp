#pragma once

// Long-term-memory processors: the behavior plug-in contract, per-processor
// story and interrupt state, Sleeping Experts learning, and links.

#include "ctm/core.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ctm {

enum class WeightSign : std::uint8_t { positive, negative, unclear };
enum class Route : std::uint8_t { competition, links };

/// What a behavior wants to say this tick. The processor turns the base
/// magnitude into a weight: sign * intensity_power * magnitude.
struct Proposal {
    Gist gist;
    double magnitude = 0.0;
    WeightSign sign = WeightSign::positive;
    /// links: send directly to linked processors instead of competing. Falls
    /// back to the competition when the processor has no active link.
    Route route = Route::competition;
};

struct ProposalContext {
    Address self;
    Tick t = 0;
    bool has_active_links = false;
};

/// Pluggable processor logic. Observers run in the delivery phase of a tick,
/// before propose() is asked for that tick's submission.
class Behavior {
public:
    virtual ~Behavior() = default;

    virtual std::string_view kind() const = 0;

    virtual void observe_broadcast(const Chunk& /*broadcast*/, Tick /*t*/) {}
    virtual void observe_link(const Chunk& /*chunk*/, Tick /*t*/) {}
    virtual void observe_input(const Chunk& /*chunk*/, Tick /*t*/) {}

    virtual std::optional<Proposal> propose(const ProposalContext& ctx) = 0;

    /// Whether this broadcast was useful enough to acknowledge its originator.
    virtual bool acknowledges(const Chunk& /*broadcast*/) const { return false; }

    /// While interrupted, the behavior may act only if the interrupting chunk
    /// is relevant to it.
    virtual bool relevant(const Chunk& /*interrupt*/) const { return false; }

    /// Sleeping Experts correction step after a wrong submission.
    virtual void apply_correction(const Gist& /*correction*/) {}

    /// Descriptor pushed on the work stack when an interrupt arrives.
    virtual std::string current_task() const { return std::string(kind()); }
};

using BehaviorFactory = std::function<std::unique_ptr<Behavior>(const nlohmann::json& params)>;

/// Processor kinds by name. Scenario files instantiate behaviors through it.
class BehaviorRegistry {
public:
    /// Registry pre-populated with the built-in kinds.
    static BehaviorRegistry with_builtins();

    void add(std::string name, BehaviorFactory factory);
    bool contains(const std::string& name) const { return factories_.contains(name); }
    /// Throws ConfigError for an unknown kind or bad parameters.
    std::unique_ptr<Behavior> create(const std::string& name, const nlohmann::json& params) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, BehaviorFactory> factories_;
};

struct StoryEntry {
    Tick t = 0;
    Chunk submitted;
    std::optional<Chunk> received_broadcast;
    std::vector<Chunk> received_links;
    std::vector<Chunk> received_inputs;
    bool checked = false;
};

/// Judgment on the submission a processor made at tick t.
struct Feedback {
    Tick t = 0;
    bool stm_was_right = false;
    bool p_was_right = false;
    std::optional<Gist> correction;
    /// Gist that reached STM for competition t, when known. Used only by the
    /// lighter-demotion policy.
    std::optional<Gist> stm_gist;
};

enum class UpdateOutcome : std::uint8_t {
    unchanged,        // STM was right; entry stays unchecked
    promoted,         // power *= 3/2
    demoted,          // power *= 1/2 (or the lighter factor)
    already_checked,  // idempotent no-op
    asleep,           // submission was NIL; nothing to judge
};

std::string_view to_string(UpdateOutcome o);

inline constexpr double kPromoteFactor = 1.5;
inline constexpr double kDemoteFactor = 0.5;

struct LearningPolicy {
    /// Optional milder demotion when the gist that reached STM differs from
    /// the processor's own wrong gist. Off by default.
    bool lighter_demotion_when_outvoted = false;
    double lighter_demote_factor = 1.0;
};

enum class ProcessorMode : std::uint8_t { normal, interrupted };

struct SuspendedTask {
    Tick t = 0;
    std::string description;
};

enum class InterruptTransition : std::uint8_t { none, interrupted, resumed };

/// Result of a processor's submission step.
struct Submission {
    Chunk chunk;                     // what goes on the leaf (NIL if routed to links)
    std::optional<Chunk> link_chunk; // chunk to send over active links
    std::optional<std::string> warning;
};

/// Mood state the machine hands to each submission.
struct MoodContext {
    double current_mood = 0.0;
    double delta = 0.0;
};

class Processor {
public:
    Processor(Address address, std::unique_ptr<Behavior> behavior, double intensity_power = 1.0,
              LearningPolicy policy = {});

    Address address() const noexcept { return address_; }
    Behavior& behavior() noexcept { return *behavior_; }
    const Behavior& behavior() const noexcept { return *behavior_; }
    double intensity_power() const noexcept { return intensity_power_; }
    ProcessorMode mode() const noexcept { return mode_; }
    std::size_t stack_depth() const noexcept { return work_stack_.size(); }
    const std::vector<SuspendedTask>& work_stack() const noexcept { return work_stack_; }
    const std::vector<StoryEntry>& story() const noexcept { return story_; }
    const StoryEntry* story_at(Tick t) const;

    bool competes() const noexcept { return competes_; }
    void set_competes(bool c) noexcept { competes_ = c; }

    /// Opens the story entry for tick t. Must be called once per tick, in order.
    void begin_tick(Tick t);

    /// Logs the broadcast and runs the interrupt protocol: intensity >= iota
    /// suspends current work (once), the first broadcast below iota resumes.
    InterruptTransition on_broadcast(const Chunk& broadcast, Tick t, double iota);
    void on_link(const Chunk& chunk, Tick t);
    void on_input(const Chunk& chunk, Tick t);

    /// Computes and logs the tick-t submission. Behavior exceptions produce a
    /// NIL submission plus a warning.
    Submission submit(Tick t, const MoodContext& mood, bool has_active_links,
                      std::size_t gist_limit_bits = kDefaultGistSizeLimitBits);

    UpdateOutcome sleeping_experts_update(const Feedback& feedback);

private:
    StoryEntry& current_entry(Tick t);

    Address address_;
    std::unique_ptr<Behavior> behavior_;
    double intensity_power_;
    LearningPolicy policy_;
    bool competes_ = true;
    ProcessorMode mode_ = ProcessorMode::normal;
    std::vector<SuspendedTask> work_stack_;
    std::optional<Chunk> interrupt_chunk_;
    std::vector<StoryEntry> story_;
};

/// Symmetric acknowledgment counts between processor pairs. A link is active
/// once its count reaches the threshold, and stays active.
class LinkTable {
public:
    explicit LinkTable(std::uint32_t threshold = 3);

    struct AckResult {
        std::uint32_t count = 0;
        bool active = false;
        bool newly_active = false;
    };

    /// `from` found a broadcast by `originator` useful. Throws
    /// ContractViolation on a self-ack.
    AckResult register_ack(Address from, Address originator);

    std::uint32_t count(Address a, Address b) const;
    bool active(Address a, Address b) const { return count(a, b) >= threshold_; }
    bool has_active_link(Address a) const;
    std::uint32_t threshold() const noexcept { return threshold_; }

    /// Processors with an active link to sender, in address order.
    std::vector<Address> deliver_via_links(Address sender) const;

private:
    static std::pair<std::uint32_t, std::uint32_t> key(Address a, Address b) {
        return a.id < b.id ? std::pair{a.id, b.id} : std::pair{b.id, a.id};
    }

    std::uint32_t threshold_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> counts_;
};

} // namespace ctm
