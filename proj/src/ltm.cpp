#include "ctm/ltm.hpp"
#include "ctm/mood.hpp"

#include <algorithm>

namespace ctm {

std::string_view to_string(UpdateOutcome o) {
    switch (o) {
    case UpdateOutcome::unchanged: return "unchanged";
    case UpdateOutcome::promoted: return "promoted";
    case UpdateOutcome::demoted: return "demoted";
    case UpdateOutcome::already_checked: return "already_checked";
    case UpdateOutcome::asleep: return "asleep";
    }
    return "unchanged";
}

void BehaviorRegistry::add(std::string name, BehaviorFactory factory) {
    factories_[std::move(name)] = std::move(factory);
}

std::unique_ptr<Behavior> BehaviorRegistry::create(const std::string& name, const nlohmann::json& params) const {
    const auto it = factories_.find(name);
    if (it == factories_.end()) throw ConfigError("unknown processor kind '" + name + "'");
    try {
        return it->second(params.is_null() ? nlohmann::json::object() : params);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad parameters for processor kind '" + name + "': " + e.what());
    }
}

std::vector<std::string> BehaviorRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : factories_) out.push_back(name);
    return out;
}

Processor::Processor(Address address, std::unique_ptr<Behavior> behavior, double intensity_power,
                     LearningPolicy policy)
    : address_(address), behavior_(std::move(behavior)), intensity_power_(intensity_power), policy_(policy) {
    if (!behavior_) throw ConfigError("processor needs a behavior");
    if (!(intensity_power_ > 0.0)) throw ConfigError("intensity_power must be positive");
    if (!(policy_.lighter_demote_factor > 0.0 && policy_.lighter_demote_factor <= 1.0)) {
        throw ConfigError("lighter_demote_factor must lie in (0, 1]");
    }
}

const StoryEntry* Processor::story_at(Tick t) const {
    return t < story_.size() ? &story_[t] : nullptr;
}

void Processor::begin_tick(Tick t) {
    if (t != story_.size()) {
        throw ContractViolation("processor " + std::to_string(address_.id) + " expected tick " +
                                std::to_string(story_.size()) + ", got " + std::to_string(t));
    }
    StoryEntry entry;
    entry.t = t;
    entry.submitted = nil_chunk(address_, t);
    story_.push_back(std::move(entry));
}

StoryEntry& Processor::current_entry(Tick t) {
    if (story_.empty() || story_.back().t != t) {
        throw ContractViolation("no open story entry for tick " + std::to_string(t));
    }
    return story_.back();
}

InterruptTransition Processor::on_broadcast(const Chunk& broadcast, Tick t, double iota) {
    current_entry(t).received_broadcast = broadcast;
    behavior_->observe_broadcast(broadcast, t);

    if (broadcast.intensity >= iota) {
        interrupt_chunk_ = broadcast;
        if (mode_ == ProcessorMode::normal) {
            work_stack_.push_back({t, behavior_->current_task()});
            mode_ = ProcessorMode::interrupted;
            return InterruptTransition::interrupted;
        }
        return InterruptTransition::none;
    }
    if (mode_ == ProcessorMode::interrupted) {
        work_stack_.pop_back();
        mode_ = ProcessorMode::normal;
        interrupt_chunk_.reset();
        return InterruptTransition::resumed;
    }
    return InterruptTransition::none;
}

void Processor::on_link(const Chunk& chunk, Tick t) {
    current_entry(t).received_links.push_back(chunk);
    behavior_->observe_link(chunk, t);
}

void Processor::on_input(const Chunk& chunk, Tick t) {
    current_entry(t).received_inputs.push_back(chunk);
    behavior_->observe_input(chunk, t);
}

Submission Processor::submit(Tick t, const MoodContext& mood, bool has_active_links, std::size_t gist_limit_bits) {
    StoryEntry& entry = current_entry(t);
    Submission out{nil_chunk(address_, t), std::nullopt, std::nullopt};

    if (mode_ == ProcessorMode::interrupted && !(interrupt_chunk_ && behavior_->relevant(*interrupt_chunk_))) {
        entry.submitted = out.chunk;
        return out;
    }

    try {
        const std::optional<Proposal> proposal = behavior_->propose({address_, t, has_active_links});
        if (proposal && !proposal->gist.is_nil()) {
            if (!(proposal->magnitude >= 0.0)) throw ContractViolation("proposal magnitude must be nonnegative");
            double sign = 1.0;
            if (proposal->sign == WeightSign::negative) sign = -1.0;
            if (proposal->sign == WeightSign::unclear) sign = unclear_sign(mood.current_mood);
            const double w = mood_modulate(sign * intensity_power_ * proposal->magnitude, mood.current_mood, mood.delta);
            Chunk chunk = make_leaf_chunk(address_, t, proposal->gist, w, gist_limit_bits);
            if (proposal->route == Route::links && has_active_links) {
                out.link_chunk = std::move(chunk);
            } else if (competes_) {
                out.chunk = std::move(chunk);
            }
        }
    } catch (const std::exception& e) {
        out = Submission{nil_chunk(address_, t), std::nullopt,
                         std::string(behavior_->kind()) + " at " + std::to_string(address_.id) + ": " + e.what()};
    }
    entry.submitted = out.chunk;
    return out;
}

UpdateOutcome Processor::sleeping_experts_update(const Feedback& feedback) {
    if (feedback.t >= story_.size()) {
        throw ContractViolation("processor " + std::to_string(address_.id) + " has no story entry for tick " +
                                std::to_string(feedback.t));
    }
    StoryEntry& entry = story_[feedback.t];
    if (entry.checked) return UpdateOutcome::already_checked;
    if (entry.submitted.is_nil()) return UpdateOutcome::asleep;
    if (feedback.stm_was_right) return UpdateOutcome::unchanged;

    if (feedback.p_was_right) {
        intensity_power_ *= kPromoteFactor;
        entry.checked = true;
        return UpdateOutcome::promoted;
    }
    if (feedback.correction) behavior_->apply_correction(*feedback.correction);
    double factor = kDemoteFactor;
    if (policy_.lighter_demotion_when_outvoted && feedback.stm_gist && !(*feedback.stm_gist == entry.submitted.gist)) {
        factor = policy_.lighter_demote_factor;
    }
    intensity_power_ *= factor;
    entry.checked = true;
    return UpdateOutcome::demoted;
}

LinkTable::LinkTable(std::uint32_t threshold) : threshold_(threshold) {
    if (threshold_ == 0) throw ConfigError("link threshold must be positive");
}

LinkTable::AckResult LinkTable::register_ack(Address from, Address originator) {
    if (from == originator) {
        throw ContractViolation("processor " + std::to_string(from.id) + " cannot acknowledge its own chunk");
    }
    std::uint32_t& c = counts_[key(from, originator)];
    const bool was_active = c >= threshold_;
    ++c;
    return {c, c >= threshold_, !was_active && c >= threshold_};
}

std::uint32_t LinkTable::count(Address a, Address b) const {
    const auto it = counts_.find(key(a, b));
    return it == counts_.end() ? 0 : it->second;
}

bool LinkTable::has_active_link(Address a) const {
    for (const auto& [k, c] : counts_) {
        if (c >= threshold_ && (k.first == a.id || k.second == a.id)) return true;
    }
    return false;
}

std::vector<Address> LinkTable::deliver_via_links(Address sender) const {
    std::vector<Address> out;
    for (const auto& [k, c] : counts_) {
        if (c < threshold_) continue;
        if (k.first == sender.id) out.push_back(Address{k.second});
        else if (k.second == sender.id) out.push_back(Address{k.first});
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace ctm
