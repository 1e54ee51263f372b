#include "ctm/machine.hpp"

#include <algorithm>
#include <cmath>

namespace ctm {

double mood_modulate(double w, double current_mood, double delta) {
    if (current_mood == 0.0) return w;
    const double direction = current_mood > 0.0 ? 1.0 : -1.0;
    return w + direction * delta * std::fabs(w);
}

double unclear_sign(double current_mood) {
    return current_mood < 0.0 ? -1.0 : 1.0;
}

void MachineConfig::validate() const {
    if (processors.empty()) throw EmptyMachine("machine needs at least one processor");
    if (lifetime < 1) throw ConfigError("lifetime T must be at least 1");
    if (!(iota > 0.0)) throw ConfigError("interrupt constant iota must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("mood constant delta must satisfy 0 < delta < 1");
    if (link_threshold < 1) throw ConfigError("link_threshold must be positive");
    if (gist_size_limit_bits == 0) throw ConfigError("gist_size_limit must be positive");

    std::vector<bool> seen(processors.size(), false);
    for (const auto& decl : processors) {
        if (decl.address.id >= processors.size()) {
            throw ConfigError("processor address " + std::to_string(decl.address.id) + " is outside [0, " +
                              std::to_string(processors.size()) + ")");
        }
        if (seen[decl.address.id]) throw ConfigError("duplicate processor address " + std::to_string(decl.address.id));
        seen[decl.address.id] = true;
        if (!(decl.intensity_power > 0.0)) {
            throw ConfigError("processor " + std::to_string(decl.address.id) + " needs intensity_power > 0");
        }
    }
    if (!leaf_order.empty() && leaf_order.size() != processors.size()) {
        throw ConfigError("leaf_order must list one leaf per processor");
    }
}

void EnvironmentScript::validate(const MachineConfig& config) const {
    const std::size_t n = config.processor_count();
    const std::size_t h = TreeShape::balanced(n, config.leaf_order).height();
    auto kind_of = [&](Address a) -> const std::string& {
        for (const auto& d : config.processors) {
            if (d.address == a) return d.kind;
        }
        throw ScenarioError("unknown processor address " + std::to_string(a.id));
    };

    for (const auto& e : sensor_events) {
        if (e.target.id >= n) throw ScenarioError("sensor event targets unknown address " + std::to_string(e.target.id));
        if (kind_of(e.target) != "InputRelay") {
            throw ScenarioError("sensor event targets processor " + std::to_string(e.target.id) +
                                ", which is not an InputRelay");
        }
        if (e.gist.is_nil()) throw ScenarioError("sensor event at tick " + std::to_string(e.t) + " has an empty gist");
    }
    for (const auto& j : judgments) {
        if (j.target.id >= n) throw ScenarioError("judgment targets unknown address " + std::to_string(j.target.id));
        if (!(j.about + h < j.at)) {
            throw ScenarioError("judgment at tick " + std::to_string(j.at) + " about tick " + std::to_string(j.about) +
                                " arrives before that competition is broadcast (h = " + std::to_string(h) + ")");
        }
        if (!j.truth && !(j.stm_was_right && j.p_was_right)) {
            throw ScenarioError("judgment at tick " + std::to_string(j.at) +
                                " needs either a truth gist or both stm_was_right and p_was_right");
        }
    }
}

InputMap::InputMap(const std::vector<SensorEvent>& events) {
    for (const auto& e : events) schedule_[e.t].push_back(e);
}

std::vector<Chunk> InputMap::chunks_for(Tick t, std::size_t gist_limit_bits) const {
    std::vector<Chunk> out;
    const auto it = schedule_.find(t);
    if (it == schedule_.end()) return out;
    for (const auto& e : it->second) out.push_back(make_leaf_chunk(e.target, t, e.gist, e.weight, gist_limit_bits));
    return out;
}

std::optional<ActuatorCommand> OutputMap::convert(const Chunk& broadcast, Tick t) {
    if (broadcast.gist.modality() != Modality::command) return std::nullopt;
    log_.push_back({t, broadcast.address, broadcast.gist.payload()});
    return log_.back();
}

namespace {

UpTree build_tree(const MachineConfig& config) {
    config.validate();
    return UpTree(TreeShape::balanced(config.processor_count(), config.leaf_order));
}

} // namespace

Ctm::Ctm(MachineConfig config, EnvironmentScript env, const BehaviorRegistry& registry)
    : config_(std::move(config)), env_(std::move(env)), up_tree_(build_tree(config_)),
      links_(config_.link_threshold), input_(env_.sensor_events) {
    env_.validate(config_);

    std::vector<const ProcessorDecl*> by_address(config_.processor_count());
    for (const auto& decl : config_.processors) by_address[decl.address.id] = &decl;
    processors_.reserve(by_address.size());
    for (const ProcessorDecl* decl : by_address) {
        processors_.emplace_back(decl->address, registry.create(decl->kind, decl->params), decl->intensity_power,
                                 decl->policy);
        processors_.back().set_competes(decl->competes);
    }
    down_tree_.fan_out = processors_.size();
    for (const auto& j : env_.judgments) judgments_[j.at].push_back(j);
}

const Chunk& Ctm::received_at(Tick t) const {
    if (t <= height() + 1) {
        throw WarmupError("current mood is defined only for t > h + 1 = " + std::to_string(height() + 1));
    }
    if (t > now_ || t - 1 >= workspace_.stream.size()) {
        throw ContractViolation("tick " + std::to_string(t) + " has not been delivered yet");
    }
    return workspace_.stream[t - 1];
}

double Ctm::current_mood(Tick t) const { return received_at(t).mood; }
double Ctm::current_intensity(Tick t) const { return received_at(t).intensity; }

Feedback Ctm::resolve(const Judgment& j) const {
    Feedback fb;
    fb.t = j.about;
    fb.correction = j.correction;
    const Chunk& reached_stm = workspace_.stream.at(j.about + height());
    fb.stm_gist = reached_stm.gist;
    if (j.truth) {
        fb.stm_was_right = reached_stm.gist.payload() == j.truth->payload();
        const StoryEntry* entry = processors_.at(j.target.id).story_at(j.about);
        fb.p_was_right = entry && entry->submitted.gist.payload() == j.truth->payload();
    }
    if (j.stm_was_right) fb.stm_was_right = *j.stm_was_right;
    if (j.p_was_right) fb.p_was_right = *j.p_was_right;
    return fb;
}

TickReport Ctm::tick() {
    if (now_ >= config_.lifetime) {
        throw ConfigError("machine lifetime of " + std::to_string(config_.lifetime) + " ticks is exhausted");
    }
    const Tick t = now_;
    TickReport report;
    report.t = t;

    for (auto& p : processors_) p.begin_tick(t);

    // Deliveries: last tick's broadcast, link chunks, sensor inputs.
    workspace_.current_mood = 0.0;
    workspace_.current_intensity = 0.0;
    if (down_tree_.pending) {
        const Chunk broadcast = *down_tree_.pending;
        report.delivered_broadcast = broadcast;
        workspace_.current_mood = broadcast.mood;
        workspace_.current_intensity = broadcast.intensity;
        for (auto& p : processors_) {
            const auto transition = p.on_broadcast(broadcast, t, config_.iota);
            if (transition != InterruptTransition::none) {
                report.interrupts.push_back({p.address(), transition, p.stack_depth()});
            }
        }
        if (!broadcast.gist.is_nil()) {
            for (auto& p : processors_) {
                if (p.address() != broadcast.address && p.behavior().acknowledges(broadcast)) {
                    report.acks.push_back({p.address(), broadcast.address, links_.register_ack(p.address(), broadcast.address)});
                }
            }
        }
        down_tree_.pending.reset();
    }
    for (const auto& [chunk, recipients] : pending_link_chunks_) {
        for (Address a : recipients) processors_.at(a.id).on_link(chunk, t);
    }
    pending_link_chunks_.clear();
    for (const Chunk& c : input_.chunks_for(t, config_.gist_size_limit_bits)) {
        processors_.at(c.address.id).on_input(c, t);
    }

    // Feedback.
    if (const auto it = judgments_.find(t); it != judgments_.end()) {
        for (const Judgment& j : it->second) {
            Processor& p = processors_.at(j.target.id);
            FeedbackEvent ev;
            ev.processor = p.address();
            ev.feedback = resolve(j);
            ev.power_before = p.intensity_power();
            ev.outcome = p.sleeping_experts_update(ev.feedback);
            ev.power_after = p.intensity_power();
            report.feedback.push_back(std::move(ev));
        }
    }

    // Submissions, mood-modulated.
    const MoodContext mood{workspace_.current_mood, config_.delta};
    std::vector<Chunk> leaves;
    leaves.reserve(processors_.size());
    for (auto& p : processors_) {
        Submission sub = p.submit(t, mood, links_.has_active_link(p.address()), config_.gist_size_limit_bits);
        if (sub.warning) report.warnings.push_back(*sub.warning);
        if (sub.link_chunk) {
            auto recipients = links_.deliver_via_links(p.address());
            report.link_sends.push_back({*sub.link_chunk, recipients});
            pending_link_chunks_.emplace_back(*sub.link_chunk, std::move(recipients));
        }
        leaves.push_back(std::move(sub.chunk));
    }

    // Competition, STM, broadcast.
    const Chunk& root = up_tree_.step(leaves, t, config_.mode, config_.f, config_.seed);
    report.submissions = std::move(leaves);
    workspace_.stm = root;
    workspace_.stream.push_back(root);
    down_tree_.pending = root;
    report.stm = root;

    report.actuator = output_.convert(root, t);

    ++now_;
    return report;
}

std::vector<ActuatorExpectation> Ctm::unmet_actuator_expectations() const {
    std::vector<ActuatorExpectation> unmet;
    for (const auto& e : env_.actuator_expectations) {
        const bool met = std::any_of(output_.log().begin(), output_.log().end(), [&](const ActuatorCommand& c) {
            return c.t == e.t && c.command == e.command;
        });
        if (!met) unmet.push_back(e);
    }
    return unmet;
}

} // namespace ctm
