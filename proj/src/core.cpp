#include "ctm/core.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace ctm {

namespace {

constexpr std::array<std::pair<Modality, std::string_view>, 7> kModalityNames{{
    {Modality::speech, "speech"},
    {Modality::vision, "vision"},
    {Modality::sensation, "sensation"},
    {Modality::feeling, "feeling"},
    {Modality::unsymbolized, "unsymbolized"},
    {Modality::command, "command"},
    {Modality::nil, "nil"},
}};

const std::string kEmpty;
const std::string kNilLabel = "NIL";

} // namespace

std::string_view to_string(Modality m) {
    for (const auto& [mod, name] : kModalityNames) {
        if (mod == m) return name;
    }
    return "nil";
}

Modality modality_from_string(std::string_view name) {
    for (const auto& [mod, n] : kModalityNames) {
        if (n == name) return mod;
    }
    throw ContractViolation("unknown modality '" + std::string(name) + "'");
}

Gist Gist::make(std::string payload, Modality modality, std::string label) {
    if (payload.empty() != (modality == Modality::nil)) {
        throw ContractViolation("gist modality must be nil exactly when the payload is empty");
    }
    if (payload.empty()) return Gist{};
    return Gist{std::make_shared<const Body>(Body{std::move(payload), modality, std::move(label)})};
}

const std::string& Gist::payload() const noexcept {
    return body_ ? body_->payload : kEmpty;
}

const std::string& Gist::label() const noexcept {
    if (!body_) return kNilLabel;
    return body_->label.empty() ? body_->payload : body_->label;
}

bool operator==(const Gist& a, const Gist& b) noexcept {
    if (a.body_ == b.body_) return true;
    if (!a.body_ || !b.body_) return false;
    return a.body_->modality == b.body_->modality && a.body_->payload == b.body_->payload &&
           a.body_->label == b.body_->label;
}

Chunk make_leaf_chunk(Address address, Tick t, Gist gist, double weight,
                      std::size_t size_limit_bits) {
    if (gist.size_bits() > size_limit_bits) {
        throw SizeViolation("gist of " + std::to_string(gist.size_bits()) + " bits exceeds limit of " +
                            std::to_string(size_limit_bits) + " bits");
    }
    if (!std::isfinite(weight)) {
        throw ContractViolation("chunk weight must be finite");
    }
    return Chunk{address, t, std::move(gist), weight, std::fabs(weight), weight};
}

Chunk nil_chunk(Address address, Tick t) {
    return Chunk{address, t, Gist::nil(), 0.0, 0.0, 0.0};
}

CompetitionFunction CompetitionFunction::intensity_plus_c_mood(double c) {
    if (!(c > -1.0 && c < 1.0)) {
        throw ContractViolation("intensity_plus_c_mood requires -1 < c < 1, got " + std::to_string(c));
    }
    return {Kind::intensity_plus_c_mood, c};
}

std::string_view to_string(CompetitionFunction::Kind k) {
    switch (k) {
    case CompetitionFunction::Kind::intensity: return "intensity";
    case CompetitionFunction::Kind::intensity_plus_c_mood: return "intensity_plus_c_mood";
    case CompetitionFunction::Kind::abs_mood: return "abs_mood";
    }
    return "intensity";
}

CompetitionFunction::Kind function_kind_from_string(std::string_view name) {
    using K = CompetitionFunction::Kind;
    for (K k : {K::intensity, K::intensity_plus_c_mood, K::abs_mood}) {
        if (to_string(k) == name) return k;
    }
    throw ContractViolation("unknown competition function '" + std::string(name) + "'");
}

double f_eval(const CompetitionFunction& f, const Chunk& chunk) {
    double value = 0.0;
    switch (f.kind()) {
    case CompetitionFunction::Kind::intensity: value = chunk.intensity; break;
    case CompetitionFunction::Kind::intensity_plus_c_mood: value = chunk.intensity + f.c() * chunk.mood; break;
    case CompetitionFunction::Kind::abs_mood: value = std::fabs(chunk.mood); break;
    }
    if (value < 0.0) {
        throw ContractViolation("competition function produced a negative value; chunk violates |mood| <= intensity");
    }
    return value;
}

bool is_additive(const CompetitionFunction& f) noexcept {
    return f.kind() != CompetitionFunction::Kind::abs_mood;
}

} // namespace ctm
