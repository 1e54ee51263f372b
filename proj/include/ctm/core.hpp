#pragma once

// Chunk algebra shared by every part of the machine: addresses, gists,
// chunks, and the competition functions that rank chunks in the Up-Tree.

#include "ctm/errors.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace ctm {

using Tick = std::uint64_t;

/// Processor address; ids are dense in [0, N) and totally ordered.
struct Address {
    std::uint32_t id = 0;

    friend constexpr auto operator<=>(Address, Address) = default;
};

enum class Modality : std::uint8_t {
    speech,
    vision,
    sensation,
    feeling,
    unsymbolized,
    command,
    nil,
};

std::string_view to_string(Modality m);
/// Throws ContractViolation on an unknown name.
Modality modality_from_string(std::string_view name);

inline constexpr std::size_t kDefaultGistSizeLimitBits = std::size_t{1} << 14;

/// Opaque, size-bounded payload with a modality tag. Immutable; copies share
/// the underlying storage. A default-constructed Gist is NIL.
class Gist {
public:
    Gist() = default;

    /// modality must be nil exactly when payload is empty.
    static Gist make(std::string payload, Modality modality, std::string label = {});
    static Gist nil() { return Gist{}; }

    bool is_nil() const noexcept { return body_ == nullptr; }
    Modality modality() const noexcept { return body_ ? body_->modality : Modality::nil; }
    const std::string& payload() const noexcept;
    /// Label for traces; falls back to the payload, or "NIL".
    const std::string& label() const noexcept;
    std::size_t size_bits() const noexcept { return payload().size() * 8; }

    friend bool operator==(const Gist& a, const Gist& b) noexcept;

private:
    struct Body {
        std::string payload;
        Modality modality;
        std::string label;
    };
    explicit Gist(std::shared_ptr<const Body> body) : body_(std::move(body)) {}

    std::shared_ptr<const Body> body_;
};

/// The 6-tuple <address, t, gist, weight, intensity, mood>.
struct Chunk {
    Address address;
    Tick t = 0;
    Gist gist;
    double weight = 0.0;
    double intensity = 0.0;
    double mood = 0.0;

    bool is_nil() const noexcept {
        return gist.is_nil() && weight == 0.0 && intensity == 0.0 && mood == 0.0;
    }

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// Leaf chunk: intensity = |weight|, mood = weight.
/// Throws SizeViolation when the gist exceeds size_limit_bits.
Chunk make_leaf_chunk(Address address, Tick t, Gist gist, double weight,
                      std::size_t size_limit_bits = kDefaultGistSizeLimitBits);

Chunk nil_chunk(Address address, Tick t);

/// Competition function f: chunk -> nonnegative real.
///
/// Every kind depends on a chunk only through (intensity, mood); the exact
/// oracle relies on this, since those two fields are fixed by the subtree
/// regardless of which chunk moves up.
class CompetitionFunction {
public:
    enum class Kind : std::uint8_t { intensity, intensity_plus_c_mood, abs_mood };

    static CompetitionFunction intensity() { return {Kind::intensity, 0.0}; }
    /// Requires -1 < c < 1.
    static CompetitionFunction intensity_plus_c_mood(double c);
    /// Not additive; exists to show the proportional-share law needs additivity.
    static CompetitionFunction abs_mood() { return {Kind::abs_mood, 0.0}; }

    Kind kind() const noexcept { return kind_; }
    double c() const noexcept { return c_; }

    friend bool operator==(const CompetitionFunction&, const CompetitionFunction&) = default;

private:
    CompetitionFunction(Kind kind, double c) : kind_(kind), c_(c) {}

    Kind kind_;
    double c_;
};

std::string_view to_string(CompetitionFunction::Kind k);
CompetitionFunction::Kind function_kind_from_string(std::string_view name);

/// Throws ContractViolation if the result is negative, which only happens on
/// chunks that break |mood| <= intensity.
double f_eval(const CompetitionFunction& f, const Chunk& chunk);

bool is_additive(const CompetitionFunction& f) noexcept;

} // namespace ctm
