#pragma once

// Exact win probabilities of the probabilistic Up-Tree competition.

#include "ctm/core.hpp"
#include "ctm/uptree.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace ctm {

using Rational = boost::multiprecision::cpp_rational;

/// Every finite double is a dyadic rational; this returns it without rounding.
Rational exact_rational(double x);

template <class Num>
Num to_number(double x) {
    if constexpr (std::is_same_v<Num, Rational>) {
        return exact_rational(x);
    } else {
        return static_cast<Num>(x);
    }
}

template <class Num>
Num f_value(const CompetitionFunction& f, const Num& intensity, const Num& mood) {
    switch (f.kind()) {
    case CompetitionFunction::Kind::intensity: return intensity;
    case CompetitionFunction::Kind::intensity_plus_c_mood: return intensity + to_number<Num>(f.c()) * mood;
    case CompetitionFunction::Kind::abs_mood: return mood < Num(0) ? Num(-mood) : mood;
    }
    return intensity;
}

/// Probability that each processor wins one probabilistic competition over
/// leaf_chunks (indexed by address); the result is indexed by address too.
///
/// A node's f-value depends only on the summed intensity and mood of its
/// subtree, never on which chunk moved up, so a leaf's win probability is the
/// product of the local coin-flip probabilities along its root path. This holds
/// for non-additive f as well.
template <class Num>
std::vector<Num> exact_win_probabilities(const TreeShape& shape, const CompetitionFunction& f,
                                         std::span<const Chunk> leaf_chunks) {
    if (leaf_chunks.size() != shape.leaf_count()) {
        throw ConfigError("expected " + std::to_string(shape.leaf_count()) + " leaf chunks");
    }
    struct Sums {
        Num intensity;
        Num mood;
        Num f;
    };
    const std::size_t h = shape.height();
    std::vector<std::vector<Sums>> sums(h + 1);
    for (std::uint32_t leaf = 0; leaf < shape.leaf_count(); ++leaf) {
        const Chunk& c = leaf_chunks[shape.processor_at(leaf).id];
        Num in = to_number<Num>(c.intensity);
        Num mo = to_number<Num>(c.mood);
        Num fv = f_value<Num>(f, in, mo);
        sums[0].push_back({std::move(in), std::move(mo), std::move(fv)});
    }
    for (std::size_t s = 1; s <= h; ++s) {
        for (const TreeNode& node : shape.level(s)) {
            const Sums& l = sums[s - 1][*node.left_child];
            Num in = l.intensity;
            Num mo = l.mood;
            if (node.right_child) {
                in += sums[s - 1][*node.right_child].intensity;
                mo += sums[s - 1][*node.right_child].mood;
            }
            Num fv = f_value<Num>(f, in, mo);
            sums[s].push_back({std::move(in), std::move(mo), std::move(fv)});
        }
    }

    std::vector<Num> down{Num(1)};
    for (std::size_t s = h; s >= 1; --s) {
        std::vector<Num> below(shape.level(s - 1).size(), Num(0));
        const auto nodes = shape.level(s);
        for (std::size_t p = 0; p < nodes.size(); ++p) {
            const TreeNode& node = nodes[p];
            const std::uint32_t l = *node.left_child;
            if (!node.right_child) {
                below[l] = down[p];
                continue;
            }
            const std::uint32_t r = *node.right_child;
            const Num total = sums[s - 1][l].f + sums[s - 1][r].f;
            if (total == Num(0)) {
                below[l] = down[p] / Num(2);
                below[r] = down[p] / Num(2);
            } else {
                below[l] = down[p] * sums[s - 1][l].f / total;
                below[r] = down[p] * sums[s - 1][r].f / total;
            }
        }
        down = std::move(below);
    }

    std::vector<Num> by_address(shape.leaf_count(), Num(0));
    for (std::uint32_t leaf = 0; leaf < shape.leaf_count(); ++leaf) {
        by_address[shape.processor_at(leaf).id] = down[leaf];
    }
    return by_address;
}

/// f(chunk_p) / sum over p' of f(chunk_p'), indexed by address. Undefined
/// (throws ContractViolation) when every f-value is zero.
template <class Num>
std::vector<Num> f_share(const CompetitionFunction& f, std::span<const Chunk> leaf_chunks) {
    std::vector<Num> values;
    Num total(0);
    for (const Chunk& c : leaf_chunks) {
        values.push_back(f_value<Num>(f, to_number<Num>(c.intensity), to_number<Num>(c.mood)));
        total += values.back();
    }
    if (total == Num(0)) throw ContractViolation("f-share is undefined when every f-value is zero");
    for (auto& v : values) v /= total;
    return values;
}

/// CSV: leaf,address,f_value,exact_probability_numerator,denominator
void write_oracle_csv(std::ostream& out, const TreeShape& shape, const CompetitionFunction& f,
                      std::span<const Chunk> leaf_chunks);

} // namespace ctm
