#include "ctm/uptree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ctm {

std::string_view to_string(CompetitionMode m) {
    return m == CompetitionMode::deterministic ? "deterministic" : "probabilistic";
}

CompetitionMode competition_mode_from_string(std::string_view name) {
    if (name == "deterministic" || name == "det") return CompetitionMode::deterministic;
    if (name == "probabilistic" || name == "prob") return CompetitionMode::probabilistic;
    throw ContractViolation("unknown competition mode '" + std::string(name) + "'");
}

TreeShape TreeShape::balanced(std::size_t n, std::vector<std::uint32_t> leaf_of) {
    if (n == 0) throw EmptyMachine("an Up-Tree needs at least one leaf");
    if (leaf_of.empty()) {
        leaf_of.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) leaf_of[i] = i;
    }
    if (leaf_of.size() != n) {
        throw ConfigError("leaf assignment has " + std::to_string(leaf_of.size()) + " entries for " +
                          std::to_string(n) + " processors");
    }

    TreeShape shape;
    shape.processor_at_.assign(n, Address{0});
    std::vector<bool> seen(n, false);
    for (std::uint32_t addr = 0; addr < n; ++addr) {
        const std::uint32_t leaf = leaf_of[addr];
        if (leaf >= n || seen[leaf]) throw ConfigError("leaf assignment is not a permutation");
        seen[leaf] = true;
        shape.processor_at_[leaf] = Address{addr};
    }
    shape.leaf_of_ = std::move(leaf_of);

    std::uint64_t substream = 0;
    std::vector<TreeNode> leaves(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        leaves[i].level = 0;
        leaves[i].position = i;
        leaves[i].min_descendant = shape.processor_at_[i];
        leaves[i].substream = substream++;
    }
    shape.levels_.push_back(std::move(leaves));

    while (shape.levels_.back().size() > 1) {
        auto& below = shape.levels_.back();
        const auto level = static_cast<std::uint32_t>(shape.levels_.size());
        std::vector<TreeNode> above((below.size() + 1) / 2);
        for (std::uint32_t p = 0; p < above.size(); ++p) {
            TreeNode& node = above[p];
            node.level = level;
            node.position = p;
            node.substream = substream++;
            node.left_child = 2 * p;
            below[2 * p].parent = p;
            node.min_descendant = below[2 * p].min_descendant;
            if (2 * p + 1 < below.size()) {
                node.right_child = 2 * p + 1;
                below[2 * p + 1].parent = p;
                node.min_descendant = std::min(node.min_descendant, below[2 * p + 1].min_descendant);
            }
        }
        shape.levels_.push_back(std::move(above));
    }
    return shape;
}

std::size_t TreeShape::node_count() const noexcept {
    std::size_t total = 0;
    for (const auto& lvl : levels_) total += lvl.size();
    return total;
}

Side local_winner_deterministic(const CompetitionFunction& f, const Chunk& left, const Chunk& right) {
    if (left.t != right.t) {
        throw PipelineDesync("sibling chunks from competitions " + std::to_string(left.t) + " and " +
                             std::to_string(right.t));
    }
    const double fl = f_eval(f, left);
    const double fr = f_eval(f, right);
    if (fl > fr) return Side::left;
    if (fr > fl) return Side::right;
    return left.address <= right.address ? Side::left : Side::right;
}

CoinFlip coin_flip_neuron(double a, double b, RngStream& rng) {
    if (!(a >= 0.0) || !(b >= 0.0)) {
        throw ContractViolation("coin-flip neuron inputs must be nonnegative");
    }
    const double u = rng.next_unit();
    const double total = a + b;
    if (total == 0.0) return u < 0.5 ? CoinFlip::first : CoinFlip::second;
    return u * total < a ? CoinFlip::first : CoinFlip::second;
}

Side local_winner_probabilistic(const CompetitionFunction& f, const Chunk& left, const Chunk& right,
                                RngStream& rng) {
    if (left.t != right.t) {
        throw PipelineDesync("sibling chunks from competitions " + std::to_string(left.t) + " and " +
                             std::to_string(right.t));
    }
    return coin_flip_neuron(f_eval(f, left), f_eval(f, right), rng) == CoinFlip::first ? Side::left
                                                                                         : Side::right;
}

Chunk merge_chunks(Side winner, const Chunk& left, const std::optional<Chunk>& right) {
    if (!right) return left;
    if (left.t != right->t) {
        throw PipelineDesync("merging chunks from competitions " + std::to_string(left.t) + " and " +
                             std::to_string(right->t));
    }
    Chunk out = winner == Side::left ? left : *right;
    out.intensity = left.intensity + right->intensity;
    out.mood = left.mood + right->mood;
    return out;
}

namespace {

Chunk node_output(const TreeNode& node, std::span<const Chunk> below, CompetitionMode mode,
                  const CompetitionFunction& f, std::uint64_t seed, Tick competition) {
    const Chunk& left = below[*node.left_child];
    if (!node.has_two_children()) return left;
    const Chunk& right = below[*node.right_child];
    Side winner;
    if (mode == CompetitionMode::deterministic) {
        winner = local_winner_deterministic(f, left, right);
    } else {
        RngStream rng(seed, node.substream, competition);
        winner = local_winner_probabilistic(f, left, right, rng);
    }
    return merge_chunks(winner, left, right);
}

void check_leaves(const TreeShape& shape, std::span<const Chunk> leaf_chunks, Tick t) {
    if (leaf_chunks.size() != shape.leaf_count()) {
        throw ConfigError("expected " + std::to_string(shape.leaf_count()) + " leaf chunks, got " +
                          std::to_string(leaf_chunks.size()));
    }
    for (std::size_t i = 0; i < leaf_chunks.size(); ++i) {
        if (leaf_chunks[i].address.id != i) {
            throw ConfigError("leaf chunk " + std::to_string(i) + " carries address " +
                              std::to_string(leaf_chunks[i].address.id));
        }
        if (leaf_chunks[i].t != t) {
            throw ConfigError("leaf chunk " + std::to_string(i) + " carries t=" +
                              std::to_string(leaf_chunks[i].t) + " at tick " + std::to_string(t));
        }
    }
}

} // namespace

Chunk compete(const TreeShape& shape, std::span<const Chunk> leaf_chunks, Tick t, CompetitionMode mode,
              const CompetitionFunction& f, std::uint64_t seed) {
    check_leaves(shape, leaf_chunks, t);
    std::vector<Chunk> below(shape.leaf_count());
    for (std::uint32_t leaf = 0; leaf < below.size(); ++leaf) {
        below[leaf] = leaf_chunks[shape.processor_at(leaf).id];
    }
    for (std::size_t s = 1; s <= shape.height(); ++s) {
        const auto nodes = shape.level(s);
        std::vector<Chunk> above;
        above.reserve(nodes.size());
        for (const TreeNode& node : nodes) above.push_back(node_output(node, below, mode, f, seed, t));
        below = std::move(above);
    }
    return below.front();
}

UpTree::UpTree(TreeShape shape) : shape_(std::move(shape)) { reset(); }

void UpTree::reset() {
    current_.assign(shape_.height() + 1, {});
    for (std::size_t s = 0; s <= shape_.height(); ++s) {
        for (const TreeNode& node : shape_.level(s)) current_[s].push_back(nil_chunk(node.min_descendant, 0));
    }
    next_ = current_;
    next_tick_ = 0;
}

const Chunk& UpTree::step(std::span<const Chunk> leaf_chunks, Tick t, CompetitionMode mode,
                          const CompetitionFunction& f, std::uint64_t seed) {
    if (t != next_tick_) {
        throw ConfigError("Up-Tree expected tick " + std::to_string(next_tick_) + ", got " + std::to_string(t));
    }
    check_leaves(shape_, leaf_chunks, t);

    for (std::uint32_t leaf = 0; leaf < shape_.leaf_count(); ++leaf) {
        next_[0][leaf] = leaf_chunks[shape_.processor_at(leaf).id];
    }
    // Every level reads only the previous buffer of the level below, so the
    // order of evaluation inside this loop does not matter.
    for (std::size_t s = 1; s <= shape_.height(); ++s) {
        const auto nodes = shape_.level(s);
        for (std::size_t p = 0; p < nodes.size(); ++p) {
            if (t < s) {
                next_[s][p] = current_[s][p];
            } else {
                next_[s][p] = node_output(nodes[p], current_[s - 1], mode, f, seed, t - s);
            }
        }
    }
    std::swap(current_, next_);
    ++next_tick_;
    return root_chunk();
}

} // namespace ctm
