#pragma once

// The Up-Tree: a fixed-height binary tree that runs one competition per tick
// and pipelines successive competitions one level per tick.

#include "ctm/core.hpp"
#include "ctm/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ctm {

enum class Side : std::uint8_t { left, right };
enum class CoinFlip : std::uint8_t { first, second };
enum class CompetitionMode : std::uint8_t { deterministic, probabilistic };

std::string_view to_string(CompetitionMode m);
CompetitionMode competition_mode_from_string(std::string_view name);

struct TreeNode {
    std::uint32_t level = 0;
    std::uint32_t position = 0;
    /// Indices into the level below; empty for leaves.
    std::optional<std::uint32_t> left_child;
    std::optional<std::uint32_t> right_child;
    /// Index into the level above; empty for the root.
    std::optional<std::uint32_t> parent;
    /// Smallest processor address among the node's leaves.
    Address min_descendant;
    /// Level-major, left-to-right index; names the node's random substream.
    std::uint64_t substream = 0;

    bool has_two_children() const noexcept { return right_child.has_value(); }
};

/// Immutable tree geometry plus the processor-to-leaf assignment.
///
/// The balanced shape pairs adjacent nodes level by level; an odd node out
/// gets a one-child parent. Each level halves (rounding up), so every
/// leaf-to-root path has length exactly ceil(log2 N).
class TreeShape {
public:
    /// leaf_of[address] = leaf position; empty means identity. Throws
    /// EmptyMachine for n == 0 and ConfigError for a non-permutation.
    static TreeShape balanced(std::size_t n, std::vector<std::uint32_t> leaf_of = {});

    std::size_t leaf_count() const noexcept { return leaf_of_.size(); }
    std::size_t height() const noexcept { return levels_.size() - 1; }
    std::size_t node_count() const noexcept;

    std::span<const TreeNode> level(std::size_t s) const { return levels_.at(s); }
    const TreeNode& root() const { return levels_.back().front(); }

    std::uint32_t leaf_of(Address a) const { return leaf_of_.at(a.id); }
    Address processor_at(std::uint32_t leaf) const { return processor_at_.at(leaf); }
    std::span<const std::uint32_t> leaf_assignment() const noexcept { return leaf_of_; }

private:
    std::vector<std::vector<TreeNode>> levels_;
    std::vector<std::uint32_t> leaf_of_;
    std::vector<Address> processor_at_;
};

/// Deterministic local competition: strictly larger f wins, exact ties go to
/// the smaller address. Throws PipelineDesync when the chunks' t differ.
Side local_winner_deterministic(const CompetitionFunction& f, const Chunk& left, const Chunk& right);

/// Returns first with probability a/(a+b), or 1/2 when a + b == 0.
/// Consumes exactly one draw. Throws ContractViolation on negative input.
CoinFlip coin_flip_neuron(double a, double b, RngStream& rng);

Side local_winner_probabilistic(const CompetitionFunction& f, const Chunk& left, const Chunk& right,
                                RngStream& rng);

/// Winner's address, t, gist and weight; intensity and mood are the sums of
/// both children. An absent sibling contributes zeros.
Chunk merge_chunks(Side winner, const Chunk& left, const std::optional<Chunk>& right);

/// One isolated, non-pipelined competition over leaf chunks indexed by
/// address. In probabilistic mode node k draws from substream k at counter t,
/// the same draw the pipelined tree uses for competition t.
Chunk compete(const TreeShape& shape, std::span<const Chunk> leaf_chunks, Tick t, CompetitionMode mode,
              const CompetitionFunction& f, std::uint64_t seed);

/// Pipelined tree state. At tick t the node at level s holds the level-s
/// chunk of the competition that began at t - s; nodes a wavefront has not
/// reached yet keep their initial NIL chunk (t = 0, smallest descendant
/// address).
class UpTree {
public:
    explicit UpTree(TreeShape shape);

    const TreeShape& shape() const noexcept { return shape_; }
    std::size_t height() const noexcept { return shape_.height(); }
    Tick next_tick() const noexcept { return next_tick_; }

    /// Advances every level simultaneously. leaf_chunks is indexed by address
    /// and every chunk must carry time t == next_tick(). Returns the new root
    /// chunk, which belongs to competition t - h once t >= h.
    const Chunk& step(std::span<const Chunk> leaf_chunks, Tick t, CompetitionMode mode,
                      const CompetitionFunction& f, std::uint64_t seed);

    const Chunk& node_chunk(std::size_t level, std::size_t position) const {
        return current_.at(level).at(position);
    }
    const Chunk& root_chunk() const { return current_.back().front(); }

    void reset();

private:
    TreeShape shape_;
    std::vector<std::vector<Chunk>> current_;
    std::vector<std::vector<Chunk>> next_;
    Tick next_tick_ = 0;
};

} // namespace ctm
