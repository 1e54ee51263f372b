#include "ctm/uptree.hpp"

#include "support/random_emitter.hpp"

#include <doctest.h>

#include <cmath>

using namespace ctm;

namespace {

Chunk leaf(std::uint32_t address, Tick t, const std::string& gist, double weight) {
    return make_leaf_chunk(Address{address}, t, Gist::make(gist, Modality::speech), weight);
}

std::vector<Chunk> weights_at(Tick t, std::initializer_list<double> ws) {
    std::vector<Chunk> out;
    std::uint32_t a = 0;
    for (double w : ws) {
        out.push_back(w == 0.0 ? nil_chunk(Address{a}, t) : leaf(a, t, std::string(1, static_cast<char>('a' + a)), w));
        ++a;
    }
    return out;
}

std::size_t ceil_log2(std::size_t n) {
    std::size_t h = 0;
    while ((std::size_t{1} << h) < n) ++h;
    return h;
}

} // namespace

TEST_CASE("balanced shape: heights and degenerate cases") {
    CHECK(TreeShape::balanced(1).height() == 0);
    CHECK(TreeShape::balanced(2).height() == 1);
    const TreeShape four = TreeShape::balanced(4);
    CHECK(four.height() == 2);
    CHECK(four.node_count() == 7);
    for (std::size_t s = 1; s <= 2; ++s) {
        for (const auto& n : four.level(s)) CHECK(n.has_two_children());
    }
    CHECK(TreeShape::balanced(5).height() == 3);
    CHECK_THROWS_AS(TreeShape::balanced(0), EmptyMachine);
    CHECK_THROWS_AS(TreeShape::balanced(3, {0, 0, 1}), ConfigError);
    CHECK_THROWS_AS(TreeShape::balanced(3, {0, 1}), ConfigError);
    CHECK_THROWS_AS(TreeShape::balanced(3, {0, 1, 3}), ConfigError);
}

TEST_CASE("balanced shape: every leaf reaches the root in exactly h edges") {
    for (std::size_t n = 1; n <= 150; ++n) {
        const TreeShape shape = TreeShape::balanced(n);
        const std::size_t h = shape.height();
        REQUIRE(h == ceil_log2(n));
        CHECK(h <= 3 * ceil_log2(n));
        for (std::uint32_t l = 0; l < n; ++l) {
            std::size_t steps = 0;
            std::uint32_t pos = l;
            for (std::size_t s = 0; s < h; ++s) {
                const TreeNode& node = shape.level(s)[pos];
                REQUIRE(node.parent.has_value());
                const TreeNode& up = shape.level(s + 1)[*node.parent];
                CHECK((up.left_child == pos || up.right_child == pos));
                pos = *node.parent;
                ++steps;
            }
            CHECK(steps == h);
            CHECK_FALSE(shape.level(h)[pos].parent.has_value());
        }
        for (std::size_t s = 1; s <= h; ++s) {
            for (const TreeNode& node : shape.level(s)) {
                REQUIRE(node.left_child.has_value());
                Address smallest = shape.level(s - 1)[*node.left_child].min_descendant;
                if (node.right_child) smallest = std::min(smallest, shape.level(s - 1)[*node.right_child].min_descendant);
                CHECK(node.min_descendant == smallest);
            }
        }
    }
}

TEST_CASE("leaf assignment is a permutation in both directions") {
    const TreeShape shape = TreeShape::balanced(5, {3, 0, 4, 1, 2});
    for (std::uint32_t a = 0; a < 5; ++a) CHECK(shape.processor_at(shape.leaf_of(Address{a})) == Address{a});
    CHECK(shape.root().min_descendant == Address{0});
}

TEST_CASE("deterministic local winner") {
    const auto f = CompetitionFunction::intensity();
    CHECK(local_winner_deterministic(f, leaf(0, 0, "a", 3), leaf(1, 0, "b", 3)) == Side::left);
    CHECK(local_winner_deterministic(f, leaf(1, 0, "b", 3), leaf(0, 0, "a", 3)) == Side::right);
    CHECK(local_winner_deterministic(f, leaf(2, 0, "c", 1), leaf(3, 0, "d", 4)) == Side::right);
    CHECK(local_winner_deterministic(f, nil_chunk(Address{5}, 0), nil_chunk(Address{4}, 0)) == Side::right);
    CHECK_THROWS_AS(local_winner_deterministic(f, leaf(0, 1, "a", 3), leaf(1, 2, "b", 3)), PipelineDesync);
}

TEST_CASE("coin-flip neuron") {
    RngStream rng(11, 0);
    int first = 0;
    for (int i = 0; i < 100000; ++i) first += coin_flip_neuron(1, 3, rng) == CoinFlip::first;
    CHECK(std::fabs(first / 100000.0 - 0.25) < 0.01);

    first = 0;
    for (int i = 0; i < 100000; ++i) first += coin_flip_neuron(0, 0, rng) == CoinFlip::first;
    CHECK(std::fabs(first / 100000.0 - 0.5) < 0.01);

    for (int i = 0; i < 1000; ++i) REQUIRE(coin_flip_neuron(5, 0, rng) == CoinFlip::first);
    for (int i = 0; i < 1000; ++i) REQUIRE(coin_flip_neuron(0, 5, rng) == CoinFlip::second);

    const auto before = rng.counter();
    coin_flip_neuron(2, 2, rng);
    CHECK(rng.counter() == before + 1);

    CHECK_THROWS_AS(coin_flip_neuron(-1, 2, rng), ContractViolation);
    CHECK_THROWS_AS(coin_flip_neuron(1, -2, rng), ContractViolation);
}

TEST_CASE("merge sums intensity and mood and keeps the winner's identity") {
    const Chunk w = leaf(0, 4, "a", 3);
    const Chunk s = leaf(1, 4, "b", -2);
    const Chunk m = merge_chunks(Side::left, w, s);
    CHECK(m.address == Address{0});
    CHECK(m.t == 4);
    CHECK(m.gist == w.gist);
    CHECK(m.weight == 3);
    CHECK(m.intensity == 5);
    CHECK(m.mood == 1);

    const Chunk r = merge_chunks(Side::right, w, s);
    CHECK(r.address == Address{1});
    CHECK(r.weight == -2);
    CHECK(r.intensity == 5);

    const Chunk only = merge_chunks(Side::left, leaf(2, 0, "x", 4), std::nullopt);
    CHECK(only.intensity == 4);
    CHECK(only.mood == 4);
}

TEST_CASE("isolated competition: figure3 orders") {
    const auto leaves = weights_at(0, {3, 3, 1, 4});
    const auto f = CompetitionFunction::intensity();
    CHECK(compete(TreeShape::balanced(4), leaves, 0, CompetitionMode::deterministic, f, 0).gist.payload() == "a");
    CHECK(compete(TreeShape::balanced(4, {0, 2, 1, 3}), leaves, 0, CompetitionMode::deterministic, f, 0)
              .gist.payload() == "d");

    const Chunk root = compete(TreeShape::balanced(4), weights_at(0, {1, 3, 2, 4}), 0, CompetitionMode::probabilistic,
                               f, 9);
    CHECK(root.intensity == 10);
}

TEST_CASE("isolated competition rejects bad leaf sets") {
    const auto f = CompetitionFunction::intensity();
    const TreeShape shape = TreeShape::balanced(4);
    CHECK_THROWS_AS(compete(shape, weights_at(0, {1, 2, 3}), 0, CompetitionMode::deterministic, f, 0), ConfigError);
    CHECK_THROWS_AS(compete(shape, weights_at(1, {1, 2, 3, 4}), 0, CompetitionMode::deterministic, f, 0), ConfigError);
}

TEST_CASE("all-NIL leaves give a NIL root") {
    const std::vector<Chunk> nils{nil_chunk(Address{0}, 0), nil_chunk(Address{1}, 0), nil_chunk(Address{2}, 0)};
    for (auto mode : {CompetitionMode::deterministic, CompetitionMode::probabilistic}) {
        const Chunk root = compete(TreeShape::balanced(3), nils, 0, mode, CompetitionFunction::intensity(), 1);
        CHECK(root.is_nil());
    }
}

TEST_CASE("single nonzero leaf always wins") {
    const auto leaves = weights_at(0, {0, 0, 0, 7, 0});
    const TreeShape shape = TreeShape::balanced(5);
    for (Tick t = 0; t < 500; ++t) {
        auto at_t = leaves;
        for (auto& c : at_t) c.t = t;
        REQUIRE(compete(shape, at_t, t, CompetitionMode::probabilistic, CompetitionFunction::intensity(), 3).address ==
                Address{3});
    }
}

TEST_CASE("pipelined tree: cold start, then figure3 root after h steps") {
    UpTree tree(TreeShape::balanced(4));
    const auto f = CompetitionFunction::intensity();
    for (Tick t = 0; t < 2; ++t) {
        const Chunk& root = tree.step(weights_at(t, {3, 3, 1, 4}), t, CompetitionMode::deterministic, f, 0);
        CHECK(root.is_nil());
        CHECK(root.t == 0);
        CHECK(root.address == Address{0});
    }
    const Chunk& root = tree.step(weights_at(2, {3, 3, 1, 4}), 2, CompetitionMode::deterministic, f, 0);
    CHECK(root.gist.payload() == "a");
    CHECK(root.t == 0);
    CHECK(root.intensity == 11);

    UpTree swapped(TreeShape::balanced(4, {0, 2, 1, 3}));
    for (Tick t = 0; t < 3; ++t) swapped.step(weights_at(t, {3, 3, 1, 4}), t, CompetitionMode::deterministic, f, 0);
    CHECK(swapped.root_chunk().gist.payload() == "d");
}

TEST_CASE("pipelined tree rejects out-of-order ticks and wrong leaf sets") {
    UpTree tree(TreeShape::balanced(2));
    const auto f = CompetitionFunction::intensity();
    CHECK_THROWS_AS(tree.step(weights_at(1, {1, 1}), 1, CompetitionMode::deterministic, f, 0), Error);
    CHECK_THROWS_AS(tree.step(weights_at(0, {1}), 0, CompetitionMode::deterministic, f, 0), ConfigError);
}

TEST_CASE("pipelined root equals the isolated competition of t - h, and node invariants hold") {
    RngStream pick(77, 0);
    for (int trial = 0; trial < 24; ++trial) {
        const std::size_t n = 1 + pick.next_u64() % 16;
        std::vector<std::uint32_t> order(n);
        for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[pick.next_u64() % i]);
        const TreeShape shape = TreeShape::balanced(n, order);
        const std::size_t h = shape.height();
        const auto mode = trial % 2 ? CompetitionMode::probabilistic : CompetitionMode::deterministic;
        const auto f = trial % 3 == 0 ? CompetitionFunction::intensity_plus_c_mood(-0.375)
                                      : CompetitionFunction::intensity();
        const std::uint64_t seed = 1000 + trial;

        UpTree tree(shape);
        std::vector<std::vector<Chunk>> history;
        for (Tick t = 0; t < 200; ++t) {
            std::vector<Chunk> leaves;
            for (std::uint32_t a = 0; a < n; ++a) {
                const int w = static_cast<int>(pick.next_u64() % 17) - 8;
                leaves.push_back(w == 0 ? nil_chunk(Address{a}, t) : leaf(a, t, "g" + std::to_string(a), w));
            }
            history.push_back(leaves);
            const Chunk root = tree.step(leaves, t, mode, f, seed);
            for (std::size_t s = 0; s <= h; ++s) {
                for (std::size_t p = 0; p < shape.level(s).size(); ++p) {
                    const Chunk& c = tree.node_chunk(s, p);
                    REQUIRE(std::fabs(c.mood) <= c.intensity);
                }
            }
            if (t < h) {
                CHECK(root.is_nil());
                continue;
            }
            const auto& wave = history[t - h];
            REQUIRE(root == compete(shape, wave, t - h, mode, f, seed));
            double in = 0, mo = 0;
            for (const auto& c : wave) {
                in += c.intensity;
                mo += c.mood;
            }
            REQUIRE(root.intensity == in);
            REQUIRE(root.mood == mo);
        }
    }
}

TEST_CASE("reset returns the tree to its cold state") {
    UpTree tree(TreeShape::balanced(3));
    const auto f = CompetitionFunction::intensity();
    for (Tick t = 0; t < 5; ++t) tree.step(weights_at(t, {1, 2, 3}), t, CompetitionMode::deterministic, f, 0);
    tree.reset();
    CHECK(tree.next_tick() == 0);
    CHECK(tree.root_chunk().is_nil());
}

TEST_CASE("mode names") {
    CHECK(competition_mode_from_string("det") == CompetitionMode::deterministic);
    CHECK(competition_mode_from_string("prob") == CompetitionMode::probabilistic);
    CHECK(competition_mode_from_string(to_string(CompetitionMode::probabilistic)) == CompetitionMode::probabilistic);
    CHECK_THROWS(competition_mode_from_string("random"));
}
