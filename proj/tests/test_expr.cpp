#include <doctest.h>

#include <cmath>
#include <thread>

#include "s2gen/expr.hpp"
#include "s2gen/expr_sampler.hpp"
#include "s2gen/series_sampler.hpp"

using namespace s2gen;

namespace {

SymbolicSystem single(Expr e, int m = 1) {
    SymbolicSystem s;
    s.input_dim = m;
    s.expressions.push_back(std::move(e));
    return s;
}

}  // namespace

TEST_CASE("identity expression") {
    const auto out = evaluate(single(Expr::variable(1)), SeriesMatrix::from_rows({{1, 2, 3}}));
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].ok());
    CHECK(out[0].values() == Series{1, 2, 3});
}

TEST_CASE("affine evaluates 2 x + 1") {
    const auto out = evaluate(Expr::affine(2.0, 1.0, Expr::variable(1)), SeriesMatrix::from_rows({{0, 1}}));
    REQUIRE(out.ok());
    CHECK(out.values() == Series{1, 3});
}

TEST_CASE("domain violations report the first bad column") {
    const SeriesMatrix x = SeriesMatrix::from_rows({{1, -1}});
    auto v = evaluate(Expr::unary(UnaryOp::log, Expr::variable(1)), x);
    REQUIRE_FALSE(v.ok());
    CHECK(v.violation() == DomainViolation{1, DomainReason::log_nonpositive});

    v = evaluate(Expr::unary(UnaryOp::sqrt, Expr::variable(1)), x);
    CHECK(v.violation() == DomainViolation{1, DomainReason::sqrt_negative});

    v = evaluate(Expr::unary(UnaryOp::inv, Expr::variable(1)), SeriesMatrix::from_rows({{2, 0, 0}}));
    CHECK(v.violation() == DomainViolation{1, DomainReason::div_by_zero});

    v = evaluate(Expr::unary(UnaryOp::exp, Expr::variable(1)), SeriesMatrix::from_rows({{0, 1000}}));
    CHECK(v.violation() == DomainViolation{1, DomainReason::non_finite});

    v = evaluate(Expr::unary(UnaryOp::log, Expr::variable(1)), SeriesMatrix::from_rows({{0}}));
    CHECK(v.violation().reason == DomainReason::log_nonpositive);

    // sqrt(0) is inside the domain.
    CHECK(evaluate(Expr::unary(UnaryOp::sqrt, Expr::variable(1)), SeriesMatrix::from_rows({{0}})).ok());
}

TEST_CASE("unary operator values") {
    const SeriesMatrix x = SeriesMatrix::from_rows({{0.5}});
    auto val = [&](UnaryOp op) { return evaluate(Expr::unary(op, Expr::variable(1)), x).values()[0]; };
    CHECK(val(UnaryOp::inv) == 2.0);
    CHECK(val(UnaryOp::abs) == 0.5);
    CHECK(val(UnaryOp::pow2) == 0.25);
    CHECK(val(UnaryOp::pow3) == 0.125);
    CHECK(val(UnaryOp::sqrt) == std::sqrt(0.5));
    CHECK(val(UnaryOp::sin) == std::sin(0.5));
    CHECK(val(UnaryOp::cos) == std::cos(0.5));
    CHECK(val(UnaryOp::tan) == std::tan(0.5));
    CHECK(val(UnaryOp::arctan) == std::atan(0.5));
    CHECK(val(UnaryOp::log) == std::log(0.5));
    CHECK(val(UnaryOp::exp) == std::exp(0.5));
    CHECK(evaluate(Expr::unary(UnaryOp::abs, Expr::variable(1)), SeriesMatrix::from_rows({{-3}})).values()[0] == 3.0);
}

TEST_CASE("binary operators and constants") {
    const SeriesMatrix x = SeriesMatrix::from_rows({{1, 2}, {10, 20}});
    auto run = [&](BinaryOp op) {
        return evaluate(Expr::binary(op, Expr::variable(2), Expr::variable(1)), x).values();
    };
    CHECK(run(BinaryOp::add) == Series{11, 22});
    CHECK(run(BinaryOp::sub) == Series{9, 18});
    CHECK(run(BinaryOp::mul) == Series{10, 40});
    CHECK(evaluate(Expr::constant(2.5), x).values() == Series{2.5, 2.5});
}

TEST_CASE("malformed trees are hard errors") {
    const SeriesMatrix x = SeriesMatrix::from_rows({{1, 2}});
    CHECK_THROWS_AS(evaluate(Expr::variable(2), x), std::out_of_range);
    CHECK_THROWS_AS(evaluate(single(Expr::variable(1), 2), x), std::invalid_argument);
    // Referencing x2 in a system declared over one input.
    CHECK_THROWS_AS(evaluate(single(Expr::variable(2), 1), x), std::out_of_range);
}

TEST_CASE("tree_stats") {
    CHECK(tree_stats(Expr::variable(1)) == TreeStats{0, 0, 1, 1, {1}});
    CHECK(tree_stats(Expr::binary(BinaryOp::add, Expr::variable(1), Expr::constant(3.0))) ==
          TreeStats{1, 0, 2, 2, {1}});
    // Affine wrappers are transparent.
    const Expr wrapped = Expr::affine(2.0, 1.0, Expr::unary(UnaryOp::sin, Expr::affine(3.0, 4.0, Expr::variable(2))));
    CHECK(tree_stats(wrapped) == TreeStats{0, 1, 1, 2, {2}});
    CHECK(node_count(wrapped) == 4);
    CHECK(affine_count(wrapped) == 2);
    CHECK(variable_count(wrapped) == 1);
    CHECK(max_variable_index(wrapped) == 2);
    CHECK(max_variable_index(Expr::constant(1.0)) == 0);
}

TEST_CASE("skeleton node count n = 2b + u + 1") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Expr leaves = assign_leaves(sample_skeleton(3, rng), 6, SignedLogUniform{}, rng);
        const Expr tree = insert_unaries(leaves, 2, rng);
        const TreeStats s = tree_stats(tree);
        CHECK(s.n_binary == 3);
        CHECK(s.n_unary == 2);
        CHECK(s.n_leaves == s.n_binary + 1);
        CHECK(s.n_binary + s.n_unary + s.n_leaves == 9);
        CHECK(node_count(tree) == 9);
        // Including the wrappers: n = 2b' + u' + 1 + c'.
        const Expr full = apply_affine(tree, SignedLogUniform{}, rng);
        CHECK(node_count(full) == 2 * 3 + 2 + 1 + affine_count(full));
    }
}

TEST_CASE("domain soundness over random trees and inputs") {
    ExprSamplerConfig cfg;
    InputSamplerConfig in;
    in.length = 64;
    int accepted = 0;
    for (std::uint32_t i = 0; i < 10000; ++i) {
        Rng rng(99, StreamTag::fixture, i, 0);
        const int m = 1 + static_cast<int>(i % 6);
        const Expr e = sample_expression(m, cfg, rng);
        const InputSample x = sample_input(m, in, rng);
        const EvalOutcome out = evaluate(e, x.values);
        if (!out.ok()) {
            REQUIRE(out.violation().first_bad_index < 64);
            continue;
        }
        ++accepted;
        REQUIRE(out.values().size() == 64);
        for (double v : out.values()) REQUIRE(std::isfinite(v));
    }
    CHECK(accepted > 1000);
}

TEST_CASE("evaluation is pure across threads") {
    Rng rng(5);
    const SymbolicSystem sys = sample_system(4, 6, ExprSamplerConfig{}, rng);
    InputSamplerConfig in;
    const SeriesMatrix x = sample_input(4, in, rng).values;
    const auto reference = evaluate(sys, x);
    auto same = [&](const std::vector<EvalOutcome>& got) {
        if (got.size() != reference.size()) return false;
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i].result != reference[i].result) return false;
        }
        return true;
    };
    std::vector<int> ok(8, 0);
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < 8; ++t) {
            pool.emplace_back([&, t] {
                for (int r = 0; r < 20; ++r) ok[t] += same(evaluate(sys, x));
            });
        }
    }
    for (int c : ok) CHECK(c == 20);
}
