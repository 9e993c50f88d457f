#include "s2gen/expr_sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace s2gen {

namespace {

double round_significant(double value, int digits) {
    if (digits <= 0 || value == 0.0) return value;
    // Round through the decimal representation so the stored double is exactly
    // the one a reader of the printed text would obtain.
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, digits - 1);
    double out = value;
    std::from_chars(buf, end, out);
    return out;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

double SignedLogUniform::sample(Rng& rng) const {
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const double exponent = rng.uniform(lo_exp, hi_exp);
    return round_significant(sign * std::pow(10.0, exponent), significant_digits);
}

void SignedLogUniform::validate(const char* what) const {
    require(std::isfinite(lo_exp) && std::isfinite(hi_exp) && lo_exp <= hi_exp,
            std::string(what) + ": exponent range must satisfy lo <= hi");
    require(significant_digits >= 0 && significant_digits <= 17,
            std::string(what) + ": significant digits must be in [0, 17]");
}

void ExprSamplerConfig::validate() const {
    require(b_min >= 1, "b_min must be >= 1");
    require(b_max >= b_min, "b_max must be >= b_min");
    require(u_min >= 0, "u_min must be >= 0");
    require(u_max >= u_min, "u_max must be >= u_min");
    require(m_max >= 1 && m_max <= 255, "m_max must be in [1, 255]");
    require(n_max >= 1 && n_max <= 255, "n_max must be in [1, 255]");
    constant_law.validate("constant law");
    affine_law.validate("affine law");
}

std::vector<Skeleton::Slot> Skeleton::slots() const {
    std::vector<Slot> out;
    if (nodes_.empty()) {
        out.push_back({-1, 0});
        return out;
    }
    // Iterative in-order walk keeps slot order left to right.
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto& [node, state] = stack.back();
        const BinaryNode& bn = nodes_[static_cast<std::size_t>(node)];
        if (state == 0) {
            state = 1;
            if (bn.left < 0) {
                out.push_back({node, 0});
            } else {
                stack.emplace_back(bn.left, 0);
            }
        } else if (state == 1) {
            state = 2;
            if (bn.right < 0) {
                out.push_back({node, 1});
            } else {
                stack.emplace_back(bn.right, 0);
            }
        } else {
            stack.pop_back();
        }
    }
    return out;
}

Skeleton sample_skeleton(int b, Rng& rng) {
    if (b < 1) throw std::invalid_argument("sample_skeleton: b must be >= 1");
    Skeleton sk;
    sk.nodes_.reserve(static_cast<std::size_t>(b));
    std::vector<Skeleton::Slot> open{{-1, 0}};
    for (int i = 0; i < b; ++i) {
        const std::size_t pick = rng.index(open.size());
        const Skeleton::Slot slot = open[pick];
        const auto op = kBinaryOps[rng.index(kBinaryOps.size())];
        const int id = static_cast<int>(sk.nodes_.size());
        sk.nodes_.push_back({op, -1, -1});
        if (slot.node >= 0) {
            auto& parent = sk.nodes_[static_cast<std::size_t>(slot.node)];
            (slot.child == 0 ? parent.left : parent.right) = id;
        }
        open[pick] = {id, 0};
        open.push_back({id, 1});
    }
    return sk;
}

Expr assign_leaves(const Skeleton& skeleton, int m_inputs, const SignedLogUniform& constant_law, Rng& rng,
                   std::optional<int> forced_m) {
    if (m_inputs < 1) throw std::invalid_argument("assign_leaves: M must be >= 1");
    const auto slots = skeleton.slots();
    const int cap = std::min(m_inputs, static_cast<int>(slots.size()));
    int m = forced_m ? *forced_m : rng.uniform_int(1, cap);
    if (m < 1 || m > cap) throw std::invalid_argument("assign_leaves: m outside [1, min(M, b+1)]");

    const auto variables = rng.sample_without_replacement(static_cast<std::size_t>(m_inputs),
                                                          static_cast<std::size_t>(m));
    const auto positions = rng.sample_without_replacement(slots.size(), static_cast<std::size_t>(m));
    std::vector<std::optional<Expr>> leaves(slots.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        leaves[positions[i]] = Expr::variable(static_cast<int>(variables[i]) + 1);
    }
    for (auto& leaf : leaves) {
        if (!leaf) leaf = Expr::constant(constant_law.sample(rng));
    }
    if (skeleton.n_binary() == 0) return *leaves.front();

    // Map each slot to its leaf, then build bottom-up in reverse creation order
    // (children are always created after their parent).
    const auto& nodes = skeleton.nodes();
    std::vector<std::optional<Expr>> left(nodes.size()), right(nodes.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto& target = slots[i].child == 0 ? left : right;
        target[static_cast<std::size_t>(slots[i].node)] = leaves[i];
    }
    std::vector<std::optional<Expr>> built(nodes.size());
    for (std::size_t k = nodes.size(); k-- > 0;) {
        const auto& bn = nodes[k];
        Expr l = bn.left >= 0 ? *built[static_cast<std::size_t>(bn.left)] : *left[k];
        Expr r = bn.right >= 0 ? *built[static_cast<std::size_t>(bn.right)] : *right[k];
        built[k] = Expr::binary(bn.op, std::move(l), std::move(r));
    }
    return *built.front();
}

namespace {

// Wraps the node at preorder position `target` (counting down) in a unary operator.
Expr splice_unary(const Expr& tree, int& target, UnaryOp op) {
    if (target-- == 0) return Expr::unary(op, tree);
    return std::visit(Overloaded{
                          [&](const Variable&) { return tree; },
                          [&](const Constant&) { return tree; },
                          [&](const Unary& u) {
                              Expr child = splice_unary(u.child, target, op);
                              return Expr::unary(u.op, std::move(child));
                          },
                          [&](const Binary& b) {
                              Expr l = splice_unary(b.left, target, op);
                              Expr r = splice_unary(b.right, target, op);
                              return Expr::binary(b.op, std::move(l), std::move(r));
                          },
                          [&](const Affine& a) {
                              Expr child = splice_unary(a.child, target, op);
                              return Expr::affine(a.scale, a.shift, std::move(child));
                          },
                      },
                      tree.node());
}

Expr wrap_affine(const Expr& tree, const SignedLogUniform& law, Rng& rng) {
    auto wrap = [&](Expr inner) {
        const double scale = law.sample(rng);
        const double shift = law.sample(rng);
        return Expr::affine(scale, shift, std::move(inner));
    };
    return std::visit(Overloaded{
                          [&](const Variable&) { return wrap(tree); },
                          [&](const Constant&) { return tree; },
                          [&](const Unary& u) {
                              Expr child = wrap_affine(u.child, law, rng);
                              return wrap(Expr::unary(u.op, std::move(child)));
                          },
                          [&](const Binary& b) {
                              Expr l = wrap_affine(b.left, law, rng);
                              Expr r = wrap_affine(b.right, law, rng);
                              return Expr::binary(b.op, std::move(l), std::move(r));
                          },
                          [&](const Affine& a) {
                              Expr child = wrap_affine(a.child, law, rng);
                              return Expr::affine(a.scale, a.shift, std::move(child));
                          },
                      },
                      tree.node());
}

}  // namespace

Expr insert_unaries(const Expr& tree, int u, Rng& rng) {
    if (u < 0) throw std::invalid_argument("insert_unaries: u must be >= 0");
    Expr out = tree;
    for (int i = 0; i < u; ++i) {
        // One edge per node: the edge to its parent, or the virtual edge above the root.
        int target = static_cast<int>(rng.index(static_cast<std::size_t>(node_count(out))));
        const auto op = kUnaryOps[rng.index(kUnaryOps.size())];
        out = splice_unary(out, target, op);
    }
    return out;
}

Expr apply_affine(const Expr& tree, const SignedLogUniform& affine_law, Rng& rng) {
    return wrap_affine(tree, affine_law, rng);
}

Expr sample_expression(int m_inputs, const ExprSamplerConfig& cfg, Rng& rng) {
    const int b = rng.uniform_int(cfg.b_min, cfg.b_max);
    const int u = rng.uniform_int(cfg.u_min, cfg.u_max);
    const Skeleton skeleton = sample_skeleton(b, rng);
    Expr tree = assign_leaves(skeleton, m_inputs, cfg.constant_law, rng);
    tree = insert_unaries(tree, u, rng);
    return apply_affine(tree, cfg.affine_law, rng);
}

SymbolicSystem sample_system(int m_inputs, int n_outputs, const ExprSamplerConfig& cfg, Rng& rng) {
    if (m_inputs < 1 || m_inputs > cfg.m_max) throw std::invalid_argument("sample_system: M outside [1, M_max]");
    if (n_outputs < 1 || n_outputs > cfg.n_max) throw std::invalid_argument("sample_system: N outside [1, N_max]");
    SymbolicSystem system;
    system.input_dim = m_inputs;
    system.provenance.m = m_inputs;
    system.provenance.n = n_outputs;
    system.expressions.reserve(static_cast<std::size_t>(n_outputs));
    for (int i = 0; i < n_outputs; ++i) system.expressions.push_back(sample_expression(m_inputs, cfg, rng));
    return system;
}

}  // namespace s2gen
