#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "s2gen/expr.hpp"
#include "s2gen/rng.hpp"

namespace s2gen {

/// Sign uniform over {+, -}, magnitude 10^e with e ~ U(lo_exp, hi_exp), then
/// rounded to `significant_digits` (0 keeps full precision).
struct SignedLogUniform {
    double lo_exp = -2.0;
    double hi_exp = 2.0;
    int significant_digits = 3;

    double sample(Rng& rng) const;
    void validate(const char* what) const;

    friend bool operator==(const SignedLogUniform&, const SignedLogUniform&) = default;
};

struct ExprSamplerConfig {
    int b_min = 1;
    int b_max = 5;
    int u_min = 0;
    int u_max = 3;
    int m_max = 6;
    int n_max = 12;
    SignedLogUniform constant_law;
    SignedLogUniform affine_law;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const ExprSamplerConfig&, const ExprSamplerConfig&) = default;
};

/// A tree of binary operators whose leaves are still open slots.
class Skeleton {
public:
    struct Slot {
        int node;   // index of the binary node owning the slot; -1 for the root slot
        int child;  // 0 = left, 1 = right
    };
    struct BinaryNode {
        BinaryOp op;
        // Positive values index binary nodes; -1 marks an open leaf slot.
        int left = -1;
        int right = -1;
    };

    int n_binary() const noexcept { return static_cast<int>(nodes_.size()); }
    int n_slots() const noexcept { return n_binary() + 1; }
    const std::vector<BinaryNode>& nodes() const noexcept { return nodes_; }
    /// -1 when the skeleton is a single open slot.
    int root() const noexcept { return nodes_.empty() ? -1 : 0; }

    /// Slots in left-to-right order.
    std::vector<Slot> slots() const;

private:
    friend Skeleton sample_skeleton(int, Rng&);
    std::vector<BinaryNode> nodes_;
};

/// Uniform random growth: every new binary node replaces a uniformly chosen open slot.
Skeleton sample_skeleton(int b, Rng& rng);

/// Places m ~ U(1, min(M, b+1)) distinct variables at distinct uniform slots and
/// fills the rest with constants. `forced_m` overrides the draw of m.
Expr assign_leaves(const Skeleton& skeleton, int m_inputs, const SignedLogUniform& constant_law, Rng& rng,
                   std::optional<int> forced_m = std::nullopt);

/// Splices u unary operators onto uniformly chosen edges, the edge above the root included.
Expr insert_unaries(const Expr& tree, int u, Rng& rng);

/// Wraps every Variable and Unary node in Affine(a, b, .).
Expr apply_affine(const Expr& tree, const SignedLogUniform& affine_law, Rng& rng);

/// skeleton -> leaves -> unaries -> affine, with b and u drawn per expression.
Expr sample_expression(int m_inputs, const ExprSamplerConfig& cfg, Rng& rng);

SymbolicSystem sample_system(int m_inputs, int n_outputs, const ExprSamplerConfig& cfg, Rng& rng);

}  // namespace s2gen
