#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "s2gen/overloaded.hpp"
#include "s2gen/series_matrix.hpp"

namespace s2gen {

enum class BinaryOp : std::uint8_t { add, sub, mul };
enum class UnaryOp : std::uint8_t { inv, abs, pow2, pow3, sqrt, sin, cos, tan, arctan, log, exp };

inline constexpr std::array<BinaryOp, 3> kBinaryOps{BinaryOp::add, BinaryOp::sub, BinaryOp::mul};
inline constexpr std::array<UnaryOp, 11> kUnaryOps{UnaryOp::inv,  UnaryOp::abs, UnaryOp::pow2,   UnaryOp::pow3,
                                                   UnaryOp::sqrt, UnaryOp::sin, UnaryOp::cos,    UnaryOp::tan,
                                                   UnaryOp::arctan, UnaryOp::log, UnaryOp::exp};

std::string_view name(BinaryOp op) noexcept;
std::string_view name(UnaryOp op) noexcept;

/// A numeric literal. `literal` keeps the source spelling of parsed numbers
/// (e.g. "48.8000") so printing reproduces the input byte for byte; sampled
/// numbers leave it empty. Equality compares values only.
struct Number {
    double value = 0.0;
    std::string literal;

    Number() = default;
    Number(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
    Number(double v, std::string text) : value(v), literal(std::move(text)) {}

    friend bool operator==(const Number& a, const Number& b) noexcept { return a.value == b.value; }
};

struct Node;

/// Immutable expression tree handle. Copies share structure.
class Expr {
public:
    static Expr variable(int index);
    static Expr constant(Number value);
    static Expr unary(UnaryOp op, Expr child);
    static Expr binary(BinaryOp op, Expr left, Expr right);
    /// scale * child + shift
    static Expr affine(Number scale, Number shift, Expr child);

    const Node& node() const noexcept { return *node_; }

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct Variable {
    int index;  // 1-based
};
struct Constant {
    Number value;
};
struct Unary {
    UnaryOp op;
    Expr child;
};
struct Binary {
    BinaryOp op;
    Expr left;
    Expr right;
};
struct Affine {
    Number scale;
    Number shift;
    Expr child;
};

struct Node : std::variant<Variable, Constant, Unary, Binary, Affine> {
    using variant::variant;
};

struct SystemProvenance {
    std::uint64_t seed = 0;
    int m = 0;
    int n = 0;
    friend bool operator==(const SystemProvenance&, const SystemProvenance&) = default;
};

/// N expressions over M shared input variables.
struct SymbolicSystem {
    int input_dim = 0;
    std::vector<Expr> expressions;
    SystemProvenance provenance;

    friend bool operator==(const SymbolicSystem&, const SymbolicSystem&) = default;
};

enum class DomainReason : std::uint8_t { non_finite, log_nonpositive, sqrt_negative, div_by_zero };

std::string_view name(DomainReason reason) noexcept;

struct DomainViolation {
    std::size_t first_bad_index;
    DomainReason reason;
    friend bool operator==(const DomainViolation&, const DomainViolation&) = default;
};

/// Either a fully finite series or the first domain breach met during evaluation.
struct EvalOutcome {
    std::variant<Series, DomainViolation> result;

    bool ok() const noexcept { return std::holds_alternative<Series>(result); }
    const Series& values() const { return std::get<Series>(result); }
    const DomainViolation& violation() const { return std::get<DomainViolation>(result); }
};

/// Element-wise evaluation over the columns of `inputs` (one row per variable).
/// Throws std::out_of_range if the tree references a variable beyond inputs.channels().
EvalOutcome evaluate(const Expr& expr, const SeriesMatrix& inputs);
std::vector<EvalOutcome> evaluate(const SymbolicSystem& system, const SeriesMatrix& inputs);

struct TreeStats {
    int n_binary = 0;
    int n_unary = 0;
    int n_leaves = 0;
    int depth = 0;
    std::set<int> distinct_variables;

    friend bool operator==(const TreeStats&, const TreeStats&) = default;
};

/// Skeleton statistics; Affine wrappers are transparent.
TreeStats tree_stats(const Expr& expr);

/// Every node, Affine wrappers included.
int node_count(const Expr& expr);
int affine_count(const Expr& expr);
int variable_count(const Expr& expr);
/// 0 when the tree has no variables.
int max_variable_index(const Expr& expr);

}  // namespace s2gen
