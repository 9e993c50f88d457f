#include "s2gen/expr.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace s2gen {

std::string_view name(BinaryOp op) noexcept {
    switch (op) {
        case BinaryOp::add: return "add";
        case BinaryOp::sub: return "sub";
        case BinaryOp::mul: return "mul";
    }
    return "?";
}

std::string_view name(UnaryOp op) noexcept {
    switch (op) {
        case UnaryOp::inv: return "inv";
        case UnaryOp::abs: return "abs";
        case UnaryOp::pow2: return "pow2";
        case UnaryOp::pow3: return "pow3";
        case UnaryOp::sqrt: return "sqrt";
        case UnaryOp::sin: return "sin";
        case UnaryOp::cos: return "cos";
        case UnaryOp::tan: return "tan";
        case UnaryOp::arctan: return "arctan";
        case UnaryOp::log: return "log";
        case UnaryOp::exp: return "exp";
    }
    return "?";
}

std::string_view name(DomainReason reason) noexcept {
    switch (reason) {
        case DomainReason::non_finite: return "non-finite";
        case DomainReason::log_nonpositive: return "log-nonpositive";
        case DomainReason::sqrt_negative: return "sqrt-negative";
        case DomainReason::div_by_zero: return "div-by-zero";
    }
    return "?";
}

Expr Expr::variable(int index) {
    if (index < 1) throw std::invalid_argument("variable index must be >= 1");
    return Expr(std::make_shared<const Node>(Variable{index}));
}

Expr Expr::constant(Number value) { return Expr(std::make_shared<const Node>(Constant{std::move(value)})); }

Expr Expr::unary(UnaryOp op, Expr child) {
    return Expr(std::make_shared<const Node>(Unary{op, std::move(child)}));
}

Expr Expr::binary(BinaryOp op, Expr left, Expr right) {
    return Expr(std::make_shared<const Node>(Binary{op, std::move(left), std::move(right)}));
}

Expr Expr::affine(Number scale, Number shift, Expr child) {
    return Expr(std::make_shared<const Node>(Affine{std::move(scale), std::move(shift), std::move(child)}));
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const Node& x = a.node();
    const Node& y = b.node();
    if (x.index() != y.index()) return false;
    return std::visit(
        Overloaded{
            [&](const Variable& v) { return v.index == std::get<Variable>(y).index; },
            [&](const Constant& c) { return c.value == std::get<Constant>(y).value; },
            [&](const Unary& u) {
                const auto& o = std::get<Unary>(y);
                return u.op == o.op && u.child == o.child;
            },
            [&](const Binary& bin) {
                const auto& o = std::get<Binary>(y);
                return bin.op == o.op && bin.left == o.left && bin.right == o.right;
            },
            [&](const Affine& af) {
                const auto& o = std::get<Affine>(y);
                return af.scale == o.scale && af.shift == o.shift && af.child == o.child;
            },
        },
        x);
}

namespace {

class Evaluator {
public:
    explicit Evaluator(const SeriesMatrix& inputs) : inputs_(inputs) {}

    std::optional<DomainViolation> violation;

    Series eval(const Expr& expr) {
        return std::visit(Overloaded{
                              [&](const Variable& v) { return eval_variable(v); },
                              [&](const Constant& c) { return Series(inputs_.length(), c.value.value); },
                              [&](const Unary& u) { return eval_unary(u); },
                              [&](const Binary& b) { return eval_binary(b); },
                              [&](const Affine& a) { return eval_affine(a); },
                          },
                          expr.node());
    }

private:
    const SeriesMatrix& inputs_;

    void flag(std::size_t index, DomainReason reason) {
        if (!violation) violation = DomainViolation{index, reason};
    }

    // Scans a freshly computed node; the first bad column wins.
    bool check_finite(const Series& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i])) {
                flag(i, DomainReason::non_finite);
                return false;
            }
        }
        return true;
    }

    Series eval_variable(const Variable& v) {
        if (v.index < 1 || static_cast<std::size_t>(v.index) > inputs_.channels()) {
            throw std::out_of_range("expression references x" + std::to_string(v.index) + " but only " +
                                    std::to_string(inputs_.channels()) + " input channels are present");
        }
        auto row = inputs_.row(static_cast<std::size_t>(v.index - 1));
        return Series(row.begin(), row.end());
    }

    Series eval_unary(const Unary& u) {
        Series x = eval(u.child);
        if (violation) return {};
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = x[i];
            switch (u.op) {
                case UnaryOp::inv:
                    if (v == 0.0) {
                        flag(i, DomainReason::div_by_zero);
                        return {};
                    }
                    x[i] = 1.0 / v;
                    break;
                case UnaryOp::abs: x[i] = std::fabs(v); break;
                case UnaryOp::pow2: x[i] = v * v; break;
                case UnaryOp::pow3: x[i] = v * v * v; break;
                case UnaryOp::sqrt:
                    if (v < 0.0) {
                        flag(i, DomainReason::sqrt_negative);
                        return {};
                    }
                    x[i] = std::sqrt(v);
                    break;
                case UnaryOp::sin: x[i] = std::sin(v); break;
                case UnaryOp::cos: x[i] = std::cos(v); break;
                case UnaryOp::tan: x[i] = std::tan(v); break;
                case UnaryOp::arctan: x[i] = std::atan(v); break;
                case UnaryOp::log:
                    if (!(v > 0.0)) {
                        flag(i, DomainReason::log_nonpositive);
                        return {};
                    }
                    x[i] = std::log(v);
                    break;
                case UnaryOp::exp: x[i] = std::exp(v); break;
            }
        }
        if (!check_finite(x)) return {};
        return x;
    }

    Series eval_binary(const Binary& b) {
        Series lhs = eval(b.left);
        if (violation) return {};
        Series rhs = eval(b.right);
        if (violation) return {};
        switch (b.op) {
            case BinaryOp::add:
                for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] += rhs[i];
                break;
            case BinaryOp::sub:
                for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] -= rhs[i];
                break;
            case BinaryOp::mul:
                for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] *= rhs[i];
                break;
        }
        if (!check_finite(lhs)) return {};
        return lhs;
    }

    Series eval_affine(const Affine& a) {
        Series x = eval(a.child);
        if (violation) return {};
        const double scale = a.scale.value;
        const double shift = a.shift.value;
        for (double& v : x) v = shift + scale * v;
        if (!check_finite(x)) return {};
        return x;
    }
};

void collect_stats(const Expr& expr, int depth, TreeStats& stats) {
    std::visit(Overloaded{
                   [&](const Variable& v) {
                       ++stats.n_leaves;
                       stats.distinct_variables.insert(v.index);
                       stats.depth = std::max(stats.depth, depth);
                   },
                   [&](const Constant&) {
                       ++stats.n_leaves;
                       stats.depth = std::max(stats.depth, depth);
                   },
                   [&](const Unary& u) {
                       ++stats.n_unary;
                       collect_stats(u.child, depth + 1, stats);
                   },
                   [&](const Binary& b) {
                       ++stats.n_binary;
                       collect_stats(b.left, depth + 1, stats);
                       collect_stats(b.right, depth + 1, stats);
                   },
                   [&](const Affine& a) { collect_stats(a.child, depth, stats); },
               },
               expr.node());
}

template <class Pred>
int count_nodes(const Expr& expr, Pred pred) {
    int here = pred(expr.node()) ? 1 : 0;
    return here + std::visit(Overloaded{
                                 [](const Variable&) { return 0; },
                                 [](const Constant&) { return 0; },
                                 [&](const Unary& u) { return count_nodes(u.child, pred); },
                                 [&](const Binary& b) { return count_nodes(b.left, pred) + count_nodes(b.right, pred); },
                                 [&](const Affine& a) { return count_nodes(a.child, pred); },
                             },
                             expr.node());
}

}  // namespace

int max_variable_index(const Expr& expr) {
    const auto vars = tree_stats(expr).distinct_variables;
    return vars.empty() ? 0 : *vars.rbegin();
}

EvalOutcome evaluate(const Expr& expr, const SeriesMatrix& inputs) {
    const int top = max_variable_index(expr);
    if (static_cast<std::size_t>(top) > inputs.channels()) {
        throw std::out_of_range("expression references x" + std::to_string(top) + " but only " +
                                std::to_string(inputs.channels()) + " input channels are present");
    }
    Evaluator evaluator(inputs);
    Series values = evaluator.eval(expr);
    if (evaluator.violation) return {*evaluator.violation};
    return {std::move(values)};
}

std::vector<EvalOutcome> evaluate(const SymbolicSystem& system, const SeriesMatrix& inputs) {
    if (inputs.channels() != static_cast<std::size_t>(system.input_dim)) {
        throw std::invalid_argument("evaluate: input rows (" + std::to_string(inputs.channels()) +
                                    ") != system input dimension (" + std::to_string(system.input_dim) + ")");
    }
    std::vector<EvalOutcome> out;
    out.reserve(system.expressions.size());
    for (const auto& expr : system.expressions) out.push_back(evaluate(expr, inputs));
    return out;
}

TreeStats tree_stats(const Expr& expr) {
    TreeStats stats;
    collect_stats(expr, 1, stats);
    return stats;
}

int node_count(const Expr& expr) {
    return count_nodes(expr, [](const Node&) { return true; });
}

int affine_count(const Expr& expr) {
    return count_nodes(expr, [](const Node& n) { return std::holds_alternative<Affine>(n); });
}

int variable_count(const Expr& expr) {
    return count_nodes(expr, [](const Node& n) { return std::holds_alternative<Variable>(n); });
}

}  // namespace s2gen
