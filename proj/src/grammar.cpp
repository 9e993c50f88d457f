#include "s2gen/grammar.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace s2gen {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& message)
    : std::runtime_error(message + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

std::string to_text(const Number& number) {
    return number.literal.empty() ? format_number(number.value) : number.literal;
}

namespace {

void print(const Expr& expr, std::string& out) {
    std::visit(Overloaded{
                   [&](const Variable& v) {
                       out += 'x';
                       out += std::to_string(v.index);
                   },
                   [&](const Constant& c) { out += to_text(c.value); },
                   [&](const Unary& u) {
                       if (u.op == UnaryOp::pow2 || u.op == UnaryOp::pow3) {
                           out += '(';
                           print(u.child, out);
                           out += u.op == UnaryOp::pow2 ? ")**2" : ")**3";
                           return;
                       }
                       out += name(u.op);
                       out += '(';
                       print(u.child, out);
                       out += ')';
                   },
                   [&](const Binary& b) {
                       out += '(';
                       print(b.left, out);
                       out += ' ';
                       out += name(b.op);
                       out += ' ';
                       print(b.right, out);
                       out += ')';
                   },
                   [&](const Affine& a) {
                       out += '(';
                       out += to_text(a.shift);
                       out += " add (";
                       out += to_text(a.scale);
                       out += " mul ";
                       print(a.child, out);
                       out += "))";
                   },
               },
               expr.node());
}

constexpr std::array<std::pair<std::string_view, UnaryOp>, 9> kNamedUnaries{{
    {"inv", UnaryOp::inv},
    {"abs", UnaryOp::abs},
    {"sqrt", UnaryOp::sqrt},
    {"sin", UnaryOp::sin},
    {"cos", UnaryOp::cos},
    {"tan", UnaryOp::tan},
    {"arctan", UnaryOp::arctan},
    {"log", UnaryOp::log},
    {"exp", UnaryOp::exp},
}};

class Parser {
public:
    Parser(std::string_view text, std::size_t base) : text_(text), base_(base) {}

    Expr parse() {
        Expr e = expr();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view text_;
    std::size_t base_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what, ParseError::Kind kind = ParseError::Kind::syntax) const {
        throw ParseError(kind, base_ + pos_, what);
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }

    void expect(std::string_view token) {
        for (char c : token) {
            if (peek() != c) fail("expected '" + std::string(token) + "'");
            ++pos_;
        }
    }

    bool consume(std::string_view token) {
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    Expr expr() {
        if (at_end()) fail("unexpected end of input");
        const char c = peek();
        if (c == '(') return parenthesized();
        if (c == 'x') return variable();
        if (std::isalpha(static_cast<unsigned char>(c))) return named_unary();
        return Expr::constant(number());
    }

    Expr parenthesized() {
        expect("(");
        Expr inner = expr();
        if (consume(")**2")) return Expr::unary(UnaryOp::pow2, std::move(inner));
        if (consume(")**3")) return Expr::unary(UnaryOp::pow3, std::move(inner));
        expect(" ");
        BinaryOp op = binop();
        expect(" ");
        Expr rhs = expr();
        expect(")");
        if (op == BinaryOp::add) {
            if (auto folded = fold_affine(inner, rhs)) return *folded;
        }
        return Expr::binary(op, std::move(inner), std::move(rhs));
    }

    // (shift add (scale mul e)) with e a variable or unary operator.
    static std::optional<Expr> fold_affine(const Expr& lhs, const Expr& rhs) {
        const auto* shift = std::get_if<Constant>(&lhs.node());
        const auto* product = std::get_if<Binary>(&rhs.node());
        if (shift == nullptr || product == nullptr || product->op != BinaryOp::mul) return std::nullopt;
        const auto* scale = std::get_if<Constant>(&product->left.node());
        if (scale == nullptr) return std::nullopt;
        const Node& target = product->right.node();
        if (!std::holds_alternative<Variable>(target) && !std::holds_alternative<Unary>(target)) return std::nullopt;
        return Expr::affine(scale->value, shift->value, product->right);
    }

    BinaryOp binop() {
        if (consume("add")) return BinaryOp::add;
        if (consume("sub")) return BinaryOp::sub;
        if (consume("mul")) return BinaryOp::mul;
        fail("expected binary operator 'add', 'sub' or 'mul'");
    }

    Expr variable() {
        const std::size_t start = pos_;
        ++pos_;  // 'x'
        std::size_t digits_begin = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (pos_ == digits_begin) {
            // A bare identifier starting with 'x' that is not a variable.
            while (std::isalnum(static_cast<unsigned char>(peek()))) ++pos_;
            pos_ = start;
            fail("variable index must be numeric", ParseError::Kind::bad_variable);
        }
        int index = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + digits_begin, text_.data() + pos_, index);
        if (ec != std::errc{} || index < 1) {
            pos_ = start;
            fail("variable index must be >= 1", ParseError::Kind::bad_variable);
        }
        return Expr::variable(index);
    }

    Expr named_unary() {
        const std::size_t start = pos_;
        while (std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
        const std::string_view ident = text_.substr(start, pos_ - start);
        for (const auto& [spelling, op] : kNamedUnaries) {
            if (ident == spelling) {
                expect("(");
                Expr child = expr();
                expect(")");
                return Expr::unary(op, std::move(child));
            }
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(ident) + "'", ParseError::Kind::unknown_identifier);
    }

    Number number() {
        const std::size_t start = pos_;
        if (peek() == '-' || peek() == '+') ++pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (peek() == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) {
            pos_ = start;
            fail("expected expression");
        }
        if (peek() == 'e' || peek() == 'E') {
            ++pos_;
            if (peek() == '-' || peek() == '+') ++pos_;
            if (digits() == 0) fail("malformed exponent");
        }
        std::string_view spelling = text_.substr(start, pos_ - start);
        std::string_view digits_view = spelling.front() == '+' ? spelling.substr(1) : spelling;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(digits_view.data(), digits_view.data() + digits_view.size(), value);
        if (ec != std::errc{} || ptr != digits_view.data() + digits_view.size() || !std::isfinite(value)) {
            pos_ = start;
            fail("number out of range");
        }
        return Number(value, std::string(spelling));
    }
};

}  // namespace

std::string to_text(const Expr& expr) {
    std::string out;
    print(expr, out);
    return out;
}

Expr parse_text(std::string_view text) {
    std::size_t begin = 0;
    while (begin < text.size() && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    std::size_t end = text.size();
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return Parser(text.substr(begin, end - begin), begin).parse();
}

}  // namespace s2gen
