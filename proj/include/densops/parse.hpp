#pragma once

#include <cctype>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "densops/error.hpp"
#include "densops/multipoly.hpp"
#include "densops/operators.hpp"

namespace densops {
namespace parse_detail {

enum class Tok { End, Int, Var, Deriv, Weight, Plus, Minus, Star, Caret, Slash, LParen, RParen };

struct Token {
    Tok kind = Tok::End;
    Int value;    // for Int
    int index = 0; // for Var/Deriv
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }
    Token next() {
        Token t = cur_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const Token& at, const std::string& what) const {
        throw Error(ErrorCode::Parse, what + " at line " + std::to_string(at.line) + " column " +
                                          std::to_string(at.col));
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
        cur_ = Token{};
        cur_.line = line_;
        cur_.col = col_;
        if (pos_ >= src_.size()) {
            cur_.kind = Tok::End;
            return;
        }
        const char ch = src_[pos_];
        switch (ch) {
            case '+': cur_.kind = Tok::Plus; bump(); return;
            case '-': cur_.kind = Tok::Minus; bump(); return;
            case '*': cur_.kind = Tok::Star; bump(); return;
            case '^': cur_.kind = Tok::Caret; bump(); return;
            case '/': cur_.kind = Tok::Slash; bump(); return;
            case '(': cur_.kind = Tok::LParen; bump(); return;
            case ')': cur_.kind = Tok::RParen; bump(); return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            cur_.kind = Tok::Int;
            cur_.value = lex_digits();
            return;
        }
        if (ch == 'x' || ch == 'd') {
            const int l = line_, c = col_;
            bump();
            if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                cur_.line = l;
                cur_.col = c;
                fail(cur_, std::string("expected a digit after '") + ch + "'");
            }
            Int idx = lex_digits();
            if (idx < 1 || idx > 64) {
                cur_.line = l;
                cur_.col = c;
                fail(cur_, "variable index out of supported range 1..64");
            }
            cur_.kind = (ch == 'x') ? Tok::Var : Tok::Deriv;
            cur_.index = static_cast<int>(idx);
            return;
        }
        if (ch == 'w') {
            cur_.kind = Tok::Weight;
            bump();
            return;
        }
        fail(cur_, std::string("unexpected character '") + ch + "'");
    }

    Int lex_digits() {
        Int v = 0;
        size_t count = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            if (++count > 4096) fail(cur_, "numeric literal too long");
            v = v * 10 + (src_[pos_] - '0');
            bump();
        }
        return v;
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token cur_;
};

} // namespace parse_detail

/// Parses the simple rational grammar: int ('/' uint)?.
inline Rational parse_rational(std::string_view src) {
    parse_detail::Lexer lex(src);
    bool neg = false;
    if (lex.peek().kind == parse_detail::Tok::Minus) {
        lex.next();
        neg = true;
    } else if (lex.peek().kind == parse_detail::Tok::Plus) {
        lex.next();
    }
    if (lex.peek().kind != parse_detail::Tok::Int) lex.fail(lex.peek(), "expected an integer");
    Int num = lex.next().value;
    Int den = 1;
    if (lex.peek().kind == parse_detail::Tok::Slash) {
        lex.next();
        if (lex.peek().kind != parse_detail::Tok::Int)
            lex.fail(lex.peek(), "expected a denominator after '/'");
        den = lex.next().value;
        if (den == 0) lex.fail(lex.peek(), "zero denominator");
    }
    if (lex.peek().kind != parse_detail::Tok::End)
        lex.fail(lex.peek(), "unexpected trailing input in rational");
    Rational r(num, den);
    return neg ? -r : r;
}

/// Parses the polynomial grammar
///   poly   := ['+'|'-'] term (('+'|'-') term)*
///   term   := rat ('*' factor)* | factor ('*' factor)*
///   factor := var ('^' uint)?        var := 'x' uint
///   rat    := int ('/' uint)?
/// against a fixed dimension d; whitespace is insignificant.
inline MultiPoly parse_poly(std::string_view src, int d) {
    using namespace parse_detail;
    Lexer lex(src);
    MultiPoly out(d);

    auto parse_factor = [&](Expo& e) {
        Token v = lex.next(); // Tok::Var, checked by caller
        if (v.index > d)
            lex.fail(v, "variable x" + std::to_string(v.index) + " exceeds dimension " +
                            std::to_string(d));
        unsigned exp = 1;
        if (lex.peek().kind == Tok::Caret) {
            lex.next();
            if (lex.peek().kind != Tok::Int) lex.fail(lex.peek(), "expected an exponent after '^'");
            Token t = lex.next();
            if (t.value > 512) lex.fail(t, "exponent too large");
            exp = static_cast<unsigned>(t.value);
        }
        e[static_cast<size_t>(v.index - 1)] += exp;
    };

    bool first = true;
    for (;;) {
        Rational sign(1);
        if (lex.peek().kind == Tok::Plus || lex.peek().kind == Tok::Minus) {
            if (lex.next().kind == Tok::Minus) sign = -1;
        } else if (!first) {
            if (lex.peek().kind == Tok::End) break;
            lex.fail(lex.peek(), "expected '+' or '-' between terms");
        }
        first = false;

        Rational coeff = sign;
        Expo e(static_cast<size_t>(d), 0);
        if (lex.peek().kind == Tok::Int) {
            Token t = lex.next();
            Int num = t.value, den = 1;
            if (lex.peek().kind == Tok::Slash) {
                lex.next();
                if (lex.peek().kind != Tok::Int)
                    lex.fail(lex.peek(), "expected a denominator after '/'");
                Token dt = lex.next();
                if (dt.value == 0) lex.fail(dt, "zero denominator");
                den = dt.value;
            }
            coeff *= Rational(num, den);
            while (lex.peek().kind == Tok::Star) {
                lex.next();
                if (lex.peek().kind != Tok::Var) lex.fail(lex.peek(), "expected a variable after '*'");
                parse_factor(e);
            }
        } else if (lex.peek().kind == Tok::Var) {
            parse_factor(e);
            while (lex.peek().kind == Tok::Star) {
                lex.next();
                if (lex.peek().kind != Tok::Var) lex.fail(lex.peek(), "expected a variable after '*'");
                parse_factor(e);
            }
        } else {
            lex.fail(lex.peek(), "expected a number or a variable");
        }
        out.add_term(e, coeff);
        if (lex.peek().kind == Tok::End) break;
    }
    return out;
}

/// Parses the operator expression language over dimension d:
///   expr    := ['-'] term (('+'|'-') term)*
///   term    := factor (('*')? factor)*        (juxtaposition composes)
///   factor  := '-' factor | atom ('^' uint)? | '(' expr ')'
///   atom    := 'x' uint | 'd' uint | 'w' | rational
/// Composition is left-associative; '^' applies to atoms only.
inline DensityOperator parse_operator(std::string_view src, int d) {
    using namespace parse_detail;
    Lexer lex(src);
    int depth = 0;

    auto starts_factor = [](Tok k) {
        return k == Tok::Int || k == Tok::Var || k == Tok::Deriv || k == Tok::Weight ||
               k == Tok::LParen;
    };

    std::function<DensityOperator()> parse_expr;

    std::function<DensityOperator()> parse_factor = [&]() -> DensityOperator {
        if (depth > 200) throw Error(ErrorCode::Parse, "expression nests too deeply");
        if (lex.peek().kind == Tok::Minus) {
            lex.next();
            ++depth;
            DensityOperator inner = parse_factor();
            --depth;
            return inner * Rational(-1);
        }
        if (lex.peek().kind == Tok::LParen) {
            Token open = lex.next();
            ++depth;
            DensityOperator inner = parse_expr();
            --depth;
            if (lex.peek().kind != Tok::RParen) lex.fail(open, "unbalanced '('");
            lex.next();
            if (lex.peek().kind == Tok::Caret)
                lex.fail(lex.peek(), "'^' applies to atoms only, not parenthesized expressions");
            return inner;
        }
        Token t = lex.next();
        DensityOperator atom(d);
        switch (t.kind) {
            case Tok::Int: {
                Int num = t.value, den = 1;
                if (lex.peek().kind == Tok::Slash) {
                    lex.next();
                    if (lex.peek().kind != Tok::Int)
                        lex.fail(lex.peek(), "expected a denominator after '/'");
                    Token dt = lex.next();
                    if (dt.value == 0) lex.fail(dt, "zero denominator");
                    den = dt.value;
                }
                atom = DensityOperator::constant(d, Rational(num, den));
                break;
            }
            case Tok::Var:
                if (t.index > d)
                    lex.fail(t, "variable x" + std::to_string(t.index) + " exceeds dimension " +
                                    std::to_string(d));
                atom = DensityOperator::from_poly(MultiPoly::variable(d, t.index));
                break;
            case Tok::Deriv:
                if (t.index > d)
                    lex.fail(t, "derivative d" + std::to_string(t.index) + " exceeds dimension " +
                                    std::to_string(d));
                atom = DensityOperator::partial_op(d, t.index);
                break;
            case Tok::Weight:
                atom = DensityOperator::weight_op(d);
                break;
            default:
                lex.fail(t, "expected an operator atom");
        }
        if (lex.peek().kind == Tok::Caret) {
            lex.next();
            if (lex.peek().kind != Tok::Int) lex.fail(lex.peek(), "expected an exponent after '^'");
            Token e = lex.next();
            if (e.value > 64) lex.fail(e, "exponent too large");
            DensityOperator acc = DensityOperator::constant(d, Rational(1));
            for (Int i = 0; i < e.value; ++i) acc = compose(acc, atom);
            return acc;
        }
        return atom;
    };

    auto parse_term = [&]() -> DensityOperator {
        DensityOperator acc = parse_factor();
        for (;;) {
            if (lex.peek().kind == Tok::Star) {
                lex.next();
                if (!starts_factor(lex.peek().kind) && lex.peek().kind != Tok::Minus)
                    lex.fail(lex.peek(), "expected an operand after '*'");
                acc = compose(acc, parse_factor());
            } else if (starts_factor(lex.peek().kind)) {
                acc = compose(acc, parse_factor());
            } else {
                return acc;
            }
        }
    };

    parse_expr = [&]() -> DensityOperator {
        if (depth > 200) throw Error(ErrorCode::Parse, "expression nests too deeply");
        DensityOperator acc(d);
        bool negate = false;
        if (lex.peek().kind == Tok::Minus) {
            lex.next();
            negate = true;
        }
        acc = parse_term();
        if (negate) acc *= Rational(-1);
        while (lex.peek().kind == Tok::Plus || lex.peek().kind == Tok::Minus) {
            bool minus = lex.next().kind == Tok::Minus;
            DensityOperator rhs = parse_term();
            if (minus) acc -= rhs;
            else acc += rhs;
        }
        return acc;
    };

    if (d < 0) throw Error(ErrorCode::Dim, "parse_operator: negative dimension");
    if (lex.peek().kind == Tok::End) throw Error(ErrorCode::Parse, "empty operator expression");
    DensityOperator out = parse_expr();
    if (lex.peek().kind != Tok::End) lex.fail(lex.peek(), "unexpected trailing input");
    return out;
}

/// Prints an operator back into the expression language: one summand per
/// normal-form term, with the coefficient parenthesized and the derivative
/// and weight atoms spelled out. parse_operator(op_to_string(a), a.dim())
/// reproduces a exactly.
inline std::string op_to_string(const DensityOperator& a) {
    if (a.is_zero()) return "0";
    std::string out;
    for (const auto& [key, coeff] : a.terms()) {
        if (!out.empty()) out += " + ";
        out += "(" + coeff.str() + ")";
        for (size_t i = 0; i < key.alpha.size(); ++i) {
            unsigned e = key.alpha[i];
            if (e == 0) continue;
            out += "*d" + std::to_string(i + 1);
            if (e > 1) out += "^" + std::to_string(e);
        }
        if (key.wpow == 1) out += "*w";
        if (key.wpow > 1) out += "*w^" + std::to_string(key.wpow);
    }
    return out;
}

} // namespace densops
