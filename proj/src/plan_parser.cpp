#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "optree/plan.hpp"

namespace optree {

namespace {

constexpr int kMaxDepth = 200;

enum class Tok { ident, string, integer, real, punct, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;  // identifier, punctuation, decoded string or number spelling
    SourcePos pos;
};

class Lexer {
public:
    Lexer(std::string_view src, SourcePos base) : src_(src), base_(base) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.pos = here();
            if (i_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[i_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t s = i_;
                while (i_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                    advance();
                t.kind = Tok::ident;
                t.text = std::string(src_.substr(s, i_ - s));
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                lex_number(t);
            } else if (c == '"' || c == '\'') {
                lex_string(t);
            } else {
                lex_punct(t);
            }
            out.push_back(std::move(t));
        }
    }

private:
    SourcePos here() const {
        if (line_ == 1) return {base_.line, base_.col + col_ - 1};
        return {base_.line + line_ - 1, col_};
    }

    void advance() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip_space() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) advance();
    }

    [[noreturn]] void fail(const std::string& msg) { throw PlanError("SyntaxError", here(), msg); }

    void lex_number(Token& t) {
        size_t s = i_;
        bool real = false;
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
        if (i_ + 1 < src_.size() && src_[i_] == '.' && std::isdigit(static_cast<unsigned char>(src_[i_ + 1]))) {
            real = true;
            advance();
            while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
        }
        if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
            size_t j = i_ + 1;
            if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
            if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
                real = true;
                while (i_ < j) advance();
                while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
            }
        }
        if (i_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
            fail("malformed number");
        t.kind = real ? Tok::real : Tok::integer;
        t.text = std::string(src_.substr(s, i_ - s));
    }

    void lex_string(Token& t) {
        const char quote = src_[i_];
        advance();
        std::string out;
        for (;;) {
            if (i_ >= src_.size()) throw PlanError("SyntaxError", t.pos, "unterminated string literal");
            char c = src_[i_];
            if (c == quote) {
                advance();
                break;
            }
            if (c == '\n') throw PlanError("SyntaxError", t.pos, "unterminated string literal");
            if (c == '\\') {
                advance();
                if (i_ >= src_.size()) throw PlanError("SyntaxError", t.pos, "unterminated string literal");
                char e = src_[i_];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '\\': out += '\\'; break;
                    case '"': out += '"'; break;
                    case '\'': out += '\''; break;
                    case 'x': {
                        if (i_ + 2 >= src_.size() || !std::isxdigit(static_cast<unsigned char>(src_[i_ + 1])) ||
                            !std::isxdigit(static_cast<unsigned char>(src_[i_ + 2])))
                            fail("malformed \\x escape");
                        int v = std::stoi(std::string(src_.substr(i_ + 1, 2)), nullptr, 16);
                        out += static_cast<char>(v);
                        advance();
                        advance();
                        break;
                    }
                    default: fail(std::string("unknown escape \\") + e);
                }
                advance();
                continue;
            }
            out += c;
            advance();
        }
        t.kind = Tok::string;
        t.text = std::move(out);
    }

    void lex_punct(Token& t) {
        static constexpr std::string_view two[] = {"{{", "}}", "==", "!=", "<=", ">="};
        for (auto p : two) {
            if (src_.substr(i_, 2) == p) {
                t.kind = Tok::punct;
                t.text = std::string(p);
                advance();
                advance();
                return;
            }
        }
        static constexpr std::string_view one = "()[],=.:+-<>";
        char c = src_[i_];
        if (one.find(c) == std::string_view::npos) fail(std::string("unexpected character '") + c + "'");
        t.kind = Tok::punct;
        t.text = std::string(1, c);
        advance();
    }

    std::string_view src_;
    SourcePos base_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

bool is_accessor(std::string_view n) {
    return n == "year" || n == "month" || n == "day" || n == "hour" || n == "minute" || n == "weekday";
}

struct DepthGuard {
    int& depth;
    DepthGuard(int& d, SourcePos pos) : depth(d) {
        if (++depth > kMaxDepth) throw PlanError("SyntaxError", pos, "nesting too deep");
    }
    ~DepthGuard() { --depth; }
};

class Parser {
public:
    Parser(std::vector<Token> toks, int depth = 0) : toks_(std::move(toks)), depth_(depth) {}

    PlanNode parse_plan_top() {
        PlanNode n = parse_node();
        expect_end();
        return n;
    }

    Expr parse_predicate_top(bool join) {
        join_ = join;
        if (!join && is_ident("lambda")) parse_lambda_header();
        Expr e = parse_expr();
        expect_end();
        return e;
    }

private:
    // -- token helpers -----------------------------------------------------
    const Token& peek(size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    const Token& next() {
        const Token& t = toks_[i_];
        if (i_ + 1 < toks_.size()) ++i_;
        return t;
    }
    bool is_punct(std::string_view p, size_t k = 0) const {
        return peek(k).kind == Tok::punct && peek(k).text == p;
    }
    bool is_ident(std::string_view name, size_t k = 0) const {
        return peek(k).kind == Tok::ident && peek(k).text == name;
    }
    bool accept(std::string_view p) {
        if (!is_punct(p)) return false;
        next();
        return true;
    }
    [[noreturn]] void fail(const Token& t, const std::string& msg, const char* code = "SyntaxError") const {
        throw PlanError(code, t.pos, msg);
    }
    static std::string describe(const Token& t) {
        switch (t.kind) {
            case Tok::end: return "end of input";
            case Tok::string: return "string literal";
            default: return "'" + t.text + "'";
        }
    }
    void expect(std::string_view p) {
        if (!accept(p)) fail(peek(), "expected '" + std::string(p) + "' but found " + describe(peek()));
    }
    void expect_end() {
        if (peek().kind != Tok::end) fail(peek(), "unexpected " + describe(peek()) + " after expression");
    }
    std::string expect_ident() {
        if (peek().kind != Tok::ident) fail(peek(), "expected identifier but found " + describe(peek()));
        return next().text;
    }
    std::string expect_string() {
        if (peek().kind != Tok::string) fail(peek(), "expected string literal but found " + describe(peek()));
        return next().text;
    }
    int64_t expect_int() {
        bool neg = accept("-");
        if (peek().kind != Tok::integer) fail(peek(), "expected integer but found " + describe(peek()));
        const Token& t = next();
        return parse_int(t, neg);
    }
    int64_t parse_int(const Token& t, bool neg) const {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size()) fail(t, "integer out of range");
        return neg ? -v : v;
    }
    double parse_real(const Token& t, bool neg) const {
        double v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size()) fail(t, "number out of range");
        return neg ? -v : v;
    }

    // -- plans -------------------------------------------------------------
    PlanNode parse_node() {
        DepthGuard guard(depth_, peek().pos);
        if (accept("{{")) {
            PlanNode n = parse_node();
            expect("}}");
            return n;
        }
        const Token& head = peek();
        if (head.kind != Tok::ident) fail(head, "expected operator but found " + describe(head));
        auto op = parse_op_name(head.text);
        if (!op) fail(head, "unknown operator '" + head.text + "'");
        next();
        PlanNode n;
        n.op = *op;
        n.pos = head.pos;
        expect("(");
        if (n.op == Op::qud) {
            n.text = expect_string();
            expect(")");
            return n;
        }
        std::set<std::string> seen;
        std::optional<PlanNode> l, l1, l2;
        bool has_types = false, has_keys = false;
        while (!is_punct(")")) {
            if (!(peek().kind == Tok::ident && is_punct("=", 1)))
                fail(peek(), "positional arguments are not allowed; use name=value");
            const Token& name_tok = next();
            const std::string name = name_tok.text;
            next();  // '='
            if (!seen.insert(name).second) fail(name_tok, "duplicate argument '" + name + "'");
            if (!allowed(n.op, name))
                fail(name_tok, "unknown argument '" + name + "' for " + std::string(op_name(n.op)));
            if (name == "l") l = parse_node();
            else if (name == "l1") l1 = parse_node();
            else if (name == "l2") l2 = parse_node();
            else if (name == "query") n.text = expect_string();
            else if (name == "attr_names") {
                n.keys = parse_string_list();
                has_keys = true;
            } else if (name == "attr_types") {
                n.types = parse_type_list();
                has_types = true;
            } else if (name == "attr_name" || name == "arg_attr_name") n.keys = {expect_string()};
            else if (name == "val_attr_name") n.val_key = expect_string();
            else if (name == "nested_attr_name") n.nested_key = expect_string();
            else if (name == "unnested_attr_name") n.unnested_key = expect_string();
            else if (name == "res_name") n.res_name = expect_string();
            else if (name == "fct") n.fn = parse_function_name();
            else if (name == "condition") {
                const Token& s = peek();
                std::string body = expect_string();
                SourcePos base{s.pos.line, s.pos.col + 1};
                Parser sub(Lexer(body, base).run(), depth_);
                n.pred.push_back(sub.parse_predicate_top(true));
            } else if (name == "filter") {
                const std::string saved_var = lambda_var_;
                const bool saved_join = join_;
                lambda_var_ = "attr";
                join_ = false;
                if (is_ident("lambda")) parse_lambda_header();
                n.pred.push_back(parse_expr());
                lambda_var_ = saved_var;
                join_ = saved_join;
            }
            if (!accept(",")) break;
        }
        expect(")");

        auto require = [&](bool present, const char* what) {
            if (!present)
                fail(head, std::string(op_name(n.op)) + " requires argument '" + what + "'", "ArityError");
        };
        switch (n.op) {
            case Op::retrieve:
                require(seen.count("query"), "query");
                if (l) n.children.push_back(std::move(*l));
                break;
            case Op::join:
                require(l1.has_value(), "l1");
                require(l2.has_value(), "l2");
                require(!n.pred.empty(), "condition");
                n.children.push_back(std::move(*l1));
                n.children.push_back(std::move(*l2));
                break;
            default:
                require(l.has_value(), "l");
                n.children.push_back(std::move(*l));
                break;
        }
        switch (n.op) {
            case Op::extract:
                require(has_keys, "attr_names");
                require(has_types, "attr_types");
                break;
            case Op::group_by: require(has_keys, "attr_names"); break;
            case Op::filter: require(!n.pred.empty(), "filter"); break;
            case Op::map:
                require(!n.fn.empty(), "fct");
                if (!seen.count("res_name")) n.res_name = "map_result";
                break;
            case Op::apply: require(!n.fn.empty(), "fct"); break;
            case Op::unnest:
                require(seen.count("nested_attr_name"), "nested_attr_name");
                require(seen.count("unnested_attr_name"), "unnested_attr_name");
                break;
            case Op::argmin:
            case Op::argmax: require(seen.count("arg_attr_name"), "arg_attr_name"); break;
            case Op::sum:
            case Op::avg:
            case Op::min:
            case Op::max: require(seen.count("attr_name"), "attr_name"); break;
            default: break;
        }
        return n;
    }

    static bool allowed(Op op, std::string_view name) {
        switch (op) {
            case Op::retrieve: return name == "query" || name == "l";
            case Op::extract: return name == "l" || name == "attr_names" || name == "attr_types";
            case Op::join: return name == "l1" || name == "l2" || name == "condition";
            case Op::group_by: return name == "l" || name == "attr_names";
            case Op::filter: return name == "l" || name == "filter";
            case Op::map: return name == "l" || name == "fct" || name == "res_name";
            case Op::apply: return name == "l" || name == "fct";
            case Op::unnest: return name == "l" || name == "nested_attr_name" || name == "unnested_attr_name";
            case Op::argmin:
            case Op::argmax: return name == "l" || name == "arg_attr_name" || name == "val_attr_name";
            case Op::sum:
            case Op::avg:
            case Op::min:
            case Op::max: return name == "l" || name == "attr_name";
            case Op::qud: return false;
        }
        return false;
    }

    std::vector<std::string> parse_string_list() {
        std::vector<std::string> out;
        expect("[");
        while (!is_punct("]")) {
            out.push_back(expect_string());
            if (!accept(",")) break;
        }
        expect("]");
        return out;
    }

    std::vector<TypeTag> parse_type_list() {
        std::vector<TypeTag> out;
        expect("[");
        while (!is_punct("]")) {
            const Token& t = peek();
            std::string name;
            if (t.kind == Tok::string) {
                name = next().text;
            } else {
                name = expect_ident();
                while (accept(".")) name += "." + expect_ident();
            }
            auto tag = parse_type_tag(name);
            if (!tag) fail(t, "unknown type '" + name + "'");
            out.push_back(*tag);
            if (!accept(",")) break;
        }
        expect("]");
        return out;
    }

    std::string parse_function_name() {
        const Token& t = peek();
        std::string name = t.kind == Tok::string ? next().text : expect_ident();
        if (!is_known_function(name)) fail(t, "unknown function '" + name + "'", "UnknownFunction");
        return name;
    }

    void parse_lambda_header() {
        next();  // lambda
        lambda_var_ = expect_ident();
        expect(":");
    }

    // -- expressions -------------------------------------------------------
    Expr parse_expr() { return parse_or(); }

    Expr parse_or() {
        SourcePos pos = peek().pos;
        Expr first = parse_and();
        if (!is_ident("or")) return first;
        Expr e;
        e.kind = ExprKind::logic_or;
        e.pos = pos;
        e.args.push_back(std::move(first));
        while (is_ident("or")) {
            next();
            e.args.push_back(parse_and());
        }
        return e;
    }

    Expr parse_and() {
        SourcePos pos = peek().pos;
        Expr first = parse_not();
        if (!is_ident("and")) return first;
        Expr e;
        e.kind = ExprKind::logic_and;
        e.pos = pos;
        e.args.push_back(std::move(first));
        while (is_ident("and")) {
            next();
            e.args.push_back(parse_not());
        }
        return e;
    }

    Expr parse_not() {
        DepthGuard guard(depth_, peek().pos);
        if (is_ident("not")) {
            Expr e;
            e.kind = ExprKind::logic_not;
            e.pos = next().pos;
            e.args.push_back(parse_not());
            return e;
        }
        return parse_cmp();
    }

    std::optional<CmpOp> peek_cmp(size_t& width) const {
        width = 1;
        if (peek().kind == Tok::punct) {
            const auto& t = peek().text;
            if (t == "==") return CmpOp::eq;
            if (t == "!=") return CmpOp::ne;
            if (t == "<") return CmpOp::lt;
            if (t == "<=") return CmpOp::le;
            if (t == ">") return CmpOp::gt;
            if (t == ">=") return CmpOp::ge;
        }
        if (is_ident("in")) return CmpOp::in;
        if (is_ident("not") && is_ident("in", 1)) {
            width = 2;
            return CmpOp::not_in;
        }
        return std::nullopt;
    }

    Expr parse_cmp() {
        SourcePos pos = peek().pos;
        Expr lhs = parse_arith();
        size_t width;
        auto op = peek_cmp(width);
        if (!op) return lhs;
        for (size_t k = 0; k < width; ++k) next();
        Expr rhs = parse_arith();
        size_t w2;
        if (peek_cmp(w2)) fail(peek(), "chained comparisons are not supported");
        Expr e;
        e.kind = ExprKind::compare;
        e.cmp = *op;
        e.pos = pos;
        e.args.push_back(std::move(lhs));
        e.args.push_back(std::move(rhs));
        return e;
    }

    Expr parse_arith() {
        Expr lhs = parse_unary();
        while (is_punct("+") || is_punct("-")) {
            const Token& t = next();
            Expr e;
            e.kind = ExprKind::arith;
            e.name = t.text;
            e.pos = t.pos;
            e.args.push_back(std::move(lhs));
            e.args.push_back(parse_unary());
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr parse_unary() {
        DepthGuard guard(depth_, peek().pos);
        if (is_punct("-")) {
            const Token& minus = next();
            if (peek().kind == Tok::integer || peek().kind == Tok::real) {
                Expr lit = parse_postfix();
                if (lit.kind == ExprKind::literal) {
                    if (auto i = lit.value.get_if<int64_t>()) lit.value = Value(-*i);
                    else if (auto d = lit.value.get_if<double>()) lit.value = Value(-*d);
                    lit.pos = minus.pos;
                    return lit;
                }
                Expr e;
                e.kind = ExprKind::negate;
                e.pos = minus.pos;
                e.args.push_back(std::move(lit));
                return e;
            }
            Expr e;
            e.kind = ExprKind::negate;
            e.pos = minus.pos;
            e.args.push_back(parse_unary());
            return e;
        }
        return parse_postfix();
    }

    Expr parse_postfix() {
        Expr e = parse_primary();
        while (is_punct(".")) {
            next();
            const Token& t = peek();
            std::string name = expect_ident();
            Expr outer;
            outer.pos = t.pos;
            if (is_accessor(name)) {
                if (name == "weekday" && is_punct("(") && is_punct(")", 1)) {
                    next();
                    next();
                }
                outer.kind = ExprKind::accessor;
                outer.name = name;
            } else if (name == "lower") {
                expect("(");
                expect(")");
                outer.kind = ExprKind::lower;
            } else {
                fail(t, "unknown attribute '." + name + "'");
            }
            outer.args.push_back(std::move(e));
            e = std::move(outer);
        }
        return e;
    }

    Expr literal(Value v, SourcePos pos) {
        Expr e;
        e.kind = ExprKind::literal;
        e.value = std::move(v);
        e.pos = pos;
        return e;
    }

    Expr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::string: next(); return literal(Value(t.text), t.pos);
            case Tok::integer: next(); return literal(Value(parse_int(t, false)), t.pos);
            case Tok::real: next(); return literal(Value(parse_real(t, false)), t.pos);
            case Tok::end: fail(t, "unexpected end of input");
            case Tok::punct: break;
            case Tok::ident: return parse_name();
        }
        if (accept("(")) {
            Expr e = parse_expr();
            expect(")");
            return e;
        }
        if (accept("[")) {
            Value::List items;
            while (!is_punct("]")) {
                const Token& at = peek();
                Expr item = parse_unary();
                if (item.kind != ExprKind::literal || item.value.is_list())
                    fail(at, "list literals may only contain scalar literals");
                items.push_back(std::move(item.value));
                if (!accept(",")) break;
            }
            expect("]");
            return literal(Value(std::move(items)), t.pos);
        }
        fail(t, "unexpected " + describe(t));
    }

    template <class F>
    Expr call_with_string(const Token& head, F convert) {
        expect("(");
        const Token& arg = peek();
        std::string s = expect_string();
        expect(")");
        auto v = convert(s);
        if (!v) fail(arg, "malformed literal '" + s + "' for " + head.text);
        return literal(Value(*v), head.pos);
    }

    std::vector<int64_t> int_args(size_t min_n, size_t max_n) {
        const Token& open = peek();
        expect("(");
        std::vector<int64_t> out;
        while (!is_punct(")")) {
            out.push_back(expect_int());
            if (!accept(",")) break;
        }
        expect(")");
        if (out.size() < min_n || out.size() > max_n) fail(open, "wrong number of arguments");
        return out;
    }

    Date civil(const Token& at, int64_t y, int64_t m, int64_t d) {
        if (y < 1 || y > 9999 || m < 1 || m > 12 || d < 1 || d > 31 ||
            !valid_civil(static_cast<int>(y), static_cast<unsigned>(m), static_cast<unsigned>(d)))
            fail(at, "invalid calendar date");
        return make_date(static_cast<int>(y), static_cast<unsigned>(m), static_cast<unsigned>(d));
    }

    Expr parse_name() {
        const Token head = next();
        const std::string& n = head.text;
        if (n == "True" || n == "False") {
            Expr e;
            e.kind = ExprKind::boolean;
            e.flag = n == "True";
            e.pos = head.pos;
            return e;
        }
        if (n == "None") return literal(Value(), head.pos);
        if (!loop_var_.empty() && n == loop_var_) {
            Expr e;
            e.kind = ExprKind::attr;
            e.side = -1;
            e.pos = head.pos;
            return e;
        }
        if (!join_ && n == lambda_var_ && is_punct("[")) {
            next();
            Expr e;
            e.kind = ExprKind::attr;
            e.name = expect_string();
            e.pos = head.pos;
            expect("]");
            return e;
        }
        if (join_ && (n == "i1" || n == "i2")) {
            Expr e;
            e.kind = ExprKind::attr;
            e.side = n == "i1" ? 1 : 2;
            e.pos = head.pos;
            if (accept("[")) {
                e.name = expect_string();
                expect("]");
            } else {
                expect(".");
                e.name = expect_ident();
            }
            return e;
        }
        if (n == "date" || n == "datetime" || n == "time" || n == "duration") {
            if (accept(".")) {
                const Token m = peek();
                std::string method = expect_ident();
                if (n == "date" && method == "today") {
                    expect("(");
                    expect(")");
                    Expr e;
                    e.kind = ExprKind::today;
                    e.pos = head.pos;
                    return e;
                }
                if (n == "datetime" && method == "now") {
                    expect("(");
                    expect(")");
                    Expr e;
                    e.kind = ExprKind::now;
                    e.pos = head.pos;
                    return e;
                }
                if (method != "fromisoformat") fail(m, "unknown function '" + n + "." + method + "'", "UnknownFunction");
                if (n == "date") return call_with_string(head, [](const std::string& s) { return parse_iso_date(s); });
                if (n == "time") return call_with_string(head, [](const std::string& s) { return parse_iso_time(s); });
                if (n == "datetime")
                    return call_with_string(head, [](const std::string& s) { return parse_iso_datetime(s); });
                return call_with_string(head, [](const std::string& s) { return parse_iso_duration(s); });
            }
            if (n == "date") {
                auto a = int_args(3, 3);
                return literal(Value(civil(head, a[0], a[1], a[2])), head.pos);
            }
            if (n == "datetime") {
                auto a = int_args(3, 6);
                a.resize(6, 0);
                Date d = civil(head, a[0], a[1], a[2]);
                if (a[3] < 0 || a[3] > 23 || a[4] < 0 || a[4] > 59 || a[5] < 0 || a[5] > 59)
                    fail(head, "invalid time of day");
                return literal(Value(DateTime{d.days * 86400 + a[3] * 3600 + a[4] * 60 + a[5]}), head.pos);
            }
            if (n == "time") {
                auto a = int_args(2, 3);
                a.resize(3, 0);
                if (a[0] < 0 || a[0] > 23 || a[1] < 0 || a[1] > 59 || a[2] < 0 || a[2] > 59)
                    fail(head, "invalid time of day");
                return literal(Value(TimeOfDay{static_cast<int32_t>(a[0] * 3600 + a[1] * 60 + a[2])}), head.pos);
            }
            fail(head, "unexpected 'duration'");
        }
        if (n == "today" || n == "now") {
            expect("(");
            expect(")");
            Expr e;
            e.kind = n == "today" ? ExprKind::today : ExprKind::now;
            e.pos = head.pos;
            return e;
        }
        if (n == "relativedelta" || n == "timedelta" || n == "period") return parse_period(head);
        if (n == "len" || n == "lower") {
            expect("(");
            Expr e;
            e.kind = n == "len" ? ExprKind::length : ExprKind::lower;
            e.pos = head.pos;
            e.args.push_back(parse_expr());
            expect(")");
            return e;
        }
        if (n == "any") return parse_any(head);
        if (n == "any_contains") {
            expect("(");
            Expr e;
            e.kind = ExprKind::any_contains;
            e.pos = head.pos;
            e.args.push_back(parse_expr());
            expect(",");
            e.args.push_back(parse_expr());
            expect(")");
            return e;
        }
        if (parse_op_name(n)) {
            --i_;
            Expr e;
            e.kind = ExprKind::subplan;
            e.pos = head.pos;
            e.sub.push_back(parse_node());
            expect(".");
            const Token& r = peek();
            if (expect_ident() != "result") fail(r, "sub-plans inside predicates must end with '.result'");
            return e;
        }
        if (is_punct("(")) fail(head, "unknown function '" + n + "'", "UnknownFunction");
        fail(head, "unknown name '" + n + "'");
    }

    Expr parse_period(const Token& head) {
        expect("(");
        Expr e;
        e.kind = ExprKind::period;
        e.pos = head.pos;
        std::set<std::string> seen;
        while (!is_punct(")")) {
            const Token& k = peek();
            std::string unit = expect_ident();
            if (!seen.insert(unit).second) fail(k, "duplicate argument '" + unit + "'");
            expect("=");
            int64_t v = expect_int();
            if (v > 100000 || v < -100000) fail(k, "period component out of range");
            if (unit == "years") e.period.years += v;
            else if (unit == "months") e.period.months += v;
            else if (unit == "weeks") e.period.days += 7 * v;
            else if (unit == "days") e.period.days += v;
            else if (unit == "hours") e.period.seconds += 3600 * v;
            else if (unit == "minutes") e.period.seconds += 60 * v;
            else if (unit == "seconds") e.period.seconds += v;
            else fail(k, "unknown period unit '" + unit + "'");
            if (!accept(",")) break;
        }
        expect(")");
        return e;
    }

    static bool mentions_loop_var(const Expr& e) {
        if (e.kind == ExprKind::attr && e.side == -1) return true;
        return std::any_of(e.args.begin(), e.args.end(), mentions_loop_var);
    }

    // any(<needle> in <v>[.lower()] for <v> in <list>)
    Expr parse_any(const Token& head) {
        expect("(");
        size_t depth = 0;
        std::string var;
        for (size_t k = i_; k < toks_.size() && toks_[k].kind != Tok::end; ++k) {
            const Token& t = toks_[k];
            if (t.kind == Tok::punct && (t.text == "(" || t.text == "[" || t.text == "{{")) ++depth;
            if (t.kind == Tok::punct && (t.text == ")" || t.text == "]" || t.text == "}}")) {
                if (depth == 0) break;
                --depth;
            }
            if (depth == 0 && t.kind == Tok::ident && t.text == "for" && k + 2 < toks_.size() &&
                toks_[k + 1].kind == Tok::ident && toks_[k + 2].kind == Tok::ident && toks_[k + 2].text == "in") {
                var = toks_[k + 1].text;
                break;
            }
        }
        if (var.empty()) fail(head, "any() expects a generator 'x in v for v in list'");
        std::string saved = loop_var_;
        loop_var_ = var;
        Expr test = parse_expr();
        loop_var_ = saved;
        if (!is_ident("for")) fail(peek(), "expected 'for' in generator");
        next();
        expect_ident();
        if (!is_ident("in")) fail(peek(), "expected 'in' in generator");
        next();
        Expr list = parse_expr();
        expect(")");
        bool shape = test.kind == ExprKind::compare && test.cmp == CmpOp::in;
        bool folded = false;
        if (shape) {
            const Expr& hay = test.args[1];
            if (hay.kind == ExprKind::attr && hay.side == -1) {
                folded = false;
            } else if (hay.kind == ExprKind::lower && hay.args[0].kind == ExprKind::attr && hay.args[0].side == -1) {
                folded = true;
            } else {
                shape = false;
            }
            if (shape && mentions_loop_var(test.args[0])) shape = false;
        }
        if (!shape) fail(head, "unsupported generator; expected 'needle in v' or 'needle in v.lower()'");
        if (mentions_loop_var(list)) fail(head, "generator source may not reference the loop variable");
        Expr e;
        e.kind = ExprKind::any_contains;
        e.flag = folded;
        e.pos = head.pos;
        e.args.push_back(std::move(list));
        e.args.push_back(std::move(test.args[0]));
        return e;
    }

    std::vector<Token> toks_;
    size_t i_ = 0;
    int depth_ = 0;
    bool join_ = false;
    std::string lambda_var_ = "attr";
    std::string loop_var_;
};

}  // namespace

PlanNode parse_plan(std::string_view text) {
    Parser p(Lexer(text, SourcePos{1, 1}).run());
    return p.parse_plan_top();
}

Expr parse_predicate(std::string_view text, bool join_condition) {
    Parser p(Lexer(text, SourcePos{1, 1}).run());
    return p.parse_predicate_top(join_condition);
}

}  // namespace optree
