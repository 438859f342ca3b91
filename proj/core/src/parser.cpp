#include "graspkb/parser.hpp"

#include "graspkb/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace graspkb {

namespace {

bool is_ident_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

/// Scanner over a single line; columns are 1-based.
class LineCursor {
  public:
    LineCursor(std::string_view line, std::size_t line_no) : line_(strip_comment(line)), line_no_(line_no) {}

    void skip_space()
    {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r')) {
            ++pos_;
        }
    }

    [[nodiscard]] bool at_end()
    {
        skip_space();
        return pos_ >= line_.size();
    }

    [[nodiscard]] bool peek(std::string_view token)
    {
        skip_space();
        return line_.substr(pos_, token.size()) == token;
    }

    bool accept(std::string_view token)
    {
        if (peek(token)) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view token)
    {
        if (!accept(token)) {
            fail("expected '" + std::string(token) + "'");
        }
    }

    std::string identifier(char const* what = "identifier")
    {
        skip_space();
        std::size_t const start = pos_;
        while (pos_ < line_.size() && is_ident_char(line_[pos_])) {
            ++pos_;
        }
        if (pos_ == start) {
            fail(std::string("expected ") + what);
        }
        return std::string(line_.substr(start, pos_ - start));
    }

    double number()
    {
        skip_space();
        std::size_t const start = pos_;
        while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t' && line_[pos_] != '\r') {
            ++pos_;
        }
        auto const token = line_.substr(start, pos_ - start);
        double value = 0.0;
        auto const [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || end != token.data() + token.size()) {
            fail_at(start, "malformed number '" + std::string(token) + "'");
        }
        if (!std::isfinite(value)) {
            fail_at(start, "weight must be finite");
        }
        return value;
    }

    [[nodiscard]] std::size_t column() const noexcept { return pos_ + 1; }
    [[nodiscard]] std::size_t line_no() const noexcept { return line_no_; }

    [[noreturn]] void fail(std::string const& message) { fail_at(pos_, message); }
    [[noreturn]] void fail_at(std::size_t pos, std::string const& message)
    {
        throw ParseError(message, line_no_, pos + 1);
    }

  private:
    static std::string_view strip_comment(std::string_view line)
    {
        auto const hash = line.find('#');
        return hash == std::string_view::npos ? line : line.substr(0, hash);
    }

    std::string_view line_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn)
{
    std::size_t line_no = 1;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto const end = text.find('\n', start);
        auto const line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (end == std::string_view::npos && line.empty()) {
            break;
        }
        fn(line, line_no);
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
        ++line_no;
    }
}

bool is_blank(std::string_view line)
{
    auto const hash = line.find('#');
    auto const body = hash == std::string_view::npos ? line : line.substr(0, hash);
    return std::all_of(body.begin(), body.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

/// A raw atom as written: name, arguments with positions and plus markers.
struct RawArg {
    std::string text;
    bool plus = false;
    std::size_t column = 0;
};

struct RawAtom {
    std::string predicate;
    std::vector<RawArg> args;
    std::size_t column = 0;
};

RawAtom read_atom(LineCursor& cur)
{
    RawAtom atom;
    cur.skip_space();
    atom.column = cur.column();
    atom.predicate = cur.identifier("predicate name");
    cur.expect("(");
    if (cur.peek(")")) {
        cur.fail("atom needs at least one argument");
    }
    do {
        RawArg arg;
        cur.skip_space();
        arg.column = cur.column();
        arg.plus = cur.accept("+");
        arg.text = cur.identifier("argument");
        atom.args.push_back(std::move(arg));
    } while (cur.accept(","));
    cur.expect(")");
    return atom;
}

std::size_t resolve_predicate(Schema const& schema, RawAtom const& raw, std::size_t line_no)
{
    auto const p = schema.find_predicate(raw.predicate);
    if (!p) {
        throw ParseError("unknown predicate '" + raw.predicate + "'", line_no, raw.column);
    }
    auto const& pred = schema.predicate(*p);
    if (raw.args.size() != pred.arity()) {
        throw ParseError("arity mismatch: '" + raw.predicate + "' takes " + std::to_string(pred.arity()) +
                             " arguments, got " + std::to_string(raw.args.size()),
                         line_no, raw.column);
    }
    return *p;
}

/// True when `name` is a constant of some closed domain other than `except`.
bool constant_elsewhere(Schema const& schema, std::string_view name, std::size_t except)
{
    for (std::size_t d = 0; d < schema.domains().size(); ++d) {
        if (d != except && schema.domain(d).find(name)) {
            return true;
        }
    }
    return false;
}

struct FormulaBuilder {
    Schema const& schema;
    std::size_t line_no;
    Formula formula;
    std::vector<bool> plus;

    Atom build(RawAtom const& raw)
    {
        Atom atom;
        atom.predicate = resolve_predicate(schema, raw, line_no);
        auto const& pred = schema.predicate(atom.predicate);
        for (std::size_t k = 0; k < raw.args.size(); ++k) {
            auto const& arg = raw.args[k];
            auto const domain = pred.arg_domains[k];
            auto const& dom = schema.domain(domain);
            if (!arg.plus) {
                if (auto c = dom.find(arg.text)) {
                    atom.args.push_back({Term::Kind::constant, *c});
                    continue;
                }
                if (constant_elsewhere(schema, arg.text, domain) || !is_letter(arg.text.front())) {
                    throw ParseError("constant '" + arg.text + "' is not in domain '" + dom.name + "'", line_no,
                                     arg.column);
                }
            } else if (dom.open) {
                throw ParseError("cannot expand '+" + arg.text + "' over open domain '" + dom.name + "'", line_no,
                                 arg.column);
            } else if (!is_letter(arg.text.front())) {
                throw ParseError("'+' must prefix a variable", line_no, arg.column);
            }
            atom.args.push_back({Term::Kind::variable, variable(arg, domain)});
        }
        return atom;
    }

    std::size_t variable(RawArg const& arg, std::size_t domain)
    {
        for (std::size_t v = 0; v < formula.variables.size(); ++v) {
            if (formula.variables[v].name == arg.text) {
                if (formula.variables[v].domain != domain) {
                    throw ParseError("variable '" + arg.text + "' used with domains '" +
                                         schema.domain(formula.variables[v].domain).name + "' and '" +
                                         schema.domain(domain).name + "'",
                                     line_no, arg.column);
                }
                if (plus[v] != arg.plus) {
                    throw ParseError("variable '" + arg.text + "' must be marked '+' everywhere or nowhere", line_no,
                                     arg.column);
                }
                return v;
            }
        }
        formula.variables.push_back({arg.text, domain});
        plus.push_back(arg.plus);
        return formula.variables.size() - 1;
    }
};

/// Substitutes every '+' variable by each constant combination (first
/// variable most significant) and renumbers the remaining variables.
std::vector<Formula> expand(Schema const& schema, Formula const& f, std::vector<bool> const& plus)
{
    std::vector<std::size_t> expanded;
    for (std::size_t v = 0; v < plus.size(); ++v) {
        if (plus[v]) {
            expanded.push_back(v);
        }
    }
    if (expanded.empty()) {
        return {f};
    }
    std::vector<std::size_t> remap(f.variables.size(), 0);
    std::vector<Variable> kept;
    for (std::size_t v = 0; v < f.variables.size(); ++v) {
        if (!plus[v]) {
            remap[v] = kept.size();
            kept.push_back(f.variables[v]);
        }
    }
    std::vector<std::size_t> sizes;
    for (auto v : expanded) {
        sizes.push_back(schema.domain(f.variables[v].domain).constants.size());
    }
    std::vector<Formula> out;
    std::vector<std::size_t> choice(expanded.size(), 0);
    for (;;) {
        std::vector<std::optional<std::size_t>> bound(f.variables.size());
        for (std::size_t i = 0; i < expanded.size(); ++i) {
            bound[expanded[i]] = choice[i];
        }
        auto rewrite = [&](Atom atom) {
            for (auto& t : atom.args) {
                if (t.kind == Term::Kind::variable) {
                    if (bound[t.index]) {
                        t = {Term::Kind::constant, *bound[t.index]};
                    } else {
                        t.index = remap[t.index];
                    }
                }
            }
            return atom;
        };
        Formula g;
        for (auto const& a : f.body) {
            g.body.push_back(rewrite(a));
        }
        g.head = rewrite(f.head);
        g.head_positive = f.head_positive;
        g.variables = kept;
        out.push_back(std::move(g));

        std::size_t k = expanded.size();
        while (k > 0) {
            --k;
            if (++choice[k] < sizes[k]) {
                break;
            }
            choice[k] = 0;
            if (k == 0) {
                return out;
            }
        }
    }
}

struct ParsedRuleLine {
    Formula formula;
    std::vector<bool> plus;
    std::optional<double> weight;
};

ParsedRuleLine parse_rule_line(LineCursor& cur, Schema const& schema)
{
    std::vector<RawAtom> atoms;
    std::vector<bool> negated;
    bool has_arrow = false;
    for (;;) {
        cur.skip_space();
        auto const neg_col = cur.column();
        bool const neg = cur.accept("!");
        atoms.push_back(read_atom(cur));
        negated.push_back(neg);
        if (neg && !cur.peek("@") && !cur.at_end()) {
            throw ParseError("negation is only allowed on the head", cur.line_no(), neg_col);
        }
        if (cur.accept("^")) {
            continue;
        }
        if (cur.accept("=>")) {
            if (has_arrow) {
                cur.fail("only one '=>' per rule");
            }
            has_arrow = true;
            continue;
        }
        break;
    }
    std::optional<double> weight;
    if (cur.accept("@")) {
        weight = cur.number();
    }
    if (!cur.at_end()) {
        cur.fail("unexpected trailing text");
    }
    if (!has_arrow && atoms.size() > 1) {
        cur.fail("a conjunction needs '=> head'");
    }
    for (std::size_t i = 0; i + 1 < negated.size(); ++i) {
        if (negated[i]) {
            throw ParseError("negation is only allowed on the head", cur.line_no(), atoms[i].column);
        }
    }

    FormulaBuilder builder{schema, cur.line_no(), {}, {}};
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        builder.formula.body.push_back(builder.build(atoms[i]));
    }
    builder.formula.head = builder.build(atoms.back());
    builder.formula.head_positive = !negated.back();
    return {std::move(builder.formula), std::move(builder.plus), weight};
}

} // namespace

Schema parse_schema(std::string_view text)
{
    Schema schema;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        LineCursor cur(line, line_no);
        if (cur.at_end()) {
            return;
        }
        auto const keyword_col = cur.column();
        auto const keyword = cur.identifier("'domain' or 'predicate'");
        if (keyword == "domain") {
            Domain d;
            auto const name_col = (cur.skip_space(), cur.column());
            d.name = cur.identifier("domain name");
            cur.expect("=");
            cur.expect("{");
            if (!cur.accept("}")) {
                do {
                    auto const col = (cur.skip_space(), cur.column());
                    auto c = cur.identifier("constant");
                    if (d.find(c)) {
                        throw ParseError("duplicate constant '" + c + "' in domain '" + d.name + "'", line_no, col);
                    }
                    d.constants.push_back(std::move(c));
                } while (cur.accept(","));
                cur.expect("}");
            }
            if (!cur.at_end()) {
                cur.fail("unexpected trailing text");
            }
            if (schema.find_domain(d.name)) {
                throw ParseError("duplicate domain '" + d.name + "'", line_no, name_col);
            }
            schema.add_domain(std::move(d));
        } else if (keyword == "predicate") {
            Predicate p;
            auto const name_col = (cur.skip_space(), cur.column());
            p.name = cur.identifier("predicate name");
            cur.expect("(");
            do {
                auto const col = (cur.skip_space(), cur.column());
                auto const dname = cur.identifier("domain name");
                auto const d = schema.find_domain(dname);
                if (!d) {
                    throw ParseError("unknown domain '" + dname + "'", line_no, col);
                }
                p.arg_domains.push_back(*d);
            } while (cur.accept(","));
            cur.expect(")");
            if (!cur.at_end()) {
                cur.fail("unexpected trailing text");
            }
            if (schema.find_predicate(p.name)) {
                throw ParseError("duplicate predicate '" + p.name + "'", line_no, name_col);
            }
            schema.add_predicate(std::move(p));
        } else {
            throw ParseError("expected 'domain' or 'predicate', got '" + keyword + "'", line_no, keyword_col);
        }
    });
    return schema;
}

std::vector<Rule> parse_rules(std::string_view text, Schema const& schema)
{
    std::vector<Rule> rules;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        LineCursor cur(line, line_no);
        if (cur.at_end()) {
            return;
        }
        auto parsed = parse_rule_line(cur, schema);
        for (auto& f : expand(schema, parsed.formula, parsed.plus)) {
            rules.push_back({std::move(f), parsed.weight});
        }
    });
    return rules;
}

Formula parse_formula(std::string_view text, Schema const& schema)
{
    LineCursor cur(text, 1);
    auto parsed = parse_rule_line(cur, schema);
    if (parsed.weight) {
        throw ParseError("unexpected weight in formula text", 1, 1);
    }
    if (std::find(parsed.plus.begin(), parsed.plus.end(), true) != parsed.plus.end()) {
        throw ParseError("'+' expansion is not allowed in a single formula", 1, 1);
    }
    return std::move(parsed.formula);
}

namespace {

SymbolicAtom ground_atom(LineCursor& cur, Schema const& schema)
{
    auto const raw = read_atom(cur);
    SymbolicAtom atom;
    atom.predicate = resolve_predicate(schema, raw, cur.line_no());
    auto const& pred = schema.predicate(atom.predicate);
    for (std::size_t k = 0; k < raw.args.size(); ++k) {
        auto const& arg = raw.args[k];
        auto const& dom = schema.domain(pred.arg_domains[k]);
        if (arg.plus) {
            throw ParseError("'+' is not allowed in a ground atom", cur.line_no(), arg.column);
        }
        if (!dom.open && !dom.find(arg.text)) {
            throw ParseError("unknown constant '" + arg.text + "' for domain '" + dom.name + "'", cur.line_no(),
                             arg.column);
        }
        atom.args.push_back(arg.text);
    }
    return atom;
}

} // namespace

SymbolicAtom parse_ground_atom(std::string_view text, Schema const& schema)
{
    LineCursor cur(text, 1);
    auto atom = ground_atom(cur, schema);
    if (!cur.at_end()) {
        cur.fail("unexpected trailing text");
    }
    return atom;
}

std::vector<World> parse_worlds(std::string_view text, Schema const& schema)
{
    std::vector<World> worlds;
    std::set<std::string> ids;
    bool in_block = false;
    std::set<SymbolicAtom> current;

    auto close_block = [&] {
        if (in_block) {
            worlds.back().atoms.assign(current.begin(), current.end());
            current.clear();
            in_block = false;
        }
    };

    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (is_blank(line)) {
            // Comment-only lines do not terminate a block; empty ones do.
            if (line.find('#') == std::string_view::npos) {
                close_block();
            }
            return;
        }
        LineCursor cur(line, line_no);
        if (cur.peek("world ") || cur.peek("world\t")) {
            close_block();
            cur.expect("world");
            auto const col = (cur.skip_space(), cur.column());
            auto id = cur.identifier("world id");
            if (!cur.at_end()) {
                cur.fail("unexpected trailing text");
            }
            if (!ids.insert(id).second) {
                throw ParseError("duplicate world id '" + id + "'", line_no, col);
            }
            worlds.push_back({std::move(id), {}});
            in_block = true;
            return;
        }
        if (!in_block) {
            cur.fail("expected 'world <id>'");
        }
        auto const col = (cur.skip_space(), cur.column());
        auto atom = ground_atom(cur, schema);
        if (!cur.at_end()) {
            cur.fail("unexpected trailing text");
        }
        if (!current.insert(atom).second) {
            throw ParseError("atom listed twice in world '" + worlds.back().id + "'", line_no, col);
        }
    });
    close_block();
    return worlds;
}

std::string format_weight(double w)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", w);
    return buf;
}

std::string write_schema(Schema const& schema)
{
    std::string out;
    for (auto const& d : schema.domains()) {
        out += "domain " + d.name + " = {";
        for (std::size_t i = 0; i < d.constants.size(); ++i) {
            out += (i == 0 ? " " : ", ") + d.constants[i];
        }
        out += d.constants.empty() ? "}\n" : " }\n";
    }
    for (auto const& p : schema.predicates()) {
        out += "predicate " + p.name + "(";
        for (std::size_t i = 0; i < p.arg_domains.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += schema.domain(p.arg_domains[i]).name;
        }
        out += ")\n";
    }
    return out;
}

std::string write_rules(Schema const& schema, std::span<Rule const> rules)
{
    std::string out;
    for (auto const& r : rules) {
        out += formula_text(schema, r.formula);
        if (r.weight) {
            out += " @ " + format_weight(*r.weight);
        }
        out += '\n';
    }
    return out;
}

std::string write_worlds(Schema const& schema, std::span<World const> worlds)
{
    std::string out;
    for (std::size_t i = 0; i < worlds.size(); ++i) {
        if (i > 0) {
            out += '\n';
        }
        out += "world " + worlds[i].id + "\n";
        for (auto const& a : worlds[i].atoms) {
            out += atom_text(schema, a) + "\n";
        }
    }
    return out;
}

} // namespace graspkb
