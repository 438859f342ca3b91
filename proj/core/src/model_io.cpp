#include "graspkb/model_io.hpp"

#include "graspkb/error.hpp"
#include "graspkb/parser.hpp"

#include <charconv>
#include <cmath>

namespace graspkb {

std::vector<Rule> Model::rules() const
{
    std::vector<Rule> out;
    for (std::size_t i = 0; i < formulas.size(); ++i) {
        out.push_back({formulas[i], weights.at(i)});
    }
    return out;
}

Model model_from_weighted_rules(Schema schema, std::vector<Rule> const& rules)
{
    Model m;
    m.schema = std::move(schema);
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (!rules[i].weight) {
            throw ValidationError("rule " + std::to_string(i) + " (" + formula_text(m.schema, rules[i].formula) +
                                  ") has no weight");
        }
        m.formulas.push_back(rules[i].formula);
        m.weights.push_back(*rules[i].weight);
    }
    return m;
}

std::string write_model(Model const& model)
{
    std::string out = "kbm 1\n";
    out += "schema_hash\t" + model.schema_hash + "\n";
    out += "rules_hash\t" + model.rules_hash + "\n";
    auto const schema_text = write_schema(model.schema);
    std::size_t start = 0;
    while (start < schema_text.size()) {
        auto const end = schema_text.find('\n', start);
        out += "schema\t" + schema_text.substr(start, end - start) + "\n";
        start = end + 1;
    }
    for (std::size_t i = 0; i < model.formulas.size(); ++i) {
        out += std::to_string(i) + "\t" + formula_text(model.schema, model.formulas[i]) + "\t" +
               format_weight(model.weights.at(i)) + "\n";
    }
    return out;
}

Model read_model(std::string_view text)
{
    Model m;
    std::string schema_text;
    std::vector<std::pair<std::size_t, std::string_view>> formula_lines;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool header = false;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        if (!header) {
            if (line != "kbm 1") {
                throw ParseError("not a kbm v1 model file", line_no, 1);
            }
            header = true;
            continue;
        }
        auto const tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw ParseError("expected a tab-separated field", line_no, 1);
        }
        auto const key = line.substr(0, tab);
        auto const rest = line.substr(tab + 1);
        if (key == "schema_hash") {
            m.schema_hash = rest;
        } else if (key == "rules_hash") {
            m.rules_hash = rest;
        } else if (key == "schema") {
            schema_text.append(rest);
            schema_text += '\n';
        } else {
            formula_lines.emplace_back(line_no, line);
        }
    }
    if (!header) {
        throw ParseError("empty model file", 1, 1);
    }
    m.schema = parse_schema(schema_text);
    for (auto const& [no, line] : formula_lines) {
        auto const t1 = line.find('\t');
        auto const t2 = line.rfind('\t');
        if (t1 == t2) {
            throw ParseError("expected index, formula and weight", no, 1);
        }
        std::size_t index = 0;
        auto const idx = line.substr(0, t1);
        auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
        if (ec != std::errc{} || p != idx.data() + idx.size() || index != m.formulas.size()) {
            throw ParseError("formula index out of sequence", no, 1);
        }
        auto const wtext = line.substr(t2 + 1);
        double w = 0.0;
        auto [q, ec2] = std::from_chars(wtext.data(), wtext.data() + wtext.size(), w);
        if (ec2 != std::errc{} || q != wtext.data() + wtext.size() || !std::isfinite(w)) {
            throw ParseError("malformed weight", no, t2 + 2);
        }
        try {
            m.formulas.push_back(parse_formula(line.substr(t1 + 1, t2 - t1 - 1), m.schema));
        } catch (ParseError const& e) {
            throw ParseError(std::string("formula: ") + e.what(), no, t1 + 1 + e.column());
        }
        m.weights.push_back(w);
    }
    return m;
}

} // namespace graspkb
