#include "cli/commands.hpp"

#include "graspkb/error.hpp"
#include "graspkb/exact.hpp"
#include "graspkb/grounding.hpp"
#include "graspkb/metrics.hpp"
#include "graspkb/model_io.hpp"
#include "graspkb/parser.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace graspkb::cli {

namespace {

std::string format_g17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_fixed(double x, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        auto const end = line.find(',', start);
        auto cell = line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
            cell.remove_prefix(1);
        }
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
            cell.remove_suffix(1);
        }
        cells.emplace_back(cell);
        if (end == std::string_view::npos) {
            return cells;
        }
        start = end + 1;
    }
}

} // namespace

void cmd_eval_exact(Context& ctx, EvalExactArgs const& args)
{
    auto const model = read_model(ctx.read_input("model", args.model));
    World evidence;
    if (!args.evidence.empty()) {
        auto const worlds = parse_worlds(ctx.read_input("evidence", args.evidence), model.schema);
        if (!args.world.empty()) {
            auto it = std::find_if(worlds.begin(), worlds.end(), [&](World const& w) { return w.id == args.world; });
            if (it == worlds.end()) {
                throw ValidationError("world '" + args.world + "' not found in " + args.evidence);
            }
            evidence = *it;
        } else if (worlds.size() == 1) {
            evidence = worlds.front();
        } else {
            throw ValidationError(args.evidence + " holds " + std::to_string(worlds.size()) +
                                  " worlds; choose one with --world");
        }
    }
    ctx.config() = Json{{"world", evidence.id}, {"objects", args.objects}, {"free", args.free}};

    // Every open domain receives the constants the evidence mentions; --objects
    // adds to the first open domain.
    auto const& schema = model.schema;
    std::vector<std::vector<std::string>> open;
    bool extra_used = false;
    for (std::size_t d = 0; d < schema.domains().size(); ++d) {
        if (!schema.domain(d).open) {
            continue;
        }
        auto constants = evidence.constants_of(schema, d);
        if (!extra_used) {
            for (auto& c : split_list(args.objects)) {
                constants.push_back(std::move(c));
            }
            extra_used = true;
        }
        std::sort(constants.begin(), constants.end());
        constants.erase(std::unique(constants.begin(), constants.end()), constants.end());
        open.push_back(std::move(constants));
    }
    if (!extra_used && !args.objects.empty()) {
        throw UsageError("--objects given but the schema has no open domain");
    }
    GroundingTable const table(Universe(schema, std::move(open)), model.formulas);
    auto const& universe = table.universe();
    Assignment const clamped = universe.index(evidence);

    std::set<std::size_t> free_predicates;
    if (!args.free.empty()) {
        for (auto const& name : split_list(args.free)) {
            auto p = schema.find_predicate(name);
            if (!p) {
                throw ValidationError("unknown predicate '" + name + "' in --free");
            }
            free_predicates.insert(*p);
        }
    } else {
        for (std::size_t p = 0; p < schema.predicates().size(); ++p) {
            free_predicates.insert(p);
        }
        for (auto const& a : evidence.atoms) {
            free_predicates.erase(a.predicate);
        }
    }
    std::vector<AtomId> free;
    for (auto p : free_predicates) {
        auto const begin = universe.predicate_offset(p);
        for (std::size_t k = 0; k < universe.predicate_atom_count(p); ++k) {
            free.push_back(static_cast<AtomId>(begin + k));
        }
    }
    for (auto a : free) {
        if (clamped[a]) {
            throw ValidationError("evidence asserts free atom " + universe.atom_text(a));
        }
    }
    ctx.mark("ground");

    auto const result = enumerate(table, model.weights, free, clamped);
    ctx.mark("enumerate");

    std::string csv = "atom,probability\n";
    for (std::size_t j = 0; j < result.free_atoms.size(); ++j) {
        csv += "\"" + universe.atom_text(result.free_atoms[j]) + "\"," + format_g17(result.marginals[j]) + "\n";
    }
    ctx.diagnostics() = Json{{"free_atoms", free.size()}, {"log_z", result.log_z}};
    ctx.write_output(csv);
}

void cmd_eval_hausdorff(Context& ctx, EvalHausdorffArgs const& args)
{
    auto const records = parse_rect_csv(ctx.read_input("rects", args.rects));
    ctx.config() = Json{{"samples", args.samples}, {"directed", args.directed}};
    std::vector<std::string> unmatched;
    auto const scores = score_images(records, args.samples, !args.directed, &unmatched);
    ctx.mark("score");

    std::string csv = "image_id,d_h,ground_truths,predictions\n";
    std::vector<double> distances;
    for (auto const& s : scores) {
        csv += s.image_id + "," + format_g17(s.distance) + "," + std::to_string(s.ground_truths) + "," +
               std::to_string(s.predictions) + "\n";
        distances.push_back(s.distance);
    }
    Json summary;
    summary["images"] = scores.size();
    summary["unmatched"] = unmatched;
    if (!distances.empty()) {
        double sum = 0.0;
        std::size_t below_02 = 0;
        for (double d : distances) {
            sum += d;
            below_02 += d < 0.2 ? 1 : 0;
        }
        csv += "# images=" + std::to_string(distances.size());
        for (auto [name, q] : {std::pair{"min", 0.0}, {"q25", 0.25}, {"median", 0.5}, {"q75", 0.75}, {"max", 1.0}}) {
            double const v = quantile(distances, q);
            summary[name] = v;
            csv += std::string(" ") + name + "=" + format_fixed(v, 6);
        }
        double const mean = sum / static_cast<double>(distances.size());
        double const share = static_cast<double>(below_02) / static_cast<double>(distances.size());
        summary["mean"] = mean;
        summary["share_below_0.2"] = share;
        csv += " mean=" + format_fixed(mean, 6) + " share_below_0.2=" + format_fixed(share, 6) + "\n";
    }
    ctx.diagnostics() = std::move(summary);
    ctx.write_output(csv);
}

void cmd_eval_auc(Context& ctx, EvalAucArgs const& args)
{
    auto const text = ctx.read_input("scores", args.scores);
    std::map<std::string, std::vector<ScoredLabel>> scored;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string_view line(text.data() + start, end - start);
        start = end + 1;
        ++line_no;
        if (line.empty() || line == "\r" || line.front() == '#') {
            continue;
        }
        auto cells = split_csv_line(line);
        if (line_no == 1 && !cells.empty() && cells[0] == "affordance") {
            continue;
        }
        if (cells.size() != 3) {
            throw ParseError("expected affordance,score,label", line_no, 1);
        }
        ScoredLabel s;
        std::size_t used = 0;
        try {
            s.score = std::stod(cells[1], &used);
        } catch (std::exception const&) {
            used = 0;
        }
        if (used == 0 || used != cells[1].size()) {
            throw ParseError("bad score '" + cells[1] + "'", line_no, 1);
        }
        if (cells[2] == "1" || cells[2] == "true") {
            s.positive = true;
        } else if (cells[2] == "0" || cells[2] == "false") {
            s.positive = false;
        } else {
            throw ParseError("label must be 0/1 or true/false, got '" + cells[2] + "'", line_no, 1);
        }
        scored[cells[0]].push_back(s);
    }
    auto const report = mean_auc_per_affordance(scored);
    ctx.mark("score");

    Json out;
    Json per = Json::object();
    for (auto const& [name, value] : report.per_affordance) {
        per[name] = value;
    }
    out["per_affordance"] = std::move(per);
    out["skipped"] = report.skipped;
    out["mean"] = report.mean;
    ctx.diagnostics() = Json{{"affordances", report.per_affordance.size()}, {"skipped", report.skipped.size()}};
    ctx.write_output(out.dump(2) + "\n");
}

} // namespace graspkb::cli
