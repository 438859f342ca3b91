#include "graspkb/logic.hpp"

#include "graspkb/error.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace graspkb {

std::optional<std::size_t> Domain::find(std::string_view constant) const
{
    auto const it = std::find(constants.begin(), constants.end(), constant);
    if (it == constants.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - constants.begin());
}

std::size_t Schema::add_domain(Domain domain)
{
    if (find_domain(domain.name)) {
        throw ValidationError("duplicate domain '" + domain.name + "'");
    }
    std::set<std::string_view> seen;
    for (auto const& c : domain.constants) {
        if (!seen.insert(c).second) {
            throw ValidationError("duplicate constant '" + c + "' in domain '" + domain.name + "'");
        }
    }
    if (domain.constants.empty()) {
        domain.open = true;
    }
    domains_.push_back(std::move(domain));
    return domains_.size() - 1;
}

std::size_t Schema::add_predicate(Predicate predicate)
{
    if (find_predicate(predicate.name)) {
        throw ValidationError("duplicate predicate '" + predicate.name + "'");
    }
    if (predicate.arg_domains.empty()) {
        throw ValidationError("predicate '" + predicate.name + "' has no arguments");
    }
    for (auto d : predicate.arg_domains) {
        if (d >= domains_.size()) {
            throw ValidationError("predicate '" + predicate.name + "' references an unknown domain");
        }
    }
    predicates_.push_back(std::move(predicate));
    return predicates_.size() - 1;
}

std::optional<std::size_t> Schema::find_domain(std::string_view name) const
{
    for (std::size_t i = 0; i < domains_.size(); ++i) {
        if (domains_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> Schema::find_predicate(std::string_view name) const
{
    for (std::size_t i = 0; i < predicates_.size(); ++i) {
        if (predicates_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::vector<std::string> World::constants_of(Schema const& schema, std::size_t domain) const
{
    std::set<std::string> found;
    for (auto const& atom : atoms) {
        auto const& pred = schema.predicate(atom.predicate);
        for (std::size_t k = 0; k < atom.args.size(); ++k) {
            if (pred.arg_domains[k] == domain) {
                found.insert(atom.args[k]);
            }
        }
    }
    return {found.begin(), found.end()};
}

Universe::Universe(Schema schema, std::vector<std::vector<std::string>> open_constants) : schema_(std::move(schema))
{
    std::size_t next_open = 0;
    for (auto const& d : schema_.domains()) {
        if (d.open) {
            if (next_open < open_constants.size()) {
                auto values = std::move(open_constants[next_open]);
                std::set<std::string_view> seen;
                for (auto const& v : values) {
                    if (!seen.insert(v).second) {
                        throw ValidationError("duplicate constant '" + v + "' for open domain '" + d.name + "'");
                    }
                }
                constants_.push_back(std::move(values));
            } else {
                constants_.emplace_back();
            }
            ++next_open;
        } else {
            constants_.push_back(d.constants);
        }
    }
    build_index();
}

Universe Universe::from_worlds(Schema schema, std::span<World const> worlds)
{
    std::vector<std::vector<std::string>> open;
    for (std::size_t d = 0; d < schema.domains().size(); ++d) {
        if (!schema.domain(d).open) {
            continue;
        }
        std::set<std::string> found;
        for (auto const& w : worlds) {
            for (auto& c : w.constants_of(schema, d)) {
                found.insert(std::move(c));
            }
        }
        open.emplace_back(found.begin(), found.end());
    }
    return Universe(std::move(schema), std::move(open));
}

Universe Universe::with_constants(Schema schema, std::string_view domain, std::vector<std::string> constants)
{
    std::vector<std::vector<std::string>> open;
    bool matched = false;
    for (auto const& d : schema.domains()) {
        if (!d.open) {
            continue;
        }
        if (d.name == domain) {
            open.push_back(std::move(constants));
            matched = true;
        } else {
            open.emplace_back();
        }
    }
    if (!matched) {
        throw ValidationError("no open domain named '" + std::string(domain) + "'");
    }
    return Universe(std::move(schema), std::move(open));
}

void Universe::build_index()
{
    offsets_.clear();
    std::uint64_t total = 0;
    for (auto const& p : schema_.predicates()) {
        offsets_.push_back(static_cast<AtomId>(total));
        std::uint64_t n = 1;
        for (auto d : p.arg_domains) {
            n *= constants_[d].size();
        }
        total += n;
        if (total > std::numeric_limits<AtomId>::max() / 2) {
            throw ValidationError("ground atom count exceeds index range");
        }
    }
    offsets_.push_back(static_cast<AtomId>(total));
    atom_count_ = static_cast<std::size_t>(total);
}

std::optional<std::size_t> Universe::find_constant(std::size_t domain, std::string_view name) const
{
    auto const& values = constants_.at(domain);
    auto const it = std::find(values.begin(), values.end(), name);
    if (it == values.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - values.begin());
}

std::size_t Universe::predicate_atom_count(std::size_t predicate) const
{
    return offsets_.at(predicate + 1) - offsets_.at(predicate);
}

AtomId Universe::atom_id(std::size_t predicate, std::span<std::size_t const> args) const
{
    auto const& p = schema_.predicate(predicate);
    std::size_t local = 0;
    for (std::size_t k = 0; k < args.size(); ++k) {
        local = local * constants_[p.arg_domains[k]].size() + args[k];
    }
    return offsets_[predicate] + static_cast<AtomId>(local);
}

std::optional<AtomId> Universe::find(SymbolicAtom const& atom) const
{
    if (atom.predicate >= schema_.predicates().size()) {
        return std::nullopt;
    }
    auto const& p = schema_.predicate(atom.predicate);
    if (atom.args.size() != p.arity()) {
        return std::nullopt;
    }
    std::vector<std::size_t> idx(atom.args.size());
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
        auto c = find_constant(p.arg_domains[k], atom.args[k]);
        if (!c) {
            return std::nullopt;
        }
        idx[k] = *c;
    }
    return atom_id(atom.predicate, idx);
}

Universe::Decoded Universe::decode(AtomId id) const
{
    if (id >= atom_count_) {
        throw std::out_of_range("atom id out of range");
    }
    auto const it = std::upper_bound(offsets_.begin(), offsets_.end(), id);
    std::size_t const pred = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    auto const& p = schema_.predicate(pred);
    std::size_t local = id - offsets_[pred];
    std::vector<std::size_t> args(p.arity());
    for (std::size_t k = p.arity(); k-- > 0;) {
        auto const n = constants_[p.arg_domains[k]].size();
        args[k] = local % n;
        local /= n;
    }
    return {pred, std::move(args)};
}

SymbolicAtom Universe::symbolic(AtomId id) const
{
    auto const d = decode(id);
    auto const& p = schema_.predicate(d.predicate);
    SymbolicAtom atom{d.predicate, {}};
    for (std::size_t k = 0; k < d.args.size(); ++k) {
        atom.args.push_back(constants_[p.arg_domains[k]][d.args[k]]);
    }
    return atom;
}

std::string Universe::atom_text(AtomId id) const { return graspkb::atom_text(schema_, symbolic(id)); }

Assignment Universe::index(World const& world) const
{
    Assignment truth(atom_count_, 0);
    for (auto const& atom : world.atoms) {
        auto const id = find(atom);
        if (!id) {
            throw ValidationError("world '" + world.id + "': atom " + graspkb::atom_text(schema_, atom) +
                                  " is outside the universe");
        }
        truth[*id] = 1;
    }
    return truth;
}

World Universe::to_world(std::string id, Assignment const& assignment) const
{
    World w{std::move(id), {}};
    for (AtomId a = 0; a < assignment.size(); ++a) {
        if (assignment[a] != 0) {
            w.atoms.push_back(symbolic(a));
        }
    }
    std::sort(w.atoms.begin(), w.atoms.end());
    return w;
}

namespace {

std::string term_text(Schema const& schema, Formula const& f, Atom const& atom, std::size_t k)
{
    auto const& t = atom.args[k];
    if (t.kind == Term::Kind::variable) {
        return f.variables.at(t.index).name;
    }
    auto const d = schema.predicate(atom.predicate).arg_domains[k];
    return schema.domain(d).constants.at(t.index);
}

std::string formula_atom_text(Schema const& schema, Formula const& f, Atom const& atom)
{
    std::string out = schema.predicate(atom.predicate).name + "(";
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
        if (k > 0) {
            out += ", ";
        }
        out += term_text(schema, f, atom, k);
    }
    return out + ")";
}

} // namespace

std::string formula_text(Schema const& schema, Formula const& formula)
{
    std::string out;
    for (std::size_t i = 0; i < formula.body.size(); ++i) {
        if (i > 0) {
            out += " ^ ";
        }
        out += formula_atom_text(schema, formula, formula.body[i]);
    }
    if (!formula.body.empty()) {
        out += " => ";
    }
    if (!formula.head_positive) {
        out += "!";
    }
    out += formula_atom_text(schema, formula, formula.head);
    return out;
}

std::string atom_text(Schema const& schema, SymbolicAtom const& atom)
{
    std::string out = schema.predicate(atom.predicate).name + "(";
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
        if (k > 0) {
            out += ", ";
        }
        out += atom.args[k];
    }
    return out + ")";
}

std::optional<std::string> single_constant(Schema const& schema, World const& world, std::size_t domain)
{
    auto values = world.constants_of(schema, domain);
    if (values.size() != 1) {
        return std::nullopt;
    }
    return values.front();
}

} // namespace graspkb
