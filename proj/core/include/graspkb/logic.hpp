#pragma once

// Function-free first-order language: domains, predicates, atoms,
// implication formulas, evidence worlds and the ground-atom index.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graspkb {

using AtomId = std::uint32_t;

/// Truth value per ground atom, indexed by AtomId.
using Assignment = std::vector<std::uint8_t>;

struct Domain {
    std::string name;
    /// Empty for an open domain, whose constants are harvested from worlds.
    std::vector<std::string> constants;
    bool open = false;

    [[nodiscard]] std::optional<std::size_t> find(std::string_view constant) const;

    friend bool operator==(Domain const&, Domain const&) = default;
};

struct Predicate {
    std::string name;
    std::vector<std::size_t> arg_domains;

    [[nodiscard]] std::size_t arity() const noexcept { return arg_domains.size(); }

    friend bool operator==(Predicate const&, Predicate const&) = default;
};

class Schema {
  public:
    Schema() = default;

    /// Throws ValidationError on duplicate names or duplicate constants.
    std::size_t add_domain(Domain domain);
    /// Throws ValidationError on duplicate name or unknown domain index.
    std::size_t add_predicate(Predicate predicate);

    [[nodiscard]] std::span<Domain const> domains() const noexcept { return domains_; }
    [[nodiscard]] std::span<Predicate const> predicates() const noexcept { return predicates_; }
    [[nodiscard]] Domain const& domain(std::size_t i) const { return domains_.at(i); }
    [[nodiscard]] Predicate const& predicate(std::size_t i) const { return predicates_.at(i); }

    [[nodiscard]] std::optional<std::size_t> find_domain(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> find_predicate(std::string_view name) const;

    [[nodiscard]] bool empty() const noexcept { return domains_.empty() && predicates_.empty(); }

    friend bool operator==(Schema const&, Schema const&) = default;

  private:
    std::vector<Domain> domains_;
    std::vector<Predicate> predicates_;
};

struct Variable {
    std::string name;
    std::size_t domain = 0;

    friend bool operator==(Variable const&, Variable const&) = default;
};

/// Atom argument: a formula variable or a constant of the argument's domain.
struct Term {
    enum class Kind : std::uint8_t { variable, constant };
    Kind kind = Kind::variable;
    /// Index into Formula::variables or into the domain's constant list.
    std::size_t index = 0;

    friend bool operator==(Term const&, Term const&) = default;
};

struct Atom {
    std::size_t predicate = 0;
    std::vector<Term> args;

    friend bool operator==(Atom const&, Atom const&) = default;
};

/// body_1 ^ ... ^ body_k => [!]head, free variables universally quantified.
struct Formula {
    std::vector<Atom> body;
    Atom head;
    bool head_positive = true;
    std::vector<Variable> variables;

    friend bool operator==(Formula const&, Formula const&) = default;
};

/// A rule as read from a rules file; a present weight is held fixed.
struct Rule {
    Formula formula;
    std::optional<double> weight;

    friend bool operator==(Rule const&, Rule const&) = default;
};

/// Ground atom by name, independent of any universe.
struct SymbolicAtom {
    std::size_t predicate = 0;
    std::vector<std::string> args;

    friend auto operator<=>(SymbolicAtom const&, SymbolicAtom const&) = default;
    friend bool operator==(SymbolicAtom const&, SymbolicAtom const&) = default;
};

/// Closed-world evidence: atoms not listed are false.
struct World {
    std::string id;
    /// Sorted, no duplicates.
    std::vector<SymbolicAtom> atoms;

    /// Distinct constants of `domain` mentioned by this world, sorted.
    [[nodiscard]] std::vector<std::string> constants_of(Schema const& schema, std::size_t domain) const;

    friend bool operator==(World const&, World const&) = default;
};

/// A schema with every domain populated: closed domains keep their declared
/// constants, open domains receive an explicit constant list. Owns the
/// bijection between ground atoms and 0..atom_count()-1.
class Universe {
  public:
    Universe() = default;

    /// `open_constants[k]` fills the k-th open domain in declaration order.
    Universe(Schema schema, std::vector<std::vector<std::string>> open_constants);

    /// Open domains harvested from the given worlds (sorted, deduplicated).
    static Universe from_worlds(Schema schema, std::span<World const> worlds);

    /// Open domain named `domain` receives `constants`; other open domains stay empty.
    static Universe with_constants(Schema schema, std::string_view domain, std::vector<std::string> constants);

    [[nodiscard]] Schema const& schema() const noexcept { return schema_; }
    [[nodiscard]] std::span<std::string const> constants(std::size_t domain) const { return constants_.at(domain); }
    [[nodiscard]] std::size_t domain_size(std::size_t domain) const { return constants_.at(domain).size(); }
    [[nodiscard]] std::optional<std::size_t> find_constant(std::size_t domain, std::string_view name) const;

    [[nodiscard]] std::size_t atom_count() const noexcept { return atom_count_; }

    /// Atoms of predicate p occupy [predicate_offset(p), predicate_offset(p+1)).
    [[nodiscard]] AtomId predicate_offset(std::size_t predicate) const { return offsets_.at(predicate); }
    [[nodiscard]] std::size_t predicate_atom_count(std::size_t predicate) const;

    /// Row-major over argument constant indices (first argument most significant).
    [[nodiscard]] AtomId atom_id(std::size_t predicate, std::span<std::size_t const> args) const;
    [[nodiscard]] std::optional<AtomId> find(SymbolicAtom const& atom) const;

    struct Decoded {
        std::size_t predicate;
        std::vector<std::size_t> args;
    };
    [[nodiscard]] Decoded decode(AtomId id) const;
    [[nodiscard]] SymbolicAtom symbolic(AtomId id) const;
    [[nodiscard]] std::string atom_text(AtomId id) const;

    /// Truth vector of a world; throws ValidationError when an atom names a
    /// constant missing from this universe.
    [[nodiscard]] Assignment index(World const& world) const;

    /// World listing the true atoms of `assignment`.
    [[nodiscard]] World to_world(std::string id, Assignment const& assignment) const;

  private:
    void build_index();

    Schema schema_;
    std::vector<std::vector<std::string>> constants_;
    std::vector<AtomId> offsets_;
    std::size_t atom_count_ = 0;
};

/// Canonical text for a formula, e.g. `a(o, x) ^ b(o) => !c(o, x)`.
[[nodiscard]] std::string formula_text(Schema const& schema, Formula const& formula);
[[nodiscard]] std::string atom_text(Schema const& schema, SymbolicAtom const& atom);

/// Object constant referenced by a world when it mentions exactly one
/// constant of `domain`.
[[nodiscard]] std::optional<std::string> single_constant(Schema const& schema, World const& world, std::size_t domain);

} // namespace graspkb
