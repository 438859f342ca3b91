#pragma once

// Readers and writers for the knowledge-base text formats.
//
//   schema (.kbs)   domain <name> = { c1, c2, ... }      ({} declares an open domain)
//                   predicate <name>(<domain>, ...)
//   rules  (.kbr)   <atom> ^ <atom> ... => [!]<atom> [@ <weight>]
//                   a bare [!]<atom> [@ <weight>] is a rule with an empty body;
//                   an argument written +v expands the rule once per constant of v's domain
//   worlds (.kbw)   world <id>, then one ground atom per line; a blank line ends the block
//
// `#` starts a comment everywhere. Identifiers are ASCII letters, digits and
// underscores, case-sensitive. Errors are ParseError (syntax, with position)
// or ValidationError-derived messages rethrown as ParseError with the line.

#include "graspkb/logic.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graspkb {

[[nodiscard]] Schema parse_schema(std::string_view text);
[[nodiscard]] std::vector<Rule> parse_rules(std::string_view text, Schema const& schema);
[[nodiscard]] std::vector<World> parse_worlds(std::string_view text, Schema const& schema);

/// Parses one ground atom such as `hasShape(cup1, cylindrical)`.
[[nodiscard]] SymbolicAtom parse_ground_atom(std::string_view text, Schema const& schema);

/// Parses one formula line with variables typed against `schema`. `+`
/// expansion is not allowed here.
[[nodiscard]] Formula parse_formula(std::string_view text, Schema const& schema);

[[nodiscard]] std::string write_schema(Schema const& schema);
[[nodiscard]] std::string write_rules(Schema const& schema, std::span<Rule const> rules);
[[nodiscard]] std::string write_worlds(Schema const& schema, std::span<World const> worlds);

/// Formats a weight with 17 significant digits.
[[nodiscard]] std::string format_weight(double w);

} // namespace graspkb
