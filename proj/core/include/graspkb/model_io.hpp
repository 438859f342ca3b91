#pragma once

// Weighted model and its `.kbm` text format:
//
//   kbm 1
//   schema_hash <TAB> <16 hex>
//   rules_hash <TAB> <16 hex>
//   schema <TAB> <one schema declaration>      (repeated)
//   <index> <TAB> <formula text> <TAB> <weight, 17 significant digits>
//
// The embedded schema lets a model be queried without the original files.

#include "graspkb/logic.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace graspkb {

struct Model {
    Schema schema;
    std::vector<Formula> formulas;
    std::vector<double> weights;
    std::string schema_hash;
    std::string rules_hash;

    /// Formulas paired with their weights as fixed-weight rules.
    [[nodiscard]] std::vector<Rule> rules() const;
};

/// Model from rules that all carry weights; throws ValidationError otherwise.
[[nodiscard]] Model model_from_weighted_rules(Schema schema, std::vector<Rule> const& rules);

[[nodiscard]] std::string write_model(Model const& model);
[[nodiscard]] Model read_model(std::string_view text);

} // namespace graspkb
