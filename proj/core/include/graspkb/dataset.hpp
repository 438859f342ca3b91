#pragma once

// Grasp-affordance corpora: ingest with optional full-scale profile check,
// object-level train/test split, and exact synthetic generation from a model.

#include "graspkb/logic.hpp"
#include "graspkb/model_io.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graspkb {

/// Minimum domain sizes of the full-scale profile.
struct DomainMinimum {
    std::string domain;
    std::size_t minimum;
};
[[nodiscard]] std::vector<DomainMinimum> const& full_scale_minima();

/// One line per problem: missing or undersized domains, and worlds that are
/// empty or do not describe exactly one object.
[[nodiscard]] std::vector<std::string> full_scale_issues(Schema const& schema, std::span<World const> worlds,
                                                            std::string_view object_domain = {});

enum class Split : std::uint8_t { train, test };

[[nodiscard]] std::string_view split_name(Split s) noexcept;

struct Corpus {
    Schema schema;
    std::vector<World> worlds;
    /// Aligned with worlds.
    std::vector<Split> splits;
    /// Split group of each world: its object constant, or `#<world id>` when
    /// the world does not name exactly one object.
    std::vector<std::string> groups;
    double ratio = 0.7;
    std::uint64_t seed = 0;

    [[nodiscard]] std::vector<World> select(Split s) const;
};

/// The schema's object domain: `name` when given, else the only open domain.
[[nodiscard]] std::size_t object_domain_index(Schema const& schema, std::string_view name = {});

/// Assigns splits by object. Objects are ranked by a hash of (seed, object)
/// and the first round(ratio * objects) go to train, so an object's side
/// does not depend on how many worlds it has.
void assign_split(Corpus& corpus, double ratio, std::uint64_t seed, std::string_view object_domain = {});

struct IngestOptions {
    bool full_scale_profile = false;
    double ratio = 0.7;
    std::uint64_t seed = 0;
    std::string object_domain;
};

/// Parses and splits a corpus; with full_scale_profile set, throws ValidationError
/// listing every profile issue.
[[nodiscard]] Corpus ingest(std::string_view schema_text, std::string_view worlds_text, IngestOptions const& options);

struct SynthOptions {
    std::size_t objects = 10;
    std::size_t worlds_per_object = 1;
    std::uint64_t seed = 0;
    double ratio = 0.7;
    std::string object_domain;
    std::string object_prefix = "obj";
};

/// Independent exact draws from the model's joint over every ground atom of
/// a one-object universe, object j using a seed derived from (seed, j).
/// Worlds are named w<object>_<k>. Throws ValidationError when a block has
/// more than 25 ground atoms.
[[nodiscard]] Corpus synthesize(Model const& model, SynthOptions const& options);

} // namespace graspkb
