#pragma once

// Synthetic labeled point clouds for tests, benchmarks and fixtures.

#include "graspkb/patches.hpp"

#include <cstdint>

namespace graspkb {

struct MugOptions {
    std::size_t body_points = 600;
    std::size_t rim_points = 300;
    std::size_t handle_points = 300;
    /// Gaussian noise per coordinate, meters.
    double noise = 0.0005;
    std::uint64_t seed = 0;
};

/// Upright mug standing on z = 0: rim (label 1), body wall (2) and a handle
/// loop on the +x side (3). Units are meters.
[[nodiscard]] PointCloud make_mug(MugOptions const& options);

/// Axis-aligned bounds of the generating part with the given label, padded
/// by three noise deviations.
struct Box {
    Vec3 lo;
    Vec3 hi;
    [[nodiscard]] bool contains(Vec3 const& p) const
    {
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }
};
[[nodiscard]] Box mug_part_bounds(int label, double noise);

/// n points uniform on a width x height rectangle in the plane through
/// `center` spanned by unit vectors u and v, plus Gaussian noise along u x v.
[[nodiscard]] std::vector<Vec3> make_plane_patch(Vec3 const& center, Vec3 const& u, Vec3 const& v, double width,
                                                 double height, std::size_t n, double noise, std::uint64_t seed);

/// Isotropic Gaussian blobs; label i for points of centers[i].
[[nodiscard]] PointCloud make_blobs(std::span<Vec3 const> centers, double sigma, std::size_t per_blob,
                                    std::uint64_t seed);

} // namespace graspkb
