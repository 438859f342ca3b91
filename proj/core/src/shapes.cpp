#include "graspkb/shapes.hpp"

#include "graspkb/error.hpp"
#include "graspkb/random.hpp"

#include <cmath>

namespace graspkb {

namespace {

constexpr double pi = 3.14159265358979323846;

// Mug dimensions, meters.
constexpr double radius = 0.04;
constexpr double body_top = 0.075;
constexpr double rim_bottom = 0.085;
constexpr double rim_top = 0.1;
constexpr double handle_center_x = radius + 0.005;
constexpr double handle_center_z = 0.04;
constexpr double handle_major = 0.025;
constexpr double handle_tube = 0.006;

Vec3 jitter(Rng& rng, double noise)
{
    return Vec3(rng.normal(), rng.normal(), rng.normal()) * noise;
}

} // namespace

PointCloud make_mug(MugOptions const& options)
{
    Rng rng(options.seed);
    PointCloud cloud;
    auto add = [&](Vec3 const& p, int label) {
        cloud.points.push_back(p + jitter(rng, options.noise));
        cloud.labels.push_back(label);
    };
    for (std::size_t i = 0; i < options.rim_points; ++i) {
        double const t = rng.uniform(0.0, 2.0 * pi);
        add(Vec3(radius * std::cos(t), radius * std::sin(t), rng.uniform(rim_bottom, rim_top)), 1);
    }
    for (std::size_t i = 0; i < options.body_points; ++i) {
        double const t = rng.uniform(0.0, 2.0 * pi);
        add(Vec3(radius * std::cos(t), radius * std::sin(t), rng.uniform(0.0, body_top)), 2);
    }
    for (std::size_t i = 0; i < options.handle_points; ++i) {
        // Outer half of a torus in the xz-plane.
        double const a = rng.uniform(-pi / 2.0, pi / 2.0);
        double const b = rng.uniform(0.0, 2.0 * pi);
        double const ring = handle_major + handle_tube * std::cos(b);
        add(Vec3(handle_center_x + ring * std::cos(a), handle_tube * std::sin(b), handle_center_z + ring * std::sin(a)),
            3);
    }
    return cloud;
}

Box mug_part_bounds(int label, double noise)
{
    Vec3 const pad = Vec3::Constant(3.0 * noise);
    switch (label) {
    case 1:
        return {Vec3(-radius, -radius, rim_bottom) - pad, Vec3(radius, radius, rim_top) + pad};
    case 2:
        return {Vec3(-radius, -radius, 0.0) - pad, Vec3(radius, radius, body_top) + pad};
    case 3: {
        double const outer = handle_major + handle_tube;
        return {Vec3(handle_center_x, -handle_tube, handle_center_z - outer) - pad,
                Vec3(handle_center_x + outer, handle_tube, handle_center_z + outer) + pad};
    }
    default:
        throw ValidationError("mug parts are labeled 1..3");
    }
}

std::vector<Vec3> make_plane_patch(Vec3 const& center, Vec3 const& u, Vec3 const& v, double width, double height,
                                   std::size_t n, double noise, std::uint64_t seed)
{
    Rng rng(seed);
    Vec3 const normal = u.cross(v).normalized();
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double const a = rng.uniform(-0.5, 0.5) * width;
        double const b = rng.uniform(-0.5, 0.5) * height;
        double const e = noise > 0.0 ? rng.normal() * noise : 0.0;
        out.push_back(center + a * u + b * v + e * normal);
    }
    return out;
}

PointCloud make_blobs(std::span<Vec3 const> centers, double sigma, std::size_t per_blob, std::uint64_t seed)
{
    Rng rng(seed);
    PointCloud cloud;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            cloud.points.push_back(centers[c] + jitter(rng, sigma));
            cloud.labels.push_back(static_cast<int>(c));
        }
    }
    return cloud;
}

} // namespace graspkb
