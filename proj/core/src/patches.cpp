#include "graspkb/patches.hpp"

#include "graspkb/error.hpp"
#include "graspkb/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace graspkb {

void PointCloud::validate() const
{
    for (auto const& p : points) {
        if (!p.allFinite()) {
            throw ValidationError("point cloud has a non-finite coordinate");
        }
    }
    if (!labels.empty() && labels.size() != points.size()) {
        throw ValidationError("point cloud label count does not match point count");
    }
}

namespace {

struct Lloyd {
    std::vector<std::size_t> assignment;
    std::vector<Vec3> centers;
    double inertia = 0.0;
    std::vector<double> trace;
};

std::size_t nearest(std::vector<Vec3> const& centers, Vec3 const& p, double& dist2)
{
    std::size_t best = 0;
    dist2 = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        double const d = (p - centers[c]).squaredNorm();
        if (d < dist2) {
            dist2 = d;
            best = c;
        }
    }
    return best;
}

std::vector<Vec3> seed_plus_plus(std::span<Vec3 const> points, std::size_t k, Rng& rng)
{
    std::vector<Vec3> centers{points[rng.below(points.size())]};
    std::vector<double> d2(points.size());
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double d = 0.0;
            (void)nearest(centers, points[i], d);
            d2[i] = d;
            total += d;
        }
        double target = rng.uniform() * total;
        std::size_t pick = points.size();
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (d2[i] <= 0.0) {
                continue;
            }
            pick = i;
            target -= d2[i];
            if (target < 0.0) {
                break;
            }
        }
        centers.push_back(points[pick]);
    }
    return centers;
}

Lloyd run_lloyd(std::span<Vec3 const> points, std::vector<Vec3> centers, std::size_t max_iterations)
{
    Lloyd out;
    auto const k = centers.size();
    out.assignment.assign(points.size(), k);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double d = 0.0;
            auto const c = nearest(centers, points[i], d);
            inertia += d;
            if (c != out.assignment[i]) {
                out.assignment[i] = c;
                changed = true;
            }
        }
        out.trace.push_back(inertia);
        out.inertia = inertia;
        if (!changed) {
            break;
        }
        std::vector<Vec3> sums(k, Vec3::Zero());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            sums[out.assignment[i]] += points[i];
            ++counts[out.assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            // An emptied cluster keeps its old center.
            if (counts[c] > 0) {
                centers[c] = sums[c] / static_cast<double>(counts[c]);
            }
        }
    }
    out.centers = std::move(centers);
    return out;
}

double sign_or_zero(double v, double scale)
{
    if (std::abs(v) <= 1e-9 * scale) {
        return 0.0;
    }
    return v > 0.0 ? 1.0 : -1.0;
}

double choose_sign(std::initializer_list<double> candidates)
{
    for (double s : candidates) {
        if (s != 0.0) {
            return s;
        }
    }
    return 1.0;
}

double third_moment(std::span<Vec3 const> points, Vec3 const& centroid, Vec3 const& dir)
{
    double m = 0.0;
    for (auto const& p : points) {
        double const d = (p - centroid).dot(dir);
        m += d * d * d;
    }
    return m / static_cast<double>(points.size());
}

double wrap_angle(double a)
{
    // Into [-pi, pi).
    constexpr double pi = 3.14159265358979323846;
    a = std::remainder(a, 2.0 * pi);
    return a >= pi ? a - 2.0 * pi : a;
}

} // namespace

KMeansResult kmeans(std::span<Vec3 const> points, std::size_t k, std::uint64_t seed, KMeansOptions const& options)
{
    if (k == 0) {
        throw ValidationError("k-means needs at least one cluster");
    }
    if (points.size() < k) {
        throw ValidationError("k-means needs at least as many points as clusters");
    }
    {
        std::set<std::array<double, 3>> distinct;
        for (auto const& p : points) {
            distinct.insert({p.x(), p.y(), p.z()});
            if (distinct.size() >= k) {
                break;
            }
        }
        if (distinct.size() < k) {
            throw ValidationError("degenerate point cloud: fewer distinct points than clusters");
        }
    }
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    auto const restarts = std::max<std::size_t>(options.restarts, 1);
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, r));
        auto lloyd = run_lloyd(points, seed_plus_plus(points, k, rng), options.max_iterations);
        if (lloyd.inertia < best.inertia) {
            best.assignment = std::move(lloyd.assignment);
            best.centers = std::move(lloyd.centers);
            best.inertia = lloyd.inertia;
            best.inertia_trace = std::move(lloyd.trace);
            best.restart = r;
        }
    }
    return best;
}

Plane fit_dominant_plane(std::span<Vec3 const> points, Vec3 const& reference)
{
    if (points.size() < 3) {
        throw ValidationError("plane fit needs at least 3 points");
    }
    Plane plane;
    for (auto const& p : points) {
        plane.centroid += p;
    }
    plane.centroid /= static_cast<double>(points.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto const& p : points) {
        Vec3 const d = p - plane.centroid;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(points.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw NumericError("plane fit eigen-decomposition failed");
    }
    auto const& values = solver.eigenvalues();
    if (!(values(2) > 0.0) || values(1) <= 1e-12 * values(2)) {
        throw ValidationError("plane fit input is collinear or degenerate");
    }
    Vec3 normal = solver.eigenvectors().col(0).normalized();
    Vec3 axis = solver.eigenvectors().col(2).normalized();

    double const scale = std::sqrt(values(2));
    Vec3 const offset = plane.centroid - reference;
    normal *= choose_sign({sign_or_zero(offset.dot(normal), scale),
                           sign_or_zero(third_moment(points, plane.centroid, normal), values(2) * scale),
                           sign_or_zero(normal.z(), 1.0), sign_or_zero(normal.y(), 1.0)});
    axis *= choose_sign({sign_or_zero(third_moment(points, plane.centroid, axis), values(2) * scale),
                         sign_or_zero(offset.dot(axis), scale), sign_or_zero(axis.x(), 1.0),
                         sign_or_zero(axis.y(), 1.0)});
    // Keep the axis exactly orthogonal to the normal.
    axis = (axis - axis.dot(normal) * normal).normalized();
    plane.normal = normal;
    plane.major_axis = axis;

    Vec3 datum = Vec3::UnitX() - normal.x() * normal;
    if (datum.norm() < 1e-6) {
        datum = Vec3::UnitY() - normal.y() * normal;
    }
    datum.normalize();
    plane.gamma = wrap_angle(std::atan2(datum.cross(axis).dot(normal), datum.dot(axis)));

    double ss = 0.0;
    for (auto const& p : points) {
        double const d = (p - plane.centroid).dot(normal);
        ss += d * d;
    }
    plane.residual = std::sqrt(ss / static_cast<double>(points.size()));
    return plane;
}

std::vector<GraspPatch> cluster_patches(PointCloud const& cloud, std::size_t n, std::uint64_t seed,
                                        KMeansOptions const& options)
{
    cloud.validate();
    if (n == 0) {
        throw ValidationError("at least one region is required");
    }
    auto const km = kmeans(cloud.points, n, seed, options);

    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        members[km.assignment[i]].push_back(i);
    }
    for (auto const& m : members) {
        if (m.empty()) {
            throw NumericError("k-means left a cluster empty");
        }
    }

    std::vector<std::string> names(n);
    if (cloud.labeled()) {
        std::vector<int> labels(cloud.labels.begin(), cloud.labels.end());
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        if (labels.size() != n) {
            throw ValidationError("cloud carries " + std::to_string(labels.size()) + " labels but " +
                                  std::to_string(n) + " regions were requested");
        }
        std::vector<std::vector<long>> overlap(n, std::vector<long>(n, 0));
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            auto const l = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), cloud.labels[i]) -
                                                    labels.begin());
            ++overlap[km.assignment[i]][l];
        }
        // Exhaustive for small n, greedy beyond.
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::vector<std::size_t> best = perm;
        if (n <= 8) {
            long best_score = -1;
            do {
                long score = 0;
                for (std::size_t c = 0; c < n; ++c) {
                    score += overlap[c][perm[c]];
                }
                if (score > best_score) {
                    best_score = score;
                    best = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        } else {
            std::vector<bool> used_c(n, false);
            std::vector<bool> used_l(n, false);
            for (std::size_t round = 0; round < n; ++round) {
                long top = -1;
                std::size_t bc = 0;
                std::size_t bl = 0;
                for (std::size_t c = 0; c < n; ++c) {
                    for (std::size_t l = 0; l < n; ++l) {
                        if (!used_c[c] && !used_l[l] && overlap[c][l] > top) {
                            top = overlap[c][l];
                            bc = c;
                            bl = l;
                        }
                    }
                }
                used_c[bc] = used_l[bl] = true;
                best[bc] = bl;
            }
        }
        for (std::size_t c = 0; c < n; ++c) {
            names[c] = std::to_string(labels[best[c]]);
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return km.centers[a].z() < km.centers[b].z(); });
        for (std::size_t rank = 0; rank < n; ++rank) {
            names[order[rank]] = std::to_string(rank + 1);
        }
    }

    Vec3 reference = Vec3::Zero();
    for (auto const& p : cloud.points) {
        reference += p;
    }
    reference /= static_cast<double>(cloud.points.size());

    std::vector<GraspPatch> patches;
    for (std::size_t c = 0; c < n; ++c) {
        GraspPatch patch;
        patch.label = names[c];
        patch.members = members[c];
        std::vector<Vec3> pts;
        pts.reserve(patch.members.size());
        for (auto i : patch.members) {
            pts.push_back(cloud.points[i]);
        }
        try {
            patch.plane = fit_dominant_plane(pts, reference);
            patch.fitted = true;
        } catch (ValidationError const& e) {
            patch.fit_error = e.what();
            patch.plane.centroid = Vec3::Zero();
            for (auto const& p : pts) {
                patch.plane.centroid += p;
            }
            patch.plane.centroid /= static_cast<double>(pts.size());
        }
        patches.push_back(std::move(patch));
    }
    std::sort(patches.begin(), patches.end(), [](auto const& a, auto const& b) {
        if (a.label.size() != b.label.size()) {
            return a.label.size() < b.label.size();
        }
        return a.label < b.label;
    });
    return patches;
}

GraspPose extract_grasp_pose(GraspPatch const& patch)
{
    if (!patch.fitted) {
        throw ValidationError("patch " + patch.label + " has no grasp pose: " + patch.fit_error);
    }
    Vec3 const z = -patch.plane.normal;
    Vec3 const x = patch.plane.major_axis;
    Vec3 const y = z.cross(x);
    Eigen::Matrix3d rot;
    rot.col(0) = x;
    rot.col(1) = y;
    rot.col(2) = z;
    GraspPose pose;
    pose.label = patch.label;
    pose.position = patch.plane.centroid;
    pose.orientation = Eigen::Quaterniond(rot).normalized();
    // Canonical sign: w >= 0.
    if (pose.orientation.w() < 0.0) {
        pose.orientation.coeffs() *= -1.0;
    }
    pose.residual = patch.plane.residual;
    return pose;
}

GraspPatch const& find_patch(std::span<GraspPatch const> patches, std::string const& label)
{
    for (auto const& p : patches) {
        if (p.label == label) {
            return p;
        }
    }
    std::string names;
    for (auto const& p : patches) {
        names += names.empty() ? p.label : ", " + p.label;
    }
    throw ValidationError("no patch labeled '" + label + "'; available: " + names);
}

} // namespace graspkb
