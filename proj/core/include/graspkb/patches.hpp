#pragma once

// Grasp patches on 3-D points: k-means clustering into regions, dominant
// plane per patch, and the resulting grasp pose.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace graspkb {

using Vec3 = Eigen::Vector3d;

struct PointCloud {
    std::vector<Vec3> points;
    /// Ground-truth region label per point, or empty.
    std::vector<int> labels;

    [[nodiscard]] bool labeled() const noexcept { return !labels.empty(); }
    /// Throws ValidationError on non-finite coordinates or a label count mismatch.
    void validate() const;
};

struct KMeansOptions {
    std::size_t restarts = 20;
    std::size_t max_iterations = 300;
};

struct KMeansResult {
    std::vector<std::size_t> assignment;
    std::vector<Vec3> centers;
    double inertia = 0.0;
    std::size_t restart = 0;
    /// Inertia after each Lloyd iteration of the winning restart.
    std::vector<double> inertia_trace;
};

/// k-means++ seeding then Lloyd iterations; the restart with the lowest
/// inertia wins (earlier restart on ties). Throws ValidationError when there
/// are fewer distinct points than k.
[[nodiscard]] KMeansResult kmeans(std::span<Vec3 const> points, std::size_t k, std::uint64_t seed,
                                  KMeansOptions const& options = {});

struct Plane {
    Vec3 centroid = Vec3::Zero();
    /// Unit normal, smallest-variance direction.
    Vec3 normal = Vec3::UnitZ();
    /// Unit largest-variance direction, in the plane.
    Vec3 major_axis = Vec3::UnitX();
    /// Angle of major_axis from world +x (projected into the plane), about
    /// the normal, in [-pi, pi).
    double gamma = 0.0;
    /// RMS point-to-plane distance.
    double residual = 0.0;
};

/// Least-squares plane. The normal points away from `reference` (the full
/// cloud centroid); when the patch centroid is too close to tell, the sign
/// follows the skewness of the offsets along the normal, then +z. The major
/// axis sign follows the skewness of the in-plane spread, then the direction
/// away from `reference`, then +x. Throws ValidationError for fewer than 3
/// points or collinear input.
[[nodiscard]] Plane fit_dominant_plane(std::span<Vec3 const> points, Vec3 const& reference);

struct GraspPatch {
    std::string label;
    std::vector<std::size_t> members;
    /// Only the centroid is meaningful when `fitted` is false.
    Plane plane;
    bool fitted = false;
    /// Why the plane fit failed, when it did.
    std::string fit_error;
};

struct GraspPose {
    std::string label;
    Vec3 position = Vec3::Zero();
    /// Tool z along -normal, tool x along the major axis.
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
    double residual = 0.0;
};

/// Clusters the cloud into n patches and fits each; a patch whose plane
/// cannot be fitted keeps its centroid and records the reason. Labeled clouds name each
/// cluster after the ground-truth label it overlaps most (one-to-one, maximal
/// total overlap); unlabeled clouds number clusters "1".."n" by ascending
/// centroid height. Patches are returned in label order.
[[nodiscard]] std::vector<GraspPatch> cluster_patches(PointCloud const& cloud, std::size_t n, std::uint64_t seed,
                                                      KMeansOptions const& options = {});

/// Throws ValidationError when the patch has no fitted plane.
[[nodiscard]] GraspPose extract_grasp_pose(GraspPatch const& patch);

/// Patch with the given label; throws ValidationError listing the labels when absent.
[[nodiscard]] GraspPatch const& find_patch(std::span<GraspPatch const> patches, std::string const& label);

} // namespace graspkb
