#pragma once

// Evaluation metrics: Hausdorff distances between sampled point sets and
// rectangles, and ROC AUC via the Mann-Whitney statistic.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graspkb {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// max over a of min over b of |a - b|. Throws ValidationError on an empty set.
[[nodiscard]] double directed_hausdorff(std::span<Point2 const> a, std::span<Point2 const> b);

/// max(directed(a, b), directed(b, a)).
[[nodiscard]] double hausdorff(std::span<Point2 const> a, std::span<Point2 const> b);

/// Rotated rectangle, in units of the image diagonal; angle in radians.
struct RegionRect {
    double cx = 0.0;
    double cy = 0.0;
    double width = 0.0;
    double height = 0.0;
    double angle = 0.0;

    /// Throws ValidationError for non-positive or non-finite sizes.
    void validate() const;
};

/// samples_per_side points per side starting at each corner, 4 * k in all.
[[nodiscard]] std::vector<Point2> rect_perimeter(RegionRect const& rect, std::size_t samples_per_side);

[[nodiscard]] double rect_hausdorff(RegionRect const& a, RegionRect const& b, std::size_t samples_per_side = 64,
                                    bool symmetric = true);

struct ScoredLabel {
    double score = 0.0;
    bool positive = false;
};

/// Mann-Whitney statistic kept in integers: twice_u counts 2 per correctly
/// ordered (positive, negative) pair and 1 per tie.
struct RankSum {
    std::uint64_t twice_u = 0;
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;

    [[nodiscard]] double auc() const
    {
        return static_cast<double>(twice_u) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
    }
};

/// Throws ValidationError when a class is missing or a score is non-finite.
[[nodiscard]] RankSum rank_sum(std::span<ScoredLabel const> scored);
[[nodiscard]] double auc(std::span<ScoredLabel const> scored);

struct AucReport {
    std::map<std::string, double> per_affordance;
    /// Affordances without both classes.
    std::vector<std::string> skipped;
    double mean = 0.0;
};

/// Unweighted mean over the affordances that have both classes. Throws
/// ValidationError when none does.
[[nodiscard]] AucReport mean_auc_per_affordance(std::map<std::string, std::vector<ScoredLabel>> const& scored);

enum class RectRole : std::uint8_t { ground_truth, prediction };

struct RectRecord {
    std::string image_id;
    RectRole role = RectRole::ground_truth;
    /// Normalized by the image diagonal.
    RegionRect rect;
};

/// CSV rows `image_id,role,cx,cy,w,h,angle,image_width,image_height` with
/// role `gt` or `pred`, pixel units, angle in radians. A first line starting
/// with `image_id` is a header.
[[nodiscard]] std::vector<RectRecord> parse_rect_csv(std::string_view text);

struct ImageScore {
    std::string image_id;
    /// Smallest rect_hausdorff over (ground truth, prediction) pairs.
    double distance = 0.0;
    std::size_t ground_truths = 0;
    std::size_t predictions = 0;
};

/// Scores images with at least one rectangle of each role, in id order;
/// images missing a role are listed in `unmatched`.
[[nodiscard]] std::vector<ImageScore> score_images(std::span<RectRecord const> records, std::size_t samples_per_side,
                                                   bool symmetric, std::vector<std::string>* unmatched = nullptr);

/// Linear-interpolation quantile of unsorted values, q in [0, 1].
[[nodiscard]] double quantile(std::vector<double> values, double q);

} // namespace graspkb
