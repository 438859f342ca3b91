#include "graspkb/metrics.hpp"

#include "graspkb/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace graspkb {

namespace {

double squared(Point2 const& a, Point2 const& b)
{
    double const dx = a.x - b.x;
    double const dy = a.y - b.y;
    return dx * dx + dy * dy;
}

double directed_squared(std::span<Point2 const> a, std::span<Point2 const> b)
{
    double worst = 0.0;
    for (auto const& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (auto const& q : b) {
            double const d = squared(p, q);
            if (d < best) {
                best = d;
                // p cannot raise the maximum any more.
                if (best <= worst) {
                    break;
                }
            }
        }
        worst = std::max(worst, best);
    }
    return worst;
}

void require_points(std::span<Point2 const> a, std::span<Point2 const> b)
{
    if (a.empty() || b.empty()) {
        throw ValidationError("Hausdorff distance needs two non-empty point sets");
    }
}

double number(std::string_view s, std::size_t line)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError("bad number '" + std::string(s) + "'", line, 1);
    }
    return v;
}

std::string trimmed(std::string_view s)
{
    auto const b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    auto const e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

double directed_hausdorff(std::span<Point2 const> a, std::span<Point2 const> b)
{
    require_points(a, b);
    return std::sqrt(directed_squared(a, b));
}

double hausdorff(std::span<Point2 const> a, std::span<Point2 const> b)
{
    require_points(a, b);
    return std::sqrt(std::max(directed_squared(a, b), directed_squared(b, a)));
}

void RegionRect::validate() const
{
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height) ||
        !std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(angle)) {
        throw ValidationError("degenerate rectangle: sizes must be positive and finite");
    }
}

std::vector<Point2> rect_perimeter(RegionRect const& rect, std::size_t samples_per_side)
{
    rect.validate();
    if (samples_per_side < 2) {
        throw ValidationError("rectangle sampling needs at least 2 samples per side");
    }
    double const c = std::cos(rect.angle);
    double const s = std::sin(rect.angle);
    double const hw = rect.width / 2.0;
    double const hh = rect.height / 2.0;
    Point2 const local[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    Point2 corners[4];
    for (int i = 0; i < 4; ++i) {
        corners[i] = {rect.cx + c * local[i].x - s * local[i].y, rect.cy + s * local[i].x + c * local[i].y};
    }
    std::vector<Point2> out;
    out.reserve(4 * samples_per_side);
    auto const k = static_cast<double>(samples_per_side);
    for (int side = 0; side < 4; ++side) {
        auto const& p = corners[side];
        auto const& q = corners[(side + 1) % 4];
        for (std::size_t j = 0; j < samples_per_side; ++j) {
            double const t = static_cast<double>(j) / k;
            out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
    }
    return out;
}

double rect_hausdorff(RegionRect const& a, RegionRect const& b, std::size_t samples_per_side, bool symmetric)
{
    auto const pa = rect_perimeter(a, samples_per_side);
    auto const pb = rect_perimeter(b, samples_per_side);
    return symmetric ? hausdorff(pa, pb) : directed_hausdorff(pa, pb);
}

RankSum rank_sum(std::span<ScoredLabel const> scored)
{
    std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
    for (auto const& s : sorted) {
        if (!std::isfinite(s.score)) {
            throw ValidationError("AUC scores must be finite");
        }
    }
    std::sort(sorted.begin(), sorted.end(), [](auto const& a, auto const& b) { return a.score < b.score; });
    RankSum out;
    std::uint64_t negatives_below = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            (sorted[j].positive ? pos : neg) += 1;
            ++j;
        }
        out.twice_u += pos * (2 * negatives_below + neg);
        out.positives += pos;
        out.negatives += neg;
        negatives_below += neg;
        i = j;
    }
    if (out.positives == 0 || out.negatives == 0) {
        throw ValidationError("AUC needs at least one positive and one negative");
    }
    return out;
}

double auc(std::span<ScoredLabel const> scored)
{
    return rank_sum(scored).auc();
}

AucReport mean_auc_per_affordance(std::map<std::string, std::vector<ScoredLabel>> const& scored)
{
    AucReport report;
    double total = 0.0;
    for (auto const& [name, labels] : scored) {
        bool const has_pos = std::any_of(labels.begin(), labels.end(), [](auto const& s) { return s.positive; });
        bool const has_neg = std::any_of(labels.begin(), labels.end(), [](auto const& s) { return !s.positive; });
        if (!has_pos || !has_neg) {
            report.skipped.push_back(name);
            continue;
        }
        double const a = auc(labels);
        report.per_affordance[name] = a;
        total += a;
    }
    if (report.per_affordance.empty()) {
        throw ValidationError("no affordance has both positive and negative examples");
    }
    report.mean = total / static_cast<double>(report.per_affordance.size());
    return report;
}

std::vector<RectRecord> parse_rect_csv(std::string_view text)
{
    std::vector<RectRecord> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto const nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (trimmed(line).empty() || trimmed(line).front() == '#') {
            continue;
        }
        if (out.empty() && trimmed(line).starts_with("image_id")) {
            continue;
        }
        std::vector<std::string_view> f;
        std::size_t start = 0;
        for (;;) {
            auto const comma = line.find(',', start);
            f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (f.size() != 9) {
            throw ParseError("expected 9 columns: image_id,role,cx,cy,w,h,angle,image_width,image_height", line_no,
                             1);
        }
        RectRecord r;
        r.image_id = trimmed(f[0]);
        auto const role = trimmed(f[1]);
        if (role == "gt") {
            r.role = RectRole::ground_truth;
        } else if (role == "pred") {
            r.role = RectRole::prediction;
        } else {
            throw ParseError("role must be 'gt' or 'pred'", line_no, 1);
        }
        double const iw = number(f[7], line_no);
        double const ih = number(f[8], line_no);
        if (!(iw > 0.0) || !(ih > 0.0)) {
            throw ParseError("image size must be positive", line_no, 1);
        }
        double const diag = std::hypot(iw, ih);
        r.rect = {number(f[2], line_no) / diag, number(f[3], line_no) / diag, number(f[4], line_no) / diag,
                  number(f[5], line_no) / diag, number(f[6], line_no)};
        try {
            r.rect.validate();
        } catch (ValidationError const& e) {
            throw ParseError(e.what(), line_no, 1);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ImageScore> score_images(std::span<RectRecord const> records, std::size_t samples_per_side,
                                     bool symmetric, std::vector<std::string>* unmatched)
{
    std::map<std::string, std::pair<std::vector<RegionRect>, std::vector<RegionRect>>> by_image;
    for (auto const& r : records) {
        auto& slot = by_image[r.image_id];
        (r.role == RectRole::ground_truth ? slot.first : slot.second).push_back(r.rect);
    }
    std::vector<ImageScore> out;
    for (auto const& [id, rects] : by_image) {
        auto const& [gts, preds] = rects;
        if (gts.empty() || preds.empty()) {
            if (unmatched) {
                unmatched->push_back(id);
            }
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (auto const& g : gts) {
            for (auto const& p : preds) {
                best = std::min(best, symmetric ? rect_hausdorff(g, p, samples_per_side, true)
                                                : rect_hausdorff(p, g, samples_per_side, false));
            }
        }
        out.push_back({id, best, gts.size(), preds.size()});
    }
    return out;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw ValidationError("quantile of an empty set");
    }
    std::sort(values.begin(), values.end());
    double const pos = q * static_cast<double>(values.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(pos));
    auto const hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

} // namespace graspkb
