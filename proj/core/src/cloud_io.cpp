#include "graspkb/cloud_io.hpp"

#include "graspkb/error.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <optional>
#include <sstream>
#include <vector>

namespace graspkb {

namespace {

static_assert(std::endian::native == std::endian::little, "PLY reader assumes a little-endian host");

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            ++i;
        }
        std::size_t const start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

double to_double(std::string_view s, std::size_t line)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("bad number '" + std::string(s) + "'", line, 1);
    }
    return v;
}

int to_label(std::string_view s, std::size_t line)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) {
        throw ParseError("bad label '" + std::string(s) + "'", line, 1);
    }
    return v;
}

} // namespace

PointCloud parse_cloud(std::string_view bytes)
{
    if (bytes.starts_with("ply\n") || bytes.starts_with("ply\r\n")) {
        return parse_ply_cloud(bytes);
    }
    return parse_ascii_cloud(bytes);
}

PointCloud parse_ascii_cloud(std::string_view text)
{
    PointCloud cloud;
    std::optional<bool> with_labels;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto const nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        auto const fields = split_ws(line);
        if (fields.empty()) {
            continue;
        }
        if (fields.size() != 3 && fields.size() != 4) {
            throw ParseError("expected 'x y z [label]'", line_no, 1);
        }
        bool const labeled = fields.size() == 4;
        if (with_labels && *with_labels != labeled) {
            throw ParseError("labels must be given for every point or none", line_no, 1);
        }
        with_labels = labeled;
        cloud.points.emplace_back(to_double(fields[0], line_no), to_double(fields[1], line_no),
                                  to_double(fields[2], line_no));
        if (labeled) {
            cloud.labels.push_back(to_label(fields[3], line_no));
        }
    }
    cloud.validate();
    return cloud;
}

PointCloud parse_ply_cloud(std::string_view bytes)
{
    auto const end = bytes.find("end_header\n");
    if (end == std::string_view::npos) {
        throw ParseError("PLY header has no end_header", 1, 1);
    }
    std::string_view header = bytes.substr(0, end);
    std::string_view body = bytes.substr(end + std::strlen("end_header\n"));

    std::size_t count = 0;
    bool seen_vertex = false;
    bool binary_le = false;
    // Byte offset of x, y, z, label within a record; -1 when absent.
    int offset[4] = {-1, -1, -1, -1};
    int stride = 0;
    std::size_t line_no = 0;
    while (!header.empty()) {
        auto const nl = header.find('\n');
        auto line = header.substr(0, nl);
        header = nl == std::string_view::npos ? std::string_view{} : header.substr(nl + 1);
        ++line_no;
        auto const f = split_ws(line);
        if (f.empty() || f[0] == "ply" || f[0] == "comment" || f[0] == "obj_info") {
            continue;
        }
        if (f[0] == "format") {
            if (f.size() < 2 || f[1] != "binary_little_endian") {
                throw ParseError("only binary_little_endian PLY is supported", line_no, 1);
            }
            binary_le = true;
        } else if (f[0] == "element") {
            if (seen_vertex || f.size() != 3 || f[1] != "vertex") {
                throw ParseError("only a single vertex element is supported", line_no, 1);
            }
            seen_vertex = true;
            count = static_cast<std::size_t>(to_label(f[2], line_no));
        } else if (f[0] == "property") {
            if (!seen_vertex || f.size() != 3) {
                throw ParseError("unexpected property line", line_no, 1);
            }
            int slot = -1;
            if (f[2] == "x") {
                slot = 0;
            } else if (f[2] == "y") {
                slot = 1;
            } else if (f[2] == "z") {
                slot = 2;
            } else if (f[2] == "label") {
                slot = 3;
            } else {
                throw ParseError("unsupported property '" + std::string(f[2]) + "'", line_no, 1);
            }
            bool const is_float = f[1] == "float" || f[1] == "float32";
            bool const is_uchar = f[1] == "uchar" || f[1] == "uint8";
            if ((slot < 3 && !is_float) || (slot == 3 && !is_uchar)) {
                throw ParseError("property '" + std::string(f[2]) + "' has unsupported type", line_no, 1);
            }
            if (offset[slot] >= 0) {
                throw ParseError("duplicate property", line_no, 1);
            }
            offset[slot] = stride;
            stride += slot < 3 ? 4 : 1;
        } else {
            throw ParseError("unsupported header line", line_no, 1);
        }
    }
    if (!binary_le || !seen_vertex || offset[0] < 0 || offset[1] < 0 || offset[2] < 0) {
        throw ParseError("PLY needs binary_little_endian format and float x, y, z", line_no, 1);
    }
    if (body.size() < count * static_cast<std::size_t>(stride)) {
        throw ValidationError("PLY body is shorter than its vertex count");
    }
    PointCloud cloud;
    cloud.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        char const* rec = body.data() + i * static_cast<std::size_t>(stride);
        float xyz[3];
        for (int k = 0; k < 3; ++k) {
            std::memcpy(&xyz[k], rec + offset[k], sizeof(float));
        }
        cloud.points.emplace_back(xyz[0], xyz[1], xyz[2]);
        if (offset[3] >= 0) {
            cloud.labels.push_back(static_cast<unsigned char>(rec[offset[3]]));
        }
    }
    cloud.validate();
    return cloud;
}

std::string write_ascii_cloud(PointCloud const& cloud)
{
    cloud.validate();
    std::string out;
    char buf[128];
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        auto const& p = cloud.points[i];
        int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p.x(), p.y(), p.z());
        out.append(buf, static_cast<std::size_t>(n));
        if (cloud.labeled()) {
            out += ' ' + std::to_string(cloud.labels[i]);
        }
        out += '\n';
    }
    return out;
}

std::string write_ply_cloud(PointCloud const& cloud)
{
    cloud.validate();
    std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(cloud.points.size()) +
                      "\nproperty float x\nproperty float y\nproperty float z\n";
    if (cloud.labeled()) {
        out += "property uchar label\n";
    }
    out += "end_header\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            auto const f = static_cast<float>(cloud.points[i](k));
            char bytes[sizeof(float)];
            std::memcpy(bytes, &f, sizeof f);
            out.append(bytes, sizeof bytes);
        }
        if (cloud.labeled()) {
            if (cloud.labels[i] < 0 || cloud.labels[i] > 255) {
                throw ValidationError("PLY labels must lie in 0..255");
            }
            out += static_cast<char>(static_cast<unsigned char>(cloud.labels[i]));
        }
    }
    return out;
}

} // namespace graspkb
