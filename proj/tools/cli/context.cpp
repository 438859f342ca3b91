#include "cli/context.hpp"

#include "graspkb/hash.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <iostream>
#include <sstream>

#ifndef GRASPKB_VERSION
#define GRASPKB_VERSION "unknown"
#endif

namespace graspkb::cli {

Context::Context(GlobalOptions options, std::string subcommand)
    : options_(std::move(options)), subcommand_(std::move(subcommand)), start_(Clock::now()), last_(start_)
{}

std::string Context::read_input(std::string const& role, std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read " + role + " file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string bytes = std::move(buffer).str();
    inputs_[role] = Json{{"path", path}, {"bytes", bytes.size()}, {"fnv1a64", content_hash(bytes)}};
    return bytes;
}

void write_file(std::string const& path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw UsageError("cannot write '" + path + "'");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw UsageError("write to '" + path + "' failed");
    }
}

void Context::write_output(std::string_view bytes)
{
    if (options_.out.empty() || options_.out == "-") {
        std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        std::cout.flush();
        outputs_["primary"] = Json{{"path", "-"}, {"fnv1a64", content_hash(bytes)}};
        return;
    }
    write_file(options_.out, bytes);
    outputs_["primary"] = Json{{"path", options_.out}, {"fnv1a64", content_hash(bytes)}};
}

void Context::write_aux(std::string const& role, std::string const& path, std::string_view bytes)
{
    write_file(path, bytes);
    outputs_[role] = Json{{"path", path}, {"fnv1a64", content_hash(bytes)}};
}

void Context::mark(std::string const& stage)
{
    auto const now = Clock::now();
    timings_[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
}

void Context::finish(int exit_code, std::string const& error)
{
    timings_["total"] = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    Json manifest;
    manifest["tool"] = "graspkb";
    manifest["version"] = GRASPKB_VERSION;
    manifest["subcommand"] = subcommand_;
    manifest["seed"] = options_.seed;
    manifest["exit_code"] = exit_code;
    if (!error.empty()) {
        manifest["error"] = error;
    }
    manifest["inputs"] = inputs_;
    manifest["config"] = config_;
    manifest["outputs"] = outputs_;
    manifest["diagnostics"] = diagnostics_;
    manifest["timings_ms"] = timings_;
    std::string const text = manifest.dump(2) + "\n";

    std::string path = options_.manifest;
    if (path.empty() && !options_.out.empty() && options_.out != "-") {
        path = options_.out + ".manifest.json";
    }
    if (path.empty()) {
        std::cerr << text;
        return;
    }
    try {
        write_file(path, text);
    } catch (UsageError const& e) {
        std::cerr << "graspkb: " << e.what() << "\n";
    }
}

double round6(double x)
{
    return std::round(x * 1e6) / 1e6;
}

std::vector<std::string> split_list(std::string_view text)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view part = text.substr(start, end - start);
        while (!part.empty() && part.front() == ' ') {
            part.remove_prefix(1);
        }
        while (!part.empty() && part.back() == ' ') {
            part.remove_suffix(1);
        }
        if (!part.empty()) {
            parts.emplace_back(part);
        }
        start = end + 1;
    }
    return parts;
}

double parse_sigma(std::string const& text)
{
    if (text == "inf" || text == "infinity" || text == "none") {
        return std::numeric_limits<double>::infinity();
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (std::exception const&) {
        used = 0;
    }
    if (used != text.size() || !(value > 0.0)) {
        throw UsageError("--prior-sigma must be a positive number or 'inf', got '" + text + "'");
    }
    return value;
}

} // namespace graspkb::cli
