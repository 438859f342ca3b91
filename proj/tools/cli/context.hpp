#pragma once

// Per-invocation state shared by the subcommands: global flags, input
// hashing, primary output and the run manifest.

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace graspkb::cli {

using Json = nlohmann::ordered_json;

/// Bad or missing command-line input (exit code 2).
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    std::uint64_t seed = 0;
    /// Primary output path; empty or "-" writes to stdout.
    std::string out;
    /// Manifest path; defaults to <out>.manifest.json, or stderr without --out.
    std::string manifest;
};

class Context {
  public:
    Context(GlobalOptions options, std::string subcommand);

    [[nodiscard]] std::uint64_t seed() const noexcept { return options_.seed; }
    [[nodiscard]] std::string const& out_path() const noexcept { return options_.out; }

    /// Reads a whole file and records its hash under `role`.
    std::string read_input(std::string const& role, std::string const& path);

    /// Writes the primary output (binary, no transformation).
    void write_output(std::string_view bytes);

    /// Writes an auxiliary output and lists it in the manifest.
    void write_aux(std::string const& role, std::string const& path, std::string_view bytes);

    Json& config() noexcept { return config_; }
    Json& diagnostics() noexcept { return diagnostics_; }

    /// Records the time since the previous mark under `stage`.
    void mark(std::string const& stage);

    /// Emits the manifest with the given exit status.
    void finish(int exit_code, std::string const& error = {});

  private:
    using Clock = std::chrono::steady_clock;

    GlobalOptions options_;
    std::string subcommand_;
    Json inputs_ = Json::object();
    Json outputs_ = Json::object();
    Json config_ = Json::object();
    Json diagnostics_ = Json::object();
    Json timings_ = Json::object();
    Clock::time_point start_;
    Clock::time_point last_;
};

void write_file(std::string const& path, std::string_view bytes);

/// Rounds to 6 decimal places for reporting.
[[nodiscard]] double round6(double x);

/// Splits "a,b,c" into its non-empty parts.
[[nodiscard]] std::vector<std::string> split_list(std::string_view text);

/// Parses a positive or infinite sigma such as "10" or "inf".
[[nodiscard]] double parse_sigma(std::string const& text);

} // namespace graspkb::cli
