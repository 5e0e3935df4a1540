#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace whisker::cli {

inline constexpr const char* kToolName = "whiskertwin";
inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over the target.
// Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct ExperimentManifest {
  std::string command;
  std::string config_path;  // empty for built-in defaults
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> arguments;
  std::vector<OutputFile> outputs;

  nlohmann::json to_json() const;
  static ExperimentManifest from_json(const nlohmann::json& j);
};

// Writes artifacts into one directory and remembers their hashes for the
// manifest, which is written last.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);
  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& relative, std::string_view bytes);
  const std::vector<OutputFile>& files() const { return files_; }
  // Writes manifest.json (not itself listed).
  void write_manifest(ExperimentManifest manifest) const;

 private:
  std::filesystem::path root_;
  std::vector<OutputFile> files_;
};

std::string utc_timestamp();

// ---- plots ------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band;  // optional +-band around y (same length), drawn shaded
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> markers;  // vertical dashed lines at these x values
  int width = 640;
  int height = 400;
};

// Minimal SVG line plot. Throws ContractError on mismatched series lengths.
std::string line_plot_svg(const PlotSpec& spec, std::span<const Series> series);

// ---- entry point --------------------------------------------------------------

// Parses and runs one command. Never throws; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace whisker::cli
