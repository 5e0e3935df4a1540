#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "whisker/cli.hpp"
#include "whisker/errors.hpp"

namespace whisker::cli {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return sha256_hex(os.str());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move into place: " + path.string());
  }
}

nlohmann::json ExperimentManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["arguments"] = arguments;
  j["config_path"] = config_path;
  j["seed"] = seed;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : outputs)
    files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["outputs"] = files;
  return j;
}

ExperimentManifest ExperimentManifest::from_json(const nlohmann::json& j) {
  try {
    ExperimentManifest m;
    m.command = j.at("command").get<std::string>();
    m.arguments = j.at("arguments").get<std::vector<std::string>>();
    m.config_path = j.at("config_path").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.started_utc = j.at("started_utc").get<std::string>();
    m.finished_utc = j.at("finished_utc").get<std::string>();
    for (const auto& f : j.at("outputs"))
      m.outputs.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                           f.at("bytes").get<std::uintmax_t>()});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw IoError("cannot create output directory " + root_.string() + ": " + ec.message());
}

void OutputDir::write(const std::string& relative, std::string_view bytes) {
  write_file_atomic(root_ / relative, bytes);
  for (auto& f : files_)
    if (f.path == relative) {
      f = {relative, sha256_hex(bytes), bytes.size()};
      return;
    }
  files_.push_back({relative, sha256_hex(bytes), bytes.size()});
}

void OutputDir::write_manifest(ExperimentManifest manifest) const {
  manifest.outputs = files_;
  write_file_atomic(root_ / "manifest.json", manifest.to_json().dump(2) + "\n");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace whisker::cli
