#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mhmgt::cli {

inline constexpr int kSchemaVersion = 1;

/// SHA-1 of `bytes` framed as a git blob object ("blob <len>\0" prefix).
std::string git_blob_sha1(std::string_view bytes);
std::string file_blob_sha1(const std::filesystem::path& path);

/// Round-trip decimal form used in every CSV cell.
std::string format_real(double v);

/// What every output file records about the run that produced it.
struct Provenance {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::string input_sha1;  // over the config echo and any data files
};

/// Hash of the canonical config echo followed by each data file's blob hash.
std::string input_hash(const std::map<std::string, std::string>& config,
                       const std::vector<std::filesystem::path>& data_files);

nlohmann::ordered_json provenance_json(const Provenance& p);

/// CSV with a `#` comment preamble naming the schema and provenance, then one
/// header line.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& schema,
            const Provenance& provenance, std::vector<std::string> header);

  void row(const std::vector<std::string>& cells);
  std::size_t columns() const noexcept { return columns_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_;
};

/// Writes `body` with a leading "provenance" member, two-space indented.
void write_json(const std::filesystem::path& path, const Provenance& provenance,
                const nlohmann::ordered_json& body);

/// One JSON document per line.
class JsonLinesWriter {
 public:
  explicit JsonLinesWriter(const std::filesystem::path& path);
  void write(const nlohmann::ordered_json& record);

 private:
  std::ofstream out_;
};

}  // namespace mhmgt::cli
