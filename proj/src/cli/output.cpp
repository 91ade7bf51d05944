#include "mhmgt/cli/output.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace mhmgt::cli {

std::string git_blob_sha1(std::string_view bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

std::string file_blob_sha1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return git_blob_sha1(bytes.str());
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string input_hash(const std::map<std::string, std::string>& config,
                       const std::vector<std::filesystem::path>& data_files) {
  std::string text;
  for (const auto& [k, v] : config) text += k + " = " + v + "\n";
  for (const auto& f : data_files) text += file_blob_sha1(f) + "\n";
  return git_blob_sha1(text);
}

nlohmann::ordered_json provenance_json(const Provenance& p) {
  nlohmann::ordered_json j;
  j["command"] = p.command;
  j["seed"] = p.seed;
  j["schema_version"] = kSchemaVersion;
  j["input_sha1"] = p.input_sha1;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : p.config) j["config"][k] = v;
  return j;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& schema,
                     const Provenance& p, std::vector<std::string> header)
    : out_(path, std::ios::binary), path_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << "# schema: " << schema << " v" << kSchemaVersion << "\n";
  out_ << "# command: " << p.command << "\n";
  out_ << "# seed: " << p.seed << "\n";
  out_ << "# input_sha1: " << p.input_sha1 << "\n";
  for (const auto& [k, v] : p.config) out_ << "# config: " << k << " = " << v << "\n";
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw std::logic_error(path_.string() + ": row has " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << "\n";
}

void write_json(const std::filesystem::path& path, const Provenance& provenance,
                const nlohmann::ordered_json& body) {
  nlohmann::ordered_json doc;
  doc["provenance"] = provenance_json(provenance);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

JsonLinesWriter::JsonLinesWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
}

void JsonLinesWriter::write(const nlohmann::ordered_json& record) {
  out_ << record.dump() << "\n";
}

}  // namespace mhmgt::cli
