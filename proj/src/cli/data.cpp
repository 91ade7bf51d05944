#include "mhmgt/cli/data.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace mhmgt::cli {

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> lines;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::filesystem::path& path, int line, const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

Table read_table(const std::filesystem::path& path, const std::string& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open data file");
  Table t;
  std::string line;
  int line_no = 0;
  const std::string expected = schema + " v" + std::to_string(kSchemaVersion);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (t.header.empty() && line.rfind("# schema:", 0) == 0) {
        std::string got = line.substr(9);
        got.erase(0, got.find_first_not_of(' '));
        if (got != expected) fail(path, line_no, "schema '" + got + "' but expected '" + expected + "'");
      }
      continue;
    }
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      fail(path, line_no, "expected " + std::to_string(t.header.size()) + " fields, found " +
                              std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || !std::isfinite(v)) {
        fail(path, line_no, "'" + c + "' is not a finite number");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
    t.lines.push_back(line_no);
  }
  if (t.header.empty()) throw DataError(path.string() + ": missing header line");
  return t;
}

/// Checks header == leading names then prefix1..prefixK; returns K.
Index check_header(const std::filesystem::path& path, const Table& t,
                   const std::vector<std::string>& leading, const std::string& prefix) {
  const Index k = static_cast<Index>(t.header.size() - std::min(t.header.size(), leading.size()));
  bool ok = t.header.size() > leading.size();
  for (std::size_t i = 0; ok && i < leading.size(); ++i) ok = t.header[i] == leading[i];
  for (Index c = 0; ok && c < k; ++c) {
    ok = t.header[leading.size() + c] == prefix + std::to_string(c + 1);
  }
  if (!ok) {
    std::string want;
    for (const auto& l : leading) want += l + ",";
    fail(path, 0, "header must be '" + want + prefix + "1,...," + prefix + "K'");
  }
  return k;
}

Index group_index(const std::filesystem::path& path, int line, double v) {
  if (v < 0 || v != std::floor(v)) fail(path, line, "group must be a non-negative integer");
  return static_cast<Index>(v);
}

void check_binary(const std::filesystem::path& path, int line, double y) {
  if (y != 0.0 && y != 1.0) fail(path, line, "response must be 0 or 1");
}

}  // namespace

LogisticData read_logistic_csv(const std::filesystem::path& path) {
  const Table t = read_table(path, "mhmgt.logistic-data");
  const Index k = check_header(path, t, {"y"}, "x");
  if (t.rows.empty()) throw DataError(path.string() + ": no observations");
  LogisticData d{Matrix(t.rows.size(), k), Vector(t.rows.size())};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    check_binary(path, t.lines[i], t.rows[i][0]);
    d.y(i) = t.rows[i][0];
    for (Index c = 0; c < k; ++c) d.x(i, c) = t.rows[i][c + 1];
  }
  return d;
}

void write_logistic_csv(const std::filesystem::path& path, const LogisticData& data,
                        const Provenance& provenance) {
  std::vector<std::string> header{"y"};
  for (Index c = 0; c < data.x.cols(); ++c) header.push_back("x" + std::to_string(c + 1));
  CsvWriter out(path, "mhmgt.logistic-data", provenance, header);
  for (Index i = 0; i < data.x.rows(); ++i) {
    std::vector<std::string> row{format_real(data.y(i))};
    for (Index c = 0; c < data.x.cols(); ++c) row.push_back(format_real(data.x(i, c)));
    out.row(row);
  }
}

HbModelSpec read_hb_csv(const std::filesystem::path& observations,
                        const std::filesystem::path& upper) {
  const Table obs = read_table(observations, "mhmgt.hb-data");
  const Index k = check_header(observations, obs, {"group", "y"}, "x");
  const Table up = read_table(upper, "mhmgt.hb-upper");
  const Index l = check_header(upper, up, {"group"}, "z");

  const Index groups = static_cast<Index>(up.rows.size());
  if (groups == 0) throw DataError(upper.string() + ": no groups");
  HbModelSpec spec;
  spec.z = Matrix(groups, l);
  std::vector<bool> seen(groups, false);
  for (std::size_t r = 0; r < up.rows.size(); ++r) {
    const Index g = group_index(upper, up.lines[r], up.rows[r][0]);
    if (g >= groups || seen[g]) {
      fail(upper, up.lines[r], "groups must be 0..J-1, each listed once");
    }
    seen[g] = true;
    for (Index c = 0; c < l; ++c) spec.z(g, c) = up.rows[r][c + 1];
  }

  std::vector<std::vector<std::size_t>> members(groups);
  for (std::size_t r = 0; r < obs.rows.size(); ++r) {
    const Index g = group_index(observations, obs.lines[r], obs.rows[r][0]);
    if (g >= groups) fail(observations, obs.lines[r], "group not listed in the upper design");
    check_binary(observations, obs.lines[r], obs.rows[r][1]);
    members[g].push_back(r);
  }
  for (Index g = 0; g < groups; ++g) {
    HbGroup group{Matrix(members[g].size(), k), Vector(members[g].size())};
    for (std::size_t i = 0; i < members[g].size(); ++i) {
      const auto& row = obs.rows[members[g][i]];
      group.y(i) = row[1];
      for (Index c = 0; c < k; ++c) group.x(i, c) = row[c + 2];
    }
    spec.groups.push_back(std::move(group));
  }
  return spec;
}

LogisticData simulate_logistic(Index n, Index k, double coef_sd, Rng& rng) {
  if (n < 1 || k < 1) throw std::invalid_argument("simulate_logistic needs n, k >= 1");
  Vector beta(k);
  for (Index c = 0; c < k; ++c) beta(c) = coef_sd * standard_normal(rng);
  LogisticData d{Matrix(n, k), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < k; ++c) d.x(i, c) = standard_normal(rng);
    d.y(i) = uniform01(rng) < sigmoid(d.x.row(i).dot(beta)) ? 1.0 : 0.0;
  }
  return d;
}

}  // namespace mhmgt::cli
