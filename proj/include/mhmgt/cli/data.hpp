#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "mhmgt/cli/output.hpp"
#include "mhmgt/hb.hpp"
#include "mhmgt/model.hpp"

namespace mhmgt::cli {

/// Malformed or mismatched data file; the message carries file and line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LogisticData {
  Matrix x;  // N × K
  Vector y;  // N, binary
};

/// Headered CSV `y,x1,...,xK`. Leading `#` lines are allowed; a
/// `# schema:` line, when present, must name mhmgt.logistic-data at the
/// current version.
LogisticData read_logistic_csv(const std::filesystem::path& path);
void write_logistic_csv(const std::filesystem::path& path, const LogisticData& data,
                        const Provenance& provenance);

/// Observations `group,y,x1,...,xK` plus an upper design `group,z1,...,zL`
/// with one row per group. Groups are numbered 0..J-1.
HbModelSpec read_hb_csv(const std::filesystem::path& observations,
                        const std::filesystem::path& upper);

/// Standard normal covariates, coefficients N(0, coef_sd²), Bernoulli responses.
LogisticData simulate_logistic(Index n, Index k, double coef_sd, Rng& rng);

}  // namespace mhmgt::cli
