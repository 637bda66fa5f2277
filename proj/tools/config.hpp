#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace driftlab::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimal table/key-value config format: [table] headers, `key = value`
/// pairs with strings, numbers, booleans and flat arrays, `#` comments.
/// Errors carry the offending line number.
nlohmann::json parse_config_text(const std::string& text);

struct ExperimentConfig {
  std::string id;
  std::uint64_t seed = 0;
  int trials = 20;
  int jobs = 2;
  std::string out_dir;

  nlohmann::json region;  // kind, center, R, dim, lambda, theta, apex_time
  nlohmann::json tensor;
  nlohmann::json drift;

  double q = 0.0;
  double ell = 0.0;
  std::vector<double> h_ladder;
  double tau_factor = 1.0;

  std::vector<std::string> checks;
  std::set<std::string> expect_fail;
  double delta = 0.25;
  double level = 1.0;
  double window_R = 1.0;
  int scale_steps = 3;
  double scale_factor = 3.0;
  double kappa_reference = 0.95;
  double cap_ratio = 2.0;
  double lambda = 2.0;

  std::string raw_text;  // hashed into the manifest
};

/// Parse + validate: seed mandatory, a nonempty check list, admissible
/// exponents, buildable fields, compatible region/check combinations. Any
/// violation throws ConfigError (the CLI maps it to exit code 2).
ExperimentConfig load_config(const std::string& path);

/// Known check identifiers and the suite aliases that expand into them.
std::vector<std::string> expand_checks(const std::vector<std::string>& requested);

}  // namespace driftlab::cli
