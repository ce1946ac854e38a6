// Copyright 2026 The kscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KSCORE_ENSEMBLE_IO_HPP
#define KSCORE_ENSEMBLE_IO_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "kscore/distributions.hpp"
#include "kscore/kernels.hpp"
#include "kscore/scores.hpp"

namespace kscore {

inline constexpr const char* kVersion = "0.1.0";

/// One instance of the ensemble input format:
/// {"instance_id": str,
///  "members": [{"weight": float, "type":
///               "gaussian"|"mixture"|"pointmass"|"empirical",
///               "params": {...}}]}
/// Gaussian params {"mean": [..], "var": [..]}; pointmass {"location": [..]};
/// mixture {"weights": [..], "components": [{"mean": [..], "var": [..]}..]};
/// empirical {"samples": [[..]..]}. Member weights are optional and default
/// to uniform; scalars are accepted where a 1-vector is meant.
struct EnsembleRecord {
  std::string instance_id;
  SecondOrderEnsemble ensemble;
};

/// Reads records from a JSON array or from JSON Lines (one object per line).
std::vector<EnsembleRecord> load_ensembles(std::istream& in);
std::vector<EnsembleRecord> load_ensembles_file(const std::string& path);

/// Serializes records back to a JSON array (round-trips load_ensembles).
std::string ensembles_to_json(const std::vector<EnsembleRecord>& records);

/// Parses the score flag:
/// log | se | crps | energy:<beta> | gauss:<gamma>|gauss:median |
/// marginal:<inner>.
ScoreSpec parse_score_flag(const std::string& flag);
std::vector<ScoreSpec> parse_score_list(const std::string& comma_separated);

/// Parses the policy flag: closed | mc:<n>:<seed> | quad:<tol>.
EvalPolicy parse_policy_flag(const std::string& flag);

/// Parses the kernel flag: se | energy:<beta> | gauss:<gamma> | gauss:median.
/// A deferred median bandwidth is returned as (nullopt, true).
struct ParsedKernel {
  std::optional<KernelSpec> kernel;
  bool median_gamma = false;
};
ParsedKernel parse_kernel_flag(const std::string& flag);

/// Formats a double for CSV output (round-trip-stable, locale-free).
std::string csv_double(double v);

/// JSON run manifest: tool version, command, and the given settings, with
/// stable key order.
std::string run_manifest_json(
    const std::string& command,
    const std::vector<std::pair<std::string, std::string>>& settings);

}  // namespace kscore

#endif  // KSCORE_ENSEMBLE_IO_HPP
