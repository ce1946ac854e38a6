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

#include "kscore/ensemble_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kscore {

namespace {

using nlohmann::json;

std::vector<double> as_vector(const json& j, const char* what) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(std::string("ensemble json: ") + what +
                                " must be a number or nonempty array");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw std::invalid_argument(std::string("ensemble json: ") + what +
                                  " must contain numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

FirstOrderDist parse_member(const json& member) {
  const std::string type = member.at("type").get<std::string>();
  const json& params = member.at("params");
  if (type == "gaussian") {
    return FirstOrderDist::gaussian(as_vector(params.at("mean"), "mean"),
                                    as_vector(params.at("var"), "var"));
  }
  if (type == "pointmass") {
    return FirstOrderDist::point_mass(
        as_vector(params.at("location"), "location"));
  }
  if (type == "mixture") {
    std::vector<GaussianParams> comps;
    for (const auto& c : params.at("components")) {
      comps.push_back(
          {as_vector(c.at("mean"), "mean"), as_vector(c.at("var"), "var")});
    }
    return FirstOrderDist::mixture(as_vector(params.at("weights"), "weights"),
                                   std::move(comps));
  }
  if (type == "empirical") {
    const json& rows = params.at("samples");
    if (!rows.is_array() || rows.empty()) {
      throw std::invalid_argument("ensemble json: samples must be an array");
    }
    std::vector<std::vector<double>> data;
    data.reserve(rows.size());
    for (const auto& r : rows) data.push_back(as_vector(r, "samples row"));
    Matrix m(data.size(), data.front().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].size() != m.cols()) {
        throw std::invalid_argument("ensemble json: ragged samples");
      }
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = data[i][j];
    }
    return FirstOrderDist::empirical(std::move(m));
  }
  throw std::invalid_argument("ensemble json: unknown member type '" + type +
                              "'");
}

EnsembleRecord parse_record(const json& rec) {
  if (!rec.is_object() || !rec.contains("members")) {
    throw std::invalid_argument(
        "ensemble json: each record needs a members array");
  }
  const json& members_json = rec.at("members");
  if (!members_json.is_array() || members_json.empty()) {
    throw std::invalid_argument("ensemble json: members must be nonempty");
  }
  std::vector<FirstOrderDist> members;
  std::vector<double> weights;
  std::size_t weighted = 0;
  for (const auto& m : members_json) {
    members.push_back(parse_member(m));
    if (m.contains("weight")) {
      weights.push_back(m.at("weight").get<double>());
      ++weighted;
    }
  }
  if (weighted != 0 && weighted != members.size()) {
    throw std::invalid_argument(
        "ensemble json: either all members carry weights or none");
  }
  std::string id = rec.contains("instance_id")
                       ? rec.at("instance_id").get<std::string>()
                       : "";
  if (weighted == 0) {
    return {std::move(id), SecondOrderEnsemble(std::move(members))};
  }
  return {std::move(id),
          SecondOrderEnsemble(std::move(members), std::move(weights))};
}

json member_to_json(const FirstOrderDist& m, double weight) {
  json out;
  out["weight"] = weight;
  switch (m.kind()) {
    case FirstOrderDist::Kind::Gaussian:
      out["type"] = "gaussian";
      out["params"] = {{"mean", m.gaussian_params().mean},
                       {"var", m.gaussian_params().var}};
      break;
    case FirstOrderDist::Kind::PointMass:
      out["type"] = "pointmass";
      out["params"] = {{"location", m.location()}};
      break;
    case FirstOrderDist::Kind::Mixture: {
      out["type"] = "mixture";
      json comps = json::array();
      for (const auto& c : m.mixture_components()) {
        comps.push_back({{"mean", c.mean}, {"var", c.var}});
      }
      out["params"] = {{"weights", m.mixture_weights()},
                       {"components", std::move(comps)}};
      break;
    }
    case FirstOrderDist::Kind::Empirical: {
      out["type"] = "empirical";
      json rows = json::array();
      const auto& s = m.samples();
      for (std::size_t i = 0; i < s.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < s.cols(); ++j) row.push_back(s(i, j));
        rows.push_back(std::move(row));
      }
      out["params"] = {{"samples", std::move(rows)}};
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<EnsembleRecord> load_ensembles(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  // Skip leading whitespace to decide between a JSON array and JSON Lines.
  std::size_t pos = text.find_first_not_of(" \t\r\n");
  if (pos == std::string::npos) {
    throw std::invalid_argument("ensemble json: empty input");
  }
  std::vector<EnsembleRecord> out;
  if (text[pos] == '[') {
    const json arr = json::parse(text);
    for (const auto& rec : arr) out.push_back(parse_record(rec));
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    out.push_back(parse_record(json::parse(line)));
  }
  if (out.empty()) {
    throw std::invalid_argument("ensemble json: no records found");
  }
  return out;
}

std::vector<EnsembleRecord> load_ensembles_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open ensemble file: " + path);
  }
  return load_ensembles(in);
}

std::string ensembles_to_json(const std::vector<EnsembleRecord>& records) {
  json arr = json::array();
  for (const auto& rec : records) {
    json members = json::array();
    for (std::size_t m = 0; m < rec.ensemble.size(); ++m) {
      members.push_back(
          member_to_json(rec.ensemble.member(m), rec.ensemble.weight(m)));
    }
    arr.push_back({{"instance_id", rec.instance_id},
                   {"members", std::move(members)}});
  }
  return arr.dump(2);
}

namespace {

double parse_positive(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse number in flag '" + flag + "'");
  }
  if (used != text.size()) {
    throw std::invalid_argument("trailing characters in flag '" + flag + "'");
  }
  return v;
}

}  // namespace

ScoreSpec parse_score_flag(const std::string& flag) {
  if (flag == "log") return {ScoreKind::log_score(), false};
  if (flag == "se") return {ScoreKind::squared_error(), false};
  if (flag == "crps") return {ScoreKind::crps(), false};
  if (flag.rfind("marginal:", 0) == 0) {
    const auto inner = parse_score_flag(flag.substr(9));
    if (inner.median_gamma) {
      // The bandwidth stays deferred; the marginal wrapper is reapplied once
      // it resolves.
      return {ScoreKind::marginal(inner.kind), true};
    }
    return {ScoreKind::marginal(inner.kind), false};
  }
  if (flag.rfind("energy:", 0) == 0) {
    return {ScoreKind::energy(parse_positive(flag.substr(7), flag)), false};
  }
  if (flag.rfind("gauss:", 0) == 0) {
    const std::string arg = flag.substr(6);
    if (arg == "median") return {ScoreKind::gaussian_kernel(1.0), true};
    return {ScoreKind::gaussian_kernel(parse_positive(arg, flag)), false};
  }
  throw std::invalid_argument("unknown score flag '" + flag + "'");
}

std::vector<ScoreSpec> parse_score_list(const std::string& comma_separated) {
  std::vector<ScoreSpec> out;
  std::string token;
  std::istringstream in(comma_separated);
  while (std::getline(in, token, ',')) {
    if (!token.empty()) out.push_back(parse_score_flag(token));
  }
  if (out.empty()) {
    throw std::invalid_argument("empty score list");
  }
  return out;
}

EvalPolicy parse_policy_flag(const std::string& flag) {
  if (flag == "closed") return EvalPolicy::closed_form();
  if (flag.rfind("quad:", 0) == 0) {
    return EvalPolicy::quadrature(parse_positive(flag.substr(5), flag));
  }
  if (flag.rfind("mc:", 0) == 0) {
    const std::string rest = flag.substr(3);
    const std::size_t colon = rest.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("policy flag needs mc:<n>:<seed>");
    }
    const auto n =
        static_cast<std::size_t>(parse_positive(rest.substr(0, colon), flag));
    const auto seed =
        static_cast<std::uint64_t>(parse_positive(rest.substr(colon + 1), flag));
    return EvalPolicy::monte_carlo(n, seed);
  }
  throw std::invalid_argument("unknown policy flag '" + flag + "'");
}

ParsedKernel parse_kernel_flag(const std::string& flag) {
  if (flag == "se") return {KernelSpec::squared_euclidean(), false};
  if (flag.rfind("energy:", 0) == 0) {
    return {KernelSpec::power(parse_positive(flag.substr(7), flag)), false};
  }
  if (flag.rfind("gauss:", 0) == 0) {
    const std::string arg = flag.substr(6);
    if (arg == "median") return {std::nullopt, true};
    return {KernelSpec::gaussian(parse_positive(arg, flag)), false};
  }
  throw std::invalid_argument("unknown kernel flag '" + flag + "'");
}

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string run_manifest_json(
    const std::string& command,
    const std::vector<std::pair<std::string, std::string>>& settings) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["command"] = command;
  json s = json::object();
  for (const auto& [key, value] : settings) s[key] = value;
  manifest["settings"] = std::move(s);
  return manifest.dump(2);
}

}  // namespace kscore
