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

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kscore/decomposition.hpp"
#include "kscore/ensemble_io.hpp"
#include "kscore/experiments.hpp"
#include "kscore/kernels.hpp"
#include "kscore/robustness.hpp"
#include "kscore/scores.hpp"
#include "kscore/stats.hpp"

namespace {

using namespace kscore;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (!token.empty()) out.push_back(std::stod(token));
  }
  if (out.empty()) throw std::invalid_argument("empty list: " + csv);
  return out;
}

// Resolves deferred median bandwidths against a set of ensembles.
std::vector<ScoreKind> resolve_kinds(const std::vector<ScoreSpec>& specs,
                                     std::span<const SecondOrderEnsemble> ens,
                                     double* resolved_gamma) {
  std::vector<ScoreKind> kinds;
  double gamma = 0.0;
  for (const auto& spec : specs) {
    if (!spec.median_gamma) {
      kinds.push_back(spec.kind);
      continue;
    }
    if (gamma == 0.0) gamma = resolve_median_gamma(ens);
    kinds.push_back(spec.kind.is_marginal()
                        ? ScoreKind::marginal(ScoreKind::gaussian_kernel(gamma))
                        : ScoreKind::gaussian_kernel(gamma));
  }
  if (resolved_gamma) *resolved_gamma = gamma;
  return kinds;
}

int cmd_decompose(const std::string& input, const std::string& score_flag,
                  const std::string& estimator_flag,
                  const std::string& policy_flag, const std::string& out) {
  const auto records = load_ensembles_file(input);
  std::vector<SecondOrderEnsemble> ensembles;
  ensembles.reserve(records.size());
  for (const auto& r : records) ensembles.push_back(r.ensemble);

  const auto specs = parse_score_list(score_flag);
  double gamma = 0.0;
  const auto kinds = resolve_kinds(specs, ensembles, &gamma);
  const auto policy = parse_policy_flag(policy_flag);
  const EstimatorKind estimator = estimator_flag == "bma"
                                      ? EstimatorKind::BMA
                                      : EstimatorKind::Pairwise;
  if (estimator_flag != "bma" && estimator_flag != "pairwise") {
    throw std::invalid_argument("estimator must be bma or pairwise");
  }

  std::ostringstream csv;
  csv << "instance_id,score,estimator,tu,eu,au,delta\n";
  for (const auto& kind : kinds) {
    const auto batch = decompose_batch(ensembles, kind, estimator, policy);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!batch[i].ok()) {
        std::cerr << "instance " << records[i].instance_id << " (" << kind.name()
                  << "): " << batch[i].error << "\n";
        continue;
      }
      double delta = 0.0;
      try {
        delta = gap(ensembles[i], kind, policy.with_stream(0x6A0 + i));
      } catch (const std::exception& e) {
        std::cerr << "instance " << records[i].instance_id << " (" << kind.name()
                  << "): gap: " << e.what() << "\n";
        continue;
      }
      const auto& d = *batch[i].result;
      csv << records[i].instance_id << ',' << kind.name() << ','
          << to_string(estimator) << ',' << csv_double(d.tu) << ','
          << csv_double(d.eu) << ',' << csv_double(d.au) << ','
          << csv_double(delta) << '\n';
    }
  }
  write_file(out + ".csv", csv.str());
  write_file(out + "_manifest.json",
             run_manifest_json("decompose", {{"input", input},
                                             {"score", score_flag},
                                             {"estimator", estimator_flag},
                                             {"policy", policy_flag},
                                             {"median_gamma", csv_double(gamma)},
                                             {"output", out + ".csv"}}));
  return 0;
}

int cmd_robustness(const std::string& input, const std::string& synthetic,
                   const std::string& deltas_flag,
                   const std::string& scores_flag, std::uint64_t seed,
                   const std::string& out) {
  std::vector<SecondOrderEnsemble> base;
  if (!input.empty()) {
    for (const auto& r : load_ensembles_file(input)) base.push_back(r.ensemble);
  } else {
    const auto parts = parse_double_list(synthetic);
    if (parts.size() != 3) {
      throw std::invalid_argument("--synthetic wants n,members,seed");
    }
    base = synthetic_gaussian_instances(
        static_cast<std::size_t>(parts[0]), static_cast<std::size_t>(parts[1]),
        static_cast<std::uint64_t>(parts[2]));
  }
  const auto deltas = parse_double_list(deltas_flag);
  const auto specs = parse_score_list(scores_flag);
  double gamma = 0.0;
  const auto kinds = resolve_kinds(specs, base, &gamma);

  const auto result = distortion_experiment(base, deltas, kinds, seed);
  std::ostringstream csv;
  csv << "score,delta,mape\n";
  for (std::size_t k = 0; k < result.kinds.size(); ++k) {
    for (std::size_t d = 0; d < result.deltas.size(); ++d) {
      csv << result.kinds[k].name() << ',' << csv_double(result.deltas[d])
          << ',' << csv_double(result.mape_table(k, d)) << '\n';
    }
  }
  write_file(out + ".csv", csv.str());
  write_file(out + "_manifest.json",
             run_manifest_json("robustness",
                               {{"input", input.empty() ? synthetic : input},
                                {"deltas", deltas_flag},
                                {"scores", scores_flag},
                                {"seed", std::to_string(seed)},
                                {"median_gamma", csv_double(gamma)},
                                {"output", out + ".csv"}}));
  return 0;
}

int cmd_growth(const std::string& scores_flag, const std::string& grid_flag,
               const std::string& out) {
  const auto specs = parse_score_list(scores_flag);
  const auto grid = parse_double_list(grid_flag);
  std::ostringstream csv;
  csv << "score,sigma0sq,entropy,slope\n";
  for (const auto& spec : specs) {
    if (spec.median_gamma) {
      throw std::invalid_argument(
          "growth: gauss:median has no reference data here, pass gauss:<gamma>");
    }
    const auto fit = growth_fit(spec.kind, grid);
    for (std::size_t i = 0; i < fit.sigma0_sq.size(); ++i) {
      csv << spec.kind.name() << ',' << csv_double(fit.sigma0_sq[i]) << ','
          << csv_double(fit.entropies[i]) << ',' << csv_double(fit.slope)
          << '\n';
    }
  }
  write_file(out + ".csv", csv.str());
  write_file(out + "_manifest.json",
             run_manifest_json("growth", {{"scores", scores_flag},
                                          {"grid", grid_flag},
                                          {"output", out + ".csv"}}));
  return 0;
}

SyntheticTask task_by_name(const std::string& name, std::uint64_t seed) {
  if (name != "default" && name != "linear") {
    throw std::invalid_argument("unknown task '" + name + "'");
  }
  SyntheticTask task = SyntheticTask::default_task();
  if (name == "linear") {
    task.family = GeneratorFamily::Linear;
    task.noise_base = 0.0;
  }
  if (seed != 0) task.seed = seed;
  return task;
}

int cmd_ood(const std::string& task_name, const std::string& scores_flag,
            std::size_t members, std::uint64_t seed, const std::string& out) {
  const SyntheticTask task = task_by_name(task_name, seed);
  const auto specs = parse_score_list(scores_flag);
  const auto result =
      ood_rank(task, members, specs, EvalPolicy::closed_form());

  std::ostringstream points;
  points << "x,in_region";
  for (const auto& kind : result.kinds) points << ",eu_" << kind.name();
  points << '\n';
  for (std::size_t i = 0; i < result.grid_x.size(); ++i) {
    points << csv_double(result.grid_x[i]) << ','
           << (result.in_region[i] ? 1 : 0);
    for (std::size_t k = 0; k < result.kinds.size(); ++k) {
      points << ',' << csv_double(result.eu(k, i));
    }
    points << '\n';
  }
  write_file(out + "_points.csv", points.str());

  std::ostringstream summary;
  summary << "score,auroc\n";
  for (std::size_t k = 0; k < result.kinds.size(); ++k) {
    summary << result.kinds[k].name() << ',' << csv_double(result.auroc[k])
            << '\n';
  }
  write_file(out + "_auroc.csv", summary.str());
  for (const auto& msg : result.point_errors) std::cerr << msg << "\n";

  write_file(out + "_manifest.json",
             run_manifest_json(
                 "ood", {{"task", task_name},
                         {"scores", scores_flag},
                         {"members", std::to_string(members)},
                         {"seed", std::to_string(task.seed)},
                         {"median_gamma", csv_double(result.resolved_gamma)},
                         {"outputs", out + "_points.csv," + out + "_auroc.csv"}}));
  return 0;
}

int cmd_sweep(const std::string& gammas_flag, std::size_t rounds,
              std::size_t batch, std::size_t n_seeds, const std::string& out) {
  const SyntheticTask task = SyntheticTask::default_task();
  const auto gammas = parse_double_list(gammas_flag);
  std::vector<std::uint64_t> seeds(n_seeds);
  for (std::size_t s = 0; s < n_seeds; ++s) seeds[s] = s + 1;
  AcquisitionConfig config;
  config.rounds = rounds;
  config.batch_size = batch;
  const auto result = bandwidth_sweep(task, gammas, config, seeds);

  std::ostringstream trace;
  trace << "gamma,seed,round,crps\n";
  for (std::size_t g = 0; g < result.gammas.size(); ++g) {
    for (std::size_t s = 0; s < result.seeds.size(); ++s) {
      const auto& run = result.runs[g][s];
      trace << csv_double(result.gammas[g]) << ',' << result.seeds[s] << ",0,"
            << csv_double(run.initial_crps) << '\n';
      for (std::size_t r = 0; r < run.crps_per_round.size(); ++r) {
        trace << csv_double(result.gammas[g]) << ',' << result.seeds[s] << ','
              << (r + 1) << ',' << csv_double(run.crps_per_round[r]) << '\n';
      }
    }
  }
  write_file(out + "_trace.csv", trace.str());

  std::vector<double> mean_final(result.gammas.size());
  std::ostringstream finals;
  finals << "gamma,mean_final_crps\n";
  for (std::size_t g = 0; g < result.gammas.size(); ++g) {
    mean_final[g] = result.mean_final_crps(g);
    finals << csv_double(result.gammas[g]) << ',' << csv_double(mean_final[g])
           << '\n';
  }
  write_file(out + "_final.csv", finals.str());

  const double rho = spearman(result.gammas, mean_final);
  write_file(out + "_manifest.json",
             run_manifest_json("sweep",
                               {{"gammas", gammas_flag},
                                {"rounds", std::to_string(rounds)},
                                {"batch", std::to_string(batch)},
                                {"seeds", std::to_string(n_seeds)},
                                {"spearman_gamma_vs_final_crps", csv_double(rho)},
                                {"outputs", out + "_trace.csv," + out +
                                                "_final.csv"}}));
  return 0;
}

int cmd_al(const std::string& acq, const std::string& score_flag,
           std::size_t rounds, std::size_t batch, std::uint64_t seed,
           const std::string& out) {
  const SyntheticTask task = SyntheticTask::default_task();
  AcquisitionConfig config;
  config.rounds = rounds;
  config.batch_size = batch;
  config.seed = seed;
  if (acq == "eu") {
    config.rule = AcquisitionRule::EpistemicUncertainty;
  } else if (acq == "random") {
    config.rule = AcquisitionRule::Random;
  } else {
    throw std::invalid_argument("--acq must be eu or random");
  }
  const auto spec = parse_score_flag(score_flag);
  if (spec.median_gamma) {
    throw std::invalid_argument("al: pass an explicit bandwidth, not median");
  }
  config.eu_kind = spec.kind;

  const auto run = run_acquisition(task, config);
  std::ostringstream csv;
  csv << "round,crps\n";
  csv << "0," << csv_double(run.initial_crps) << '\n';
  for (std::size_t r = 0; r < run.crps_per_round.size(); ++r) {
    csv << (r + 1) << ',' << csv_double(run.crps_per_round[r]) << '\n';
  }
  write_file(out + ".csv", csv.str());
  write_file(out + "_manifest.json",
             run_manifest_json("al", {{"acq", acq},
                                      {"score", score_flag},
                                      {"rounds", std::to_string(rounds)},
                                      {"batch", std::to_string(batch)},
                                      {"seed", std::to_string(seed)},
                                      {"output", out + ".csv"}}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-score uncertainty decomposition for regression"};
  app.require_subcommand(1);

  std::string input, synthetic = "40,10,9";
  std::string score_flag = "crps", scores_flag = "log,se,crps,gauss:median";
  std::string estimator_flag = "pairwise", policy_flag = "closed";
  std::string out = "kscore_out";
  std::string deltas_flag = "0,0.2,0.5,1.5,2.5,5.0";
  std::string grid_flag = "1e2,1e3,1e4,1e5,1e6";
  std::string gammas_flag = "0.25,0.5,1,2";
  std::string task_name = "default";
  std::string acq = "eu";
  std::size_t members = 10, rounds = 40, batch = 20, n_seeds = 3;
  std::uint64_t seed = 7;

  auto* dec = app.add_subcommand("decompose",
                                 "Decompose ensemble uncertainty into "
                                 "total/epistemic/aleatoric parts");
  dec->add_option("--input", input, "ensemble JSON file")->required();
  dec->add_option("--score", score_flag, "score flag(s), comma separated");
  dec->add_option("--estimator", estimator_flag, "bma or pairwise");
  dec->add_option("--policy", policy_flag, "closed | mc:<n>:<seed> | quad:<tol>");
  dec->add_option("--out", out, "output prefix");

  auto* rob = app.add_subcommand("robustness",
                                 "Distortion experiment: MAPE of aleatoric "
                                 "uncertainty under a contaminated member");
  rob->add_option("--input", input, "ensemble JSON file (optional)");
  rob->add_option("--synthetic", synthetic, "n,members,seed synthetic bases");
  rob->add_option("--deltas", deltas_flag, "target distortion levels");
  rob->add_option("--scores", scores_flag, "score flags, comma separated");
  rob->add_option("--seed", seed, "contamination seed");
  rob->add_option("--out", out, "output prefix");

  auto* gro = app.add_subcommand(
      "growth", "Entropy growth rates under contaminant variance");
  gro->add_option("--scores", scores_flag, "score flags, comma separated");
  gro->add_option("--grid", grid_flag, "sigma0^2 grid");
  gro->add_option("--out", out, "output prefix");

  auto* ood = app.add_subcommand(
      "ood", "Out-of-distribution EU ranking on a synthetic task");
  ood->add_option("--task", task_name, "default | linear");
  ood->add_option("--scores", scores_flag, "score flags, comma separated");
  ood->add_option("--members", members, "ensemble size");
  ood->add_option("--seed", seed, "task seed (0 keeps the pinned default)");
  ood->add_option("--out", out, "output prefix");

  auto* swp = app.add_subcommand(
      "sweep", "Bandwidth sweep over the active-learning simulation");
  swp->add_option("--gammas", gammas_flag, "bandwidths in (0,2]");
  swp->add_option("--rounds", rounds, "acquisition rounds");
  swp->add_option("--batch", batch, "acquisitions per round");
  swp->add_option("--seeds", n_seeds, "number of seeds (1..k)");
  swp->add_option("--out", out, "output prefix");

  auto* al = app.add_subcommand("al", "Single active-learning run");
  al->add_option("--acq", acq, "eu | random");
  al->add_option("--score", score_flag, "EU score for acquisition");
  al->add_option("--rounds", rounds, "acquisition rounds");
  al->add_option("--batch", batch, "acquisitions per round");
  al->add_option("--seed", seed, "run seed");
  al->add_option("--out", out, "output prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dec->parsed()) {
      return cmd_decompose(input, score_flag, estimator_flag, policy_flag, out);
    }
    if (rob->parsed()) {
      return cmd_robustness(input, synthetic, deltas_flag, scores_flag, seed,
                            out);
    }
    if (gro->parsed()) return cmd_growth(scores_flag, grid_flag, out);
    if (ood->parsed()) {
      return cmd_ood(task_name, scores_flag, members,
                     ood->count("--seed") ? seed : 0, out);
    }
    if (swp->parsed()) return cmd_sweep(gammas_flag, rounds, batch, n_seeds, out);
    if (al->parsed()) {
      if (al->count("--score") == 0) score_flag = "gauss:1";
      return cmd_al(acq, score_flag, rounds, batch, seed, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
