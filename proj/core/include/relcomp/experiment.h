#ifndef RELCOMP_EXPERIMENT_H_
#define RELCOMP_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relcomp/active_session.h"
#include "relcomp/dataset.h"
#include "relcomp/policy.h"

namespace relcomp {

struct ExperimentConfig {
  std::vector<PolicyKind> policies = {PolicyKind::kInfo, PolicyKind::kRandom,
                                      PolicyKind::kNonredundant};
  int runs = 10;
  int budget = 40;
  std::uint64_t seed = 1;
  // Query counts at which the metric is evaluated. Values above the budget
  // are dropped and the budget itself is always included.
  std::vector<int> checkpoints = {0, 10, 20, 40, 60, 80, 100};
  double test_fraction = 0.5;
  bool standardize = true;
  std::uint64_t triplet_sample_cap = 200000;
  double noise_rate = 0.0;
  int threads = 1;
  // Template for every loop; policy, budget and seed are filled in per run.
  LoopConfig loop;
};

struct CheckpointMetrics {
  int queries = 0;
  double triplet_accuracy = 0.0;
  double one_nn_accuracy = 0.0;
};

struct RunRecord {
  int run = 0;
  PolicyKind policy = PolicyKind::kInfo;
  std::vector<CheckpointMetrics> checkpoints;
  int yes_no_answers = 0;
  int queries = 0;
  std::vector<Triplet> query_sequence;
  std::vector<double> final_metric;
  // Non-empty when the run aborted; such runs are left out of the summary.
  std::string error;

  double yes_no_proportion() const {
    return queries == 0 ? 0.0 : static_cast<double>(yes_no_answers) / queries;
  }
};

struct SummaryStat {
  double mean = 0.0;
  // Half-width of the normal-approximation 95% interval, 1.96 s / sqrt(R);
  // absent with fewer than two runs.
  std::optional<double> ci95;
};

struct ReportCell {
  PolicyKind policy = PolicyKind::kInfo;
  int queries = 0;
  SummaryStat triplet_accuracy;
  SummaryStat one_nn_accuracy;
};

struct ExperimentReport {
  std::vector<PolicyKind> policies;
  std::vector<int> checkpoints;
  int runs = 0;
  int budget = 0;
  std::uint64_t seed = 0;
  std::vector<ReportCell> cells;  // policy-major, checkpoints ascending
  std::vector<SummaryStat> yes_no_proportion;  // one per policy
  std::vector<RunRecord> records;  // run-major, then policy

  const ReportCell& cell(PolicyKind policy, int queries) const;
  SummaryStat YesNo(PolicyKind policy) const;
};

std::vector<int> EffectiveCheckpoints(const std::vector<int>& requested, int budget);

SummaryStat Summarize(const std::vector<double>& values);

// Every run draws a fresh split, standardizes on its training fold, finds two
// yes/no triplets for free, and runs each policy from those same triplets and
// the same pool seed. Runs execute on up to config.threads workers; the
// result does not depend on the thread count.
ExperimentReport RunExperiment(const Dataset& dataset, const ExperimentConfig& config);

std::string ReportToCsv(const ExperimentReport& report);
std::string ReportToJson(const ExperimentReport& report);
// Learning curve: one row per checkpoint, mean and ci per policy.
std::string ReportToTsv(const ExperimentReport& report);

// Writes report.csv, report.json and curve.tsv into `dir`.
void WriteReport(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace relcomp

#endif  // RELCOMP_EXPERIMENT_H_
