#include "relcomp/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "relcomp/evaluation.h"
#include "relcomp/oracle.h"
#include "relcomp/rng.h"

namespace relcomp {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

CheckpointMetrics Measure(const MetricWeights& w, const PreparedData& data, int queries,
                          const ExperimentConfig& config, std::uint64_t eval_seed) {
  CheckpointMetrics m;
  m.queries = queries;
  m.triplet_accuracy = TripletAccuracy(w, data.test, config.triplet_sample_cap, eval_seed);
  m.one_nn_accuracy = OneNnAccuracy(w, data.train, data.test);
  return m;
}

// One policy on one run. The checkpoint at q queries uses the metric learned
// from the initial triplets plus the first q answers.
RunRecord RunPolicy(int run, PolicyKind policy, const PreparedData& data,
                    const SimulatedOracle& oracle,
                    const std::vector<LabeledTriplet>& initial, const LoopConfig& loop,
                    const std::vector<int>& checkpoints, const ExperimentConfig& config,
                    std::uint64_t eval_seed) {
  RunRecord record;
  record.run = run;
  record.policy = policy;

  LoopConfig lc = loop;
  lc.policy = policy;
  ActiveSession session = ActiveSession::StartWithInitial(data.train.features, lc, initial);
  std::size_t next_cp = 0;
  auto take_checkpoints = [&](int used) {
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= used) {
      record.checkpoints.push_back(
          Measure(session.metric(), data, checkpoints[next_cp], config, eval_seed));
      ++next_cp;
    }
  };
  take_checkpoints(0);
  while (session.status() == SessionStatus::kAwaitingAnswer) {
    const Triplet t = *session.pending();
    const auto position = static_cast<std::uint64_t>(session.labeled().size());
    Answer a = oracle.Respond(t, position);
    record.query_sequence.push_back(t);
    record.yes_no_answers += IsYesNo(a) ? 1 : 0;
    session.Submit(a, oracle.source(), static_cast<std::int64_t>(position));
    take_checkpoints(session.budget_used());
  }
  // An exhausted pool ends the loop early; later checkpoints keep the final
  // metric.
  take_checkpoints(std::numeric_limits<int>::max());
  record.queries = session.budget_used();
  record.final_metric = session.metric().ToVector();
  return record;
}

std::vector<RunRecord> RunOne(int run, const Dataset& dataset, const ExperimentConfig& config,
                              const std::vector<int>& checkpoints) {
  const auto r = static_cast<std::uint64_t>(run);
  PreparedData data = PrepareData(dataset, config.test_fraction,
                                  DeriveSeed(config.seed, kStreamSplit, r), config.standardize);
  SimulatedOracle oracle(*data.train.labels, config.noise_rate,
                         DeriveSeed(config.seed, kStreamOracle, r));
  std::vector<LabeledTriplet> initial = BootstrapYesNoTriplets(
      oracle, data.train.size(), 2, DeriveSeed(config.seed, kStreamBootstrap, r));

  LoopConfig loop = config.loop;
  loop.num_classes = dataset.num_classes;
  loop.selection.budget = config.budget;
  loop.selection.seed = DeriveSeed(config.seed, kStreamLoop, r);
  const std::uint64_t eval_seed = DeriveSeed(config.seed, kStreamEvaluation, r);

  std::vector<RunRecord> out;
  for (PolicyKind policy : config.policies)
    out.push_back(RunPolicy(run, policy, data, oracle, initial, loop, checkpoints, config,
                            eval_seed));
  return out;
}

}  // namespace

std::vector<int> EffectiveCheckpoints(const std::vector<int>& requested, int budget) {
  std::set<int> kept;
  for (int q : requested) {
    if (q < 0) throw std::invalid_argument("checkpoints must be >= 0");
    if (q <= budget) kept.insert(q);
  }
  kept.insert(budget);
  return {kept.begin(), kept.end()};
}

SummaryStat Summarize(const std::vector<double>& values) {
  SummaryStat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const auto r = static_cast<double>(values.size());
  s.mean = sum / r;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.ci95 = 1.96 * std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
  }
  return s;
}

const ReportCell& ExperimentReport::cell(PolicyKind policy, int queries) const {
  for (const auto& c : cells)
    if (c.policy == policy && c.queries == queries) return c;
  throw std::out_of_range("no report cell for that policy and checkpoint");
}

SummaryStat ExperimentReport::YesNo(PolicyKind policy) const {
  for (std::size_t p = 0; p < policies.size(); ++p)
    if (policies[p] == policy) return yes_no_proportion[p];
  throw std::out_of_range("policy not in report");
}

ExperimentReport RunExperiment(const Dataset& dataset, const ExperimentConfig& config) {
  dataset.Validate();
  if (!dataset.has_labels()) throw std::invalid_argument("experiment needs a labeled dataset");
  if (config.policies.empty()) throw std::invalid_argument("experiment needs a policy");
  if (config.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (config.budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0))
    throw std::invalid_argument("test_fraction must lie in (0, 1)");

  ExperimentReport report;
  report.policies = config.policies;
  report.checkpoints = EffectiveCheckpoints(config.checkpoints, config.budget);
  report.runs = config.runs;
  report.budget = config.budget;
  report.seed = config.seed;

  std::vector<std::vector<RunRecord>> per_run(config.runs);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int run = next++; run < config.runs; run = next++) {
      try {
        per_run[run] = RunOne(run, dataset, config, report.checkpoints);
      } catch (const std::exception& e) {
        for (PolicyKind policy : config.policies) {
          RunRecord failed;
          failed.run = run;
          failed.policy = policy;
          failed.error = e.what();
          per_run[run].push_back(std::move(failed));
        }
      }
    }
  };
  const int threads = std::clamp(config.threads, 1, config.runs);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (auto& records : per_run)
    for (auto& rec : records) report.records.push_back(std::move(rec));

  for (PolicyKind policy : config.policies) {
    std::vector<double> yes_no;
    for (const auto& rec : report.records)
      if (rec.policy == policy && rec.error.empty()) yes_no.push_back(rec.yes_no_proportion());
    report.yes_no_proportion.push_back(Summarize(yes_no));
    for (std::size_t c = 0; c < report.checkpoints.size(); ++c) {
      std::vector<double> trip, nn;
      for (const auto& rec : report.records) {
        if (rec.policy != policy || !rec.error.empty()) continue;
        trip.push_back(rec.checkpoints[c].triplet_accuracy);
        nn.push_back(rec.checkpoints[c].one_nn_accuracy);
      }
      report.cells.push_back({policy, report.checkpoints[c], Summarize(trip), Summarize(nn)});
    }
  }
  return report;
}

std::string ReportToCsv(const ExperimentReport& report) {
  std::string out =
      "policy,queries,triplet_accuracy_mean,triplet_accuracy_ci95,"
      "one_nn_accuracy_mean,one_nn_accuracy_ci95\n";
  auto ci = [](const SummaryStat& s) { return s.ci95 ? Fixed(*s.ci95) : std::string(); };
  for (const auto& c : report.cells) {
    out += std::string(ToString(c.policy)) + "," + std::to_string(c.queries) + "," +
           Fixed(c.triplet_accuracy.mean) + "," + ci(c.triplet_accuracy) + "," +
           Fixed(c.one_nn_accuracy.mean) + "," + ci(c.one_nn_accuracy) + "\n";
  }
  return out;
}

std::string ReportToJson(const ExperimentReport& report) {
  auto stat = [](const SummaryStat& s) {
    ordered_json j;
    j["mean"] = s.mean;
    j["ci95"] = s.ci95 ? ordered_json(*s.ci95) : ordered_json(nullptr);
    return j;
  };
  ordered_json root;
  root["runs"] = report.runs;
  root["budget"] = report.budget;
  root["seed"] = report.seed;
  root["checkpoints"] = report.checkpoints;
  ordered_json policies = ordered_json::array();
  for (std::size_t p = 0; p < report.policies.size(); ++p) {
    ordered_json pj;
    pj["policy"] = ToString(report.policies[p]);
    pj["yes_no_proportion"] = stat(report.yes_no_proportion[p]);
    ordered_json cells = ordered_json::array();
    for (const auto& c : report.cells) {
      if (c.policy != report.policies[p]) continue;
      ordered_json cj;
      cj["queries"] = c.queries;
      cj["triplet_accuracy"] = stat(c.triplet_accuracy);
      cj["one_nn_accuracy"] = stat(c.one_nn_accuracy);
      cells.push_back(std::move(cj));
    }
    pj["checkpoints"] = std::move(cells);
    policies.push_back(std::move(pj));
  }
  root["policies"] = std::move(policies);
  ordered_json records = ordered_json::array();
  for (const auto& rec : report.records) {
    ordered_json rj;
    rj["run"] = rec.run;
    rj["policy"] = ToString(rec.policy);
    if (!rec.error.empty()) {
      rj["error"] = rec.error;
      records.push_back(std::move(rj));
      continue;
    }
    rj["queries"] = rec.queries;
    rj["yes_no_answers"] = rec.yes_no_answers;
    ordered_json cps = ordered_json::array();
    for (const auto& m : rec.checkpoints)
      cps.push_back({{"queries", m.queries},
                     {"triplet_accuracy", m.triplet_accuracy},
                     {"one_nn_accuracy", m.one_nn_accuracy}});
    rj["checkpoints"] = std::move(cps);
    ordered_json seq = ordered_json::array();
    for (const auto& t : rec.query_sequence) seq.push_back({t.i, t.j, t.k});
    rj["query_sequence"] = std::move(seq);
    rj["final_metric"] = rec.final_metric;
    records.push_back(std::move(rj));
  }
  root["records"] = std::move(records);
  return root.dump(2) + "\n";
}

std::string ReportToTsv(const ExperimentReport& report) {
  std::string out = "# queries";
  for (PolicyKind p : report.policies) {
    std::string name(ToString(p));
    out += "\t" + name + "_triplet\t" + name + "_triplet_ci\t" + name + "_1nn\t" + name +
           "_1nn_ci";
  }
  out += "\n";
  for (int q : report.checkpoints) {
    out += std::to_string(q);
    for (PolicyKind p : report.policies) {
      const ReportCell& c = report.cell(p, q);
      out += "\t" + Fixed(c.triplet_accuracy.mean) + "\t" +
             Fixed(c.triplet_accuracy.ci95.value_or(0.0)) + "\t" +
             Fixed(c.one_nn_accuracy.mean) + "\t" + Fixed(c.one_nn_accuracy.ci95.value_or(0.0));
    }
    out += "\n";
  }
  return out;
}

void WriteReport(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
  };
  write("report.csv", ReportToCsv(report));
  write("report.json", ReportToJson(report));
  write("curve.tsv", ReportToTsv(report));
}

}  // namespace relcomp
