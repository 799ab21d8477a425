// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "reference.h"
#include "relcomp/active_session.h"
#include "relcomp/dataset.h"
#include "relcomp/evaluation.h"
#include "relcomp/experiment.h"
#include "relcomp/info_gain.h"
#include "relcomp/kmeans.h"
#include "relcomp/oracle.h"
#include "relcomp/pool.h"
#include "relcomp/rng.h"
#include "relcomp/session_store.h"
#include "session_fixture.h"

namespace relcomp {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome OracleEquivalence() {
  std::mt19937_64 rng(1);
  const Triplet t{0, 1, 2};
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = 2 + trial % 3;
    Eigen::VectorXd r[3] = {ref::RandomRow(rng, c), ref::RandomRow(rng, c),
                            ref::RandomRow(rng, c)};
    ClassProbs cp = ref::Rows(r[0], r[1], r[2]);
    ref::Joint j = ref::Enumerate(r[0], r[1], r[2]);
    AnswerProbs a = AnswerProbabilities(cp, t);
    worst = std::max({worst, std::abs(a.yes - j.answer[0]), std::abs(a.no - j.answer[1]),
                      std::abs(a.dk - j.answer[2]),
                      std::abs(PriorEntropy(cp, t) - j.prior_entropy),
                      std::abs(PosteriorEntropy(cp, t, Answer::kYes) - j.posterior[0]),
                      std::abs(PosteriorEntropy(cp, t, Answer::kNo) - j.posterior[1]),
                      std::abs(InfoGain(cp, t) - j.info_gain)});
  }
  return {worst <= 1e-9, Format("1000 cases, C in {2,3,4}, max |error| %.2e", worst)};
}

Outcome ExactMutualInformation() {
  std::mt19937_64 rng(2);
  const Triplet t{0, 1, 2};
  double worst = 0.0;
  int cases = 0;
  for (; cases < 100; ++cases) {
    const int c = 2 + cases % 4;
    const int a = static_cast<int>(rng() % c);
    int b = static_cast<int>(rng() % (c - 1));
    if (b >= a) ++b;
    // y_j = a and y_k = b for certain, y_i split between a and b: every
    // configuration answers yes or no.
    const double mix = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(c), pj = pi, pk = pi;
    pi[a] = mix, pi[b] = 1 - mix, pj[a] = 1, pk[b] = 1;
    ref::Joint j = ref::Enumerate(pi, pj, pk);
    if (j.answer[2] != 0.0) return {false, "constructed case has p_dk > 0"};
    worst = std::max(worst, std::abs(InfoGain(ref::Rows(pi, pj, pk), t) - j.mutual_information));
  }
  return {worst <= 1e-9, Format("%d cases with p_dk = 0, max |IG - MI| %.2e", cases, worst)};
}

Outcome TruthTable() {
  bool ok = true;
  int c2[3] = {0, 0, 0};
  for (int c = 1; c <= 5; ++c)
    for (int a = 0; a < c; ++a)
      for (int b = 0; b < c; ++b)
        for (int d = 0; d < c; ++d) {
          const Answer got = AnswerFromLabels(a, b, d);
          const int fired = (a == b && b != d) + (a == d && d != b) + !((a == b) != (a == d));
          ok = ok && fired == 1 && got == ref::Rule(a, b, d);
          if (c == 2) ++c2[ref::Slot(got)];
        }
  ok = ok && c2[0] == 2 && c2[1] == 2 && c2[2] == 4;
  return {ok, Format("C <= 5 exhaustive; C=2 counts yes=%d no=%d dk=%d", c2[0], c2[1], c2[2])};
}

// Class probabilities from the actual pipeline on a 12-point dataset.
ClassProbs TwelvePointProbs(LabeledTripletSet& labeled) {
  Dataset d = MakeSyntheticGaussians({3, 4, 4, 2, 3.0, 21});
  PreparedData p = PrepareData(d, 0.0, 0, true);
  SimulatedOracle oracle(*p.train.labels, 0.0, 0);
  for (const auto& e : BootstrapYesNoTriplets(oracle, 12, 2, 5)) labeled.Append(e);
  MetricWeights w = LearnMetric(p.train.features, ConstraintsFrom(labeled), {}).weights;
  Clustering clusters = KMeans(p.train.features, w, {.num_clusters = 3, .seed = 8});
  return EstimateClassProbs(RescaleFeatures(p.train.features, w), clusters.assignments, 3,
                            {.seed = 9});
}

Outcome NearOptimalGuarantee() {
  LabeledTripletSet labeled;
  ClassProbs cp = TwelvePointProbs(labeled);
  const double eps = 0.01;
  Pool all = ExhaustivePool(12, labeled);
  std::vector<double> scores = ScorePool(all, cp);
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // The top-eps set holds at least eps * |R_u| triplets, plus any ties.
  const auto top = static_cast<std::size_t>(std::ceil(eps * static_cast<double>(all.size())));
  const double cutoff = sorted[top - 1];

  bool ok = true;
  std::string detail = Format("|R_u|=%zu top=%zu;", all.size(), top);
  for (int factor : {100, 10, 1}) {
    const int trials = 200;
    int hits = 0;
    std::size_t pool_size = 0;
    for (int trial = 0; trial < trials; ++trial) {
      SelectionParams params{.pool_factor = factor, .seed = static_cast<std::uint64_t>(trial)};
      Pool pool = SamplePool(12, params, labeled);
      pool_size = pool.size();
      hits += SelectQuery(pool, cp).score >= cutoff;
    }
    const double guarantee = NearOptimalProbability(eps, pool_size);
    const double slack = 3.0 * std::sqrt(guarantee * (1 - guarantee) / trials);
    const double rate = hits / static_cast<double>(trials);
    ok = ok && rate >= guarantee - slack;
    detail += Format(" |R_p|=%zu rate %.3f vs %.3f-%.3f;", pool_size, rate, guarantee, slack);
  }
  return {ok, detail};
}

struct Recovery {
  double accuracy = 0.0;
  double identity_accuracy = 0.0;
  std::vector<double> w;
};

Recovery RecoverDim0(double noise_scale, bool standardize) {
  Dataset d = MakeSyntheticGaussians({2, 20, 4, 1, 6.0, 3});
  for (int f = 1; f < d.dim(); ++f) d.features.col(f) *= noise_scale;
  PreparedData p = PrepareData(d, 0.5, DeriveSeed(3, kStreamSplit), standardize);
  SimulatedOracle oracle(*p.train.labels, 0.0, 0);
  std::vector<Constraint> cs;
  for (const auto& e : BootstrapYesNoTriplets(oracle, p.train.size(), 30, 4))
    cs.push_back({e.triplet, e.answer});
  MetricWeights w = LearnMetric(p.train.features, cs, {}).weights;
  return {TripletAccuracy(w, p.test, 200000, 0),
          TripletAccuracy(MetricWeights::Identity(d.dim()), p.test, 200000, 0), w.ToVector()};
}

Outcome MetricRecovery() {
  Recovery base = RecoverDim0(1.0, true);
  const bool argmax0 = std::max_element(base.w.begin(), base.w.end()) == base.w.begin();
  Recovery loud = RecoverDim0(5.0, false);
  const bool ok = argmax0 && base.accuracy >= 0.9 && loud.accuracy > loud.identity_accuracy;
  return {ok, Format("w=(%.3f,%.3f,%.3f,%.3f) held-out acc %.3f (identity %.3f); noise x5: "
                     "learned %.3f vs identity %.3f",
                     base.w[0], base.w[1], base.w[2], base.w[3], base.accuracy,
                     base.identity_accuracy, loud.accuracy, loud.identity_accuracy)};
}

double Final(const ExperimentReport& r, PolicyKind p) {
  return r.cell(p, r.budget).triplet_accuracy.mean;
}

Outcome EndToEndOrdering() {
  ExperimentConfig c;
  c.runs = 10;
  c.budget = 40;
  c.seed = 1;
  c.threads = std::max(1u, std::thread::hardware_concurrency());
  ExperimentReport r = RunExperiment(MakeSyntheticGaussians({3, 40, 6, 2, 4.0, 7}), c);
  const double info = Final(r, PolicyKind::kInfo), rnd = Final(r, PolicyKind::kRandom),
               nr = Final(r, PolicyKind::kNonredundant);
  const double yn_info = r.YesNo(PolicyKind::kInfo).mean, yn_rnd = r.YesNo(PolicyKind::kRandom).mean;
  const bool ok = info >= rnd && info >= nr && yn_info - yn_rnd >= 0.10;
  return {ok, Format("triplet acc info %.4f random %.4f nonredundant %.4f; y/n info %.3f random "
                     "%.3f",
                     info, rnd, nr, yn_info, yn_rnd)};
}

Outcome SamplingVersusExact() {
  ExperimentConfig c;
  c.policies = {PolicyKind::kInfo, PolicyKind::kInfoExact};
  c.runs = 10;
  c.budget = 40;
  c.seed = 1;
  c.threads = std::max(1u, std::thread::hardware_concurrency());
  Dataset d = MakeSyntheticGaussians({3, 26, 6, 2, 4.0, 11});
  ExperimentReport r = RunExperiment(d, c);
  const auto n_train = static_cast<int>(
      SplitDataset(d, c.test_fraction, DeriveSeed(c.seed, kStreamSplit, 0)).train_indices.size());
  const double a = Final(r, PolicyKind::kInfo), b = Final(r, PolicyKind::kInfoExact);
  return {n_train <= 40 && std::abs(a - b) <= 0.05,
          Format("n_train=%d info %.4f info_exact %.4f |diff| %.4f", n_train, a, b,
                 std::abs(a - b))};
}

Outcome FullModeWine() {
  Dataset wine = LoadCsv(std::filesystem::path(RELCOMP_DATA_DIR) / "wine.csv",
                         {.label_column = "class"});
  // Same settings as `experiment --full --policies info --runs 5`.
  ExperimentConfig c;
  c.policies = {PolicyKind::kInfo};
  c.runs = 5;
  c.budget = 100;
  c.seed = 1;
  c.standardize = false;
  c.threads = std::max(1u, std::thread::hardware_concurrency());
  ExperimentReport r = RunExperiment(wine, c);
  const double before = r.cell(PolicyKind::kInfo, 0).one_nn_accuracy.mean;
  const double after = r.cell(PolicyKind::kInfo, 100).one_nn_accuracy.mean;
  return {after - before >= 0.05,
          Format("n=%d, 1NN %.3f -> %.3f (%+.3f)", wine.size(), before, after, after - before)};
}

// Runs a simulated session directory the way the CLI does, optionally
// stopping after `stop_after` answers and reloading from disk.
std::vector<std::string> SessionFiles(const std::filesystem::path& dir, int stop_after) {
  DatasetRef ref = testing::WriteDataset(dir, 10, 2);
  PreparedData data = PrepareSessionData(ref);
  LoopConfig config;
  config.num_classes = 3;
  config.selection.budget = 12;
  config.selection.seed = DeriveSeed(5, kStreamLoop, 0);
  SimulatedOracle oracle(*data.train.labels, 0.1, DeriveSeed(5, kStreamOracle, 0));
  auto initial = BootstrapYesNoTriplets(oracle, data.train.size(), 2, DeriveSeed(5, kStreamBootstrap, 0));
  for (const auto& e : initial) AppendAnswerLog(dir, e);
  ActiveSession s = ActiveSession::StartWithInitial(data.train.features, config, initial);
  StoredSession stored{ref, 5, s.state()};
  SaveSession(dir, stored);
  auto answer_all = [&](ActiveSession& session, StoredSession& st, int limit) {
    while (session.status() == SessionStatus::kAwaitingAnswer && limit-- > 0) {
      const auto pos = session.labeled().size();
      LabeledTriplet e{*session.pending(), oracle.Respond(*session.pending(), pos), "simulated",
                       static_cast<std::int64_t>(pos)};
      AppendAnswerLog(dir, e);
      session.Submit(e.answer, e.source, e.timestamp);
      st.state = session.state();
      SaveSession(dir, st);
    }
  };
  answer_all(s, stored, stop_after);
  if (s.status() == SessionStatus::kAwaitingAnswer) {
    LoadedSession loaded = LoadSession(dir);
    answer_all(loaded.session, loaded.stored, 1 << 30);
  }
  std::vector<std::string> out;
  for (const char* f : {kSessionFile, kAnswerLogFile, kHistoryFile, kMetricFile})
    out.push_back(testing::Slurp(dir / f));
  return out;
}

Outcome Determinism() {
  Dataset d = MakeSyntheticGaussians({3, 20, 5, 2, 3.0, 4});
  ExperimentConfig c;
  c.runs = 4;
  c.budget = 15;
  c.seed = 9;
  ExperimentReport a = RunExperiment(d, c);
  c.threads = 4;
  ExperimentReport b = RunExperiment(d, c);
  const bool reports = ReportToJson(a) == ReportToJson(b) && ReportToCsv(a) == ReportToCsv(b) &&
                       ReportToTsv(a) == ReportToTsv(b);

  testing::ScratchDir d1("accept_s1"), d2("accept_s2"), d3("accept_s3");
  auto straight = SessionFiles(d1.path(), 1 << 30);
  auto again = SessionFiles(d2.path(), 1 << 30);
  auto resumed = SessionFiles(d3.path(), 5);
  // The dataset path differs between directories; everything else must not.
  auto strip = [](std::string s, const std::filesystem::path& dir) {
    for (std::size_t p; (p = s.find(dir.string())) != std::string::npos;)
      s.replace(p, dir.string().size(), "DIR");
    return s;
  };
  bool sessions = true;
  for (std::size_t f = 0; f < straight.size(); ++f) {
    sessions = sessions && strip(straight[f], d1.path()) == strip(again[f], d2.path()) &&
               strip(straight[f], d1.path()) == strip(resumed[f], d3.path());
  }
  return {reports && sessions,
          Format("experiment reports identical across reruns and thread counts: %s; session "
                 "files identical across reruns and a mid-session reload: %s",
                 reports ? "yes" : "no", sessions ? "yes" : "no")};
}

}  // namespace
}  // namespace relcomp

int main() {
  using namespace relcomp;
  struct Criterion {
    const char* name;
    double seconds_limit;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"oracle-equivalence", 10, OracleEquivalence},
      {"exact-mutual-information", 0, ExactMutualInformation},
      {"oracle-truth-table", 0, TruthTable},
      {"near-optimal-pool-guarantee", 120, NearOptimalGuarantee},
      {"metric-learner-recovery", 30, MetricRecovery},
      {"end-to-end-ordering", 600, EndToEndOrdering},
      {"sampling-vs-exact", 0, SamplingVersusExact},
      {"full-mode-wine", 1800, FullModeWine},
      {"determinism", 0, Determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.seconds_limit <= 0 || secs < c.seconds_limit;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %s: %s [%.2fs%s]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  return failed;
}
