// relcomp: experiments, labeling sessions and the /v1 labeling service.

#include <csignal>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "relcomp/active_session.h"
#include "relcomp/dataset.h"
#include "relcomp/evaluation.h"
#include "relcomp/experiment.h"
#include "relcomp/http_server.h"
#include "relcomp/rng.h"
#include "relcomp/session_service.h"
#include "relcomp/session_store.h"

namespace fs = std::filesystem;
using namespace relcomp;

namespace {

struct DataFlags {
  std::string path;
  std::string label_col = "class";
  bool no_standardize = false;
};

void AddDataFlags(CLI::App* cmd, DataFlags& f, bool required) {
  auto* opt = cmd->add_option("--data", f.path, "CSV file with a header row");
  if (required) opt->required();
  opt->check(CLI::ExistingFile);
  cmd->add_option("--label-col", f.label_col, "Label column name (empty: unlabeled)");
  cmd->add_flag("--no-standardize", f.no_standardize,
                "Keep raw feature scales instead of z-scoring on the training fold");
}

// The label column when the CSV header has it, else empty (unlabeled data).
std::string LabelColumnIfPresent(const std::string& path, const std::string& name) {
  if (name.empty()) return name;
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  std::stringstream ss(header);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"')
      cell = cell.substr(1, cell.size() - 2);
    if (cell == name) return name;
  }
  return {};
}

Dataset LoadData(const DataFlags& f) {
  CsvOptions options;
  if (!f.label_col.empty()) options.label_column = f.label_col;
  return LoadCsv(f.path, options);
}

std::string Fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::int64_t WallClockMillis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

// Reads answers from stdin. "q" or end of input pauses the session.
class TerminalOracle : public Oracle {
 public:
  TerminalOracle(const Dataset& train, const ActiveSession& session)
      : train_(train), session_(session) {}

  std::optional<Answer> Ask(const Triplet& t, std::uint64_t) override {
    std::cout << "\nquery " << session_.query_id() << " (" << session_.remaining()
              << " left): is " << Describe(t.i) << "\n  more similar to " << Describe(t.j)
              << "\n  than to " << Describe(t.k) << "?\n";
    while (true) {
      std::cout << "[y]es / [n]o / [d]on't know / [q]uit > " << std::flush;
      std::string line;
      if (!std::getline(std::cin, line) || line == "q" || line == "quit") return std::nullopt;
      try {
        return ParseAnswer(line);
      } catch (const std::exception&) {
        std::cout << "unrecognized answer '" << line << "'\n";
      }
    }
  }
  const char* source() const override { return "human"; }
  std::int64_t timestamp(std::uint64_t) const override { return WallClockMillis(); }

 private:
  std::string Describe(int h) const {
    std::ostringstream os;
    os << train_.ids[h] << " (";
    for (int f = 0; f < train_.dim(); ++f) {
      if (f) os << ", ";
      if (f < static_cast<int>(train_.feature_names.size()))
        os << train_.feature_names[f] << "=";
      os << Fixed(train_.features(h, f), 3);
    }
    os << ")";
    return os.str();
  }

  const Dataset& train_;
  const ActiveSession& session_;
};

// Asks until the budget is spent or the oracle pauses. The answer is on disk
// before the session moves on.
void Drive(ActiveSession& session, StoredSession& stored, const fs::path& dir, Oracle& oracle) {
  const bool trace = session.state().config.trace_scores;
  while (session.status() == SessionStatus::kAwaitingAnswer) {
    const auto position = static_cast<std::uint64_t>(session.labeled().size());
    std::optional<Answer> answer = oracle.Ask(*session.pending(), position);
    if (!answer) {
      std::cout << "session paused at " << session.budget_used() << "/" << session.budget()
                << " queries; continue with `relcomp session resume --dir " << dir.string()
                << "`\n";
      return;
    }
    LabeledTriplet entry{*session.pending(), *answer, oracle.source(),
                         oracle.timestamp(position)};
    AppendAnswerLog(dir, entry);
    session.Submit(entry.answer, entry.source, entry.timestamp);
    stored.state = session.state();
    SaveSession(dir, stored);
    if (trace && !session.last_scores().empty()) {
      std::ofstream f(dir / "scores.jsonl", std::ios::app);
      f << nlohmann::json{{"query_id", session.query_id()}, {"scores", session.last_scores()}}
               .dump()
        << "\n";
    }
  }
  std::cout << "session complete: " << session.budget_used() << " queries, "
            << session.labeled().CountYesNo() << " yes/no answers\nweights:";
  for (double w : session.metric().ToVector()) std::cout << " " << Fixed(w);
  std::cout << "\n";
}

std::unique_ptr<Oracle> MakeOracle(const std::string& kind, const PreparedData& data,
                                   const ActiveSession& session, double noise,
                                   std::uint64_t master_seed) {
  if (kind == "human") return std::make_unique<TerminalOracle>(data.train, session);
  if (!data.train.labels)
    throw std::invalid_argument("the simulated oracle needs --label-col with hidden labels");
  return std::make_unique<SimulatedOracle>(*data.train.labels, noise,
                                           DeriveSeed(master_seed, kStreamOracle, 0));
}

struct LoopFlags {
  std::string policy = "info";
  int budget = 40;
  int pool_factor = 100;
  std::uint64_t seed = 1;
  int classes = 0;
  double slack = 1.0;
  double margin = 1.0;
  bool trace_scores = false;
};

void AddLoopFlags(CLI::App* cmd, LoopFlags& f) {
  cmd->add_option("--policy", f.policy, "info, info_exact, random or nonredundant");
  cmd->add_option("--budget", f.budget, "Number of queries")->check(CLI::PositiveNumber);
  cmd->add_option("--pool-factor", f.pool_factor, "Pool size is pool-factor times n")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--classes", f.classes, "Number of classes (default: from labels)");
  cmd->add_option("--slack", f.slack, "Learner slack trade-off")->check(CLI::PositiveNumber);
  cmd->add_option("--margin", f.margin, "Learner margin")->check(CLI::PositiveNumber);
}

LoopConfig MakeLoopConfig(const LoopFlags& f, const Dataset& train) {
  LoopConfig c;
  c.policy = ParsePolicy(f.policy);
  c.num_classes = f.classes > 0 ? f.classes : train.num_classes;
  if (c.num_classes < 1) throw std::invalid_argument("unlabeled data: pass --classes");
  c.selection.budget = f.budget;
  c.selection.pool_factor = f.pool_factor;
  c.learner.slack_tradeoff = f.slack;
  c.learner.margin = f.margin;
  c.trace_scores = f.trace_scores;
  return c;
}

int CmdSynth(const SyntheticSpec& spec, const std::string& out) {
  Dataset ds = MakeSyntheticGaussians(spec);
  WriteCsv(ds, out);
  std::cout << "wrote " << ds.size() << " x " << ds.dim() << " (" << ds.num_classes
            << " classes) to " << out << "\n";
  return 0;
}

int CmdExperiment(const DataFlags& df, ExperimentConfig config, const std::string& policies,
                  const std::string& out, const SyntheticSpec* synthetic) {
  Dataset ds = df.path.empty() ? MakeSyntheticGaussians(*synthetic) : LoadData(df);
  config.policies = ParsePolicyList(policies);
  ExperimentReport report = RunExperiment(ds, config);
  for (const auto& rec : report.records)
    if (!rec.error.empty())
      std::cerr << "run " << rec.run << " (" << ToString(rec.policy) << ") failed: " << rec.error
                << "\n";
  if (!out.empty()) WriteReport(report, out);

  std::cout << "policy        queries  triplet_acc        1nn_acc\n";
  auto stat = [](const SummaryStat& s) {
    return Fixed(s.mean) + (s.ci95 ? " +- " + Fixed(*s.ci95) : std::string(9, ' '));
  };
  for (const auto& c : report.cells) {
    std::string name(ToString(c.policy));
    name.resize(13, ' ');
    std::string q = std::to_string(c.queries);
    q.insert(0, 7 - std::min<std::size_t>(7, q.size()), ' ');
    std::cout << name << " " << q << "  " << stat(c.triplet_accuracy) << "  "
              << stat(c.one_nn_accuracy) << "\n";
  }
  for (std::size_t p = 0; p < report.policies.size(); ++p)
    std::cout << "yes/no proportion " << ToString(report.policies[p]) << ": "
              << stat(report.yes_no_proportion[p]) << "\n";
  if (!out.empty()) std::cout << "report written to " << out << "\n";
  return 0;
}

int CmdSessionStart(const DataFlags& df, LoopFlags lf, const std::string& oracle_kind,
                    double noise, double test_fraction, const fs::path& dir) {
  if (fs::exists(dir / kSessionFile))
    throw std::runtime_error("a session already exists in " + dir.string() +
                             "; use `session resume`");
  DatasetRef ref;
  ref.path = fs::absolute(df.path).string();
  ref.label_column = LabelColumnIfPresent(df.path, df.label_col);
  ref.test_fraction = test_fraction;
  ref.split_seed = DeriveSeed(lf.seed, kStreamSplit, 0);
  ref.standardize = !df.no_standardize;
  PreparedData data = PrepareSessionData(ref);
  ref.fingerprint = FeatureFingerprint(data.train.features);

  LoopConfig config = MakeLoopConfig(lf, data.train);
  config.selection.seed = DeriveSeed(lf.seed, kStreamLoop, 0);

  std::optional<ActiveSession> session;
  std::unique_ptr<Oracle> oracle;
  if (oracle_kind == "simulated") {
    if (!data.train.labels) throw std::invalid_argument("the simulated oracle needs labels");
    SimulatedOracle sim(*data.train.labels, noise, DeriveSeed(lf.seed, kStreamOracle, 0));
    std::vector<LabeledTriplet> initial = BootstrapYesNoTriplets(
        sim, data.train.size(), 2, DeriveSeed(lf.seed, kStreamBootstrap, 0));
    for (const auto& e : initial) AppendAnswerLog(dir, e);
    session.emplace(ActiveSession::StartWithInitial(data.train.features, config, initial));
  } else {
    session.emplace(ActiveSession::StartWithBootstrapQueries(data.train.features, config));
  }
  StoredSession stored{ref, lf.seed, session->state()};
  SaveSession(dir, stored);
  oracle = MakeOracle(oracle_kind, data, *session, noise, lf.seed);
  Drive(*session, stored, dir, *oracle);
  return 0;
}

int CmdSessionResume(const fs::path& dir, const std::string& oracle_kind, double noise) {
  LoadedSession loaded = LoadSession(dir);
  if (loaded.replayed > 0) {
    std::cout << "replayed " << loaded.replayed << " logged answer(s)\n";
    loaded.stored.state = loaded.session.state();
    SaveSession(dir, loaded.stored);
  }
  auto oracle =
      MakeOracle(oracle_kind, loaded.data, loaded.session, noise, loaded.stored.master_seed);
  Drive(loaded.session, loaded.stored, dir, *oracle);
  return 0;
}

int CmdServe(const DataFlags& df, LoopFlags lf, const std::string& host, int port,
             const fs::path& dir, const std::string& static_dir) {
  std::unique_ptr<SessionService> service;
  if (fs::exists(dir / kSessionFile)) {
    LoadedSession loaded = LoadSession(dir);
    loaded.stored.state = loaded.session.state();
    SaveSession(dir, loaded.stored);
    std::cout << "resuming session in " << dir.string() << "\n";
    service = std::make_unique<SessionService>(std::move(loaded), dir);
  } else {
    if (df.path.empty()) throw std::invalid_argument("--data is required for a new session");
    DatasetRef ref;
    ref.path = fs::absolute(df.path).string();
    ref.label_column = LabelColumnIfPresent(df.path, df.label_col);
    ref.split_seed = DeriveSeed(lf.seed, kStreamSplit, 0);
    ref.standardize = !df.no_standardize;
    PreparedData data = PrepareSessionData(ref);
    LoopConfig config = MakeLoopConfig(lf, data.train);
    config.always_estimate_probs = true;
    service = SessionService::Create(std::move(data), ref, lf.seed, config, dir);
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::optional<fs::path> static_path;
  if (!static_dir.empty()) static_path = static_dir;
  HttpServer server(*service, static_path);
  int bound = server.Start(host, port);
  std::cout << "listening on http://" << host << ":" << bound << "/v1" << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.Stop();
  std::cout << "stopped\n";
  return 0;
}

int CmdEval(const DataFlags& df, const std::string& metric_path, bool identity,
            double test_fraction, std::uint64_t seed, std::uint64_t sample_cap) {
  Dataset ds = LoadData(df);
  if (!ds.labels) throw std::invalid_argument("eval needs labels (--label-col)");
  PreparedData data =
      PrepareData(ds, test_fraction, DeriveSeed(seed, kStreamSplit, 0), !df.no_standardize);
  MetricWeights w = MetricWeights::Identity(ds.dim());
  if (!identity) {
    std::ifstream f(metric_path);
    if (!f) throw std::runtime_error("cannot read " + metric_path);
    std::stringstream ss;
    ss << f.rdbuf();
    w = MetricFromJson(ss.str());
  }
  if (w.dim() != ds.dim()) throw std::invalid_argument("metric dimension does not match data");
  nlohmann::ordered_json out;
  out["triplet_accuracy"] = TripletAccuracy(w, data.test, sample_cap, seed);
  out["one_nn_accuracy"] = OneNnAccuracy(w, data.train, data.test);
  out["train"] = data.train.size();
  out["test"] = data.test.size();
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active metric learning from relative comparisons"};
  app.require_subcommand(1);

  SyntheticSpec synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic Gaussian-blob dataset");
  synth_cmd->add_option("--classes", synth.num_classes)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--per-class", synth.per_class)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--dim", synth.dim)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--informative", synth.informative_dims);
  synth_cmd->add_option("--separation", synth.separation);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth_out, "Output CSV")->required();

  DataFlags exp_data;
  ExperimentConfig exp;
  std::string exp_policies = "info,random,nonredundant";
  std::string exp_out;
  bool full = false;
  SyntheticSpec exp_synth;
  exp_synth.seed = 7;
  auto* exp_cmd = app.add_subcommand("experiment", "Compare query policies over seeded runs");
  AddDataFlags(exp_cmd, exp_data, false);
  exp_cmd->add_option("--policies", exp_policies, "Comma-separated policy list");
  auto* runs_opt = exp_cmd->add_option("--runs", exp.runs)->check(CLI::PositiveNumber);
  auto* budget_opt = exp_cmd->add_option("--budget", exp.budget)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--seed", exp.seed);
  exp_cmd->add_option("--checkpoints", exp.checkpoints, "Query counts to evaluate at")
      ->delimiter(',');
  exp_cmd->add_option("--test-fraction", exp.test_fraction)->check(CLI::Range(0.01, 0.99));
  exp_cmd->add_option("--threads", exp.threads)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--noise", exp.noise_rate, "Yes/no flip rate of the simulated oracle")
      ->check(CLI::Range(0.0, 0.999));
  exp_cmd->add_option("--sample-cap", exp.triplet_sample_cap, "Test triplets evaluated at most");
  exp_cmd->add_option("--pool-factor", exp.loop.selection.pool_factor)
      ->check(CLI::PositiveNumber);
  bool exp_standardize = false;
  exp_cmd->add_flag("--full", full, "Full protocol: 50 runs, 100 queries, raw features");
  exp_cmd->add_flag("--standardize", exp_standardize, "Standardize features under --full")
      ->excludes("--no-standardize");
  exp_cmd->add_option("--out", exp_out, "Directory for report.csv, report.json, curve.tsv");

  DataFlags ses_data;
  LoopFlags ses_loop;
  std::string ses_oracle = "human";
  double ses_noise = 0.0;
  double ses_test_fraction = 0.0;
  std::string ses_dir;
  auto* ses_cmd = app.add_subcommand("session", "Run a labeling session in the terminal");
  ses_cmd->require_subcommand(1);
  auto* start_cmd = ses_cmd->add_subcommand("start", "Start a new session");
  AddDataFlags(start_cmd, ses_data, true);
  AddLoopFlags(start_cmd, ses_loop);
  start_cmd->add_option("--oracle", ses_oracle)->check(CLI::IsMember({"human", "simulated"}));
  start_cmd->add_option("--noise", ses_noise)->check(CLI::Range(0.0, 0.999));
  start_cmd->add_option("--test-fraction", ses_test_fraction, "Hold out part of the data")
      ->check(CLI::Range(0.0, 0.99));
  start_cmd->add_flag("--trace-scores", ses_loop.trace_scores, "Dump pool scores per query");
  start_cmd->add_option("--out", ses_dir, "Session directory")->required();
  auto* resume_cmd = ses_cmd->add_subcommand("resume", "Continue a saved session");
  resume_cmd->add_option("--dir", ses_dir, "Session directory")->required();
  resume_cmd->add_option("--oracle", ses_oracle)->check(CLI::IsMember({"human", "simulated"}));
  resume_cmd->add_option("--noise", ses_noise)->check(CLI::Range(0.0, 0.999));

  DataFlags srv_data;
  LoopFlags srv_loop;
  srv_loop.budget = 20;
  std::string srv_host = "127.0.0.1";
  int srv_port = -1;
  std::string srv_dir = "session";
  std::string srv_static;
  auto* serve_cmd = app.add_subcommand("serve", "Serve one labeling session over HTTP (/v1)");
  AddDataFlags(serve_cmd, srv_data, false);
  AddLoopFlags(serve_cmd, srv_loop);
  serve_cmd->add_option("--host", srv_host);
  serve_cmd->add_option("--port", srv_port, "Port (default: $RELCOMP_PORT or 8080; 0 = any)");
  serve_cmd->add_option("--out", srv_dir, "Session directory (resumed when it holds a session)");
  serve_cmd->add_option("--static", srv_static, "Directory with the labeling UI bundle")
      ->check(CLI::ExistingDirectory);

  DataFlags eval_data;
  std::string eval_metric;
  bool eval_identity = false;
  double eval_fraction = 0.5;
  std::uint64_t eval_seed = 1;
  std::uint64_t eval_cap = 200000;
  auto* eval_cmd = app.add_subcommand("eval", "Triplet and 1NN accuracy of a metric");
  AddDataFlags(eval_cmd, eval_data, true);
  auto* metric_opt = eval_cmd->add_option("--metric", eval_metric, "metric.json");
  eval_cmd->add_flag("--identity", eval_identity, "Evaluate the unweighted Euclidean metric")
      ->excludes(metric_opt);
  eval_cmd->add_option("--test-fraction", eval_fraction)->check(CLI::Range(0.01, 0.99));
  eval_cmd->add_option("--seed", eval_seed);
  eval_cmd->add_option("--sample-cap", eval_cap);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return CmdSynth(synth, synth_out);
    if (*exp_cmd) {
      exp.standardize = !exp_data.no_standardize;
      if (full) {
        if (runs_opt->count() == 0) exp.runs = 50;
        if (budget_opt->count() == 0) exp.budget = 100;
        exp.standardize = exp_standardize;
      }
      return CmdExperiment(exp_data, exp, exp_policies, exp_out, &exp_synth);
    }
    if (*start_cmd)
      return CmdSessionStart(ses_data, ses_loop, ses_oracle, ses_noise, ses_test_fraction,
                             ses_dir);
    if (*resume_cmd) return CmdSessionResume(ses_dir, ses_oracle, ses_noise);
    if (*serve_cmd) {
      int port = srv_port >= 0 ? srv_port : PortFromEnvironment(8080);
      return CmdServe(srv_data, srv_loop, srv_host, port, srv_dir, srv_static);
    }
    if (*eval_cmd) {
      if (!eval_identity && eval_metric.empty())
        throw std::invalid_argument("pass --metric FILE or --identity");
      return CmdEval(eval_data, eval_metric, eval_identity, eval_fraction, eval_seed, eval_cap);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
