#ifndef RELCOMP_SESSION_STORE_H_
#define RELCOMP_SESSION_STORE_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "relcomp/active_session.h"
#include "relcomp/dataset.h"

namespace relcomp {

inline constexpr int kSessionSchemaVersion = 1;

class SessionFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Where the session's training data comes from.
struct DatasetRef {
  std::string path;
  std::string label_column;  // empty: unlabeled
  double test_fraction = 0.0;
  std::uint64_t split_seed = 0;
  bool standardize = true;
  std::uint64_t fingerprint = 0;  // FeatureFingerprint of the training fold
};

struct StoredSession {
  DatasetRef dataset;
  std::uint64_t master_seed = 0;
  SessionState state;
};

// Layout of a session directory:
//   session.json   header and full loop state, replaced atomically
//   answers.jsonl  append-only answer log {i, j, k, answer, source, ts}
//   history.jsonl  one line per issued query
//   metric.json    {"weights": [...]}
inline constexpr char kSessionFile[] = "session.json";
inline constexpr char kAnswerLogFile[] = "answers.jsonl";
inline constexpr char kHistoryFile[] = "history.jsonl";
inline constexpr char kMetricFile[] = "metric.json";

std::string SessionToJson(const StoredSession& session);
// Throws SessionFormatError on malformed input or a schema version mismatch.
StoredSession SessionFromJson(const std::string& text);

// Writes session.json (via a temporary file and rename), history.jsonl and
// metric.json.
void SaveSession(const std::filesystem::path& dir, const StoredSession& session);

// Appends one line and flushes it to disk before returning.
void AppendAnswerLog(const std::filesystem::path& dir, const LabeledTriplet& entry);
std::vector<LabeledTriplet> ReadAnswerLog(const std::filesystem::path& dir);

std::string LabeledTripletToJsonLine(const LabeledTriplet& entry);
LabeledTriplet LabeledTripletFromJsonLine(const std::string& line);

std::string MetricToJson(const MetricWeights& w);
MetricWeights MetricFromJson(const std::string& text);

// Loads the dataset a session refers to and checks its fingerprint.
PreparedData PrepareSessionData(const DatasetRef& ref);

struct LoadedSession {
  StoredSession stored;
  ActiveSession session;
  PreparedData data;
  int replayed = 0;  // log entries applied on top of session.json
};

// Reads session.json, reloads the data and replays answers.jsonl entries that
// arrived after the last header write. Never modifies the directory.
LoadedSession LoadSession(const std::filesystem::path& dir);

}  // namespace relcomp

#endif  // RELCOMP_SESSION_STORE_H_
