#ifndef RELCOMP_SESSION_SERVICE_H_
#define RELCOMP_SESSION_SERVICE_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "relcomp/active_session.h"
#include "relcomp/session_store.h"

namespace relcomp {

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

// Single-session human-oracle bridge behind the /v1 HTTP API. Submissions
// are serialized; readers are served from an immutable snapshot that is
// republished after every state change, so a read never observes a half-
// applied answer.
class SessionService {
 public:
  // `dir` receives the answer log and session files.
  SessionService(LoadedSession loaded, std::filesystem::path dir);

  // Fresh session on `data`, persisted to `dir` immediately.
  static std::unique_ptr<SessionService> Create(PreparedData data, DatasetRef ref,
                                                std::uint64_t master_seed,
                                                const LoopConfig& config,
                                                std::filesystem::path dir);

  ServiceResponse GetStatus() const;
  ServiceResponse GetQuery() const;
  ServiceResponse GetMetric() const;
  ServiceResponse GetHistory() const;
  // Body: {"answer": "yes"|"no"|"dk", "query_id": N (optional)}.
  ServiceResponse PostAnswer(std::string_view body);

  // Called while a submission is being processed (status "computing").
  void SetComputeObserver(std::function<void()> observer) {
    compute_observer_ = std::move(observer);
  }

  const ActiveSession& session() const { return loaded_.session; }

 private:
  struct Snapshot {
    std::string status;
    std::string query;  // payload, or empty when none is pending
    std::string metric;
    std::string history;
    std::string progress;
  };

  void Publish(bool computing);
  std::shared_ptr<const Snapshot> snapshot() const;
  std::string BuildQueryPayload() const;
  std::string BuildProgress(bool computing) const;

  LoadedSession loaded_;
  std::filesystem::path dir_;
  std::mutex writer_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::function<void()> compute_observer_;
};

}  // namespace relcomp

#endif  // RELCOMP_SESSION_SERVICE_H_
