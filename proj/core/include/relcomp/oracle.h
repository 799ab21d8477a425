#ifndef RELCOMP_ORACLE_H_
#define RELCOMP_ORACLE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "relcomp/triplet.h"

namespace relcomp {

// yes if y_i = y_j != y_k, no if y_i = y_k != y_j (the mirror of yes), dk
// otherwise.
Answer AnswerFromLabels(int yi, int yj, int yk);

// p(l | y_i, y_j, y_k) as a deterministic lookup over all C^3 label
// configurations.
class AnswerTable {
 public:
  explicit AnswerTable(int num_classes);

  int num_classes() const { return num_classes_; }
  std::size_t size() const { return table_.size(); }
  Answer at(int yi, int yj, int yk) const {
    return table_[(static_cast<std::size_t>(yi) * num_classes_ + yj) *
                      num_classes_ +
                  yk];
  }
  int Count(Answer a) const;

 private:
  int num_classes_;
  std::vector<Answer> table_;
};

AnswerTable EnumerateAnswerTable(int num_classes);

// Label-derived answer with an optional symmetric yes<->no flip. The flip
// decision for a query is drawn from DeriveSeed(seed, oracle stream, position),
// so a replay that asks the same questions in the same order gets the same
// answers.
Answer SimulatedAnswer(std::span<const int> labels, const Triplet& t,
                       double noise_rate, std::uint64_t seed,
                       std::uint64_t position);

// Source of answers for the active loop. Returning nullopt means the oracle is
// unavailable; the loop pauses with the query still pending.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::optional<Answer> Ask(const Triplet& t, std::uint64_t position) = 0;
  virtual const char* source() const = 0;
  // Timestamp recorded with the answer; logical (the position) by default.
  virtual std::int64_t timestamp(std::uint64_t position) const {
    return static_cast<std::int64_t>(position);
  }
};

class SimulatedOracle : public Oracle {
 public:
  SimulatedOracle(std::vector<int> labels, double noise_rate, std::uint64_t seed);

  std::optional<Answer> Ask(const Triplet& t, std::uint64_t position) override {
    return Respond(t, position);
  }
  const char* source() const override { return "simulated"; }

  Answer Respond(const Triplet& t, std::uint64_t position) const;
  const std::vector<int>& labels() const { return labels_; }

 private:
  std::vector<int> labels_;
  double noise_rate_;
  std::uint64_t seed_;
};

// Rejection-samples random triplets over n instances until `count` of them
// receive a yes/no answer. Rejected draws are not recorded. Throws if no
// yes/no triplet turns up within `max_draws`.
std::vector<LabeledTriplet> BootstrapYesNoTriplets(const SimulatedOracle& oracle,
                                                   int n, int count,
                                                   std::uint64_t seed,
                                                   int max_draws = 1000000);

}  // namespace relcomp

#endif  // RELCOMP_ORACLE_H_
