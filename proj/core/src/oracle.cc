#include "relcomp/oracle.h"

#include <stdexcept>
#include <unordered_set>

#include "relcomp/rng.h"

namespace relcomp {

Answer AnswerFromLabels(int yi, int yj, int yk) {
  if (yi == yj && yj != yk) return Answer::kYes;
  if (yi == yk && yk != yj) return Answer::kNo;
  return Answer::kDontKnow;
}

AnswerTable::AnswerTable(int num_classes) : num_classes_(num_classes) {
  if (num_classes < 1) throw std::invalid_argument("AnswerTable: num_classes < 1");
  table_.reserve(static_cast<std::size_t>(num_classes) * num_classes * num_classes);
  for (int a = 0; a < num_classes; ++a)
    for (int b = 0; b < num_classes; ++b)
      for (int c = 0; c < num_classes; ++c) table_.push_back(AnswerFromLabels(a, b, c));
}

int AnswerTable::Count(Answer a) const {
  int n = 0;
  for (Answer x : table_) n += x == a ? 1 : 0;
  return n;
}

AnswerTable EnumerateAnswerTable(int num_classes) { return AnswerTable(num_classes); }

Answer SimulatedAnswer(std::span<const int> labels, const Triplet& t,
                       double noise_rate, std::uint64_t seed,
                       std::uint64_t position) {
  if (!t.IsValid(static_cast<int>(labels.size())))
    throw std::invalid_argument("SimulatedAnswer: triplet outside the labeled set");
  if (!(noise_rate >= 0.0 && noise_rate < 1.0))
    throw std::invalid_argument("SimulatedAnswer: noise_rate must lie in [0, 1)");
  Answer a = AnswerFromLabels(labels[t.i], labels[t.j], labels[t.k]);
  if (a == Answer::kDontKnow || noise_rate == 0.0) return a;
  Rng rng(DeriveSeed(seed, kStreamOracle, position));
  if (UniformUnit(rng) < noise_rate) a = a == Answer::kYes ? Answer::kNo : Answer::kYes;
  return a;
}

SimulatedOracle::SimulatedOracle(std::vector<int> labels, double noise_rate,
                                 std::uint64_t seed)
    : labels_(std::move(labels)), noise_rate_(noise_rate), seed_(seed) {
  if (!(noise_rate >= 0.0 && noise_rate < 1.0))
    throw std::invalid_argument("SimulatedOracle: noise_rate must lie in [0, 1)");
}

Answer SimulatedOracle::Respond(const Triplet& t, std::uint64_t position) const {
  return SimulatedAnswer(labels_, t, noise_rate_, seed_, position);
}

std::vector<LabeledTriplet> BootstrapYesNoTriplets(const SimulatedOracle& oracle,
                                                   int n, int count,
                                                   std::uint64_t seed,
                                                   int max_draws) {
  if (n < 3) throw std::invalid_argument("bootstrap needs at least 3 instances");
  Rng rng(DeriveSeed(seed, kStreamBootstrap));
  std::vector<LabeledTriplet> out;
  std::unordered_set<Triplet, TripletHash> seen;
  for (int draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    Triplet t;
    t.i = static_cast<int>(UniformIndex(rng, n));
    do t.j = static_cast<int>(UniformIndex(rng, n)); while (t.j == t.i);
    do t.k = static_cast<int>(UniformIndex(rng, n)); while (t.k == t.i || t.k == t.j);
    if (!seen.insert(t).second) continue;
    // Rejected draws are free, so the noise stream is indexed by accepted
    // entries only.
    Answer a = oracle.Respond(t, out.size());
    if (IsYesNo(a)) out.push_back({t, a, "bootstrap", static_cast<std::int64_t>(out.size())});
  }
  if (static_cast<int>(out.size()) < count)
    throw std::runtime_error("could not find enough yes/no triplets to bootstrap");
  return out;
}

}  // namespace relcomp
