#include "relcomp/info_gain.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace relcomp {
namespace {

double XLogX(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double Convert(double nats, LogBase base) {
  return base == LogBase::kNatural ? nats : nats / std::numbers::ln2;
}

void CheckTriplet(const ClassProbs& cp, const Triplet& t) {
  if (!t.IsValid(cp.size()))
    throw std::invalid_argument("triplet index outside the class-probability rows");
}

double RowEntropyNats(const ClassProbs& cp, int h) {
  double s = 0.0;
  for (int c = 0; c < cp.num_classes(); ++c) s -= XLogX(cp(h, c));
  return s;
}

// sum over labelings (c, c, c') with c' != c of q log q, where
// q = p_a(c) p_b(c) p_z(c'); `a` and `b` are the two instances that share a
// class under the answer.
double SumQLogQ(const ClassProbs& cp, int a, int b, int z) {
  double s_z = 0.0;
  for (int c = 0; c < cp.num_classes(); ++c) s_z += XLogX(cp(z, c));
  double total = 0.0;
  for (int c = 0; c < cp.num_classes(); ++c) {
    double pair = cp(a, c) * cp(b, c);
    if (pair <= 0.0) continue;
    double rest = 1.0 - cp(z, c);
    total += pair * (std::log(pair) * rest + (s_z - XLogX(cp(z, c))));
  }
  return total;
}

double PosteriorEntropyNats(const ClassProbs& cp, const Triplet& t, Answer a,
                            double p_a) {
  double sum = a == Answer::kYes ? SumQLogQ(cp, t.i, t.j, t.k)
                                 : SumQLogQ(cp, t.i, t.k, t.j);
  return std::max(0.0, std::log(p_a) - sum / p_a);
}

}  // namespace

AnswerProbs AnswerProbabilities(const ClassProbs& cp, const Triplet& t) {
  CheckTriplet(cp, t);
  AnswerProbs out;
  for (int c = 0; c < cp.num_classes(); ++c) {
    out.yes += cp(t.i, c) * cp(t.j, c) * (1.0 - cp(t.k, c));
    out.no += cp(t.i, c) * cp(t.k, c) * (1.0 - cp(t.j, c));
  }
  out.dk = std::max(0.0, 1.0 - (out.yes + out.no));
  return out;
}

double PriorEntropy(const ClassProbs& cp, const Triplet& t, LogBase base) {
  CheckTriplet(cp, t);
  double nats = RowEntropyNats(cp, t.i) + (RowEntropyNats(cp, t.j) + RowEntropyNats(cp, t.k));
  return Convert(nats, base);
}

double PosteriorEntropy(const ClassProbs& cp, const Triplet& t, Answer a, LogBase base) {
  if (a == Answer::kDontKnow)
    throw std::invalid_argument("PosteriorEntropy is defined for yes/no answers");
  AnswerProbs probs = AnswerProbabilities(cp, t);
  double p_a = probs.of(a);
  if (!(p_a > 0.0))
    throw std::invalid_argument("PosteriorEntropy: answer has zero probability");
  return Convert(PosteriorEntropyNats(cp, t, a, p_a), base);
}

double InfoGain(const ClassProbs& cp, const Triplet& t, LogBase base) {
  AnswerProbs probs = AnswerProbabilities(cp, t);
  // Grouped so that (i,j,k) and its mirror (i,k,j), which have the same
  // gain, also get bit-identical scores and the tie rule decides.
  double prior = RowEntropyNats(cp, t.i) + (RowEntropyNats(cp, t.j) + RowEntropyNats(cp, t.k));
  double yes_term = probs.yes > 0.0
                        ? probs.yes * PosteriorEntropyNats(cp, t, Answer::kYes, probs.yes)
                        : 0.0;
  double no_term =
      probs.no > 0.0 ? probs.no * PosteriorEntropyNats(cp, t, Answer::kNo, probs.no) : 0.0;
  return Convert((1.0 - probs.dk) * prior - (yes_term + no_term), base);
}

}  // namespace relcomp
