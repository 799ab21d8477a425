#ifndef RELCOMP_INFO_GAIN_H_
#define RELCOMP_INFO_GAIN_H_

#include "relcomp/forest.h"
#include "relcomp/triplet.h"

namespace relcomp {

// Predictive distribution of a triplet's answer given per-instance class
// probabilities, assuming independent labels:
//   p_yes = sum_c p_i(c) p_j(c) (1 - p_k(c))
//   p_no  = sum_c p_i(c) p_k(c) (1 - p_j(c))
//   p_dk  = 1 - p_yes - p_no
struct AnswerProbs {
  double yes = 0.0;
  double no = 0.0;
  double dk = 0.0;

  double of(Answer a) const {
    return a == Answer::kYes ? yes : a == Answer::kNo ? no : dk;
  }
};

enum class LogBase { kNatural, kTwo };

AnswerProbs AnswerProbabilities(const ClassProbs& cp, const Triplet& t);

// H(y_i) + H(y_j) + H(y_k), with 0 log 0 = 0.
double PriorEntropy(const ClassProbs& cp, const Triplet& t,
                    LogBase base = LogBase::kNatural);

// Entropy of p(y_i, y_j, y_k | answer = a) for a in {yes, no}. Evaluated in
// O(C) by summing the posterior over the configurations the answer allows.
// Throws std::invalid_argument for dk or when p_a = 0.
double PosteriorEntropy(const ClassProbs& cp, const Triplet& t, Answer a,
                        LogBase base = LogBase::kNatural);

// (1 - p_dk) H(y) - p_yes H(y | yes) - p_no H(y | no). A dk answer is
// treated as carrying no information, and an answer with zero probability
// contributes nothing.
double InfoGain(const ClassProbs& cp, const Triplet& t,
                LogBase base = LogBase::kNatural);

}  // namespace relcomp

#endif  // RELCOMP_INFO_GAIN_H_
