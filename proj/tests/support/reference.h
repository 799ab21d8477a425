// Brute-force reference computations used as oracles by the unit tests.
// Deliberately naive: nothing here shares code with the library's closed
// forms.
#ifndef RELCOMP_TESTS_REFERENCE_H_
#define RELCOMP_TESTS_REFERENCE_H_

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "relcomp/forest.h"
#include "relcomp/triplet.h"

namespace relcomp::ref {

// The answer rule, restated from scratch.
inline Answer Rule(int yi, int yj, int yk) {
  const bool ij = yi == yj;
  const bool ik = yi == yk;
  if (ij && !ik) return Answer::kYes;
  if (ik && !ij) return Answer::kNo;
  return Answer::kDontKnow;
}

inline int Slot(Answer a) { return a == Answer::kYes ? 0 : a == Answer::kNo ? 1 : 2; }

inline double XLogX(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

struct Joint {
  std::array<double, 3> answer{};      // yes, no, dk
  double prior_entropy = 0.0;          // H(y_i, y_j, y_k)
  std::array<double, 3> posterior{};   // H(y | answer); 0 when p = 0
  double info_gain = 0.0;              // (1 - p_dk) H - p_yes H_yes - p_no H_no
  double mutual_information = 0.0;     // H(y) - H(y | l), dk included
  double answer_entropy = 0.0;         // H(l)
};

// Enumerates all C^3 label configurations for rows (pi, pj, pk).
inline Joint Enumerate(const Eigen::VectorXd& pi, const Eigen::VectorXd& pj,
                       const Eigen::VectorXd& pk) {
  const int c = static_cast<int>(pi.size());
  Joint out;
  std::vector<double> mass;
  std::vector<int> slot;
  for (int a = 0; a < c; ++a)
    for (int b = 0; b < c; ++b)
      for (int d = 0; d < c; ++d) {
        const double p = pi[a] * pj[b] * pk[d];
        mass.push_back(p);
        slot.push_back(Slot(Rule(a, b, d)));
        out.answer[slot.back()] += p;
        out.prior_entropy -= XLogX(p);
      }
  for (int s = 0; s < 3; ++s) {
    if (out.answer[s] <= 0.0) continue;
    double h = 0.0;
    for (std::size_t m = 0; m < mass.size(); ++m)
      if (slot[m] == s) h -= XLogX(mass[m] / out.answer[s]);
    out.posterior[s] = h;
  }
  out.info_gain = (1.0 - out.answer[2]) * out.prior_entropy -
                  out.answer[0] * out.posterior[0] - out.answer[1] * out.posterior[1];
  double conditional = 0.0;
  for (int s = 0; s < 3; ++s) {
    conditional += out.answer[s] * out.posterior[s];
    out.answer_entropy -= XLogX(out.answer[s]);
  }
  out.mutual_information = out.prior_entropy - conditional;
  return out;
}

inline Eigen::VectorXd RandomRow(std::mt19937_64& rng, int c) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd row(c);
  for (int q = 0; q < c; ++q) row[q] = e(rng);
  return row / row.sum();
}

// Three rows as a ClassProbs, so that triplet (0, 1, 2) selects them.
inline ClassProbs Rows(const Eigen::VectorXd& pi, const Eigen::VectorXd& pj,
                       const Eigen::VectorXd& pk) {
  Eigen::MatrixXd m(3, pi.size());
  m.row(0) = pi.transpose();
  m.row(1) = pj.transpose();
  m.row(2) = pk.transpose();
  return ClassProbs(m);
}

inline Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index q = 0;
  for (double x : v) out[q++] = x;
  return out;
}

}  // namespace relcomp::ref

#endif  // RELCOMP_TESTS_REFERENCE_H_
