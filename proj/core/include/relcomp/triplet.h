#ifndef RELCOMP_TRIPLET_H_
#define RELCOMP_TRIPLET_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace relcomp {

// "Is instance i more similar to j than to k?"
struct Triplet {
  int i = 0;
  int j = 0;
  int k = 0;

  auto operator<=>(const Triplet&) const = default;

  bool IsValid(int n) const {
    return i >= 0 && j >= 0 && k >= 0 && i < n && j < n && k < n && i != j &&
           i != k && j != k;
  }
  Triplet Mirrored() const { return {i, k, j}; }
};

struct TripletHash {
  std::size_t operator()(const Triplet& t) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(t.i);
    h = h * 0x100000001b3ULL ^ static_cast<std::uint32_t>(t.j);
    h = h * 0x100000001b3ULL ^ static_cast<std::uint32_t>(t.k);
    return std::hash<std::uint64_t>{}(h);
  }
};

enum class Answer { kYes, kNo, kDontKnow };

std::string_view ToString(Answer answer);
// Accepts "yes", "no", "dk" (and the single letters y/n/d).
Answer ParseAnswer(std::string_view text);

inline bool IsYesNo(Answer a) { return a != Answer::kDontKnow; }

struct LabeledTriplet {
  Triplet triplet;
  Answer answer = Answer::kDontKnow;
  std::string source;
  std::int64_t timestamp = 0;

  bool operator==(const LabeledTriplet&) const = default;
};

// Append-only record of answered queries. An exact (i,j,k) appears at most
// once; the mirrored (i,k,j) is a different question and may also appear.
class LabeledTripletSet {
 public:
  void Append(LabeledTriplet entry);
  bool Contains(const Triplet& t) const { return index_.contains(t); }

  const std::vector<LabeledTriplet>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  int CountYesNo() const;

 private:
  std::vector<LabeledTriplet> entries_;
  std::unordered_set<Triplet, TripletHash> index_;
};

}  // namespace relcomp

#endif  // RELCOMP_TRIPLET_H_
