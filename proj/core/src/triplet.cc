#include "relcomp/triplet.h"

#include <stdexcept>

#include "relcomp/policy.h"

namespace relcomp {

std::string_view ToString(Answer answer) {
  switch (answer) {
    case Answer::kYes:
      return "yes";
    case Answer::kNo:
      return "no";
    case Answer::kDontKnow:
      return "dk";
  }
  return "dk";
}

Answer ParseAnswer(std::string_view text) {
  if (text == "yes" || text == "y") return Answer::kYes;
  if (text == "no" || text == "n") return Answer::kNo;
  if (text == "dk" || text == "d") return Answer::kDontKnow;
  throw std::invalid_argument("unknown answer '" + std::string(text) +
                              "' (expected yes, no or dk)");
}

void LabeledTripletSet::Append(LabeledTriplet entry) {
  if (!index_.insert(entry.triplet).second) {
    const Triplet& t = entry.triplet;
    throw std::invalid_argument("triplet (" + std::to_string(t.i) + "," +
                                std::to_string(t.j) + "," + std::to_string(t.k) +
                                ") is already labeled");
  }
  entries_.push_back(std::move(entry));
}

int LabeledTripletSet::CountYesNo() const {
  int count = 0;
  for (const auto& e : entries_) count += IsYesNo(e.answer) ? 1 : 0;
  return count;
}

std::string_view ToString(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kInfo:
      return "info";
    case PolicyKind::kRandom:
      return "random";
    case PolicyKind::kNonredundant:
      return "nonredundant";
    case PolicyKind::kInfoExact:
      return "info_exact";
  }
  return "info";
}

PolicyKind ParsePolicy(std::string_view name) {
  if (name == "info") return PolicyKind::kInfo;
  if (name == "random") return PolicyKind::kRandom;
  if (name == "nonredundant") return PolicyKind::kNonredundant;
  if (name == "info_exact") return PolicyKind::kInfoExact;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

std::vector<PolicyKind> ParsePolicyList(std::string_view list) {
  std::vector<PolicyKind> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view item = list.substr(start, end - start);
    if (!item.empty()) out.push_back(ParsePolicy(item));
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty policy list");
  return out;
}

}  // namespace relcomp
