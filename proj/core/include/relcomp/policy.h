#ifndef RELCOMP_POLICY_H_
#define RELCOMP_POLICY_H_

#include <string>
#include <string_view>
#include <vector>

namespace relcomp {

// info: information gain over a sampled pool; info_exact: over every
// unlabeled triplet; random / nonredundant: baseline policies.
enum class PolicyKind { kInfo, kRandom, kNonredundant, kInfoExact };

std::string_view ToString(PolicyKind kind);
PolicyKind ParsePolicy(std::string_view name);
// Comma-separated list, e.g. "info,random".
std::vector<PolicyKind> ParsePolicyList(std::string_view list);

inline bool UsesInfoGain(PolicyKind kind) {
  return kind == PolicyKind::kInfo || kind == PolicyKind::kInfoExact;
}

}  // namespace relcomp

#endif  // RELCOMP_POLICY_H_
