#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coarse {

inline constexpr double kTolerance = 1e-9;

/// One verified inequality lhs <= rhs, with both sides kept for auditing.
struct Inequality {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
  /// Point ids of a witnessing pair. Always set on failure when a pair exists.
  std::optional<std::pair<std::string, std::string>> witness_pair;
};

inline Inequality check_le(std::string name, double lhs, double rhs,
                           double tol = kTolerance) {
  return Inequality{std::move(name), lhs, rhs, lhs <= rhs + tol, std::nullopt};
}

inline Inequality check_le(std::string name, double lhs, double rhs,
                           std::pair<std::string, std::string> pair,
                           double tol = kTolerance) {
  auto q = check_le(std::move(name), lhs, rhs, tol);
  q.witness_pair = std::move(pair);
  return q;
}

inline bool all_pass(const std::vector<Inequality>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

inline void append(std::vector<Inequality>& dst,
                   const std::vector<Inequality>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace coarse
