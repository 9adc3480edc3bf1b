#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nnb {

/// Result of comparing one discriminative classifier with the joint-law oracle.
struct EquivalenceCheck {
  std::string name;
  std::size_t trials = 0;
  double max_deviation = 0.0;
  /// Trial seeds whose deviation reached the tolerance.
  std::vector<std::uint64_t> failing_seeds;
};

struct EquivalenceOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;
  /// Perturbs one window posterior per trial; the checks must then fail.
  bool corrupt_tables = false;
};

struct EquivalenceReport {
  std::vector<EquivalenceCheck> checks;
  double tolerance = 1e-10;

  bool passed() const;
};

/// Draws random strictly positive specs (N in {2,3,4}, M in {2,3,5}) and
/// sequences (T <= 6) per trial, seeded by options.seed + trial, and compares:
///   discriminative vs generative naive Bayes,
///   order-1 pooled chain vs joint-law enumeration (T in 2..6),
///   order-2 pooled chain vs joint-law enumeration (T in 3..6).
EquivalenceReport verify_discriminative_forms(const EquivalenceOptions& options);

}  // namespace nnb
