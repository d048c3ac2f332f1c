#pragma once

// Hamming-distance fidelity functionals over binary pattern spaces: sums of
// f^{d(i,i')} over ordered pairs of distinct m-bit patterns.

#include <cstdint>
#include <vector>

namespace tpr {

/// log C(n, k); -inf when k is outside [0, n].
double log_binomial(std::int64_t n, std::int64_t k);

/// D_m(f) = (f + 1)^m - 1, the per-pattern sum over all 2^m patterns.
double hamming_functional_uniform(int m, double f);

/// D_m^k(f) = 2F1(-k, k - m; 1; f^2) - 1, per pattern within the set of
/// patterns with exactly k ones. The series terminates after k + 1 terms.
double cpf_functional(int m, int k, double f);

/// Sum of f^{d(i,i')} over all i with k ones and i' with l ones, k != l.
double cross_functional(int m, int k, int l, double f);

/// Unnormalized sum of f^{d(i,i')} over distinct ordered pairs drawn from the
/// union of the k-sets listed in `targets` (distinct, each in [0, m]).
double bcpf_functional(int m, const std::vector<int>& targets, double f);

/// Logarithms of the unnormalized sums, taking log f (may be -inf). Used
/// for large m and for arguments f = F^M that underflow.
namespace log_space {

double uniform(int m, double log_f);
double cpf(int m, int k, double log_f);
double cross(int m, int k, int l, double log_f);
double bcpf(int m, const std::vector<int>& targets, double log_f);

}  // namespace log_space

}  // namespace tpr
