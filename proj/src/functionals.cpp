#include "tpr/functionals.hpp"

#include "tpr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tpr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Exact in double for every k when n <= 50.
constexpr std::int64_t kExactBinomialLimit = 50;

double log_sum_exp(const std::vector<double>& terms) {
  double peak = kNegInf;
  for (double t : terms) peak = std::max(peak, t);
  if (peak == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

// log(e^x - 1) for x >= 0.
double log_expm1(double x) {
  if (x <= 0.0) return kNegInf;
  if (x > 30.0) return x + std::log1p(-std::exp(-x));
  return std::log(std::expm1(x));
}

void check_m(int m) {
  if (m < 1) throw Error(ErrorKind::DomainError, "pixel count m must be >= 1, got " + std::to_string(m));
}

void check_count(int m, int k, const char* what) {
  if (k < 0 || k > m) {
    throw Error(ErrorKind::DomainError,
                std::string(what) + " = " + std::to_string(k) + " outside [0, " + std::to_string(m) + "]");
  }
}

void check_f(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorKind::DomainError, "functional argument must lie in [0, 1]");
}

double log_of(double f) { return f > 0.0 ? std::log(f) : kNegInf; }

std::vector<int> validated_targets(int m, const std::vector<int>& targets) {
  if (targets.empty()) throw Error(ErrorKind::DomainError, "target-count set is empty");
  std::vector<int> sorted = targets;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::DomainError, "target counts must be distinct");
  }
  for (int k : sorted) check_count(m, k, "target count");
  return sorted;
}

}  // namespace

double log_binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return kNegInf;
  k = std::min(k, n - k);
  if (n <= kExactBinomialLimit) {
    double c = 1.0;
    for (std::int64_t i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return std::log(c);
  }
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

namespace log_space {

double uniform(int m, double log_f) {
  check_m(m);
  const double md = static_cast<double>(m);
  if (log_f < -600.0) {
    // (1 + f)^m - 1 = m f (1 + O(m f))
    return md * std::log(2.0) + std::log(md) + log_f;
  }
  return md * std::log(2.0) + log_expm1(md * std::log1p(std::exp(log_f)));
}

double cpf(int m, int k, double log_f) {
  check_m(m);
  check_count(m, k, "k");
  std::vector<double> terms;
  for (int j = 1; j <= std::min(k, m - k); ++j) {
    terms.push_back(log_binomial(k, j) + log_binomial(m - k, j) + 2.0 * j * log_f);
  }
  return log_binomial(m, k) + log_sum_exp(terms);
}

double cross(int m, int k, int l, double log_f) {
  check_m(m);
  check_count(m, k, "k");
  check_count(m, l, "l");
  if (k == l) throw Error(ErrorKind::DomainError, "cross functional needs k != l");
  if (k > l) std::swap(k, l);
  // t = number of ones in the OR of the two patterns
  std::vector<double> terms;
  for (int t = l; t <= std::min(k + l, m); ++t) {
    terms.push_back(log_binomial(m, t) + log_binomial(t, l) + log_binomial(l, k + l - t) +
                    static_cast<double>(2 * t - k - l) * log_f);
  }
  return log_sum_exp(terms);
}

double bcpf(int m, const std::vector<int>& targets, double log_f) {
  check_m(m);
  const auto ks = validated_targets(m, targets);
  std::vector<double> terms;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    terms.push_back(cpf(m, ks[i], log_f));
    for (std::size_t j = i + 1; j < ks.size(); ++j) {
      terms.push_back(std::log(2.0) + cross(m, ks[i], ks[j], log_f));
    }
  }
  return log_sum_exp(terms);
}

}  // namespace log_space

double hamming_functional_uniform(int m, double f) {
  check_m(m);
  check_f(f);
  return std::expm1(static_cast<double>(m) * std::log1p(f));
}

double cpf_functional(int m, int k, double f) {
  check_f(f);
  return std::exp(log_space::cpf(m, k, log_of(f)) - log_binomial(m, k));
}

double cross_functional(int m, int k, int l, double f) {
  check_f(f);
  return std::exp(log_space::cross(m, k, l, log_of(f)));
}

double bcpf_functional(int m, const std::vector<int>& targets, double f) {
  check_f(f);
  return std::exp(log_space::bcpf(m, targets, log_of(f)));
}

}  // namespace tpr
