#include "tpr/classify.hpp"

#include "tpr/error.hpp"
#include "tpr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>

namespace tpr {

int nn_classify(std::span<const std::uint64_t> query, const BinaryImageDataset& training) {
  if (training.empty()) throw Error(ErrorKind::EmptyTrainingSet, "nearest-neighbour search over an empty set");
  if (query.size() != training.words()) throw Error(ErrorKind::ShapeMismatch, "query has the wrong word count");
  const std::size_t words = training.words();
  int best_distance = std::numeric_limits<int>::max();
  std::size_t best = 0;
  for (std::size_t i = 0; i < training.size(); ++i) {
    const auto img = training.image(i);
    int d = 0;
    for (std::size_t w = 0; w < words && d < best_distance; ++w) d += std::popcount(img[w] ^ query[w]);
    if (d < best_distance) {
      best_distance = d;
      best = i;
      if (d == 0) break;
    }
  }
  return training.label(best);
}

ErrorEstimate estimate_error(const Classifier& classify, const BinaryImageDataset& evaluation,
                             const NoiseModel& noise, int trials, std::uint64_t seed, unsigned threads) {
  if (evaluation.empty()) throw Error(ErrorKind::EmptyEvaluationSet, "no evaluation images");
  if (trials < 1) throw Error(ErrorKind::DomainError, "trials must be >= 1");
  const std::size_t n_eval = evaluation.size();
  const std::size_t total = n_eval * static_cast<std::size_t>(trials);

  std::atomic<std::int64_t> errors{0};
  parallel_for(total, threads, [&](std::size_t begin, std::size_t end, unsigned) {
    std::vector<std::uint64_t> noisy(evaluation.words());
    std::int64_t local = 0;
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t trial = idx / n_eval;
      const std::size_t item = idx % n_eval;
      CounterRng rng(seed, trial, item);
      sample_noisy(evaluation.image(item), noisy, evaluation.pixels(), noise.p, rng);
      if (classify(noisy) != evaluation.label(item)) ++local;
    }
    errors += local;
  });

  ErrorEstimate out;
  out.errors = errors.load();
  out.samples = static_cast<std::int64_t>(total);
  const double n = static_cast<double>(total);
  const double e = static_cast<double>(out.errors);
  out.mean = e / n;
  if (total > 1) {
    const double var = std::max(0.0, (e - e * e / n) / (n - 1.0));
    out.stderr_ = std::sqrt(var / n);
  }
  return out;
}

ErrorEstimate estimate_error(const BinaryImageDataset& training, const BinaryImageDataset& evaluation,
                             const NoiseModel& noise, int trials, std::uint64_t seed, unsigned threads) {
  if (training.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training images");
  if (training.words() != evaluation.words() || training.pixels() != evaluation.pixels()) {
    throw Error(ErrorKind::ShapeMismatch, "training and evaluation image shapes differ");
  }
  const Classifier nn = [&training](std::span<const std::uint64_t> q) { return nn_classify(q, training); };
  return estimate_error(nn, evaluation, noise, trials, seed, threads);
}

std::vector<AdvantageRow> advantage_regions(const ErrorEstimator& estimate, double f_q, double f_cl,
                                            const std::vector<std::int64_t>& copies) {
  std::vector<AdvantageRow> rows;
  for (std::int64_t M : copies) {
    AdvantageRow r;
    r.M = M;
    const auto cl_lo = NoiseModel::from_bounds(NoiseDerivation::ClassicalLower, f_cl, M);
    const auto cl_up = NoiseModel::from_bounds(NoiseDerivation::ClassicalUpper, f_cl, M);
    const auto q_lo = NoiseModel::from_bounds(NoiseDerivation::QuantumLower, f_q, M);
    const auto q_up = NoiseModel::from_bounds(NoiseDerivation::QuantumUpper, f_q, M);
    r.p_cl_low = cl_lo.p;
    r.p_cl_up = cl_up.p;
    r.p_q_low = q_lo.p;
    r.p_q_up = q_up.p;
    const auto e1 = estimate(cl_lo);
    const auto e2 = estimate(cl_up);
    const auto e3 = estimate(q_lo);
    const auto e4 = estimate(q_up);
    r.e_cl_lower = e1.mean;
    r.e_cl_upper = e2.mean;
    r.e_q_lower = e3.mean;
    r.e_q_upper = e4.mean;
    r.de_min = r.e_cl_lower - r.e_q_upper;
    r.de_max = r.e_cl_lower - r.e_q_lower;
    r.stderr_max = std::max({e1.stderr_, e2.stderr_, e3.stderr_, e4.stderr_});
    rows.push_back(r);
  }
  return rows;
}

std::vector<AdvantageRow> advantage_regions(const BinaryImageDataset& training,
                                            const BinaryImageDataset& evaluation, const EnvironmentPair& pair,
                                            const std::vector<std::int64_t>& copies, int trials,
                                            std::uint64_t seed, unsigned threads) {
  const double f_q = fidelity_choi_inf(pair).value;
  const double f_cl = fidelity_classical(pair);
  const ErrorEstimator nn = [&](const NoiseModel& noise) {
    return estimate_error(training, evaluation, noise, trials, seed, threads);
  };
  return advantage_regions(nn, f_q, f_cl, copies);
}

}  // namespace tpr
