#include "tpr/bounds.hpp"

#include "tpr/error.hpp"
#include "tpr/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tpr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2 = std::log(2.0);

double clip01(double p) { return std::clamp(p, 0.0, 1.0); }

void check_fidelity(double f, const char* name) {
  if (!(f >= 0.0 && f <= 1.0)) {
    std::ostringstream msg;
    msg << name << " = " << f << " outside [0, 1]";
    throw Error(ErrorKind::DomainError, msg.str());
  }
}

void check_copies(std::int64_t M) {
  if (M < 1) throw Error(ErrorKind::DomainError, "copy number M must be >= 1");
}

double log_of(double f) { return f > 0.0 ? std::log(f) : -kInf; }

// log of the unnormalized pair sum over the space at argument e^{log_f}.
double log_pair_sum(const ImageSpaceSpec& space, double log_f) {
  switch (space.variant()) {
    case ImageSpaceSpec::Variant::Uniform: return log_space::uniform(space.m(), log_f);
    case ImageSpaceSpec::Variant::CPF: return log_space::cpf(space.m(), space.targets().front(), log_f);
    case ImageSpaceSpec::Variant::BCPF: return log_space::bcpf(space.m(), space.targets(), log_f);
  }
  return -kInf;
}

// Fidelity lower bound (1/2) sum pi pi' F^{2M d}.
double lower_bound(const ImageSpaceSpec& space, std::int64_t M, double f) {
  const double log_g = f > 0.0 ? 2.0 * static_cast<double>(M) * std::log(f) : -kInf;
  return clip01(std::exp(log_pair_sum(space, log_g) - 2.0 * space.log_size() - kLog2));
}

// Pretty-good-measurement bound sum sqrt(pi pi') F^{M d}.
double pgm_bound(const ImageSpaceSpec& space, std::int64_t M, double f) {
  const double log_x = f > 0.0 ? static_cast<double>(M) * std::log(f) : -kInf;
  return clip01(std::exp(log_pair_sum(space, log_x) - space.log_size()));
}

double local_bound(int m, std::int64_t M, double f) {
  const double half_x = 0.5 * std::exp(static_cast<double>(M) * log_of(f));
  return clip01(-std::expm1(static_cast<double>(m) * std::log1p(-half_x)));
}

}  // namespace

ImageSpaceSpec ImageSpaceSpec::uniform(int m) {
  if (m < 1) throw Error(ErrorKind::DomainError, "pixel count m must be >= 1");
  std::vector<int> all(static_cast<std::size_t>(m) + 1);
  std::iota(all.begin(), all.end(), 0);
  return {m, Variant::Uniform, std::move(all)};
}

ImageSpaceSpec ImageSpaceSpec::cpf(int m, int k) {
  if (m < 1) throw Error(ErrorKind::DomainError, "pixel count m must be >= 1");
  if (k < 0 || k > m) throw Error(ErrorKind::DomainError, "CPF target count outside [0, m]");
  return {m, Variant::CPF, {k}};
}

ImageSpaceSpec ImageSpaceSpec::bcpf(int m, std::vector<int> targets) {
  if (m < 1) throw Error(ErrorKind::DomainError, "pixel count m must be >= 1");
  if (targets.empty()) throw Error(ErrorKind::DomainError, "BCPF target set is empty");
  std::sort(targets.begin(), targets.end());
  if (std::adjacent_find(targets.begin(), targets.end()) != targets.end()) {
    throw Error(ErrorKind::DomainError, "BCPF target counts must be distinct");
  }
  if (targets.front() < 0 || targets.back() > m) {
    throw Error(ErrorKind::DomainError, "BCPF target count outside [0, m]");
  }
  if (targets.size() == static_cast<std::size_t>(m) + 1) return uniform(m);
  return {m, Variant::BCPF, std::move(targets)};
}

double ImageSpaceSpec::log_size() const {
  if (variant_ == Variant::Uniform) return static_cast<double>(m_) * kLog2;
  double peak = -kInf;
  for (int k : targets_) peak = std::max(peak, log_binomial(m_, k));
  double acc = 0.0;
  for (int k : targets_) acc += std::exp(log_binomial(m_, k) - peak);
  return peak + std::log(acc);
}

std::string ImageSpaceSpec::describe() const {
  std::ostringstream s;
  switch (variant_) {
    case Variant::Uniform: s << "uniform(m=" << m_ << ")"; break;
    case Variant::CPF: s << "cpf(m=" << m_ << ",k=" << targets_.front() << ")"; break;
    case Variant::BCPF:
      s << "bcpf(m=" << m_ << ",k=";
      for (std::size_t i = 0; i < targets_.size(); ++i) s << (i ? ";" : "") << targets_[i];
      s << ")";
      break;
  }
  return s.str();
}

double probe_fidelity(const EnvironmentPair& pair, const ProbeSpec& probe) {
  switch (probe.energy) {
    case ProbeSpec::Energy::Classical: return fidelity_classical(pair);
    case ProbeSpec::Energy::Finite: return fidelity_finite(pair, probe.a);
    case ProbeSpec::Energy::Asymptotic: return fidelity_choi_inf(pair).value;
  }
  return 0.0;
}

BoundReport bounds(const ImageSpaceSpec& space, std::int64_t M, double f_q, double f_cl) {
  check_copies(M);
  check_fidelity(f_q, "F_q");
  check_fidelity(f_cl, "F_cl");

  BoundReport r;
  if (f_q > f_cl) {
    std::ostringstream msg;
    msg << "F_q = " << f_q << " exceeds F_cl = " << f_cl;
    r.warnings.push_back(msg.str());
  }
  r.q_lower = lower_bound(space, M, f_q);
  r.cl_lower = lower_bound(space, M, f_cl);
  r.pgm_upper = pgm_bound(space, M, f_q);
  if (space.variant() == ImageSpaceSpec::Variant::Uniform) {
    r.local_upper = local_bound(space.m(), M, f_q);
    r.q_upper = std::min(r.local_upper, r.pgm_upper);
  } else {
    r.local_upper = std::numeric_limits<double>::quiet_NaN();
    r.q_upper = r.pgm_upper;
  }
  r.mga = r.cl_lower - r.q_upper;
  r.mpa = r.cl_lower - r.q_lower;
  r.mbar_adv = (f_q > 0.0 && f_cl > 0.0) ? min_rel_probe_uniform(f_q, f_cl) : kInf;
  if (r.q_lower > r.q_upper + 1e-12) r.warnings.push_back("q_lower exceeds q_upper");
  return r;
}

double min_rel_probe_uniform(double f_q, double f_cl) {
  if (!(f_q > 0.0 && f_q <= 1.0) || !(f_cl > 0.0 && f_cl <= 1.0)) {
    throw Error(ErrorKind::DomainError, "fidelities must lie in (0, 1]");
  }
  const double denom = 2.0 * std::log(f_cl) - std::log(f_q);
  if (!(denom > 0.0)) return kInf;
  return kLog2 / denom;
}

double min_rel_probe_additive(double nu_t, double nu_b) {
  if (!(nu_t >= 0.0) || !(nu_b >= 0.0)) throw Error(ErrorKind::DomainError, "additive noise must be >= 0");
  const double root = std::sqrt(nu_b * nu_t);
  const double gap = std::sqrt(nu_b) - std::sqrt(nu_t);
  const double delta_q = gap == 0.0 ? 0.0 : gap * gap / (2.0 * root);
  const double delta_cl = std::sqrt((nu_t + 1.0) * (nu_b + 1.0)) - root - 1.0;
  const double denom = std::log1p(delta_q) - 2.0 * std::log1p(delta_cl);
  if (!(denom > 0.0)) return kInf;
  return kLog2 / denom;
}

double relaxed_margin(int m, std::int64_t M, double f_q, double f_cl) {
  check_copies(M);
  check_fidelity(f_q, "F_q");
  check_fidelity(f_cl, "F_cl");
  const double md = static_cast<double>(m);
  const double Md = static_cast<double>(M);
  const double cl = std::exp(std::log(md) - (md + 1.0) * kLog2 + 2.0 * Md * log_of(f_cl));
  const double q = std::exp(std::log(md) - kLog2 + Md * log_of(f_q));
  return cl - q;
}

std::optional<std::int64_t> first_guaranteed_advantage(const ImageSpaceSpec& space, double f_q,
                                                       double f_cl, std::int64_t max_M) {
  std::optional<std::int64_t> first;
  for (std::int64_t M = 1; M <= max_M; ++M) {
    if (bounds(space, M, f_q, f_cl).mga >= 0.0) {
      if (!first) first = M;
    } else {
      first.reset();
    }
  }
  return first;
}

PixelErrorBounds pixel_error_bounds(double f, std::int64_t M) {
  check_fidelity(f, "F");
  check_copies(M);
  const double log_x = static_cast<double>(M) * log_of(f);
  const double g = std::exp(2.0 * log_x);
  // (1 - sqrt(1 - g)) / 2 without cancellation
  return {g / (2.0 * (1.0 + std::sqrt(1.0 - g))), 0.5 * std::exp(log_x)};
}

}  // namespace tpr
