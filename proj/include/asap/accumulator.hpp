#pragma once

// Character-level sequential inference. ASAP folds the pMDM log-likelihood of
// every flash into every character's posterior; OM counts flashes that the
// deterministic classifier labelled as target.

#include "asap/error.hpp"
#include "asap/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace asap {

enum class AccumulatorMode { ASAP, OM };

inline const char* to_string(AccumulatorMode m) { return m == AccumulatorMode::ASAP ? "ASAP" : "MDM+OM"; }

struct AccumulatorState {
  int L = 0;
  std::vector<double> log_posterior;
  int t = 0;
  AccumulatorMode mode = AccumulatorMode::ASAP;
  std::vector<int> om_counts;

  double probability(int l) const { return std::exp(log_posterior[static_cast<std::size_t>(l)]); }
};

inline double logsumexp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

inline AccumulatorState init_accumulator(int L, std::optional<std::span<const double>> priors,
                                         AccumulatorMode mode) {
  if (L < 1) throw Error(ErrorCode::BadArgument, "need at least one character");
  AccumulatorState s;
  s.L = L;
  s.mode = mode;
  s.om_counts.assign(static_cast<std::size_t>(L), 0);
  if (!priors) {
    s.log_posterior.assign(static_cast<std::size_t>(L), -std::log(static_cast<double>(L)));
    return s;
  }
  if (priors->size() != static_cast<std::size_t>(L)) {
    throw Error(ErrorCode::BadPrior, "prior length " + std::to_string(priors->size()) + " != " + std::to_string(L));
  }
  double sum = 0.0;
  for (double p : *priors) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::BadPrior, "negative or non-finite prior");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::BadPrior, "priors sum to " + std::to_string(sum));
  s.log_posterior.reserve(static_cast<std::size_t>(L));
  for (double p : *priors) s.log_posterior.push_back(std::log(p));
  return s;
}

inline AccumulatorState init_accumulator(int L, AccumulatorMode mode = AccumulatorMode::ASAP) {
  return init_accumulator(L, std::nullopt, mode);
}

namespace detail {

inline void check_flash_set(const AccumulatorState& s, std::span<const int> flashed) {
  if (flashed.empty()) throw Error(ErrorCode::EmptyFlashSet, "flash set is empty");
  for (int l : flashed) {
    if (l < 0 || l >= s.L) {
      throw Error(ErrorCode::IndexOutOfRange, "character " + std::to_string(l) + " outside [0, " + std::to_string(s.L) + ")");
    }
  }
}

}  // namespace detail

// Log-domain Bayesian update with binarized p(T|l): flashed characters receive
// llh_T, all others llh_NT, then the vector is renormalized.
inline AccumulatorState asap_update(AccumulatorState s, double llh_T, double llh_NT, std::span<const int> flashed) {
  if (s.mode != AccumulatorMode::ASAP) throw Error(ErrorCode::WrongMode, "asap_update on an OM accumulator");
  detail::check_flash_set(s, flashed);
  std::vector<char> is_flashed(static_cast<std::size_t>(s.L), 0);
  for (int l : flashed) is_flashed[static_cast<std::size_t>(l)] = 1;
  for (int l = 0; l < s.L; ++l) {
    s.log_posterior[static_cast<std::size_t>(l)] += is_flashed[static_cast<std::size_t>(l)] ? llh_T : llh_NT;
  }
  const double z = logsumexp(s.log_posterior);
  for (double& v : s.log_posterior) v -= z;
  ++s.t;
  return s;
}

inline AccumulatorState om_update(AccumulatorState s, ErpClass predicted, std::span<const int> flashed) {
  if (s.mode != AccumulatorMode::OM) throw Error(ErrorCode::WrongMode, "om_update on an ASAP accumulator");
  detail::check_flash_set(s, flashed);
  if (predicted == ErpClass::Target) {
    for (int l : flashed) ++s.om_counts[static_cast<std::size_t>(l)];
  }
  ++s.t;

  // counts / t, uniform while nothing has been detected.
  const bool any = std::any_of(s.om_counts.begin(), s.om_counts.end(), [](int c) { return c > 0; });
  for (int l = 0; l < s.L; ++l) {
    const auto i = static_cast<std::size_t>(l);
    s.log_posterior[i] = any ? std::log(static_cast<double>(s.om_counts[i]) / s.t) : -std::log(static_cast<double>(s.L));
  }
  return s;
}

struct Decision {
  int character = 0;
  double probability = 0.0;
};

// MAP character; ties resolve to the lowest index.
inline Decision decide(const AccumulatorState& s) {
  if (s.t < 1) throw Error(ErrorCode::NoEvidence, "no flashes accumulated");
  int best = 0;
  if (s.mode == AccumulatorMode::OM) {
    for (int l = 1; l < s.L; ++l) {
      if (s.om_counts[static_cast<std::size_t>(l)] > s.om_counts[static_cast<std::size_t>(best)]) best = l;
    }
  } else {
    for (int l = 1; l < s.L; ++l) {
      if (s.log_posterior[static_cast<std::size_t>(l)] > s.log_posterior[static_cast<std::size_t>(best)]) best = l;
    }
  }
  return {best, s.probability(best)};
}

}  // namespace asap
