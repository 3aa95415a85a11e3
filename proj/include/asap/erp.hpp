#pragma once

// Two-class Riemannian ERP model: deterministic minimum-distance-to-mean
// decisions and probabilistic (Riemannian Gaussian) log-likelihoods.

#include "asap/error.hpp"
#include "asap/signal.hpp"
#include "asap/spd.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace asap {

inline constexpr double kSigmaFloor = 1e-6;

struct ClassModel {
  SpdMatrix center_T;
  SpdMatrix center_NT;
  double sigma_T = 1.0;
  double sigma_NT = 1.0;

  Eigen::Index order() const noexcept { return center_T.order(); }
};

// Squared distances of one feature to both class centers.
struct CenterDistances {
  double d2_T = 0.0;
  double d2_NT = 0.0;
};

inline CenterDistances center_distances(const ClassModel& model, const SpdMatrix& feature) {
  if (feature.order() != model.order()) {
    throw Error(ErrorCode::DimensionMismatch, "feature order " + std::to_string(feature.order()) +
                                                  " vs model order " + std::to_string(model.order()));
  }
  return {affine_distance_sq(model.center_T, feature), affine_distance_sq(model.center_NT, feature)};
}

inline ClassModel fit_mdm(std::span<const SpdMatrix> features, std::span<const ErpClass> labels,
                          const KarcherOptions& opt = {}) {
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "features and labels differ in length");
  }
  std::vector<SpdMatrix> target, nontarget;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i > 0) require_same_order(features[0], features[i]);
    (labels[i] == ErpClass::Target ? target : nontarget).push_back(features[i]);
  }
  if (target.empty() || nontarget.empty()) {
    throw Error(ErrorCode::MissingClass, target.empty() ? "no target samples" : "no non-target samples");
  }

  auto dispersion = [](const std::vector<SpdMatrix>& xs, const SpdMatrix& center) {
    double acc = 0.0;
    for (const auto& x : xs) acc += affine_distance_sq(x, center);
    return std::max(kSigmaFloor, std::sqrt(acc / static_cast<double>(xs.size())));
  };

  SpdMatrix cT = karcher_mean(target, opt);
  SpdMatrix cNT = karcher_mean(nontarget, opt);
  const double sT = dispersion(target, cT);
  const double sNT = dispersion(nontarget, cNT);
  return ClassModel{std::move(cT), std::move(cNT), sT, sNT};
}

// Ties go to NT, the majority class.
inline ErpClass mdm_decide(const CenterDistances& d) {
  return d.d2_T < d.d2_NT ? ErpClass::Target : ErpClass::NonTarget;
}

inline ErpClass mdm_predict(const ClassModel& model, const SpdMatrix& feature) {
  return mdm_decide(center_distances(model, feature));
}

struct LogLikelihoods {
  double T = 0.0;
  double NT = 0.0;
};

// Equal dispersion: llh_k = -d^2. Otherwise llh_k = -d^2 / (2 sigma_k^2) with the
// normalization factor omitted, so the pair is unnormalized.
inline LogLikelihoods pmdm_log_likelihoods(const ClassModel& model, const CenterDistances& d,
                                           bool equal_dispersion = true) {
  if (equal_dispersion) return {-d.d2_T, -d.d2_NT};
  return {-d.d2_T / (2.0 * model.sigma_T * model.sigma_T), -d.d2_NT / (2.0 * model.sigma_NT * model.sigma_NT)};
}

inline LogLikelihoods pmdm_log_likelihoods(const ClassModel& model, const SpdMatrix& feature,
                                           bool equal_dispersion = true) {
  return pmdm_log_likelihoods(model, center_distances(model, feature), equal_dispersion);
}

}  // namespace asap
