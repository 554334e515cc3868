// Copyright 2026 The Pronassess Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Closed-form Bayesian inference, from the discrete Bayes rule up to
// Gaussian-process regression.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "pronassess/error.hpp"

namespace pronassess {

class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<std::string> outcomes, std::vector<double> probs)
      : outcomes_(std::move(outcomes)), probs_(std::move(probs)) {
    if (outcomes_.size() != probs_.size() || outcomes_.empty()) {
      Fail(ErrorCode::kShapeMismatch, "one probability per outcome is required");
    }
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) Fail(ErrorCode::kInvalidArgument, "negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      Fail(ErrorCode::kInvalidArgument, "probabilities sum to " + std::to_string(total));
    }
  }

  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }

  double Prob(const std::string& outcome) const {
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
      if (outcomes_[i] == outcome) return probs_[i];
    }
    Fail(ErrorCode::kInvalidArgument, "unknown outcome '" + outcome + "'");
  }

 private:
  std::vector<std::string> outcomes_;
  std::vector<double> probs_;
};

/// p(x | y) = p(x) p(y | x) / p(y); cpt[i] is p(y | x = prior.outcomes()[i]).
inline DiscreteDistribution DiscretePosterior(const DiscreteDistribution& prior,
                                              const std::vector<DiscreteDistribution>& cpt,
                                              const std::string& evidence) {
  if (cpt.size() != prior.size()) {
    Fail(ErrorCode::kShapeMismatch, "one conditional distribution per prior outcome is required");
  }
  std::vector<double> joint(prior.size());
  double evidence_prob = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    joint[i] = prior.probs()[i] * cpt[i].Prob(evidence);
    evidence_prob += joint[i];
  }
  if (!(evidence_prob > 0.0)) Fail(ErrorCode::kZeroEvidence, "p(" + evidence + ") = 0");
  for (double& p : joint) p /= evidence_prob;
  return DiscreteDistribution(prior.outcomes(), std::move(joint));
}

struct GaussianBelief {
  double mean = 0.0;
  double variance = 1.0;
};

/// Posterior over the mean of Gaussian observations with known noise
/// variance, given a Gaussian prior. No observations return the prior.
inline GaussianBelief GaussianPosterior(const GaussianBelief& prior, double noise_variance,
                                        const std::vector<double>& observations) {
  if (!(prior.variance > 0.0)) Fail(ErrorCode::kInvalidArgument, "prior variance must be > 0");
  if (!(noise_variance > 0.0)) Fail(ErrorCode::kInvalidArgument, "noise variance must be > 0");
  if (observations.empty()) return prior;
  const double n = static_cast<double>(observations.size());
  double sum = 0.0;
  for (double y : observations) sum += y;
  const double y_mean = sum / n;
  GaussianBelief post;
  post.mean = (noise_variance * prior.mean + n * prior.variance * y_mean) /
              (n * prior.variance + noise_variance);
  post.variance = 1.0 / (1.0 / prior.variance + n / noise_variance);
  return post;
}

/// sigma2 * exp(-|xi - xj|^2 / (2 l^2))
struct RbfKernel {
  double variance = 1.0;
  double length_scale = 1.0;
};

/// bias_variance + variance * (xi - c) . (xj - c)
struct LinearKernel {
  double bias_variance = 0.0;
  double variance = 1.0;
  double offset = 0.0;
};

using Kernel = std::variant<RbfKernel, LinearKernel>;

inline void ValidateKernel(const Kernel& k) {
  std::visit(
      [](const auto& kk) {
        using T = std::decay_t<decltype(kk)>;
        if constexpr (std::is_same_v<T, RbfKernel>) {
          if (!(kk.variance > 0.0 && kk.length_scale * kk.length_scale > 0.0)) {
            Fail(ErrorCode::kInvalidArgument, "RBF needs variance > 0 and l != 0");
          }
        } else {
          if (!(kk.variance > 0.0 && kk.bias_variance >= 0.0)) {
            Fail(ErrorCode::kInvalidArgument, "linear kernel needs variance > 0, bias >= 0");
          }
        }
      },
      k);
}

inline double KernelEval(const Kernel& k, const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
  if (xi.size() != xj.size()) Fail(ErrorCode::kDimMismatch, "inputs differ in dimension");
  return std::visit(
      [&](const auto& kk) -> double {
        using T = std::decay_t<decltype(kk)>;
        if constexpr (std::is_same_v<T, RbfKernel>) {
          const double d2 = (xi - xj).squaredNorm();
          return kk.variance * std::exp(-d2 / (2.0 * kk.length_scale * kk.length_scale));
        } else {
          const Eigen::VectorXd c = Eigen::VectorXd::Constant(xi.size(), kk.offset);
          return kk.bias_variance + kk.variance * (xi - c).dot(xj - c);
        }
      },
      k);
}

inline Eigen::MatrixXd Gram(const Kernel& k, const std::vector<Eigen::VectorXd>& xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g(i, j) = g(j, i) = KernelEval(k, xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
    }
  }
  return g;
}

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP regression posterior at one query point:
///   mean = k(x*, X) (K + s I)^-1 y
///   var  = k(x*, x*) - k(x*, X) (K + s I)^-1 k(X, x*)
/// solved by Cholesky. If the factorization fails, jitter of 1e-10 growing
/// tenfold up to 1e-6 is added to the diagonal before giving up.
inline GpPrediction GpPosterior(const std::vector<Eigen::VectorXd>& train_x,
                                const Eigen::VectorXd& train_y, const Kernel& k,
                                double noise_variance, const Eigen::VectorXd& query) {
  ValidateKernel(k);
  if (train_x.empty()) Fail(ErrorCode::kInvalidArgument, "no training points");
  if (static_cast<std::size_t>(train_y.size()) != train_x.size()) {
    Fail(ErrorCode::kShapeMismatch, "one target per training point is required");
  }
  if (!(noise_variance >= 0.0)) Fail(ErrorCode::kInvalidArgument, "noise variance must be >= 0");
  const auto n = static_cast<Eigen::Index>(train_x.size());
  for (const auto& x : train_x) {
    if (!x.allFinite()) Fail(ErrorCode::kInvalidArgument, "training inputs must be finite");
  }
  if (!train_y.allFinite() || !query.allFinite()) {
    Fail(ErrorCode::kInvalidArgument, "targets and query must be finite");
  }
  const Eigen::MatrixXd base = Gram(k, train_x) + noise_variance * Eigen::MatrixXd::Identity(n, n);

  Eigen::LLT<Eigen::MatrixXd> llt(base);
  for (double jitter = 1e-10; llt.info() != Eigen::Success; jitter *= 10.0) {
    if (jitter > 1e-6 * 1.5) Fail(ErrorCode::kSingularGram, "Gram matrix is not positive definite");
    llt.compute(base + jitter * Eigen::MatrixXd::Identity(n, n));
  }

  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) k_star(i) = KernelEval(k, query, train_x[static_cast<std::size_t>(i)]);
  const Eigen::VectorXd alpha = llt.solve(train_y);
  const Eigen::VectorXd v = llt.matrixL().solve(k_star);
  GpPrediction out;
  out.mean = k_star.dot(alpha);
  double var = KernelEval(k, query, query) - v.squaredNorm();
  if (var < -1e-9) Fail(ErrorCode::kSingularGram, "posterior variance is negative");
  var = std::max(var, 0.0);
  out.variance = var;
  return out;
}

}  // namespace pronassess
