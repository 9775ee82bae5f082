#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fusedml/errors.hpp"
#include "fusedml/math.hpp"

namespace fusedml {

enum class LearnerKind { ridge_linear, logistic, knn_regress, knn_classify };

inline const char* learner_kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::ridge_linear: return "ridge_linear";
    case LearnerKind::logistic: return "logistic";
    case LearnerKind::knn_regress: return "knn_regress";
    case LearnerKind::knn_classify: return "knn_classify";
  }
  return "unknown";
}

struct LearnerSpec {
  LearnerKind kind = LearnerKind::ridge_linear;
  double lambda = 1e-3;       // L2 strength (ridge and logistic)
  int k = 5;                  // neighbor count (knn kinds)
  double clip_epsilon = 0.01; // probability floor/ceiling for classifiers
};

inline LearnerSpec default_outcome_spec() {
  return LearnerSpec{LearnerKind::ridge_linear, 1e-3, 5, 0.01};
}

inline LearnerSpec default_propensity_spec() {
  return LearnerSpec{LearnerKind::logistic, 1e-3, 5, 0.01};
}

/// An immutable fitted nuisance model. Linear kinds keep weights in
/// standardized coordinates together with the training-fold center/scale;
/// knn kinds keep the standardized training set itself.
struct FittedModel {
  LearnerKind kind = LearnerKind::ridge_linear;
  double clip_epsilon = 0.01;
  Eigen::Index dim = 0;

  Eigen::VectorXd center;  // per-column training mean
  Eigen::VectorXd scale;   // per-column training sd (1 where degenerate)

  Eigen::VectorXd weights;  // standardized coordinates
  double intercept = 0.0;
  bool converged = true;              // logistic only
  std::vector<double> loss_path;      // penalized logistic loss per iteration

  Eigen::MatrixXd train_z;
  Eigen::VectorXd train_targets;
  int k = 0;

  /// Slope coefficients mapped back to the original feature coordinates.
  Eigen::VectorXd raw_weights() const {
    Eigen::VectorXd w(dim);
    for (Eigen::Index j = 0; j < dim; ++j) w[j] = weights[j] / scale[j];
    return w;
  }
  double raw_intercept() const {
    double b = intercept;
    for (Eigen::Index j = 0; j < dim; ++j) b -= weights[j] * center[j] / scale[j];
    return b;
  }
};

namespace detail {

inline void check_spec(const LearnerSpec& spec) {
  if (!(spec.clip_epsilon > 0.0 && spec.clip_epsilon < 0.5)) {
    throw Error(ErrorKind::bad_input, "clip_epsilon must lie in (0, 0.5)");
  }
  if (spec.lambda < 0.0) {
    throw Error(ErrorKind::bad_input, "lambda must be nonnegative");
  }
  if ((spec.kind == LearnerKind::knn_regress ||
       spec.kind == LearnerKind::knn_classify) &&
      spec.k < 1) {
    throw Error(ErrorKind::bad_input, "k must be at least 1");
  }
}

inline void standardize_setup(const Eigen::MatrixXd& features, FittedModel& model) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  model.dim = d;
  model.center = features.colwise().mean();
  model.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double var = (features.col(j).array() - model.center[j]).square().sum() /
                 static_cast<double>(n);
    model.scale[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
}

inline Eigen::MatrixXd standardize(const FittedModel& model,
                                   const Eigen::MatrixXd& features) {
  Eigen::MatrixXd z = features;
  for (Eigen::Index j = 0; j < model.dim; ++j) {
    z.col(j) = (z.col(j).array() - model.center[j]) / model.scale[j];
  }
  return z;
}

inline double logistic_loss(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, double b, double lambda) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double eta = b + z.row(i).dot(w);
    // log(1 + exp(eta)) - y*eta, computed stably
    loss += std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))) - y[i] * eta;
  }
  return loss + 0.5 * lambda * w.squaredNorm();
}

}  // namespace detail

inline FittedModel fit_regressor(const Eigen::MatrixXd& features,
                                 const Eigen::VectorXd& targets,
                                 const LearnerSpec& spec) {
  detail::check_spec(spec);
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n < 1 || targets.size() != n) {
    throw Error(ErrorKind::insufficient_data, "fit_regressor needs n >= 1 rows");
  }

  FittedModel model;
  model.kind = spec.kind;
  model.clip_epsilon = spec.clip_epsilon;
  detail::standardize_setup(features, model);
  Eigen::MatrixXd z = detail::standardize(model, features);

  if (spec.kind == LearnerKind::knn_regress) {
    if (n < spec.k) {
      throw Error(ErrorKind::insufficient_data,
                  "knn needs k <= n (k=" + std::to_string(spec.k) +
                      ", n=" + std::to_string(n) + ")");
    }
    model.k = spec.k;
    model.train_z = std::move(z);
    model.train_targets = targets;
    return model;
  }
  if (spec.kind != LearnerKind::ridge_linear) {
    throw Error(ErrorKind::bad_input, "fit_regressor expects a regression learner");
  }

  double ybar = targets.mean();
  Eigen::VectorXd yc = targets.array() - ybar;
  Eigen::MatrixXd gram = z.transpose() * z;
  Eigen::VectorXd rhs = z.transpose() * yc;
  gram.diagonal().array() += spec.lambda;
  if (spec.lambda == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
      throw Error(ErrorKind::degenerate_design,
                  "singular normal equations with lambda=0");
    }
    model.weights = lu.solve(rhs);
  } else {
    model.weights = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(rhs);
  }
  model.intercept = ybar;
  return model;
}

inline FittedModel fit_classifier(const Eigen::MatrixXd& features,
                                  const std::vector<int>& labels,
                                  const LearnerSpec& spec) {
  detail::check_spec(spec);
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n < 1 || static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error(ErrorKind::insufficient_data, "fit_classifier needs n >= 1 rows");
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw Error(ErrorKind::non_binary_indicator, "classifier labels must be 0/1");
    }
    y[i] = labels[i];
  }

  FittedModel model;
  model.kind = spec.kind;
  model.clip_epsilon = spec.clip_epsilon;
  detail::standardize_setup(features, model);
  Eigen::MatrixXd z = detail::standardize(model, features);

  if (spec.kind == LearnerKind::knn_classify) {
    if (n < spec.k) {
      throw Error(ErrorKind::insufficient_data, "knn needs k <= n");
    }
    model.k = spec.k;
    model.train_z = std::move(z);
    model.train_targets = y;
    return model;
  }
  if (spec.kind != LearnerKind::logistic) {
    throw Error(ErrorKind::bad_input, "fit_classifier expects a classifier learner");
  }

  // IRLS with an unpenalized intercept and backtracking so the penalized
  // loss never increases. Stops when the largest parameter change drops
  // below 1e-8 or after 100 iterations (reported via the converged flag).
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  double loss = detail::logistic_loss(z, y, w, b, spec.lambda);
  model.loss_path.push_back(loss);
  model.converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd eta = (z * w).array() + b;
    Eigen::VectorXd p(n), wt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = expit(eta[i]);
      wt[i] = std::max(p[i] * (1.0 - p[i]), 1e-10);
    }
    Eigen::VectorXd resid = p - y;
    Eigen::VectorXd grad_w = z.transpose() * resid + spec.lambda * w;
    double grad_b = resid.sum();

    Eigen::MatrixXd h(d + 1, d + 1);
    h(0, 0) = wt.sum();
    Eigen::VectorXd zw = z.transpose() * wt;
    h.block(0, 1, 1, d) = zw.transpose();
    h.block(1, 0, d, 1) = zw;
    h.block(1, 1, d, d) = z.transpose() * wt.asDiagonal() * z;
    h.block(1, 1, d, d).diagonal().array() += spec.lambda;

    Eigen::VectorXd grad(d + 1);
    grad[0] = grad_b;
    grad.tail(d) = grad_w;
    Eigen::VectorXd dir = Eigen::LDLT<Eigen::MatrixXd>(h).solve(-grad);

    double step = 1.0;
    double new_loss = loss;
    Eigen::VectorXd w_try;
    double b_try = b;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      b_try = b + step * dir[0];
      w_try = w + step * dir.tail(d);
      new_loss = detail::logistic_loss(z, y, w_try, b_try, spec.lambda);
      if (new_loss <= loss) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;

    double max_change = std::abs(step * dir[0]);
    max_change = std::max(max_change, (step * dir.tail(d)).cwiseAbs().maxCoeff());
    w = w_try;
    b = b_try;
    loss = new_loss;
    model.loss_path.push_back(loss);
    if (max_change < 1e-8) {
      model.converged = true;
      break;
    }
  }
  model.weights = w;
  model.intercept = b;
  return model;
}

namespace detail {

inline double knn_predict_one(const FittedModel& model, const Eigen::RowVectorXd& z) {
  const Eigen::Index n = model.train_z.rows();
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = {(model.train_z.row(i) - z).squaredNorm(), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + model.k, dist.end());
  double sum = 0.0;
  for (int j = 0; j < model.k; ++j) sum += model.train_targets[dist[j].second];
  return sum / model.k;
}

}  // namespace detail

inline Eigen::VectorXd predict(const FittedModel& model,
                               const Eigen::MatrixXd& features) {
  if (features.cols() != model.dim) {
    throw Error(ErrorKind::dimension_mismatch,
                "expected " + std::to_string(model.dim) + " features, got " +
                    std::to_string(features.cols()));
  }
  Eigen::MatrixXd z = detail::standardize(model, features);
  Eigen::VectorXd out(features.rows());
  switch (model.kind) {
    case LearnerKind::ridge_linear:
      out = (z * model.weights).array() + model.intercept;
      break;
    case LearnerKind::logistic:
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        out[i] = expit(model.intercept + z.row(i).dot(model.weights));
      }
      break;
    case LearnerKind::knn_regress:
    case LearnerKind::knn_classify:
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        out[i] = detail::knn_predict_one(model, z.row(i));
      }
      break;
  }
  return out;
}

/// Class-1 probabilities clipped into [eps, 1-eps].
inline Eigen::VectorXd predict_proba(const FittedModel& model,
                                     const Eigen::MatrixXd& features) {
  if (model.kind != LearnerKind::logistic && model.kind != LearnerKind::knn_classify) {
    throw Error(ErrorKind::bad_input, "predict_proba needs a classifier model");
  }
  Eigen::VectorXd raw = predict(model, features);
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    raw[i] = clip(raw[i], model.clip_epsilon, 1.0 - model.clip_epsilon);
  }
  return raw;
}

}  // namespace fusedml
