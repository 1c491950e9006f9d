// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <algorithm>
#include <cmath>
#include <limits>

#include "selflabel/encoder.hpp"
#include "selflabel/errors.hpp"

namespace selflabel {
namespace {

// Offsets of each tensor inside flatten(encoder[, head]).
struct Layout {
  std::size_t in = 0, hidden = 0, embed = 0, classes = 0;
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, hw = 0, hb = 0, total = 0;

  Layout(std::size_t in_dim, std::size_t hidden_dim, std::size_t embed_dim, std::size_t num_classes)
      : in(in_dim), hidden(hidden_dim), embed(embed_dim), classes(num_classes) {
    b1 = w1 + hidden * in;
    w2 = b1 + hidden;
    b2 = w2 + embed * hidden;
    hw = b2 + embed;
    hb = hw + classes * embed;
    total = hb + classes;
  }
};

// Forward pass over flat parameters, keeping the hidden activations.
void forward(const Layout& l, std::span<const double> p, std::span<const double> x,
             std::span<double> hidden, std::span<double> z) {
  for (std::size_t h = 0; h < l.hidden; ++h)
    hidden[h] = std::tanh(dot(p.subspan(l.w1 + h * l.in, l.in), x) + p[l.b1 + h]);
  for (std::size_t e = 0; e < l.embed; ++e)
    z[e] = dot(p.subspan(l.w2 + e * l.hidden, l.hidden), hidden) + p[l.b2 + e];
}

// Accumulates encoder gradients for one row given dL/dz.
void backward(const Layout& l, std::span<const double> p, std::span<const double> x,
              std::span<const double> hidden, std::span<const double> dz, std::span<double> grad,
              std::span<double> scratch) {
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (std::size_t e = 0; e < l.embed; ++e) {
    const double g = dz[e];
    if (g == 0.0) continue;
    grad[l.b2 + e] += g;
    const auto w = p.subspan(l.w2 + e * l.hidden, l.hidden);
    auto gw = grad.subspan(l.w2 + e * l.hidden, l.hidden);
    for (std::size_t h = 0; h < l.hidden; ++h) {
      gw[h] += g * hidden[h];
      scratch[h] += g * w[h];
    }
  }
  for (std::size_t h = 0; h < l.hidden; ++h) {
    const double da = scratch[h] * (1.0 - hidden[h] * hidden[h]);
    grad[l.b1 + h] += da;
    auto gw = grad.subspan(l.w1 + h * l.in, l.in);
    for (std::size_t i = 0; i < l.in; ++i) gw[i] += da * x[i];
  }
}

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::size_t size) : kind_(kind) {
    if (kind_ == OptimizerKind::kAdam) {
      m_.assign(size, 0.0);
      v_.assign(size, 0.0);
    }
  }

  void step(std::span<double> params, std::span<const double> grad, double lr) {
    if (kind_ == OptimizerKind::kSgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
      return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
      v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

 private:
  OptimizerKind kind_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

// Learning rate drops by 10x from epoch ceil(2E/3) on (0-based).
double epoch_learning_rate(const TrainConfig& c, std::size_t epoch) {
  const std::size_t decay_at = (2 * c.epochs + 2) / 3;
  return epoch >= decay_at ? c.learning_rate * 0.1 : c.learning_rate;
}

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kDataStream = 12;

void check_features(const Matrix& x) {
  if (x.rows() == 0) throw ArgumentError("training needs a nonempty feature matrix");
  if (!all_finite(x.values())) throw NumericError("non-finite training features");
}

}  // namespace

ContrastiveResult train_contrastive(const Matrix& features, const TrainConfig& config) {
  config.validate();
  check_features(features);
  if (config.batch_size > features.rows())
    throw ArgumentError("batch_size exceeds the number of samples");

  ContrastiveResult result;
  result.encoder = initial_encoder(features.cols(), config);
  const Layout l(features.cols(), config.hidden_dim, config.embedding_dim, 0);
  Vector params = flatten(result.encoder);
  Vector grad(params.size());
  Optimizer optimizer(config.optimizer, params.size());
  Rng rng(derive_seed(config.seed, kDataStream));

  auto order = iota_indices(features.rows());
  const std::size_t m = config.batch_size;
  Vector scratch(l.hidden);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = epoch_learning_rate(config, epoch);
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + 2 <= order.size(); start += m) {
      const std::size_t count = std::min(m, order.size() - start);
      if (count < 2) break;
      Matrix batch_views(2 * count, l.in);
      for (std::size_t b = 0; b < count; ++b) {
        auto [v1, v2] = make_contrastive_views(features.row(order[start + b]), config.augmentation, rng);
        std::copy(v1.begin(), v1.end(), batch_views.row(2 * b).begin());
        std::copy(v2.begin(), v2.end(), batch_views.row(2 * b + 1).begin());
      }
      Matrix batch_hidden(2 * count, l.hidden), batch_z(2 * count, l.embed);
      for (std::size_t r = 0; r < 2 * count; ++r)
        forward(l, params, batch_views.row(r), batch_hidden.row(r), batch_z.row(r));

      LossGradient lg;
      try {
        lg = contrastive_loss(batch_z, config.temperature, config.denominator);
      } catch (const NumericError& e) {
        throw TrainingError(e.what(), epoch + 1);
      }
      if (!std::isfinite(lg.loss)) throw TrainingError("non-finite contrastive loss", epoch + 1);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t r = 0; r < 2 * count; ++r)
        backward(l, params, batch_views.row(r), batch_hidden.row(r), lg.grad.row(r), grad, scratch);
      optimizer.step(params, grad, lr);
      loss_sum += lg.loss;
      ++batches;
    }
    const double mean = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    if (!std::isfinite(mean) || !all_finite(params))
      throw TrainingError("contrastive training diverged", epoch + 1);
    result.log.push_back({epoch + 1, mean, std::numeric_limits<double>::quiet_NaN()});
  }
  result.encoder = unflatten(params, result.encoder);
  return result;
}

ClassifierResult train_classifier(const Matrix& features, const Assignment& pseudo_labels,
                                  const TrainConfig& config) {
  config.validate();
  check_features(features);
  if (pseudo_labels.size() != features.rows())
    throw ArgumentError("pseudo labels cover " + std::to_string(pseudo_labels.size()) +
                        " samples, features have " + std::to_string(features.rows()));
  pseudo_labels.validate();
  const std::size_t classes = pseudo_labels.k;
  if (classes < 2) throw ArgumentError("classifier training needs at least 2 classes");

  Rng init_rng(derive_seed(config.seed, kInitStream));
  ClassifierResult result;
  result.encoder = init_encoder(features.cols(), config.hidden_dim, config.embedding_dim, init_rng);
  result.head = init_head(config.embedding_dim, classes, init_rng);

  const Layout l(features.cols(), config.hidden_dim, config.embedding_dim, classes);
  Vector params = flatten(result.encoder, result.head);
  Vector grad(params.size());
  Optimizer optimizer(config.optimizer, params.size());
  Rng rng(derive_seed(config.seed, kDataStream));

  auto order = iota_indices(features.rows());
  Vector x(l.in), hidden(l.hidden), z(l.embed), logits(classes), dz(l.embed), scratch(l.hidden);
  const double eps = config.epsilon_smooth;
  const double off_target = eps / static_cast<double>(classes);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = epoch_learning_rate(config, epoch);
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      const double inv_count = 1.0 / static_cast<double>(count);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t i = order[start + b];
        const auto y = static_cast<std::size_t>(pseudo_labels.labels[i]);
        const auto row = features.row(i);
        std::copy(row.begin(), row.end(), x.begin());
        if (rng.uniform() < config.augment_probability) {
          const double scale = rng.uniform(config.augmentation.low, config.augmentation.high);
          if (scale > 0.0)
            for (double& v : x) v += scale * rng.normal();
        }
        forward(l, params, x, hidden, z);

        double max_logit = -std::numeric_limits<double>::infinity();
        std::size_t argmax = 0;
        for (std::size_t k = 0; k < classes; ++k) {
          logits[k] = dot(std::span<const double>(params).subspan(l.hw + k * l.embed, l.embed), z) +
                      params[l.hb + k];
          if (logits[k] > max_logit) {
            max_logit = logits[k];
            argmax = k;
          }
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < classes; ++k) sum += std::exp(logits[k] - max_logit);
        const double log_norm = max_logit + std::log(sum);
        correct += argmax == y;

        std::fill(dz.begin(), dz.end(), 0.0);
        double loss = 0.0;
        for (std::size_t k = 0; k < classes; ++k) {
          const double target = off_target + (k == y ? 1.0 - eps : 0.0);
          const double log_p = logits[k] - log_norm;
          loss -= target * log_p;
          const double g = (std::exp(log_p) - target) * inv_count;
          grad[l.hb + k] += g;
          const std::size_t w = l.hw + k * l.embed;
          for (std::size_t e = 0; e < l.embed; ++e) {
            grad[w + e] += g * z[e];
            dz[e] += g * params[w + e];
          }
        }
        loss_sum += loss;
        backward(l, params, x, hidden, dz, grad, scratch);
      }
      optimizer.step(params, grad, lr);
    }
    const double n = static_cast<double>(features.rows());
    const double mean = loss_sum / n;
    if (!std::isfinite(mean) || !all_finite(params))
      throw TrainingError("classifier training diverged", epoch + 1);
    result.log.push_back({epoch + 1, mean, static_cast<double>(correct) / n});
  }

  result.encoder = unflatten(params, result.encoder);
  result.head = unflatten_head(params, result.encoder, result.head);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const Vector logits_i = classifier_logits(result.head, embed(result.encoder, features.row(i)));
    const auto best = std::max_element(logits_i.begin(), logits_i.end()) - logits_i.begin();
    correct += best == pseudo_labels.labels[i];
  }
  result.train_accuracy = static_cast<double>(correct) / static_cast<double>(features.rows());
  return result;
}

double classifier_loss(const EncoderParams& encoder, const ClassifierHead& head, const Matrix& x,
                       const Assignment& labels, double epsilon) {
  if (labels.size() != x.rows()) throw ArgumentError("label/feature length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Vector logits = classifier_logits(head, embed(encoder, x.row(i)));
    total += cross_entropy_loss(logits, smoothed_label_distribution(labels.labels[i], head.classes(),
                                                                    epsilon))
                 .loss;
  }
  return total / static_cast<double>(x.rows());
}

Objective contrastive_objective(const EncoderParams& shape, Matrix views, double temperature,
                                ContrastiveDenominator denominator) {
  return [shape, views = std::move(views), temperature, denominator](std::span<const double> flat,
                                                                    std::span<double> grad) {
    const Layout l(shape.input_dim(), shape.hidden_dim(), shape.embedding_dim(), 0);
    Matrix hidden(views.rows(), l.hidden), z(views.rows(), l.embed);
    for (std::size_t r = 0; r < views.rows(); ++r) forward(l, flat, views.row(r), hidden.row(r), z.row(r));
    const LossGradient lg = contrastive_loss(z, temperature, denominator);
    if (!grad.empty()) {
      std::fill(grad.begin(), grad.end(), 0.0);
      Vector scratch(l.hidden);
      for (std::size_t r = 0; r < views.rows(); ++r)
        backward(l, flat, views.row(r), hidden.row(r), lg.grad.row(r), grad, scratch);
    }
    return lg.loss;
  };
}

Objective classifier_objective(const EncoderParams& encoder_shape, const ClassifierHead& head_shape,
                               Matrix x, Assignment labels, double epsilon) {
  labels.validate();
  return [encoder_shape, head_shape, x = std::move(x), labels = std::move(labels), epsilon](
             std::span<const double> flat, std::span<double> grad) {
    const EncoderParams enc = unflatten(flat, encoder_shape);
    const ClassifierHead head = unflatten_head(flat, encoder_shape, head_shape);
    const Layout l(enc.input_dim(), enc.hidden_dim(), enc.embedding_dim(), head.classes());
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    Vector hidden(l.hidden), z(l.embed), dz(l.embed), scratch(l.hidden);
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      forward(l, flat, x.row(i), hidden, z);
      const Vector logits = classifier_logits(head, z);
      const CrossEntropy ce = cross_entropy_loss(
          logits, smoothed_label_distribution(labels.labels[i], head.classes(), epsilon));
      total += ce.loss;
      if (grad.empty()) continue;
      std::fill(dz.begin(), dz.end(), 0.0);
      for (std::size_t k = 0; k < head.classes(); ++k) {
        const double g = ce.grad_logits[k] * inv_n;
        grad[l.hb + k] += g;
        for (std::size_t e = 0; e < l.embed; ++e) {
          grad[l.hw + k * l.embed + e] += g * z[e];
          dz[e] += g * head.w(k, e);
        }
      }
      backward(l, flat, x.row(i), hidden, dz, grad, scratch);
    }
    return total * inv_n;
  };
}

}  // namespace selflabel
