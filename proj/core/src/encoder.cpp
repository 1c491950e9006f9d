// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selflabel/errors.hpp"

namespace selflabel {
namespace {

void fill_uniform(std::span<double> values, double bound, Rng& rng) {
  for (double& v : values) v = rng.uniform(-bound, bound);
}

std::size_t copy_out(std::span<const double> src, std::span<double> dst, std::size_t offset) {
  std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(offset));
  return offset + src.size();
}

std::size_t copy_in(std::span<const double> src, std::size_t offset, std::span<double> dst) {
  std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
  return offset + dst.size();
}

}  // namespace

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::kSgd;
  if (text == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(text) + "' (expected sgd|adam)");
}

ContrastiveDenominator parse_denominator(std::string_view text) {
  if (text == "paper") return ContrastiveDenominator::kPaper;
  if (text == "simclr") return ContrastiveDenominator::kSimclr;
  throw ConfigError("unknown contrastive denominator '" + std::string(text) +
                    "' (expected paper|simclr)");
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

std::string_view to_string(ContrastiveDenominator d) {
  return d == ContrastiveDenominator::kPaper ? "paper" : "simclr";
}

void TrainConfig::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (!(epsilon_smooth >= 0.0 && epsilon_smooth < 1.0))
    throw ConfigError("epsilon_smooth must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (hidden_dim == 0 || embedding_dim == 0) throw ConfigError("network dimensions must be >= 1");
  if (!(augmentation.low >= 0.0 && augmentation.low <= augmentation.high))
    throw ConfigError("augmentation range must satisfy 0 <= low <= high");
  if (!(augment_probability >= 0.0 && augment_probability <= 1.0))
    throw ConfigError("augment_probability must lie in [0, 1]");
}

std::size_t EncoderParams::parameter_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size();
}

EncoderParams EncoderParams::zeros(std::size_t input_dim, std::size_t hidden_dim,
                                   std::size_t embedding_dim) {
  return {Matrix(hidden_dim, input_dim), Vector(hidden_dim, 0.0), Matrix(embedding_dim, hidden_dim),
          Vector(embedding_dim, 0.0)};
}

ClassifierHead ClassifierHead::zeros(std::size_t embedding_dim, std::size_t classes) {
  return {Matrix(classes, embedding_dim), Vector(classes, 0.0)};
}

Vector flatten(const EncoderParams& p) {
  Vector flat(p.parameter_count());
  std::size_t at = 0;
  at = copy_out(p.w1.values(), flat, at);
  at = copy_out(p.b1, flat, at);
  at = copy_out(p.w2.values(), flat, at);
  copy_out(p.b2, flat, at);
  return flat;
}

Vector flatten(const EncoderParams& p, const ClassifierHead& head) {
  Vector flat = flatten(p);
  flat.insert(flat.end(), head.w.values().begin(), head.w.values().end());
  flat.insert(flat.end(), head.b.begin(), head.b.end());
  return flat;
}

EncoderParams unflatten(std::span<const double> flat, const EncoderParams& shape) {
  if (flat.size() < shape.parameter_count())
    throw ArgumentError("flat parameter vector too short for encoder shape");
  EncoderParams p = EncoderParams::zeros(shape.input_dim(), shape.hidden_dim(), shape.embedding_dim());
  std::size_t at = 0;
  at = copy_in(flat, at, p.w1.values());
  at = copy_in(flat, at, p.b1);
  at = copy_in(flat, at, p.w2.values());
  copy_in(flat, at, p.b2);
  return p;
}

ClassifierHead unflatten_head(std::span<const double> flat, const EncoderParams& encoder_shape,
                              const ClassifierHead& shape) {
  const std::size_t offset = encoder_shape.parameter_count();
  if (flat.size() < offset + shape.parameter_count())
    throw ArgumentError("flat parameter vector too short for classifier head");
  ClassifierHead h = ClassifierHead::zeros(shape.w.cols(), shape.classes());
  std::size_t at = copy_in(flat, offset, h.w.values());
  copy_in(flat, at, h.b);
  return h;
}

EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t embedding_dim,
                           Rng& rng) {
  EncoderParams p = EncoderParams::zeros(input_dim, hidden_dim, embedding_dim);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  fill_uniform(p.w1.values(), bound1, rng);
  fill_uniform(p.b1, bound1, rng);
  fill_uniform(p.w2.values(), bound2, rng);
  fill_uniform(p.b2, bound2, rng);
  return p;
}

ClassifierHead init_head(std::size_t embedding_dim, std::size_t classes, Rng& rng) {
  ClassifierHead h = ClassifierHead::zeros(embedding_dim, classes);
  const double bound = 1.0 / std::sqrt(static_cast<double>(embedding_dim));
  fill_uniform(h.w.values(), bound, rng);
  fill_uniform(h.b, bound, rng);
  return h;
}

EncoderParams initial_encoder(std::size_t input_dim, const TrainConfig& config) {
  Rng rng(derive_seed(config.seed, 11));
  return init_encoder(input_dim, config.hidden_dim, config.embedding_dim, rng);
}

Vector embed(const EncoderParams& params, std::span<const double> x) {
  if (x.size() != params.input_dim())
    throw ArgumentError("input dimension " + std::to_string(x.size()) + " does not match encoder input " +
                        std::to_string(params.input_dim()));
  if (!all_finite(x)) throw NumericError("non-finite encoder input");
  Vector hidden(params.hidden_dim());
  for (std::size_t h = 0; h < hidden.size(); ++h)
    hidden[h] = std::tanh(dot(params.w1.row(h), x) + params.b1[h]);
  Vector z(params.embedding_dim());
  for (std::size_t e = 0; e < z.size(); ++e) z[e] = dot(params.w2.row(e), hidden) + params.b2[e];
  return z;
}

Matrix embed_rows(const EncoderParams& params, const Matrix& x) {
  Matrix z(x.rows(), params.embedding_dim());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Vector row = embed(params, x.row(i));
    std::copy(row.begin(), row.end(), z.row(i).begin());
  }
  return z;
}

LossGradient contrastive_loss(const Matrix& z, double temperature,
                              ContrastiveDenominator denominator) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  if (n < 4 || n % 2 != 0) throw ArgumentError("contrastive batch needs 2M rows with M >= 2");
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be > 0");

  Vector norms(n);
  Matrix unit(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    norms[r] = norm(z.row(r));
    if (!(norms[r] > 0.0) || !std::isfinite(norms[r]))
      throw NumericError("zero-norm or non-finite embedding in contrastive batch (row " +
                         std::to_string(r) + ")");
    for (std::size_t c = 0; c < d; ++c) unit(r, c) = z(r, c) / norms[r];
  }

  Matrix cosine(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c) cosine(r, c) = cosine(c, r) = dot(unit.row(r), unit.row(c));

  auto in_denominator = [&](std::size_t anchor, std::size_t other) {
    if (denominator == ContrastiveDenominator::kSimclr) return other != anchor;
    return (other / 2 != anchor / 2) && (other % 2 != anchor % 2);
  };

  // dL/dcos, accumulated per anchor row.
  Matrix g(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_tau = 1.0 / temperature;
  double total = 0.0;
  Vector logits(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t partner = r ^ 1u;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c)
      if (in_denominator(r, c)) max_logit = std::max(max_logit, cosine(r, c) * inv_tau);
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (!in_denominator(r, c)) continue;
      logits[c] = std::exp(cosine(r, c) * inv_tau - max_logit);
      sum += logits[c];
    }
    total += -cosine(r, partner) * inv_tau + max_logit + std::log(sum);
    g(r, partner) -= inv_tau * inv_n;
    for (std::size_t c = 0; c < n; ++c)
      if (in_denominator(r, c)) g(r, c) += logits[c] / sum * inv_tau * inv_n;
  }

  LossGradient out{total * inv_n, Matrix(n, d)};
  for (std::size_t r = 0; r < n; ++r) {
    Vector du(d, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      const double weight = g(r, c) + g(c, r);
      if (weight == 0.0) continue;
      const auto uc = unit.row(c);
      for (std::size_t k = 0; k < d; ++k) du[k] += weight * uc[k];
    }
    const auto ur = unit.row(r);
    const double radial = dot(du, ur);
    for (std::size_t k = 0; k < d; ++k) out.grad(r, k) = (du[k] - radial * ur[k]) / norms[r];
  }
  return out;
}

Vector classifier_logits(const ClassifierHead& head, std::span<const double> z) {
  if (z.size() != head.w.cols()) throw ArgumentError("embedding dimension does not match classifier");
  Vector logits(head.classes());
  for (std::size_t k = 0; k < logits.size(); ++k) logits[k] = dot(head.w.row(k), z) + head.b[k];
  return logits;
}

Vector softmax(std::span<const double> logits) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  Vector p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp(logits[k] - max_logit);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

Vector classifier_posteriors(const ClassifierHead& head, std::span<const double> z) {
  return softmax(classifier_logits(head, z));
}

Vector smoothed_label_distribution(int y, std::size_t classes, double epsilon) {
  if (classes == 0 || y < 0 || static_cast<std::size_t>(y) >= classes)
    throw ArgumentError("label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ArgumentError("epsilon must lie in [0, 1)");
  Vector q(classes, epsilon / static_cast<double>(classes));
  q[static_cast<std::size_t>(y)] += 1.0 - epsilon;
  return q;
}

CrossEntropy cross_entropy_loss(std::span<const double> logits, std::span<const double> target) {
  if (logits.size() != target.size() || logits.empty())
    throw ArgumentError("logits and target distribution differ in length");
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max_logit);
  const double log_norm = max_logit + std::log(sum);

  CrossEntropy out{0.0, Vector(logits.size())};
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (target[k] != 0.0) out.loss -= target[k] * (logits[k] - log_norm);
    out.grad_logits[k] = std::exp(logits[k] - log_norm) - target[k];
  }
  return out;
}

double cross_entropy_from_posteriors(std::span<const double> posteriors,
                                     std::span<const double> target) {
  if (posteriors.size() != target.size()) throw ArgumentError("posterior/target length mismatch");
  double loss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k)
    if (target[k] != 0.0)
      loss -= target[k] * std::log(std::max(posteriors[k], std::numeric_limits<double>::min()));
  return loss;
}

double entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace selflabel
