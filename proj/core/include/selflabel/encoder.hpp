// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "selflabel/assignment.hpp"
#include "selflabel/matrix.hpp"
#include "selflabel/rng.hpp"
#include "selflabel/synthdata.hpp"

namespace selflabel {

/// Two-layer embedding network: z = W2 tanh(W1 x + b1) + b2.
struct EncoderParams {
  Matrix w1;  // hidden x input
  Vector b1;  // hidden
  Matrix w2;  // embedding x hidden
  Vector b2;  // embedding

  std::size_t input_dim() const { return w1.cols(); }
  std::size_t hidden_dim() const { return w1.rows(); }
  std::size_t embedding_dim() const { return w2.rows(); }
  std::size_t parameter_count() const;

  static EncoderParams zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t embedding_dim);

  bool operator==(const EncoderParams&) const = default;
};

/// Linear classifier over embeddings: logits = W z + b.
struct ClassifierHead {
  Matrix w;  // classes x embedding
  Vector b;  // classes

  std::size_t classes() const { return w.rows(); }
  std::size_t parameter_count() const { return w.size() + b.size(); }

  static ClassifierHead zeros(std::size_t embedding_dim, std::size_t classes);

  bool operator==(const ClassifierHead&) const = default;
};

enum class OptimizerKind { kSgd, kAdam };

/// Which terms enter the contrastive denominator for anchor (i, j).
/// kPaper: only (k, l) with k != i and l != j, i.e. the opposite view of
/// every other sample. kSimclr: every (k, l) != (i, j), positive included.
enum class ContrastiveDenominator { kPaper, kSimclr };

OptimizerKind parse_optimizer(std::string_view text);
ContrastiveDenominator parse_denominator(std::string_view text);
std::string_view to_string(OptimizerKind k);
std::string_view to_string(ContrastiveDenominator d);

struct TrainConfig {
  std::size_t batch_size = 128;
  double temperature = 0.1;
  double epsilon_smooth = 0.1;
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  ContrastiveDenominator denominator = ContrastiveDenominator::kPaper;
  std::size_t hidden_dim = 64;
  std::size_t embedding_dim = 16;
  /// Additive-noise augmentation: contrastive views always use it;
  /// supervised training applies it to each sample with augment_probability.
  NoiseRange augmentation{0.1, 0.4};
  double augment_probability = 0.6;

  /// Throws ConfigError on temperature <= 0, batch_size < 2, epsilon
  /// outside [0, 1), non-positive learning rate or zero dims.
  void validate() const;
};

Vector flatten(const EncoderParams& p);
Vector flatten(const EncoderParams& p, const ClassifierHead& head);
/// Inverse of flatten(); shapes are taken from `shape`.
EncoderParams unflatten(std::span<const double> flat, const EncoderParams& shape);
ClassifierHead unflatten_head(std::span<const double> flat, const EncoderParams& encoder_shape,
                              const ClassifierHead& shape);

/// Uniform in +-1/sqrt(fan_in) for weights and biases.
EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t embedding_dim,
                           Rng& rng);
ClassifierHead init_head(std::size_t embedding_dim, std::size_t classes, Rng& rng);

/// Parameters train_contrastive / train_classifier start from for a given
/// input dimension and config.
EncoderParams initial_encoder(std::size_t input_dim, const TrainConfig& config);

/// Throws NumericError on non-finite input and ArgumentError on a
/// dimension mismatch.
Vector embed(const EncoderParams& params, std::span<const double> x);
Matrix embed_rows(const EncoderParams& params, const Matrix& x);

struct LossGradient {
  double loss = 0.0;
  Matrix grad;  // same shape as the loss input
};

/// Contrastive loss over a batch of 2M embeddings. Row 2i holds view 1 and
/// row 2i+1 view 2 of sample i. The loss is the mean of the per-anchor
/// losses -log(exp(cos(z_i1, z_i2)/tau) / sum_denominator exp(cos(z_ij, z_kl)/tau)).
/// Throws ArgumentError when M < 2 and NumericError on a zero-norm row.
LossGradient contrastive_loss(const Matrix& z, double temperature,
                              ContrastiveDenominator denominator = ContrastiveDenominator::kPaper);

Vector classifier_logits(const ClassifierHead& head, std::span<const double> z);
/// Softmax with max subtraction.
Vector softmax(std::span<const double> logits);
Vector classifier_posteriors(const ClassifierHead& head, std::span<const double> z);

/// (1 - epsilon) * onehot(y) + epsilon / K.
Vector smoothed_label_distribution(int y, std::size_t classes, double epsilon);

struct CrossEntropy {
  double loss = 0.0;
  Vector grad_logits;  // softmax(logits) - target
};

/// -sum_k q_k log p_k with log p from a log-sum-exp, so saturated logits
/// never produce NaN.
CrossEntropy cross_entropy_loss(std::span<const double> logits, std::span<const double> target);
/// Same loss evaluated from posteriors directly; zero-probability entries
/// are clamped to the smallest normal double.
double cross_entropy_from_posteriors(std::span<const double> posteriors,
                                     std::span<const double> target);
/// Entropy of a distribution in nats: the lowest cross entropy any
/// posterior can reach against that target.
double entropy(std::span<const double> distribution);

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double accuracy = 0.0;  // NaN for contrastive training
};

struct ContrastiveResult {
  EncoderParams encoder;
  std::vector<EpochLog> log;
};

struct ClassifierResult {
  EncoderParams encoder;
  ClassifierHead head;
  std::vector<EpochLog> log;
  /// Accuracy of the final model on the unaugmented training rows.
  double train_accuracy = 0.0;
};

/// Contrastive pretraining on the rows of `features`. Mini-batches of
/// batch_size samples are drawn without replacement each epoch; a
/// trailing batch smaller than 2 is dropped. Throws TrainingError on a
/// non-finite loss.
ContrastiveResult train_contrastive(const Matrix& features, const TrainConfig& config);

/// Supervised training of a fresh encoder plus classifier head against
/// `pseudo_labels` with label smoothing. `pseudo_labels.k` is the number of
/// classes. Throws ArgumentError on a label outside [0, k) or a length
/// mismatch, TrainingError on a non-finite loss.
ClassifierResult train_classifier(const Matrix& features, const Assignment& pseudo_labels,
                                  const TrainConfig& config);

/// Mean smoothed cross entropy of a model over labelled rows, without
/// augmentation.
double classifier_loss(const EncoderParams& encoder, const ClassifierHead& head, const Matrix& x,
                       const Assignment& labels, double epsilon);

/// Loss at `params`; when `grad` is non-empty it receives the analytic
/// gradient (same length as params).
using Objective = std::function<double(std::span<const double> params, std::span<double> grad)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = true;
};

/// Compares the analytic gradient of `objective` at `params` with central
/// differences of step `step`. Relative error per coordinate is
/// |a - n| / max(|a|, |n|, floor).
GradCheckReport grad_check(const Objective& objective, std::span<const double> params,
                           double tolerance, double step = 1e-5, double floor = 1e-6);

/// Contrastive loss of a batch of raw view pairs pushed through an encoder,
/// as a function of the flattened encoder parameters.
Objective contrastive_objective(const EncoderParams& shape, Matrix views, double temperature,
                                ContrastiveDenominator denominator);
/// Mean smoothed cross entropy through encoder and head, as a function of
/// flatten(encoder, head).
Objective classifier_objective(const EncoderParams& encoder_shape, const ClassifierHead& head_shape,
                               Matrix x, Assignment labels, double epsilon);

struct Checkpoint {
  EncoderParams encoder;
  std::optional<ClassifierHead> head;
  bool operator==(const Checkpoint&) const = default;
};

/// ENC1 file: "ENC1", u32 LE input, hidden, embedding, classes (0 when no
/// head), then f32 LE values of W1, b1, W2, b2[, W, b], row-major.
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// TSV with header "epoch\tmean_loss\taccuracy".
void write_training_log(const std::vector<EpochLog>& log, const std::filesystem::path& path);

}  // namespace selflabel
