#pragma once
// Reference trainable selector: a linear softmax over pooled channel
// statistics, trained with CE, BCE or regression-on-expected-score (Huber).
// Deep models consume the exported tensors externally; this model exercises
// every loss and metric pathway behind the same interface.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mapfsel/tensor.hpp"

namespace mapfsel {

// per channel {mean, max, fraction-nonzero} + agent_count/100 + log-area
constexpr int kFeatureDim = kNumChannels * 3 + 2;
constexpr int kPooledSchemaVersion = 1;
constexpr double kProbEpsilon = 1e-12;

std::vector<double> pooled_features(const FeatureTensor& t, int agent_count);

struct SelectorModel {
  std::vector<std::string> solver_ids;
  std::vector<double> weights;  // num_solvers x kFeatureDim, row-major
  std::vector<double> bias;     // num_solvers

  int num_solvers() const { return static_cast<int>(bias.size()); }
  static SelectorModel zeros(std::vector<std::string> solver_ids);

  void save(const std::string& path) const;
  // refuses files whose portfolio ids mismatch `expected_ids` (pass empty
  // to accept any portfolio)
  static SelectorModel load(const std::string& path,
                            const std::vector<std::string>& expected_ids);
};

std::vector<double> forward(const SelectorModel& model, const FeatureTensor& t,
                            int agent_count);
std::vector<double> forward_pooled(const SelectorModel& model,
                                   const std::vector<double>& phi);
int predict(const SelectorModel& model, const FeatureTensor& t, int agent_count);

struct LossSpec {
  enum class Kind { CE, BCE, REG };
  Kind kind = Kind::CE;
  double huber_delta = 1.0;

  static LossSpec parse(const std::string& s);
  std::string str() const;
};

// probabilities as returned by forward; scores needed for REG only.
double loss(const std::vector<double>& probabilities, int label,
            const std::vector<double>& scores, const LossSpec& spec);

// d(loss)/d(logits); same conventions as loss().
std::vector<double> loss_grad_logits(const std::vector<double>& probabilities,
                                     int label,
                                     const std::vector<double>& scores,
                                     const LossSpec& spec);

struct TrainInstance {
  const FeatureTensor* tensor = nullptr;
  int agent_count = 0;
  int label = -1;
  std::vector<double> scores;  // per solver (REG target arithmetic)
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 200;
  int batch_size = 64;
  uint64_t seed = 1;
  bool augment = false;
};

struct TrainResult {
  SelectorModel model;  // epoch-best by validation loss
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  int best_epoch = -1;
};

// Mini-batch gradient descent; bit-deterministic for a fixed seed with
// augmentation off. Throws on non-finite loss.
TrainResult train(const std::vector<TrainInstance>& train_split,
                  const std::vector<TrainInstance>& val_split,
                  std::vector<std::string> solver_ids, const LossSpec& spec,
                  const TrainConfig& config);

}  // namespace mapfsel
