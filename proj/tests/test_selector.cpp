#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "mapfsel/selector.hpp"

using namespace mapfsel;
namespace fs = std::filesystem;

namespace {

// numeric d(loss)/d(logit j) by central differences on the softmax inputs
double fd_grad(const std::vector<double>& logits, int j, int label,
               const std::vector<double>& scores, const LossSpec& spec) {
  auto eval = [&](double eps) {
    std::vector<double> z = logits;
    z[j] += eps;
    double mx = *std::max_element(z.begin(), z.end());
    double denom = 0;
    std::vector<double> p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) denom += std::exp(z[i] - mx);
    for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - mx) / denom;
    return loss(p, label, scores, spec);
  };
  const double h = 1e-6;
  return (eval(h) - eval(-h)) / (2 * h);
}

std::vector<double> softmax(const std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double denom = 0;
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) denom += std::exp(z[i] - mx);
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - mx) / denom;
  return p;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences for all losses") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> zd(-2.0, 2.0);
  std::uniform_real_distribution<double> sd(0.1, 5.0);
  for (const char* name : {"ce", "bce", "reg"}) {
    LossSpec spec = LossSpec::parse(name);
    for (int iter = 0; iter < 40; ++iter) {
      int k = std::uniform_int_distribution<int>(2, 6)(rng);
      std::vector<double> logits(k), scores(k);
      for (double& z : logits) z = zd(rng);
      for (double& s : scores) s = sd(rng);
      int label = static_cast<int>(
          std::min_element(scores.begin(), scores.end()) - scores.begin());

      std::vector<double> p = softmax(logits);
      std::vector<double> analytic = loss_grad_logits(p, label, scores, spec);
      for (int j = 0; j < k; ++j) {
        double numeric = fd_grad(logits, j, label, scores, spec);
        double denom = std::max({std::abs(numeric), std::abs(analytic[j]), 1e-8});
        CHECK(std::abs(analytic[j] - numeric) / denom < 1e-4);
      }
    }
  }
}

TEST_CASE("uniform CE equals ln K to 1e-12") {
  for (int k = 2; k <= 8; ++k) {
    std::vector<double> p(k, 1.0 / k);
    std::vector<double> scores(k, 1.0);
    CHECK(std::abs(loss(p, 0, scores, LossSpec::parse("ce")) - std::log(k)) <
          1e-12);
  }
}

TEST_CASE("REG loss vanishes for a one-hot output at the best score") {
  std::vector<double> scores = {3.0, 1.0, 2.0};
  std::vector<double> p = {0.0, 1.0, 0.0};
  CHECK(loss(p, 1, scores, LossSpec::parse("reg")) == 0.0);
}

TEST_CASE("loss spec parsing") {
  CHECK(LossSpec::parse("ce").str() == "CE");
  CHECK(LossSpec::parse("bce").str() == "BCE");
  CHECK(LossSpec::parse("reg").str() == "Reg");
  CHECK_THROWS(LossSpec::parse("mse"));
}

TEST_CASE("pooled features have the documented schema") {
  FeatureTensor t;
  t.height = t.width = 4;
  t.normalized = true;
  for (auto& ch : t.channels) ch.assign(16, 50.0);
  std::vector<double> phi = pooled_features(t, 30);
  REQUIRE(static_cast<int>(phi.size()) == kFeatureDim);
  // per channel: mean/100, max/100, fraction nonzero
  CHECK(phi[0] == doctest::Approx(0.5));
  CHECK(phi[1] == doctest::Approx(0.5));
  CHECK(phi[2] == doctest::Approx(1.0));
  CHECK(phi[kFeatureDim - 2] == doctest::Approx(0.30));
  CHECK(phi[kFeatureDim - 1] == doctest::Approx(std::log(16.0)));
}

TEST_CASE("training separates a synthetic dataset (seed 7)") {
  // Two solver classes keyed on channel 0 density: dense obstacle channel
  // means solver 1 wins, sparse means solver 0.
  std::mt19937_64 rng(7);
  std::vector<FeatureTensor> storage;
  storage.reserve(300);
  auto make_instance = [&](bool dense) {
    FeatureTensor t;
    t.height = t.width = 6;
    t.normalized = true;
    std::uniform_real_distribution<double> v(0.0, 100.0);
    std::bernoulli_distribution on(dense ? 0.8 : 0.1);
    for (int ch = 0; ch < kNumChannels; ++ch) {
      t.channels[ch].assign(36, 0.0);
      for (double& x : t.channels[ch])
        if (on(rng)) x = v(rng);
    }
    storage.push_back(std::move(t));
    TrainInstance ti;
    ti.tensor = &storage.back();
    ti.agent_count = 10;
    ti.label = dense ? 1 : 0;
    ti.scores = dense ? std::vector<double>{2.0, 1.0}
                      : std::vector<double>{1.0, 2.0};
    return ti;
  };

  std::vector<TrainInstance> train_split, val_split, test_split;
  for (int i = 0; i < 200; ++i) train_split.push_back(make_instance(i % 2));
  for (int i = 0; i < 40; ++i) val_split.push_back(make_instance(i % 2));
  for (int i = 0; i < 60; ++i) test_split.push_back(make_instance(i % 2));

  TrainConfig tc;
  tc.seed = 7;
  tc.epochs = 100;
  TrainResult res = train(train_split, val_split, {"a", "b"},
                          LossSpec::parse("ce"), tc);
  int hits = 0;
  for (const TrainInstance& ti : test_split)
    if (predict(res.model, *ti.tensor, ti.agent_count) == ti.label) ++hits;
  CHECK(static_cast<double>(hits) / test_split.size() >= 0.95);
  CHECK(res.train_loss.size() == 100);
  CHECK(res.best_epoch >= 0);
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  std::mt19937_64 rng(21);
  std::vector<FeatureTensor> storage;
  std::vector<TrainInstance> data;
  for (int i = 0; i < 50; ++i) {
    FeatureTensor t;
    t.height = t.width = 4;
    t.normalized = true;
    std::uniform_real_distribution<double> v(0.0, 100.0);
    for (auto& ch : t.channels) {
      ch.assign(16, 0.0);
      for (double& x : ch) x = v(rng);
    }
    storage.push_back(std::move(t));
    TrainInstance ti;
    ti.tensor = &storage.back();
    ti.agent_count = 5 + i % 3;
    ti.label = i % 3;
    ti.scores = {1.0, 2.0, 3.0};
    data.push_back(ti);
  }
  // storage may reallocate while growing; re-point the tensors
  for (int i = 0; i < 50; ++i) data[i].tensor = &storage[i];

  TrainConfig tc;
  tc.seed = 11;
  tc.epochs = 30;
  TrainResult a = train(data, {}, {"x", "y", "z"}, LossSpec::parse("bce"), tc);
  TrainResult b = train(data, {}, {"x", "y", "z"}, LossSpec::parse("bce"), tc);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.model.bias == b.model.bias);
  CHECK(a.train_loss == b.train_loss);
}

TEST_CASE("model files round-trip and enforce the portfolio") {
  SelectorModel m = SelectorModel::zeros({"cbs", "pp"});
  m.weights[0] = 0.25;
  m.bias[1] = -1.5;
  fs::path path = fs::temp_directory_path() / "mapfsel_model_test.model";
  m.save(path.string());
  SelectorModel back = SelectorModel::load(path.string(), {"cbs", "pp"});
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK_THROWS(SelectorModel::load(path.string(), {"cbs", "pibt"}));
  fs::remove(path);
}
