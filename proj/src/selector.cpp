#include "mapfsel/selector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mapfsel {

std::vector<double> pooled_features(const FeatureTensor& t, int agent_count) {
  std::vector<double> phi;
  phi.reserve(kFeatureDim);
  const std::size_t n = t.channels[0].size();
  for (int ch = 0; ch < kNumChannels; ++ch) {
    double sum = 0.0, mx = 0.0;
    std::size_t nonzero = 0;
    for (double v : t.channels[ch]) {
      sum += v;
      mx = std::max(mx, v);
      if (v != 0.0) ++nonzero;
    }
    phi.push_back(sum / static_cast<double>(n) / 100.0);
    phi.push_back(mx / 100.0);
    phi.push_back(static_cast<double>(nonzero) / static_cast<double>(n));
  }
  phi.push_back(agent_count / 100.0);
  phi.push_back(std::log(static_cast<double>(n)));
  return phi;
}

SelectorModel SelectorModel::zeros(std::vector<std::string> ids) {
  SelectorModel m;
  m.solver_ids = std::move(ids);
  m.weights.assign(m.solver_ids.size() * kFeatureDim, 0.0);
  m.bias.assign(m.solver_ids.size(), 0.0);
  return m;
}

std::vector<double> forward_pooled(const SelectorModel& model,
                                   const std::vector<double>& phi) {
  if (phi.size() != kFeatureDim)
    throw std::invalid_argument("feature dimension mismatch");
  const int k = model.num_solvers();
  std::vector<double> logits(k, 0.0);
  for (int a = 0; a < k; ++a) {
    double z = model.bias[a];
    const double* row = model.weights.data() + a * kFeatureDim;
    for (int f = 0; f < kFeatureDim; ++f) z += row[f] * phi[f];
    logits[a] = z;
  }
  double zmax = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double& z : logits) {
    z = std::exp(z - zmax);
    denom += z;
  }
  for (double& z : logits) z /= denom;
  return logits;
}

std::vector<double> forward(const SelectorModel& model, const FeatureTensor& t,
                            int agent_count) {
  return forward_pooled(model, pooled_features(t, agent_count));
}

int predict(const SelectorModel& model, const FeatureTensor& t,
            int agent_count) {
  std::vector<double> p = forward(model, t, agent_count);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

LossSpec LossSpec::parse(const std::string& s) {
  LossSpec spec;
  if (s == "ce" || s == "CE") spec.kind = Kind::CE;
  else if (s == "bce" || s == "BCE") spec.kind = Kind::BCE;
  else if (s == "reg" || s == "REG" || s == "Reg") spec.kind = Kind::REG;
  else throw std::invalid_argument("loss must be one of ce, bce, reg: " + s);
  return spec;
}

std::string LossSpec::str() const {
  switch (kind) {
    case Kind::CE: return "CE";
    case Kind::BCE: return "BCE";
    case Kind::REG: return "Reg";
  }
  return "";
}

namespace {

double clamp_p(double p) {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

double huber(double r, double delta) {
  double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_deriv(double r, double delta) {
  if (std::abs(r) <= delta) return r;
  return r > 0 ? delta : -delta;
}

}  // namespace

double loss(const std::vector<double>& p, int label,
            const std::vector<double>& scores, const LossSpec& spec) {
  switch (spec.kind) {
    case LossSpec::Kind::CE:
      return -std::log(clamp_p(p[label]));
    case LossSpec::Kind::BCE: {
      double l = 0.0;
      for (std::size_t a = 0; a < p.size(); ++a) {
        double pa = clamp_p(p[a]);
        l -= a == static_cast<std::size_t>(label) ? std::log(pa)
                                                  : std::log(1.0 - pa);
      }
      return l;
    }
    case LossSpec::Kind::REG: {
      double expected = 0.0;
      for (std::size_t a = 0; a < p.size(); ++a) expected += p[a] * scores[a];
      return huber(expected - scores[label], spec.huber_delta);
    }
  }
  return 0.0;
}

std::vector<double> loss_grad_logits(const std::vector<double>& p, int label,
                                     const std::vector<double>& scores,
                                     const LossSpec& spec) {
  const std::size_t k = p.size();
  std::vector<double> grad(k, 0.0);
  switch (spec.kind) {
    case LossSpec::Kind::CE:
      for (std::size_t a = 0; a < k; ++a)
        grad[a] = p[a] - (a == static_cast<std::size_t>(label) ? 1.0 : 0.0);
      break;
    case LossSpec::Kind::BCE: {
      // dL/dp through the softmax jacobian: dz_j = sum_a dL/dp_a p_a (d_aj - p_j)
      std::vector<double> dp(k);
      for (std::size_t a = 0; a < k; ++a) {
        double pa = clamp_p(p[a]);
        dp[a] = a == static_cast<std::size_t>(label) ? -1.0 / pa
                                                     : 1.0 / (1.0 - pa);
      }
      double dot = 0.0;
      for (std::size_t a = 0; a < k; ++a) dot += dp[a] * p[a];
      for (std::size_t j = 0; j < k; ++j) grad[j] = p[j] * (dp[j] - dot);
      break;
    }
    case LossSpec::Kind::REG: {
      double expected = 0.0;
      for (std::size_t a = 0; a < k; ++a) expected += p[a] * scores[a];
      double hd = huber_deriv(expected - scores[label], spec.huber_delta);
      for (std::size_t j = 0; j < k; ++j)
        grad[j] = hd * p[j] * (scores[j] - expected);
      break;
    }
  }
  return grad;
}

TrainResult train(const std::vector<TrainInstance>& train_split,
                  const std::vector<TrainInstance>& val_split,
                  std::vector<std::string> solver_ids, const LossSpec& spec,
                  const TrainConfig& config) {
  if (train_split.empty())
    throw std::invalid_argument("train: empty training split");
  TrainResult out;
  out.model = SelectorModel::zeros(std::move(solver_ids));
  SelectorModel& model = out.model;
  const int k = model.num_solvers();

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_split.size());
  std::iota(order.begin(), order.end(), 0);

  // pooled features are augmentation-dependent; precompute when static
  std::vector<std::vector<double>> phi_cache;
  if (!config.augment) {
    phi_cache.reserve(train_split.size());
    for (const auto& inst : train_split)
      phi_cache.push_back(pooled_features(*inst.tensor, inst.agent_count));
  }
  std::vector<std::vector<double>> val_phi;
  val_phi.reserve(val_split.size());
  for (const auto& inst : val_split)
    val_phi.push_back(pooled_features(*inst.tensor, inst.agent_count));

  auto eval_split = [&](const std::vector<TrainInstance>& split,
                        const std::vector<std::vector<double>>& phis) {
    double total = 0.0;
    for (std::size_t i = 0; i < split.size(); ++i) {
      std::vector<double> p = forward_pooled(model, phis[i]);
      total += loss(p, split[i].label, split[i].scores, spec);
    }
    return split.empty() ? 0.0 : total / static_cast<double>(split.size());
  };

  SelectorModel best = model;
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<double> gw(model.weights.size());
  std::vector<double> gb(model.bias.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(config.batch_size)) {
      std::size_t end = std::min(order.size(),
                                 pos + static_cast<std::size_t>(config.batch_size));
      std::fill(gw.begin(), gw.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t i = pos; i < end; ++i) {
        const TrainInstance& inst = train_split[order[i]];
        std::vector<double> phi;
        const std::vector<double>* phi_ptr;
        if (config.augment) {
          FeatureTensor aug = augment(*inst.tensor, rng);
          phi = pooled_features(aug, inst.agent_count);
          phi_ptr = &phi;
        } else {
          phi_ptr = &phi_cache[order[i]];
        }
        std::vector<double> p = forward_pooled(model, *phi_ptr);
        double l = loss(p, inst.label, inst.scores, spec);
        if (!std::isfinite(l))
          throw std::runtime_error(
              "train: non-finite loss at epoch " + std::to_string(epoch) +
              " (learning rate too high?)");
        epoch_loss += l;
        std::vector<double> gz = loss_grad_logits(p, inst.label, inst.scores, spec);
        for (int a = 0; a < k; ++a) {
          gb[a] += gz[a];
          double* row = gw.data() + a * kFeatureDim;
          for (int f = 0; f < kFeatureDim; ++f) row[f] += gz[a] * (*phi_ptr)[f];
        }
      }
      const double lr = config.learning_rate / static_cast<double>(end - pos);
      for (std::size_t i = 0; i < model.weights.size(); ++i)
        model.weights[i] -= lr * gw[i];
      for (int a = 0; a < k; ++a) model.bias[a] -= lr * gb[a];
    }
    out.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    double vl = val_split.empty() ? out.train_loss.back()
                                  : eval_split(val_split, val_phi);
    out.val_loss.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      best = model;
      out.best_epoch = epoch;
    }
  }
  out.model = best;
  return out;
}

void SelectorModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "schema " << kPooledSchemaVersion << "\n";
  out << "solvers";
  for (const auto& id : solver_ids) out << " " << id;
  out << "\n";
  out << "feature_dim " << kFeatureDim << "\n";
  for (int a = 0; a < num_solvers(); ++a) {
    out << "w";
    for (int f = 0; f < kFeatureDim; ++f)
      out << " " << weights[a * kFeatureDim + f];
    out << "\n";
  }
  out << "b";
  for (double b : bias) out << " " << b;
  out << "\n";
}

SelectorModel SelectorModel::load(const std::string& path,
                                  const std::vector<std::string>& expected_ids) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file " + path);
  SelectorModel m;
  std::string line, key;
  int schema = 0, fdim = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    ss >> key;
    if (key == "schema") ss >> schema;
    else if (key == "solvers") {
      std::string id;
      while (ss >> id) m.solver_ids.push_back(id);
    } else if (key == "feature_dim") ss >> fdim;
    else if (key == "w") {
      double v;
      while (ss >> v) m.weights.push_back(v);
    } else if (key == "b") {
      double v;
      while (ss >> v) m.bias.push_back(v);
    }
  }
  if (schema != kPooledSchemaVersion || fdim != kFeatureDim)
    throw std::runtime_error("model file schema mismatch: " + path);
  if (m.weights.size() != m.solver_ids.size() * kFeatureDim ||
      m.bias.size() != m.solver_ids.size())
    throw std::runtime_error("model file dimension mismatch: " + path);
  if (!expected_ids.empty() && m.solver_ids != expected_ids)
    throw std::runtime_error("model portfolio ids mismatch: " + path);
  return m;
}

}  // namespace mapfsel
