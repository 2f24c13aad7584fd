#include "fairscore/learners.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fairscore/rng.hpp"

namespace fairscore {

std::string learner_kind_name(LearnerKind k) {
  return k == LearnerKind::Logistic ? "logistic" : "network";
}

Matrix standardize_features(const Matrix& x, Vector* mean, Vector* scale,
                            bool enabled) {
  const Eigen::Index k = x.cols();
  mean->setZero(k);
  scale->setOnes(k);
  if (!enabled) return x;
  *mean = x.colwise().mean();
  Matrix centered = x.rowwise() - mean->transpose();
  for (Eigen::Index j = 0; j < k; ++j) {
    double var = centered.col(j).squaredNorm() / static_cast<double>(x.rows());
    double sd = std::sqrt(var);
    (*scale)[j] = sd > 0.0 ? sd : 1.0;
  }
  return centered.array().rowwise() / scale->transpose().array();
}

namespace {

void require_both_classes(const Dataset& ds) {
  bool has0 = false, has1 = false;
  for (int y : ds.labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw OneClassOnly("training set has a single class");
}

double default_lr(LearnerKind kind) {
  return kind == LearnerKind::Logistic ? 1.0 : 0.5;
}

}  // namespace

double logistic_objective(const Dataset& ds, const LearnerSpec& spec,
                          const Vector& coef, double intercept,
                          const Matrix& x, Vector* grad_coef,
                          double* grad_intercept, const ScorePenalty& penalty) {
  const Eigen::Index n = x.rows();
  const double wsum = ds.weights.sum();
  Vector z = x * coef;
  z.array() += intercept;
  std::vector<double> scores(static_cast<std::size_t>(n));
  double data_loss = 0.0;
  Vector resid(n);  // weights * (p - y) / wsum
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = sigmoid(z[i]);
    scores[static_cast<std::size_t>(i)] = p;
    double y = static_cast<double>(ds.labels[static_cast<std::size_t>(i)]);
    double w = ds.weights[i];
    // Numerically safe log-loss: log(1+exp(-|z|)) + max(0, -yz-ish form).
    double zl = z[i];
    double ll = (y > 0.5) ? (zl >= 0 ? std::log1p(std::exp(-zl))
                                     : -zl + std::log1p(std::exp(zl)))
                          : (zl >= 0 ? zl + std::log1p(std::exp(-zl))
                                     : std::log1p(std::exp(zl)));
    data_loss += w * ll;
    resid[i] = w * (p - y) / wsum;
  }
  double loss = data_loss / wsum + 0.5 * spec.l2_decay * coef.squaredNorm();
  if (grad_coef) *grad_coef = x.transpose() * resid + spec.l2_decay * coef;
  if (grad_intercept) *grad_intercept = resid.sum();

  if (penalty) {
    Vector pen_grad = Vector::Zero(n);
    loss += penalty(scores, pen_grad);
    if (grad_coef || grad_intercept) {
      Vector dz(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        double p = scores[static_cast<std::size_t>(i)];
        dz[i] = pen_grad[i] * p * (1.0 - p);
      }
      if (grad_coef) *grad_coef += x.transpose() * dz;
      if (grad_intercept) *grad_intercept += dz.sum();
    }
  }
  return loss;
}

int logistic_descend(const Dataset& ds, const LearnerSpec& spec,
                     const Matrix& x, Vector& coef, double& intercept,
                     double& loss, const ScorePenalty& penalty) {
  double lr = spec.learning_rate > 0.0 ? spec.learning_rate
                                       : default_lr(LearnerKind::Logistic);
  Vector grad;
  double grad_b = 0.0;
  loss = logistic_objective(ds, spec, coef, intercept, x, &grad, &grad_b,
                            penalty);
  if (!std::isfinite(loss)) throw NonFiniteLoss("initial loss non-finite");

  int it = 0;
  for (; it < spec.max_iterations; ++it) {
    double gmax = std::max(grad.cwiseAbs().maxCoeff(), std::abs(grad_b));
    if (gmax < 1e-6) break;
    for (;;) {
      Vector cand = coef - lr * grad;
      double cand_b = intercept - lr * grad_b;
      Vector cand_grad;
      double cand_grad_b = 0.0;
      double cand_loss = logistic_objective(ds, spec, cand, cand_b, x,
                                            &cand_grad, &cand_grad_b, penalty);
      if (std::isfinite(cand_loss) && cand_loss <= loss + 1e-12) {
        coef = std::move(cand);
        intercept = cand_b;
        grad = std::move(cand_grad);
        grad_b = cand_grad_b;
        loss = cand_loss;
        break;
      }
      lr *= 0.5;
      if (lr < 1e-18)
        throw NonFiniteLoss("step size underflow; loss cannot decrease");
    }
  }
  return it;
}

TrainedModel train_logistic(const Dataset& ds, const LearnerSpec& spec,
                            const ScorePenalty& penalty) {
  ds.validate();
  require_both_classes(ds);

  TrainedModel m;
  m.kind = LearnerKind::Logistic;
  m.seed = spec.seed;
  Matrix x = standardize_features(ds.features, &m.feature_mean,
                                  &m.feature_scale, spec.standardize);
  m.coef = Vector::Zero(x.cols());
  m.intercept = 0.0;
  m.iterations_used =
      logistic_descend(ds, spec, x, m.coef, m.intercept, m.final_loss, penalty);
  return m;
}

namespace {

struct NetState {
  Matrix w1;
  Vector b1;
  Vector w2;
  double b2 = 0.0;
};

}  // namespace

double network_objective(const Dataset& ds, const LearnerSpec& spec,
                         const Matrix& x, const NetworkParams& p,
                         NetworkParams* grad) {
  const Eigen::Index n = x.rows();
  const Eigen::Index h = p.w2.size();
  const double wsum = ds.weights.sum();

  Matrix a1 = ((x * p.w1).rowwise() + p.b1.transpose())
                  .unaryExpr([](double v) { return sigmoid(v); });
  Vector z2 = a1 * p.w2;
  z2.array() += p.b2;

  double loss = 0.0;
  Vector dz2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double y = static_cast<double>(ds.labels[static_cast<std::size_t>(i)]);
    double zl = z2[i];
    double ll = (y > 0.5) ? (zl >= 0 ? std::log1p(std::exp(-zl))
                                     : -zl + std::log1p(std::exp(zl)))
                          : (zl >= 0 ? zl + std::log1p(std::exp(-zl))
                                     : std::log1p(std::exp(zl)));
    loss += ds.weights[i] * ll;
    dz2[i] = ds.weights[i] * (sigmoid(zl) - y) / wsum;
  }
  loss = loss / wsum + spec.l2_decay * (p.w1.squaredNorm() + p.w2.squaredNorm());

  if (grad != nullptr) {
    grad->w2 = a1.transpose() * dz2 + 2.0 * spec.l2_decay * p.w2;
    grad->b2 = dz2.sum();
    Matrix dz1 = (dz2 * p.w2.transpose())
                     .cwiseProduct(a1.cwiseProduct(Matrix::Ones(n, h) - a1));
    grad->w1 = x.transpose() * dz1 + 2.0 * spec.l2_decay * p.w1;
    grad->b1 = dz1.colwise().sum();
  }
  return loss;
}

TrainedModel train_network(const Dataset& ds, const LearnerSpec& spec,
                           AdversaryHook* hook) {
  ds.validate();
  require_both_classes(ds);
  if (spec.hidden_size < 1) throw ConfigError("hidden_size must be >= 1");

  TrainedModel m;
  m.kind = LearnerKind::Network;
  m.seed = spec.seed;
  Matrix x = standardize_features(ds.features, &m.feature_mean,
                                  &m.feature_scale, spec.standardize);
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  const Eigen::Index h = spec.hidden_size;

  Rng rng(spec.seed);
  NetState net;
  net.w1.resize(k, h);
  net.b1 = Vector::Zero(h);
  net.w2.resize(h);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(k));
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < k; ++i) net.w1(i, j) = rng.uniform(-r1, r1);
  const double r2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (Eigen::Index j = 0; j < h; ++j) net.w2[j] = rng.uniform(-r2, r2);
  net.b2 = 0.0;

  const double lr = spec.learning_rate > 0.0 ? spec.learning_rate
                                             : default_lr(LearnerKind::Network);
  const int batch = spec.batch_size > 0 ? spec.batch_size : 128;

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  auto forward_loss = [&](const NetState& p) {
    double wsum = ds.weights.sum();
    double loss = 0.0;
    Matrix a1 = ((x * p.w1).rowwise() + p.b1.transpose())
                    .unaryExpr([](double v) { return sigmoid(v); });
    Vector z2 = a1 * p.w2;
    z2.array() += p.b2;
    for (Eigen::Index i = 0; i < n; ++i) {
      double y = static_cast<double>(ds.labels[static_cast<std::size_t>(i)]);
      double zl = z2[i];
      double ll = (y > 0.5) ? (zl >= 0 ? std::log1p(std::exp(-zl))
                                       : -zl + std::log1p(std::exp(zl)))
                            : (zl >= 0 ? zl + std::log1p(std::exp(-zl))
                                       : std::log1p(std::exp(zl)));
      loss += ds.weights[i] * ll;
    }
    return loss / wsum +
           spec.l2_decay * (p.w1.squaredNorm() + p.w2.squaredNorm());
  };

  int epoch = 0;
  for (; epoch < spec.max_iterations; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(batch)) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch));
      const auto mb = static_cast<Eigen::Index>(end - start);
      Matrix xb(mb, k);
      Vector wb(mb), yb(mb);
      std::vector<int> batch_labels(static_cast<std::size_t>(mb));
      std::vector<int> batch_sens(static_cast<std::size_t>(mb));
      for (Eigen::Index i = 0; i < mb; ++i) {
        std::size_t src = order[start + static_cast<std::size_t>(i)];
        xb.row(i) = x.row(static_cast<Eigen::Index>(src));
        wb[i] = ds.weights[static_cast<Eigen::Index>(src)];
        yb[i] = static_cast<double>(ds.labels[src]);
        batch_labels[static_cast<std::size_t>(i)] = ds.labels[src];
        batch_sens[static_cast<std::size_t>(i)] = ds.sensitive[src];
      }
      const double wbsum = wb.sum();

      Matrix a1 = ((xb * net.w1).rowwise() + net.b1.transpose())
                      .unaryExpr([](double v) { return sigmoid(v); });
      Vector z2 = a1 * net.w2;
      z2.array() += net.b2;
      Vector p = z2.unaryExpr([](double v) { return sigmoid(v); });

      Vector dz2(mb);
      for (Eigen::Index i = 0; i < mb; ++i)
        dz2[i] = wb[i] * (p[i] - yb[i]) / wbsum;

      if (hook != nullptr && hook->step) {
        std::vector<double> batch_scores(static_cast<std::size_t>(mb));
        for (Eigen::Index i = 0; i < mb; ++i)
          batch_scores[static_cast<std::size_t>(i)] = p[i];
        Vector adv_dscore = hook->step(batch_scores, batch_labels, batch_sens);
        if (hook->alpha != 0.0) {
          for (Eigen::Index i = 0; i < mb; ++i)
            dz2[i] -= hook->alpha * adv_dscore[i] * p[i] * (1.0 - p[i]);
        }
      }

      Vector gw2 = a1.transpose() * dz2 + 2.0 * spec.l2_decay * net.w2;
      double gb2 = dz2.sum();
      Matrix dz1 = (dz2 * net.w2.transpose()).cwiseProduct(
          a1.cwiseProduct(Matrix::Ones(mb, h) - a1));
      Matrix gw1 = xb.transpose() * dz1 + 2.0 * spec.l2_decay * net.w1;
      Vector gb1 = dz1.colwise().sum();

      net.w1 -= lr * gw1;
      net.b1 -= lr * gb1;
      net.w2 -= lr * gw2;
      net.b2 -= lr * gb2;
    }
    if (!net.w1.allFinite() || !net.w2.allFinite())
      throw NonFiniteLoss("network parameters diverged");
  }

  m.w1 = net.w1;
  m.b1 = net.b1;
  m.w2 = net.w2;
  m.b2 = net.b2;
  m.final_loss = forward_loss(net);
  if (!std::isfinite(m.final_loss))
    throw NonFiniteLoss("final network loss non-finite");
  m.iterations_used = epoch;
  return m;
}

std::vector<double> TrainedModel::predict(const Matrix& features) const {
  if (features.cols() != feature_mean.size())
    throw DimensionMismatch("predict: expected " +
                            std::to_string(feature_mean.size()) + " features, got " +
                            std::to_string(features.cols()));
  Matrix x = (features.rowwise() - feature_mean.transpose()).array().rowwise() /
             feature_scale.transpose().array();
  std::vector<double> out(static_cast<std::size_t>(features.rows()));
  if (kind == LearnerKind::Logistic) {
    Vector z = x * coef;
    z.array() += intercept;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      out[static_cast<std::size_t>(i)] = sigmoid(z[i]);
  } else {
    Matrix a1 = ((x * w1).rowwise() + b1.transpose())
                    .unaryExpr([](double v) { return sigmoid(v); });
    Vector z2 = a1 * w2;
    z2.array() += b2;
    for (Eigen::Index i = 0; i < z2.size(); ++i)
      out[static_cast<std::size_t>(i)] = sigmoid(z2[i]);
  }
  return out;
}

ScoreSet TrainedModel::score(const Dataset& ds) const {
  ScoreSet s;
  s.scores = predict(ds.features);
  s.labels = ds.labels;
  s.sensitive = ds.sensitive;
  return s;
}

namespace {

void write_vec(std::ostream& os, const Vector& v) {
  os << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v[i];
  os << '\n';
}

void write_mat(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << m(i, j);
  os << '\n';
}

// istream >> double does not accept hexfloat; go through strtod.
double read_double(std::istream& is) {
  std::string tok;
  is >> tok;
  return std::strtod(tok.c_str(), nullptr);
}

Vector read_vec(std::istream& is) {
  Eigen::Index n;
  is >> n;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = read_double(is);
  return v;
}

Matrix read_mat(std::istream& is) {
  Eigen::Index r, c;
  is >> r >> c;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = read_double(is);
  return m;
}

}  // namespace

void TrainedModel::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << "fairscore-model 1\n";
  os << learner_kind_name(kind) << ' ' << seed << ' ' << iterations_used << '\n';
  os << std::hexfloat;  // bit-exact round trip
  os << final_loss << '\n';
  write_vec(os, feature_mean);
  write_vec(os, feature_scale);
  if (kind == LearnerKind::Logistic) {
    os << intercept << '\n';
    write_vec(os, coef);
  } else {
    os << b2 << '\n';
    write_mat(os, w1);
    write_vec(os, b1);
    write_vec(os, w2);
  }
  if (!os) throw IoError("write failed for " + path);
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "fairscore-model" || version != 1)
    throw IoError(path + ": not a fairscore model file");
  TrainedModel m;
  std::string kind;
  is >> kind >> m.seed >> m.iterations_used;
  m.kind = kind == "logistic" ? LearnerKind::Logistic : LearnerKind::Network;
  m.final_loss = read_double(is);
  m.feature_mean = read_vec(is);
  m.feature_scale = read_vec(is);
  if (m.kind == LearnerKind::Logistic) {
    m.intercept = read_double(is);
    m.coef = read_vec(is);
  } else {
    m.b2 = read_double(is);
    m.w1 = read_mat(is);
    m.b1 = read_vec(is);
    m.w2 = read_vec(is);
  }
  if (!is) throw IoError(path + ": truncated model file");
  return m;
}

}  // namespace fairscore
