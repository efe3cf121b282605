// Copyright 2026  The PLF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "plf/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace plf {

const char* FamilyName(Family f) {
  switch (f) {
    case Family::kBaseline: return "baseline";
    case Family::kRidge: return "ridge";
    case Family::kLogistic: return "logistic";
    case Family::kTree: return "tree";
    case Family::kMlp: return "mlp";
  }
  return "unknown";
}

const char* TaskName(Task t) {
  return t == Task::kRegression ? "intelligibility" : "pathology";
}

std::string ModelPoint::ToString() const {
  std::ostringstream os;
  os << FamilyName(family);
  switch (family) {
    case Family::kRidge:
    case Family::kLogistic: os << "(l2=" << l2 << ")"; break;
    case Family::kTree: os << "(max_depth=" << max_depth << ")"; break;
    case Family::kMlp: os << "(hidden=" << hidden << ")"; break;
    case Family::kBaseline: break;
  }
  return os.str();
}

Standardizer Standardizer::Fit(const Matrix& x) {
  Standardizer s;
  const double n = double(x.rows());
  s.mean = x.colwise().mean();
  s.scale = RowVector::Ones(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean[c]).square().sum() / n;
    if (var > 1e-24) s.scale[c] = std::sqrt(var);
  }
  return s;
}

Matrix Standardizer::Apply(const Matrix& x) const {
  Matrix out = x.rowwise() - mean;
  return out.array().rowwise() / scale.array();
}

namespace {

void RequireTrain(const Matrix& x_train, Eigen::Index n_targets, const Matrix& x_test) {
  if (x_train.rows() == 0) throw Error(ErrorKind::kInsufficientData, "empty training set");
  if (x_train.rows() != n_targets)
    throw Error(ErrorKind::kDimension, "feature rows and targets differ in count");
  if (x_test.cols() != x_train.cols())
    throw Error(ErrorKind::kDimension, "train and test feature dimensions differ");
}

Vector RidgeFitPredict(const Matrix& x, const Vector& y, const Matrix& x_test, double l2) {
  if (!(l2 > 0.0)) throw Error(ErrorKind::kConfig, "ridge penalty must be positive");
  const double y_mean = y.mean();
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += l2;
  const Vector w = gram.ldlt().solve(x.transpose() * (y.array() - y_mean).matrix());
  return (x_test * w).array() + y_mean;
}

/// One-hidden-layer ReLU network trained full-batch with Adam.
class Mlp {
 public:
  Mlp(int inputs, int hidden, int outputs, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n1(0.0, std::sqrt(2.0 / inputs)), n2(0.0, std::sqrt(1.0 / hidden));
    w1_ = Matrix(inputs, hidden);
    for (Eigen::Index i = 0; i < w1_.size(); ++i) w1_.data()[i] = n1(rng);
    b1_ = RowVector::Zero(hidden);
    w2_ = Matrix(hidden, outputs);
    for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_.data()[i] = n2(rng);
    b2_ = RowVector::Zero(outputs);
  }

  Matrix Forward(const Matrix& x, Matrix* hidden_pre = nullptr) const {
    Matrix h = x * w1_;
    h.rowwise() += b1_;
    if (hidden_pre) *hidden_pre = h;
    Matrix out = h.cwiseMax(0.0) * w2_;
    out.rowwise() += b2_;
    return out;
  }

  /// `loss_grad` maps outputs to dLoss/dOutputs (already divided by n).
  template <typename LossGrad>
  void Train(const Matrix& x, LossGrad&& loss_grad, int epochs, double lr, double decay) {
    std::vector<Matrix*> params = {&w1_, &w2_};
    std::vector<RowVector*> biases = {&b1_, &b2_};
    std::vector<Matrix> m(2), v(2);
    std::vector<RowVector> mb(2), vb(2);
    for (int k = 0; k < 2; ++k) {
      m[k] = v[k] = Matrix::Zero(params[k]->rows(), params[k]->cols());
      mb[k] = vb[k] = RowVector::Zero(biases[k]->size());
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    for (int step = 1; step <= epochs; ++step) {
      Matrix pre;
      const Matrix out = Forward(x, &pre);
      const Matrix d_out = loss_grad(out);
      const Matrix act = pre.cwiseMax(0.0);
      Matrix g2 = act.transpose() * d_out + decay * w2_;
      RowVector gb2 = d_out.colwise().sum();
      const Matrix d_hidden = (pre.array() > 0.0).select(d_out * w2_.transpose(), 0.0);
      Matrix g1 = x.transpose() * d_hidden + decay * w1_;
      RowVector gb1 = d_hidden.colwise().sum();
      const Matrix* grads[2] = {&g1, &g2};
      const RowVector* bgrads[2] = {&gb1, &gb2};
      const double c1 = 1.0 - std::pow(beta1, step), c2 = 1.0 - std::pow(beta2, step);
      for (int k = 0; k < 2; ++k) {
        m[k] = beta1 * m[k] + (1.0 - beta1) * *grads[k];
        v[k] = beta2 * v[k] + (1.0 - beta2) * grads[k]->cwiseProduct(*grads[k]);
        params[k]->array() -= lr * (m[k].array() / c1) / ((v[k].array() / c2).sqrt() + eps);
        mb[k] = beta1 * mb[k] + (1.0 - beta1) * *bgrads[k];
        vb[k] = beta2 * vb[k] + (1.0 - beta2) * bgrads[k]->cwiseProduct(*bgrads[k]);
        biases[k]->array() -= lr * (mb[k].array() / c1) / ((vb[k].array() / c2).sqrt() + eps);
      }
    }
  }

 private:
  Matrix w1_, w2_;
  RowVector b1_, b2_;
};

constexpr int kMlpEpochs = 300;
constexpr double kMlpLearningRate = 1e-2;
constexpr double kMlpDecay = 1e-4;
constexpr int kLogisticSteps = 800;
constexpr double kLogisticLearningRate = 5e-2;

/// Softmax cross-entropy gradient (mean over rows).
Matrix SoftmaxGrad(const Matrix& logits, const std::vector<int>& y) {
  Matrix g(logits.rows(), logits.cols());
  const double n = double(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const double peak = row.maxCoeff();
    const Eigen::ArrayXd e = (row.array() - peak).exp().transpose();
    g.row(i) = (e / e.sum()).matrix().transpose() / n;
    g(i, y[i]) -= 1.0 / n;
  }
  return g;
}

std::vector<int> ArgmaxClasses(const Matrix& scores) {
  std::vector<int> out(static_cast<size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out[i] = static_cast<int>(best);
  }
  return out;
}

int MajorityClass(const std::vector<int>& y, int num_classes) {
  std::vector<int> counts(num_classes, 0);
  for (int c : y) ++counts[c];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

Vector FitPredictRegression(const ModelPoint& point, const Matrix& x_train, const Vector& y_train,
                            const Matrix& x_test, uint64_t seed) {
  RequireTrain(x_train, y_train.size(), x_test);
  const Standardizer st = Standardizer::Fit(x_train);
  const Matrix xs = st.Apply(x_train), xt = st.Apply(x_test);
  Vector pred;
  switch (point.family) {
    case Family::kBaseline: pred = Vector::Constant(x_test.rows(), y_train.mean()); break;
    case Family::kRidge: pred = RidgeFitPredict(xs, y_train, xt, point.l2); break;
    case Family::kTree: {
      DecisionTree tree;
      tree.FitRegression(xs, y_train, point.max_depth);
      pred = tree.Predict(xt);
      break;
    }
    case Family::kMlp: {
      const double mu = y_train.mean();
      double sd = std::sqrt((y_train.array() - mu).square().mean());
      if (!(sd > 0.0)) sd = 1.0;
      const Vector target = (y_train.array() - mu) / sd;
      Mlp net(static_cast<int>(xs.cols()), point.hidden, 1, seed);
      const double n = double(xs.rows());
      net.Train(xs, [&](const Matrix& out) { return Matrix((out.col(0) - target) * (2.0 / n)); },
                kMlpEpochs, kMlpLearningRate, kMlpDecay);
      pred = (net.Forward(xt).col(0).array() * sd + mu).matrix();
      break;
    }
    case Family::kLogistic:
      throw Error(ErrorKind::kConfig, "logistic regression is a classification family");
  }
  return pred.cwiseMax(0.0).cwiseMin(100.0);
}

std::vector<int> FitPredictClassification(const ModelPoint& point, const Matrix& x_train,
                                          const std::vector<int>& y_train, int num_classes,
                                          const Matrix& x_test, uint64_t seed) {
  RequireTrain(x_train, static_cast<Eigen::Index>(y_train.size()), x_test);
  for (int c : y_train)
    if (c < 0 || c >= num_classes) throw Error(ErrorKind::kIndex, "class label out of range");
  const Standardizer st = Standardizer::Fit(x_train);
  const Matrix xs = st.Apply(x_train), xt = st.Apply(x_test);
  switch (point.family) {
    case Family::kBaseline:
      return std::vector<int>(static_cast<size_t>(x_test.rows()), MajorityClass(y_train, num_classes));
    case Family::kLogistic: {
      // Multinomial logistic regression, mean CE + l2 / (2n) ||W||^2, Adam.
      const double n = double(xs.rows());
      Matrix w = Matrix::Zero(xs.cols(), num_classes);
      RowVector b = RowVector::Zero(num_classes);
      Matrix mw = w, vw = w;
      RowVector mb = b, vb = b;
      for (int step = 1; step <= kLogisticSteps; ++step) {
        Matrix logits = xs * w;
        logits.rowwise() += b;
        const Matrix g = SoftmaxGrad(logits, y_train);
        const Matrix gw = xs.transpose() * g + (point.l2 / n) * w;
        const RowVector gb = g.colwise().sum();
        const double c1 = 1.0 - std::pow(0.9, step), c2 = 1.0 - std::pow(0.999, step);
        mw = 0.9 * mw + 0.1 * gw;
        vw = 0.999 * vw + 0.001 * gw.cwiseProduct(gw);
        w.array() -= kLogisticLearningRate * (mw.array() / c1) / ((vw.array() / c2).sqrt() + 1e-8);
        mb = 0.9 * mb + 0.1 * gb;
        vb = 0.999 * vb + 0.001 * gb.cwiseProduct(gb);
        b.array() -= kLogisticLearningRate * (mb.array() / c1) / ((vb.array() / c2).sqrt() + 1e-8);
      }
      Matrix scores = xt * w;
      scores.rowwise() += b;
      return ArgmaxClasses(scores);
    }
    case Family::kTree: {
      DecisionTree tree;
      tree.FitClassification(xs, y_train, num_classes, point.max_depth);
      const Vector p = tree.Predict(xt);
      std::vector<int> out(static_cast<size_t>(p.size()));
      for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = static_cast<int>(p[i]);
      return out;
    }
    case Family::kMlp: {
      Mlp net(static_cast<int>(xs.cols()), point.hidden, num_classes, seed);
      net.Train(xs, [&](const Matrix& out) { return SoftmaxGrad(out, y_train); }, kMlpEpochs,
                kMlpLearningRate, kMlpDecay);
      return ArgmaxClasses(net.Forward(xt));
    }
    case Family::kRidge:
      throw Error(ErrorKind::kConfig, "ridge regression is a regression family");
  }
  return {};
}

void DecisionTree::FitRegression(const Matrix& x, const Vector& y, int max_depth) {
  nodes_.clear();
  std::vector<int> rows(static_cast<size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  Build(x, y, rows, 0, max_depth, false, 0);
}

void DecisionTree::FitClassification(const Matrix& x, const std::vector<int>& y, int num_classes,
                                     int max_depth) {
  nodes_.clear();
  Vector yv(static_cast<Eigen::Index>(y.size()));
  for (size_t i = 0; i < y.size(); ++i) yv[i] = y[i];
  std::vector<int> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  Build(x, yv, rows, 0, max_depth, true, num_classes);
}

int DecisionTree::Build(const Matrix& x, const Vector& y, std::vector<int>& rows, int depth,
                        int max_depth, bool classify, int num_classes) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  const double n = double(rows.size());

  // Impurity as a sum over rows: SSE (regression) or n * Gini (classification).
  std::vector<double> class_counts(classify ? num_classes : 0, 0.0);
  double sum = 0.0, sum_sq = 0.0;
  for (int r : rows) {
    if (classify) class_counts[static_cast<int>(y[r])] += 1.0;
    sum += y[r];
    sum_sq += y[r] * y[r];
  }
  double impurity;
  if (classify) {
    double g = 0.0;
    for (double c : class_counts) g += c * c;
    impurity = n - g / n;
    nodes_[index].value = double(std::max_element(class_counts.begin(), class_counts.end()) -
                                 class_counts.begin());
  } else {
    impurity = sum_sq - sum * sum / n;
    nodes_[index].value = sum / n;
  }
  if (depth >= max_depth || rows.size() < 2 || impurity <= 1e-12) return index;

  double best_gain = 1e-12;
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<int> sorted = rows;
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
    std::vector<double> left_counts(class_counts.size(), 0.0);
    double left_sum = 0.0, left_sq = 0.0;
    for (size_t i = 0; i + 1 < sorted.size(); ++i) {
      const int r = sorted[i];
      if (classify) left_counts[static_cast<int>(y[r])] += 1.0;
      left_sum += y[r];
      left_sq += y[r] * y[r];
      const double a = x(r, f), b = x(sorted[i + 1], f);
      if (a == b) continue;
      const double nl = double(i + 1), nr = n - nl;
      double child;
      if (classify) {
        double gl = 0.0, gr = 0.0;
        for (size_t c = 0; c < left_counts.size(); ++c) {
          gl += left_counts[c] * left_counts[c];
          const double rc = class_counts[c] - left_counts[c];
          gr += rc * rc;
        }
        child = (nl - gl / nl) + (nr - gr / nr);
      } else {
        const double rs = sum - left_sum, rq = sum_sq - left_sq;
        child = (left_sq - left_sum * left_sum / nl) + (rq - rs * rs / nr);
      }
      const double gain = impurity - child;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = static_cast<int>(f);
        best_threshold = 0.5 * (a + b);
      }
    }
  }
  if (best_feature < 0) return index;

  std::vector<int> left, right;
  for (int r : rows) (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
  nodes_[index].feature = best_feature;
  nodes_[index].threshold = best_threshold;
  const int l = Build(x, y, left, depth + 1, max_depth, classify, num_classes);
  nodes_[index].left = l;
  const int rgt = Build(x, y, right, depth + 1, max_depth, classify, num_classes);
  nodes_[index].right = rgt;
  return index;
}

Vector DecisionTree::Predict(const Matrix& x) const {
  if (nodes_.empty()) throw Error(ErrorKind::kConfig, "decision tree is not fitted");
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int node = 0;
    while (nodes_[node].feature >= 0)
      node = x(i, nodes_[node].feature) <= nodes_[node].threshold ? nodes_[node].left
                                                                   : nodes_[node].right;
    out[i] = nodes_[node].value;
  }
  return out;
}

int DecisionTree::depth() const {
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [node, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes_[node].feature >= 0) {
      stack.push_back({nodes_[node].left, d + 1});
      stack.push_back({nodes_[node].right, d + 1});
    }
  }
  return best;
}

}  // namespace plf
