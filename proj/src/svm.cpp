#include "winelab/svm.hpp"

#include "winelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace winelab {
namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_labels(std::span<const int> y) {
  bool pos = false;
  bool neg = false;
  for (int v : y) {
    if (v == 1) {
      pos = true;
    } else if (v == -1) {
      neg = true;
    } else {
      throw DataError("binary SVM labels must be -1 or +1");
    }
  }
  if (!pos || !neg) throw DataError("binary SVM needs both labels present");
}

// Pairwise dual coordinate descent with second-order working-set selection.
// Minimizes 1/2 a'Qa - e'a subject to y'a = 0, 0 <= a <= C, Q_ij = y_i y_j K_ij.
// Variables stuck at a bound are shrunk out of the working set every
// kShrinkEvery updates; the full gradient is rebuilt from gbar_ (the
// contribution of variables at C) before any convergence decision.
class SmoSolver {
 public:
  SmoSolver(const Matrix& gram, std::span<const int> y, double C)
      : k_(gram), y_(y), c_(C), n_(y.size()), alpha_(n_, 0.0), grad_(n_, -1.0), gbar_(n_, 0.0), diag_(n_),
        yd_(n_), active_(n_) {
    for (std::size_t t = 0; t < n_; ++t) {
      diag_[t] = k_(t, t);
      yd_[t] = static_cast<double>(y_[t]);
      active_[t] = t;
    }
  }

  void solve(double tol, std::size_t max_iterations) {
    const std::size_t shrink_every = std::min<std::size_t>(n_, kShrinkEvery);
    std::size_t counter = shrink_every;
    std::size_t i = 0;
    std::size_t j = 0;
    while (iterations_ < max_iterations) {
      if (--counter == 0) {
        counter = shrink_every;
        shrink(tol);
      }
      if (!select_pair(tol, i, j)) {
        unshrink_all();
        if (!select_pair(tol, i, j)) {
          converged_ = true;
          return;
        }
        counter = 1;
      }
      update_pair(i, j);
      ++iterations_;
    }
    unshrink_all();
    converged_ = !select_pair(tol, i, j);
  }

  double bias() const {
    std::size_t free_count = 0;
    double free_sum = 0.0;
    double ub = kInf;
    double lb = -kInf;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (at_upper(t)) {
        if (y_[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (y_[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++free_count;
        free_sum += yg;
      }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
    return -rho;
  }

  double gap() const { return gap_; }
  bool converged() const { return converged_; }
  std::size_t iterations() const { return iterations_; }
  const std::vector<double>& alphas() const { return alpha_; }

 private:
  static constexpr std::size_t kShrinkEvery = 1000;

  bool at_upper(std::size_t t) const { return alpha_[t] >= c_; }
  bool at_lower(std::size_t t) const { return alpha_[t] <= 0.0; }
  double q(std::size_t a, std::size_t b) const { return y_[a] * y_[b] * k_(a, b); }

  // Largest violations over the working set: m_up = max -yG over I_up, m_low = max yG over I_low.
  void violations(double& m_up, double& m_low) const {
    m_up = -kInf;
    m_low = -kInf;
    for (std::size_t t : active_) {
      const double yg = yd_[t] * grad_[t];
      const bool up = y_[t] == 1 ? !at_upper(t) : !at_lower(t);
      const bool low = y_[t] == 1 ? !at_lower(t) : !at_upper(t);
      if (up) m_up = std::max(m_up, -yg);
      if (low) m_low = std::max(m_low, yg);
    }
  }

  bool can_shrink(std::size_t t, double m_up, double m_low) const {
    if (at_upper(t)) return y_[t] == 1 ? -grad_[t] > m_up : -grad_[t] > m_low;
    if (at_lower(t)) return y_[t] == 1 ? grad_[t] > m_low : grad_[t] > m_up;
    return false;
  }

  void shrink(double tol) {
    double m_up = 0.0;
    double m_low = 0.0;
    violations(m_up, m_low);
    // Near the end, restore everything once so the final phase starts from a full gradient.
    if (!unshrunk_ && m_up + m_low <= 10.0 * tol) {
      unshrunk_ = true;
      unshrink_all();
    }
    std::erase_if(active_, [&](std::size_t t) { return can_shrink(t, m_up, m_low); });
  }

  void unshrink_all() {
    if (active_.size() == n_) return;
    std::vector<char> inactive(n_, 1);
    for (std::size_t t : active_) inactive[t] = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      if (inactive[t]) grad_[t] = gbar_[t] - 1.0;
    }
    // Shrunk variables sit at a bound, so every free variable is active.
    for (std::size_t a = 0; a < n_; ++a) {
      if (at_lower(a) || at_upper(a)) continue;
      const double* ka = k_.row(a).data();
      const double sa = yd_[a] * alpha_[a];
      for (std::size_t t = 0; t < n_; ++t) {
        if (inactive[t]) grad_[t] += yd_[t] * ka[t] * sa;
      }
    }
    active_.resize(n_);
    for (std::size_t t = 0; t < n_; ++t) active_[t] = t;
  }

  bool select_pair(double tol, std::size_t& out_i, std::size_t& out_j) {
    double gmax = -kInf;
    std::size_t i = n_;
    for (std::size_t t : active_) {
      if (y_[t] == 1) {
        if (!at_upper(t) && -grad_[t] >= gmax) {
          gmax = -grad_[t];
          i = t;
        }
      } else if (!at_lower(t) && grad_[t] >= gmax) {
        gmax = grad_[t];
        i = t;
      }
    }
    double gmax2 = -kInf;
    std::size_t j = n_;
    double best_obj = kInf;
    // Gram rows are contiguous and K is symmetric, so read row i instead of column i.
    const double* ki = i < n_ ? k_.row(i).data() : nullptr;
    for (std::size_t t : active_) {
      if (i == n_) break;
      if (y_[t] == 1) {
        if (at_lower(t)) continue;
        const double grad_diff = gmax + grad_[t];
        gmax2 = std::max(gmax2, grad_[t]);
        if (grad_diff > 0.0) {
          double quad = diag_[i] + diag_[t] - 2.0 * yd_[i] * yd_[t] * ki[t];
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      } else {
        if (at_upper(t)) continue;
        const double grad_diff = gmax - grad_[t];
        gmax2 = std::max(gmax2, -grad_[t]);
        if (grad_diff > 0.0) {
          double quad = diag_[i] + diag_[t] + 2.0 * yd_[i] * yd_[t] * ki[t];
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    gap_ = (i < n_ && gmax2 > -kInf) ? std::max(0.0, gmax + gmax2) : 0.0;
    if (i == n_ || j == n_ || gmax + gmax2 < tol) return false;
    out_i = i;
    out_j = j;
    return true;
  }

  void update_pair(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    const bool upper_i = at_upper(i);
    const bool upper_j = at_upper(j);
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    const double qij = q(i, j);
    if (y_[i] != y_[j]) {
      double quad = diag_[i] + diag_[j] + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
      } else if (ai < 0.0) {
        ai = 0.0; aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else if (aj > c_) {
        aj = c_; ai = c_ + diff;
      }
    } else {
      double quad = diag_[i] + diag_[j] - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else if (aj < 0.0) {
        aj = 0.0; ai = sum;
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else if (ai < 0.0) {
        ai = 0.0; aj = sum;
      }
    }
    const double* ki = k_.row(i).data();
    const double* kj = k_.row(j).data();
    const double si = yd_[i] * (ai - old_i);
    const double sj = yd_[j] * (aj - old_j);
    for (std::size_t t : active_) grad_[t] += yd_[t] * (ki[t] * si + kj[t] * sj);
    if (upper_i != at_upper(i)) move_gbar(ki, upper_i ? -c_ * yd_[i] : c_ * yd_[i]);
    if (upper_j != at_upper(j)) move_gbar(kj, upper_j ? -c_ * yd_[j] : c_ * yd_[j]);
  }

  void move_gbar(const double* row, double scale) {
    for (std::size_t t = 0; t < n_; ++t) gbar_[t] += yd_[t] * row[t] * scale;
  }

  const Matrix& k_;
  std::span<const int> y_;
  double c_;
  std::size_t n_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::vector<double> gbar_;
  std::vector<double> diag_;
  std::vector<double> yd_;
  std::vector<std::size_t> active_;
  bool unshrunk_ = false;
  double gap_ = 0.0;
  bool converged_ = false;
  std::size_t iterations_ = 0;
};

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, std::size_t cols) {
  Matrix m(0, cols);
  for (const auto& r : j) m.append_row(r.get<std::vector<double>>());
  return m;
}

}  // namespace

BinarySvmFit train_binary_svm_gram(const Matrix& gram, const Matrix& x, std::span<const int> y, double C,
                                   const Kernel& kernel, const SvmTrainOptions& options) {
  if (!(C > 0.0)) throw ConfigError("SVM C must be positive");
  if (kernel.kind == KernelKind::rbf && !(kernel.gamma > 0.0)) throw ConfigError("rbf gamma must be positive");
  if (x.rows() != y.size() || gram.rows() != y.size() || gram.cols() != y.size()) {
    throw DataError("SVM training inputs disagree in size");
  }
  check_labels(y);
  const std::size_t n = y.size();
  const std::size_t passes = options.max_passes > 0 ? options.max_passes : 10 * n;

  SmoSolver solver(gram, y, C);
  solver.solve(options.tolerance, passes * n);

  BinarySvmFit fit;
  fit.alphas = solver.alphas();
  BinarySvm& m = fit.model;
  m.kernel = kernel;
  m.C = C;
  m.bias = solver.bias();
  m.achieved_tolerance = solver.gap();
  m.converged = solver.converged();
  m.iterations = solver.iterations();
  m.support_vectors = Matrix(0, x.cols());
  for (std::size_t i = 0; i < n; ++i) {
    if (fit.alphas[i] > kSupportVectorFloor) {
      m.support_vectors.append_row(x.row(i));
      m.support_labels.push_back(y[i]);
      m.alphas.push_back(fit.alphas[i]);
    }
  }
  return fit;
}

BinarySvmFit train_binary_svm(const Matrix& x, std::span<const int> y, double C, const Kernel& kernel,
                              const SvmTrainOptions& options) {
  return train_binary_svm_gram(kernels::gram_matrix(x, kernel), x, y, C, kernel, options);
}

double decision_value(const BinarySvm& m, std::span<const double> x) {
  if (m.support_vectors.rows() > 0 && x.size() != m.support_vectors.cols()) {
    throw DataError("SVM arity mismatch: model has " + std::to_string(m.support_vectors.cols()) +
                    " features, input has " + std::to_string(x.size()));
  }
  double f = m.bias;
  for (std::size_t i = 0; i < m.alphas.size(); ++i) {
    f += m.alphas[i] * m.support_labels[i] * eval_kernel(m.kernel, m.support_vectors.row(i), x);
  }
  return f;
}

double dual_objective(std::span<const double> alphas, std::span<const int> y, const Matrix& gram) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    linear += alphas[i];
    for (std::size_t j = 0; j < alphas.size(); ++j) quad += alphas[i] * alphas[j] * y[i] * y[j] * gram(i, j);
  }
  return linear - 0.5 * quad;
}

double kkt_violation(const BinarySvm& m, std::span<const double> alphas, const Matrix& x, std::span<const int> y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double margin = y[i] * decision_value(m, x.row(i));
    double v = 0.0;
    if (alphas[i] <= kSupportVectorFloor) {
      v = std::max(0.0, 1.0 - margin);
    } else if (alphas[i] >= m.C - kSupportVectorFloor) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

std::vector<double> slacks(const BinarySvm& m, const Matrix& x, std::span<const int> y) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::max(0.0, 1.0 - y[i] * decision_value(m, x.row(i)));
  return out;
}

MulticlassSvm train_multiclass_svm(const Matrix& x, std::span<const QualityClass> labels, double C,
                                   const Kernel& kernel, const SvmTrainOptions& options) {
  const ClassCounts counts = count_classes(labels);
  std::size_t present = 0;
  for (auto c : counts) present += c > 0 ? 1 : 0;
  if (present < 2) throw DataError("SVM needs at least two classes in the training set");

  const Matrix gram = kernels::gram_matrix(x, kernel);
  MulticlassSvm out;
  out.num_features = x.cols();
  std::array<std::vector<int>, kNumClasses> targets;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) continue;
    targets[c].resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) targets[c][i] = class_index(labels[i]) == c ? 1 : -1;
  }
  // A class covering every row only happens with present == 1, excluded above.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) continue;
    out.machines[c] = train_binary_svm_gram(gram, x, targets[c], C, kernel, options).model;
  }
  return out;
}

std::array<double, kNumClasses> decision_values(const MulticlassSvm& m, std::span<const double> x) {
  if (x.size() != m.num_features) {
    throw DataError("SVM arity mismatch: model has " + std::to_string(m.num_features) + " features, input has " +
                    std::to_string(x.size()));
  }
  std::array<double, kNumClasses> out;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out[c] = m.machines[c] ? decision_value(*m.machines[c], x) : -kInf;
  }
  return out;
}

QualityClass predict_multiclass(const MulticlassSvm& m, std::span<const double> x) {
  return argmax_class(decision_values(m, x));
}

void to_json(Json& j, const BinarySvm& m) {
  j = Json{{"kernel", {{"kind", kernel_name(m.kernel.kind)}, {"gamma", m.kernel.gamma}}},
           {"C", m.C},
           {"bias", m.bias},
           {"tolerance_achieved", m.achieved_tolerance},
           {"converged", m.converged},
           {"iterations", m.iterations},
           {"support_vectors", matrix_json(m.support_vectors)},
           {"labels", m.support_labels},
           {"alphas", m.alphas}};
}

void from_json(const Json& j, BinarySvm& m) {
  m.kernel.kind = parse_kernel_kind(j.at("kernel").at("kind").get<std::string>());
  m.kernel.gamma = j.at("kernel").at("gamma").get<double>();
  m.C = j.at("C").get<double>();
  m.bias = j.at("bias").get<double>();
  m.achieved_tolerance = j.at("tolerance_achieved").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.support_labels = j.at("labels").get<std::vector<int>>();
  m.alphas = j.at("alphas").get<std::vector<double>>();
  const auto& sv = j.at("support_vectors");
  m.support_vectors = matrix_from_json(sv, sv.empty() ? 0 : sv.front().size());
  if (m.support_labels.size() != m.alphas.size() || m.support_vectors.rows() != m.alphas.size()) {
    throw DataError("SVM payload: support set arrays disagree in length");
  }
}

void to_json(Json& j, const MulticlassSvm& m) {
  Json machines = Json::array();
  for (const auto& mc : m.machines) machines.push_back(mc ? Json(*mc) : Json(nullptr));
  j = Json{{"num_features", m.num_features}, {"machines", std::move(machines)}};
}

void from_json(const Json& j, MulticlassSvm& m) {
  m.num_features = j.at("num_features").get<std::size_t>();
  const auto& machines = j.at("machines");
  if (machines.size() != kNumClasses) throw DataError("SVM payload must hold three machines");
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (machines[c].is_null()) {
      m.machines[c].reset();
    } else {
      m.machines[c] = machines[c].get<BinarySvm>();
    }
  }
}

}  // namespace winelab
