#include "smo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskrfe::detail {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Pair {
  Index up = -1;
  Index low = -1;
  double gap = 0.0;
};

class Solver {
 public:
  Solver(const BoxQp& p) : qp_(p), K_(*p.kernel), n_(p.kernel->rows()), m_(p.sign.size()) {
    if (p.initial && p.initial->size() == m_) {
      beta_ = *p.initial;
      Vector folded = beta_.head(n_).cwiseProduct(qp_.sign.head(n_));
      if (m_ > n_) folded += beta_.tail(n_).cwiseProduct(qp_.sign.tail(n_));
      const Vector kf = K_ * folded;
      grad_ = qp_.linear;
      grad_.head(n_) += qp_.sign.head(n_).cwiseProduct(kf);
      if (m_ > n_) grad_.tail(n_) += qp_.sign.tail(n_).cwiseProduct(kf);
    } else {
      beta_ = Vector::Zero(m_);
      grad_ = qp_.linear;
    }
    diag_ = K_.diagonal();
    up_mask_.resize(m_);
    low_mask_.resize(m_);
    for (Index t = 0; t < m_; ++t) refresh_masks(t);
  }

  // Coordinate t refers to kernel row t mod n.
  Index src(Index t) const { return t < n_ ? t : t - n_; }

  // grad += sign .* (column difference), with both halves sharing kernel rows.
  template <class Col>
  void add_to_gradient(const Col& col) {
    grad_.head(n_).array() += qp_.sign.head(n_).array() * col.array();
    if (m_ > n_) grad_.tail(n_).array() += qp_.sign.tail(n_).array() * col.array();
  }

  bool upper_ok(Index t) const {
    return qp_.sign[t] > 0 ? beta_[t] < qp_.bound : beta_[t] > 0.0;
  }
  bool lower_ok(Index t) const {
    return qp_.sign[t] > 0 ? beta_[t] > 0.0 : beta_[t] < qp_.bound;
  }
  // Additive masks (0 or -+inf) keep the selection passes branch-free.
  void refresh_masks(Index t) {
    up_mask_[t] = upper_ok(t) ? 0.0 : -kInf;
    low_mask_[t] = lower_ok(t) ? 0.0 : kInf;
  }

  static Index first_equal(const Eigen::ArrayXd& a, double value) {
    const double* p = a.data();
    return static_cast<Index>(std::find(p, p + a.size(), value) - p);
  }

  // i: maximal violator in I_up. j: the I_low partner with the largest
  // second-order decrease b^2 / a. The gap m - M is the KKT violation.
  Pair select_pair() {
    Pair pair;
    v_ = -qp_.sign.array() * grad_.array();
    work_ = v_ + up_mask_;
    const double g_max = work_.maxCoeff();
    if (g_max == -kInf) return pair;
    const double g_min = (v_ + low_mask_).minCoeff();
    if (g_min == kInf) return pair;
    pair.up = first_equal(work_, g_max);
    pair.gap = g_max - g_min;

    const Index si = src(pair.up);
    inv_curv_ = 1.0 / (diag_[si] + diag_.array() - 2.0 * K_.col(si).array()).max(kTau);
    for (Index off = 0; off < m_; off += n_) {
      work_.segment(off, n_) = -(g_max - v_.segment(off, n_)).max(0.0).square() * inv_curv_ +
                               low_mask_.segment(off, n_);
    }
    const double best = work_.minCoeff();
    if (best < 0.0) pair.low = first_equal(work_, best);
    return pair;
  }

  void step_pair(const Pair& pair) {
    const Index i = pair.up, j = pair.low;
    const Index si = src(i), sj = src(j);
    const double zi = qp_.sign[i], zj = qp_.sign[j];
    const double curvature = std::max(diag_[si] + diag_[sj] - 2.0 * K_(si, sj), kTau);

    // move beta_i += z_i t, beta_j -= z_j t, t >= 0
    const double b = -zi * grad_[i] + zj * grad_[j];
    double t = b / curvature;
    const double room_i = zi > 0 ? qp_.bound - beta_[i] : beta_[i];
    const double room_j = zj > 0 ? beta_[j] : qp_.bound - beta_[j];
    bool clip_i = false, clip_j = false;
    if (t >= room_i) {
      t = room_i;
      clip_i = true;
    }
    if (t >= room_j) {
      t = room_j;
      clip_j = true;
      clip_i = room_i == room_j;
    }

    beta_[i] += zi * t;
    beta_[j] -= zj * t;
    if (clip_i) beta_[i] = zi > 0 ? qp_.bound : 0.0;
    if (clip_j) beta_[j] = zj > 0 ? 0.0 : qp_.bound;

    refresh_masks(i);
    refresh_masks(j);
    add_to_gradient(t * (K_.col(si) - K_.col(sj)));
  }

  // Returns the largest projected-gradient magnitude and its coordinate.
  std::pair<Index, double> select_single() const {
    Index best = -1;
    double worst = 0.0;
    for (Index t = 0; t < m_; ++t) {
      double v = 0.0;
      if (beta_[t] < qp_.bound && grad_[t] < 0.0) v = -grad_[t];
      else if (beta_[t] > 0.0 && grad_[t] > 0.0) v = grad_[t];
      if (v > worst) {
        worst = v;
        best = t;
      }
    }
    return {best, worst};
  }

  void step_single(Index t) {
    const Index st = src(t);
    const double qtt = K_(st, st);
    double target;
    if (qtt > kTau) target = std::clamp(beta_[t] - grad_[t] / qtt, 0.0, qp_.bound);
    else target = grad_[t] < 0.0 ? qp_.bound : 0.0;
    const double delta = target - beta_[t];
    beta_[t] = target;
    add_to_gradient((qp_.sign[t] * delta) * K_.col(st));
  }

  double rho() const {
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    Index n_free = 0;
    for (Index t = 0; t < m_; ++t) {
      const double yg = qp_.sign[t] * grad_[t];
      const bool at_upper = beta_[t] >= qp_.bound;
      const bool at_lower = beta_[t] <= 0.0;
      if (at_upper) {
        if (qp_.sign[t] < 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (at_lower) {
        if (qp_.sign[t] > 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    if (n_free > 0) return sum_free / static_cast<double>(n_free);
    if (std::isfinite(ub) && std::isfinite(lb)) return 0.5 * (ub + lb);
    if (std::isfinite(ub)) return ub;
    if (std::isfinite(lb)) return lb;
    return 0.0;
  }

  BoxQpResult run(double tolerance, long max_iterations) {
    BoxQpResult result;
    long iter = 0;
    double violation = 0.0;
    bool converged = false;
    for (;; ++iter) {
      if (qp_.equality) {
        const Pair pair = select_pair();
        violation = pair.gap;
        if (violation <= tolerance || pair.low < 0) {
          converged = true;
          break;
        }
        if (iter >= max_iterations) break;
        step_pair(pair);
      } else {
        const auto [t, v] = select_single();
        violation = v;
        if (violation <= tolerance) {
          converged = true;
          break;
        }
        if (iter >= max_iterations) break;
        step_single(t);
      }
    }
    result.beta = beta_;
    result.gradient = grad_;
    result.converged = converged;
    result.iterations = iter;
    result.max_violation = violation;
    result.rho = qp_.equality ? rho() : 0.0;
    return result;
  }

 private:
  const BoxQp& qp_;
  const Matrix& K_;
  Index n_;
  Index m_;
  Vector beta_;
  Vector grad_;
  Vector diag_;
  Eigen::ArrayXd up_mask_, low_mask_, v_, work_, inv_curv_;
};

}  // namespace

BoxQpResult solve_box_qp(const BoxQp& problem, double tolerance, long max_iterations) {
  Solver solver(problem);
  return solver.run(tolerance, max_iterations);
}

}  // namespace riskrfe::detail
