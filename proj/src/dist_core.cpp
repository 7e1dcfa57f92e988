#include "hgr/dist_core.hpp"

#include <cmath>
#include <random>
#include <string>

#include "hgr/error.hpp"

namespace hgr {

JointDistribution JointDistribution::from_matrix(const Matrix& raw) {
  if (raw.rows() == 0 || raw.cols() == 0) throw Error(ErrorCode::AllZero, "empty matrix");
  double total = 0.0;
  for (Eigen::Index x = 0; x < raw.rows(); ++x)
    for (Eigen::Index y = 0; y < raw.cols(); ++y) {
      double v = raw(x, y);
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::NegativeEntry,
                    "entry (" + std::to_string(x) + "," + std::to_string(y) + ") is " + std::to_string(v));
      total += v;
    }
  if (!(total > 0.0)) throw Error(ErrorCode::AllZero, "no positive entry");
  JointDistribution d;
  d.p = raw / total;
  d.px = d.p.rowwise().sum();
  d.py = d.p.colwise().sum().transpose();
  d.strict = (d.px.array() > 0.0).all() && (d.py.array() > 0.0).all();
  return d;
}

EmpiricalCounts::EmpiricalCounts(CountMatrix labeled, CountVector unlabeled)
    : c(std::move(labeled)), u(std::move(unlabeled)) {
  if (u.size() == 0) u = CountVector::Zero(c.rows());
  if (u.size() != c.rows()) throw Error(ErrorCode::ShapeMismatch, "unlabeled counts length differs from |X|");
  if ((c.array() < 0).any() || (u.array() < 0).any()) throw Error(ErrorCode::NegativeEntry, "negative count");
  n = c.sum();
  m = u.sum();
}

Matrix EmpiricalCounts::p_hat() const {
  if (n == 0) return Matrix::Zero(c.rows(), c.cols());
  return c.cast<double>() / static_cast<double>(n);
}

Vector EmpiricalCounts::px_hat() const { return p_hat().rowwise().sum(); }

Vector EmpiricalCounts::py_hat() const { return p_hat().colwise().sum().transpose(); }

Vector EmpiricalCounts::q_x() const {
  if (m == 0) return Vector::Zero(u.size());
  return u.cast<double>() / static_cast<double>(m);
}

Matrix EmpiricalCounts::p_y_given_x() const {
  Matrix out = Matrix::Zero(c.rows(), c.cols());
  for (Eigen::Index x = 0; x < c.rows(); ++x) {
    std::int64_t row = c.row(x).sum();
    if (row > 0) out.row(x) = c.row(x).cast<double>() / static_cast<double>(row);
  }
  return out;
}

JointDistribution random_distribution(Eigen::Index card_x, Eigen::Index card_y, Rng& rng) {
  if (card_x < 2 || card_y < 2) throw Error(ErrorCode::BadRange, "alphabet sizes must be at least 2");
  Matrix raw(card_x, card_y);
  for (Eigen::Index x = 0; x < card_x; ++x)
    for (Eigen::Index y = 0; y < card_y; ++y) raw(x, y) = rng.uniform();
  return JointDistribution::from_matrix(raw);
}

CountVector multinomial(std::int64_t n, std::span<const double> probs, Rng& rng) {
  CountVector out = CountVector::Zero(static_cast<Eigen::Index>(probs.size()));
  double remaining_mass = 0.0;
  for (double q : probs) remaining_mass += q;
  std::int64_t remaining = n;
  for (std::size_t i = 0; i < probs.size() && remaining > 0; ++i) {
    if (i + 1 == probs.size()) {
      out(static_cast<Eigen::Index>(i)) = remaining;
      break;
    }
    double q = remaining_mass > 0.0 ? probs[i] / remaining_mass : 0.0;
    std::int64_t draw = 0;
    if (q >= 1.0) {
      draw = remaining;
    } else if (q > 0.0) {
      std::binomial_distribution<std::int64_t> bin(remaining, q);
      draw = bin(rng.engine());
    }
    out(static_cast<Eigen::Index>(i)) = draw;
    remaining -= draw;
    remaining_mass -= probs[i];
  }
  return out;
}

EmpiricalCounts sample_labeled(const JointDistribution& dist, std::int64_t n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::BadRange, "n must be at least 1");
  const Eigen::Index nx = dist.card_x(), ny = dist.card_y();
  std::vector<double> cells;
  cells.reserve(static_cast<std::size_t>(nx * ny));
  std::size_t last_positive = 0;
  for (Eigen::Index x = 0; x < nx; ++x)
    for (Eigen::Index y = 0; y < ny; ++y) {
      if (dist.p(x, y) > 0.0) last_positive = cells.size();
      cells.push_back(dist.p(x, y));
    }
  cells.resize(last_positive + 1);  // the final cell absorbs the remainder, so it must carry mass
  CountVector flat = multinomial(n, cells, rng);
  CountMatrix c = CountMatrix::Zero(nx, ny);
  for (Eigen::Index i = 0; i < flat.size(); ++i) c(i / ny, i % ny) = flat(i);
  return EmpiricalCounts(std::move(c), CountVector::Zero(nx));
}

EmpiricalCounts sample_unlabeled(const JointDistribution& dist, std::int64_t m, Rng& rng) {
  if (m < 0) throw Error(ErrorCode::BadRange, "m must be nonnegative");
  const Eigen::Index nx = dist.card_x();
  CountVector u = CountVector::Zero(nx);
  if (m > 0) {
    Eigen::Index last = 0;
    for (Eigen::Index x = 0; x < nx; ++x)
      if (dist.px(x) > 0.0) last = x;
    std::vector<double> probs(dist.px.data(), dist.px.data() + last + 1);
    u.head(last + 1) = multinomial(m, probs, rng);
  }
  return EmpiricalCounts(CountMatrix::Zero(nx, dist.card_y()), std::move(u));
}

EmpiricalCounts sample_both(const JointDistribution& dist, std::int64_t n, std::int64_t m, const Rng& rng) {
  Rng labeled_rng = rng.stream(0);
  EmpiricalCounts out = sample_labeled(dist, n, labeled_rng);
  if (m > 0) {
    Rng unlabeled_rng = rng.stream(1);
    out.u = sample_unlabeled(dist, m, unlabeled_rng).u;
    out.m = m;
  }
  return out;
}

double kl_divergence(std::span<const double> q, std::span<const double> p) {
  if (q.size() != p.size()) throw Error(ErrorCode::ShapeMismatch, "kl_divergence: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    if (p[i] == 0.0) throw Error(ErrorCode::SupportViolation, "q > 0 where p = 0 at index " + std::to_string(i));
    d += q[i] * std::log(q[i] / p[i]);
  }
  return d < 0.0 ? 0.0 : d;
}

double kl_divergence(const Vector& q, const Vector& p) {
  return kl_divergence(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())),
                       std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

double kl_divergence(const JointDistribution& q, const JointDistribution& p) {
  if (q.p.rows() != p.p.rows() || q.p.cols() != p.p.cols())
    throw Error(ErrorCode::ShapeMismatch, "kl_divergence: shape mismatch");
  return kl_divergence(std::span<const double>(q.p.data(), static_cast<std::size_t>(q.p.size())),
                       std::span<const double>(p.p.data(), static_cast<std::size_t>(p.p.size())));
}

PerturbationDirection perturbation_from_empirical(const JointDistribution& dist,
                                                  const EmpiricalCounts& counts, double eps) {
  if (!dist.strict) throw Error(ErrorCode::NonStrictDistribution, "perturbation needs a strict distribution");
  if (!(eps > 0.0)) throw Error(ErrorCode::BadRange, "eps must be positive");
  if (counts.card_x() != dist.card_x() || counts.card_y() != dist.card_y())
    throw Error(ErrorCode::ShapeMismatch, "counts and distribution differ in shape");
  const Matrix ph = counts.p_hat();
  PerturbationDirection dir;
  dir.xi_tilde = Matrix::Zero(dist.card_y(), dist.card_x());
  for (Eigen::Index x = 0; x < dist.card_x(); ++x)
    for (Eigen::Index y = 0; y < dist.card_y(); ++y) {
      double p = dist.p(x, y);
      if (p == 0.0) {
        if (ph(x, y) > 0.0)
          throw Error(ErrorCode::SupportViolation,
                      "empirical mass at (" + std::to_string(x) + "," + std::to_string(y) + ") where P = 0");
        continue;
      }
      dir.xi_tilde(y, x) = (ph(x, y) - p) / std::sqrt(eps * p);
    }
  if (counts.m > 0) {
    const Vector q = counts.q_x();
    dir.xi_m = ((q - dist.px).array() / (eps * dist.px.array()).sqrt()).matrix();
  }
  return dir;
}

void empirical_from_perturbation(const JointDistribution& dist, const PerturbationDirection& dir,
                                 double eps, Matrix& p_hat, Vector& q_x) {
  p_hat = dist.p;
  for (Eigen::Index x = 0; x < dist.card_x(); ++x)
    for (Eigen::Index y = 0; y < dist.card_y(); ++y)
      p_hat(x, y) += std::sqrt(eps * dist.p(x, y)) * dir.xi_tilde(y, x);
  if (dir.xi_m.size() == dist.card_x())
    q_x = dist.px + ((eps * dist.px.array()).sqrt() * dir.xi_m.array()).matrix();
  else
    q_x.resize(0);
}

}  // namespace hgr
