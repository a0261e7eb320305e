#include "auq/losses.hpp"

#include <cmath>

namespace auq {

ElasticNetLoss::ElasticNetLoss(Matrix data, Vector targets)
    : data_(std::move(data)), targets_(std::move(targets)) {
  require(data_.rows() == targets_.size(), ErrorKind::argument,
          "elastic net: sample count mismatch between data and targets");
  require(data_.cols() > 0, ErrorKind::argument, "elastic net: empty data");
  normal_rhs_ = data_.transpose() * targets_;
}

double ElasticNetLoss::value(const Vector& u) const {
  return 0.5 * (data_ * u - targets_).squaredNorm();
}

Vector ElasticNetLoss::gradient(const Vector& u) const {
  return data_.transpose() * (data_ * u - targets_);
}

Vector ElasticNetLoss::hess_vec(const Vector&, const Vector& x) const {
  return data_.transpose() * (data_ * x);
}

MultinomialLoss::MultinomialLoss(Matrix data, std::vector<int> labels, int classes)
    : data_(std::move(data)), labels_(std::move(labels)), classes_(classes) {
  require(classes_ >= 2, ErrorKind::argument, "multinomial: need at least 2 classes");
  require(data_.rows() == static_cast<Eigen::Index>(labels_.size()),
          ErrorKind::argument, "multinomial: sample count mismatch");
  require(data_.cols() > 0, ErrorKind::argument, "multinomial: empty data");
  for (int y : labels_)
    require(y >= 0 && y < classes_, ErrorKind::argument,
            "multinomial: label out of range");
}

Matrix MultinomialLoss::probabilities(const Vector& u, Vector* log_norm) const {
  Eigen::Map<const Matrix> U(u.data(), data_.cols(), classes_);
  Matrix z = data_ * U;  // samples x classes
  Vector row_max = z.rowwise().maxCoeff();
  z.colwise() -= row_max;
  Matrix p = z.array().exp().matrix();
  Vector sums = p.rowwise().sum();
  if (log_norm) *log_norm = row_max.array() + sums.array().log();
  p.array().colwise() /= sums.array();
  return p;
}

double MultinomialLoss::value(const Vector& u) const {
  require(u.size() == dim(), ErrorKind::argument, "multinomial: bad parameter size");
  Eigen::Map<const Matrix> U(u.data(), data_.cols(), classes_);
  Matrix z = data_ * U;
  Vector row_max = z.rowwise().maxCoeff();
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double lse = row_max[i] +
                 std::log((z.row(i).array() - row_max[i]).exp().sum());
    total += lse - z(i, labels_[static_cast<size_t>(i)]);
  }
  return total;
}

Vector MultinomialLoss::gradient(const Vector& u) const {
  require(u.size() == dim(), ErrorKind::argument, "multinomial: bad parameter size");
  Matrix p = probabilities(u, nullptr);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    p(i, labels_[static_cast<size_t>(i)]) -= 1.0;
  Matrix g = data_.transpose() * p;  // features x classes
  return Eigen::Map<const Vector>(g.data(), g.size());
}

Vector MultinomialLoss::hess_vec(const Vector& u, const Vector& x) const {
  require(u.size() == dim() && x.size() == dim(), ErrorKind::argument,
          "multinomial: bad parameter size");
  Matrix p = probabilities(u, nullptr);
  Eigen::Map<const Matrix> X(x.data(), data_.cols(), classes_);
  Matrix s = data_ * X;  // samples x classes
  // Per sample: q = p .* s - (p . s) p, the Gauss--Newton block action.
  Matrix q(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double dot = p.row(i).dot(s.row(i));
    q.row(i) = p.row(i).cwiseProduct(s.row(i)) - dot * p.row(i);
  }
  Matrix h = data_.transpose() * q;
  return Eigen::Map<const Vector>(h.data(), h.size());
}

SmoothedSvmLoss::SmoothedSvmLoss(Matrix samples, Vector labels, double eps)
    : samples_(std::move(samples)), labels_(std::move(labels)), eps_(eps) {
  require(samples_.cols() == labels_.size(), ErrorKind::argument,
          "svm: sample count mismatch");
  require(samples_.rows() > 0, ErrorKind::argument, "svm: empty data");
  require(eps_ > 0.0, ErrorKind::argument, "svm: smoothing must be positive");
  for (Eigen::Index i = 0; i < labels_.size(); ++i)
    require(labels_[i] == 1.0 || labels_[i] == -1.0, ErrorKind::argument,
            "svm: labels must be +-1");
}

double SmoothedSvmLoss::value(const Vector& u) const {
  Vector margins = samples_.transpose() * u;  // count
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    double z = 1.0 - labels_[i] * margins[i];
    total += 0.5 * (z + std::sqrt(eps_ * eps_ + z * z));
  }
  return total / static_cast<double>(margins.size());
}

Vector SmoothedSvmLoss::gradient(const Vector& u) const {
  Vector margins = samples_.transpose() * u;
  Vector coef(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    double z = 1.0 - labels_[i] * margins[i];
    double dz = 0.5 * (1.0 + z / std::sqrt(eps_ * eps_ + z * z));
    coef[i] = -labels_[i] * dz / static_cast<double>(margins.size());
  }
  return samples_ * coef;
}

Vector SmoothedSvmLoss::hess_vec(const Vector& u, const Vector& x) const {
  Vector margins = samples_.transpose() * u;
  Vector probe = samples_.transpose() * x;
  Vector coef(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    double z = 1.0 - labels_[i] * margins[i];
    double root = std::sqrt(eps_ * eps_ + z * z);
    double d2z = 0.5 * eps_ * eps_ / (root * root * root);
    coef[i] = d2z * probe[i] / static_cast<double>(margins.size());
  }
  return samples_ * coef;
}

namespace {
double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}
}  // namespace

Vector weighted_prox(const ProxRegularizer& reg, const std::vector<Vector>& targets,
                     const std::vector<DiagonalWeight>& weights) {
  require(!targets.empty(), ErrorKind::argument, "weighted_prox: no targets");
  require(targets.size() == weights.size(), ErrorKind::argument,
          "weighted_prox: targets/weights count mismatch");
  Eigen::Index n = targets.front().size();
  for (size_t j = 0; j < targets.size(); ++j) {
    require(targets[j].size() == n && weights[j].size() == n, ErrorKind::argument,
            "weighted_prox: dimension mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
      require(weights[j].d[i] > 0.0, ErrorKind::argument,
              "weighted_prox: weights must be positive");
  }

  // Fixed summation order keeps results identical across thread counts.
  Vector s = Vector::Zero(n);
  Vector m = Vector::Zero(n);
  for (size_t j = 0; j < targets.size(); ++j) {
    s += weights[j].d;
    m += weights[j].d.cwiseProduct(targets[j]);
  }

  Vector v(n);
  if (reg.kind == ProxRegularizer::Kind::elastic_net) {
    for (Eigen::Index i = 0; i < n; ++i)
      v[i] = soft_threshold(m[i], reg.l1) / (reg.l2 + s[i]);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = m[i] / (reg.scale + s[i]);
  }
  return v;
}

}  // namespace auq
