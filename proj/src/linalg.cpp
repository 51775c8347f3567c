#include "greenchain/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "greenchain/errors.hpp"

namespace greenchain {

namespace {
constexpr long double kPivotFloor = 1e-14L;
}

bool TridiagonalLU::factor(const Tridiagonal& t) {
  const std::size_t n = t.size();
  lower_.assign(n, 0.0L);
  pivot_.assign(n, 0.0L);
  sup_.assign(n, 0.0L);
  if (n == 0) return true;
  for (std::size_t i = 0; i < n; ++i) sup_[i] = t.sup[i];
  pivot_[0] = t.diag[0];
  long double scale = std::abs(pivot_[0]);
  for (std::size_t i = 1; i < n; ++i) {
    scale = std::max<long double>(
        scale, std::abs((long double)t.diag[i]) + std::abs((long double)t.sub[i]));
    if (std::abs(pivot_[i - 1]) <= kPivotFloor * scale) return false;
    lower_[i] = t.sub[i] / pivot_[i - 1];
    pivot_[i] = (long double)t.diag[i] - lower_[i] * sup_[i - 1];
  }
  if (std::abs(pivot_[n - 1]) <= kPivotFloor * scale) return false;
  return true;
}

void TridiagonalLU::solve(const std::vector<double>& rhs,
                          std::vector<double>& out) const {
  const std::size_t n = pivot_.size();
  std::vector<long double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rhs[i];
    if (i > 0) y[i] -= lower_[i] * y[i - 1];
  }
  out.assign(n, 0.0);
  std::vector<long double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    long double v = y[ri];
    if (ri + 1 < n) v -= sup_[ri] * x[ri + 1];
    x[ri] = v / pivot_[ri];
    out[ri] = static_cast<double>(x[ri]);
  }
}

bool TridiagonalLDL::factor(const Tridiagonal& t) {
  const std::size_t n = t.size();
  lower_.assign(n, 0.0L);
  d_.assign(n, 0.0L);
  sub_.assign(n, 0.0L);
  if (n == 0) return true;
  long double scale = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    sub_[i] = t.sub[i];
    scale = std::max<long double>(scale, std::abs((long double)t.diag[i]));
  }
  d_[0] = t.diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (!(d_[i - 1] > kPivotFloor * scale)) return false;
    lower_[i] = sub_[i] / d_[i - 1];
    d_[i] = (long double)t.diag[i] - lower_[i] * sub_[i];
  }
  if (!(d_[n - 1] > kPivotFloor * scale)) return false;
  return true;
}

void TridiagonalLDL::solve(const std::vector<double>& rhs,
                           std::vector<double>& out) const {
  const std::size_t n = d_.size();
  std::vector<long double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rhs[i];
    if (i > 0) y[i] -= lower_[i] * y[i - 1];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] /= d_[i];
  out.assign(n, 0.0);
  std::vector<long double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    long double v = y[ri];
    if (ri + 1 < n) v -= lower_[ri + 1] * x[ri + 1];
    x[ri] = v;
    out[ri] = static_cast<double>(v);
  }
}

struct DenseLU::Impl {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

void DenseLU::factor(const std::vector<double>& a, std::size_t n) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = a[i * n + j];
  impl_ = std::make_shared<Impl>();
  impl_->lu.compute(m);
}

void DenseLU::solve(const std::vector<double>& rhs,
                    std::vector<double>& out) const {
  if (!impl_) throw solver_error("dense LU used before factor()");
  const auto n = static_cast<std::size_t>(impl_->lu.rows());
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) b(i) = rhs[i];
  Eigen::VectorXd x = impl_->lu.solve(b);
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = x(i);
}

struct DenseSPD::Impl {
  Eigen::LLT<Eigen::MatrixXd> llt;
};

void DenseSPD::factor(const std::vector<double>& a, std::size_t n) {
  a_ = a;
  n_ = n;
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = a[i * n + j];
  impl_ = std::make_shared<Impl>();
  impl_->llt.compute(m);
  if (impl_->llt.info() != Eigen::Success) {
    throw solver_error("Cholesky factorization failed: matrix not SPD");
  }
}

void DenseSPD::solve(const std::vector<double>& rhs,
                     std::vector<double>& out) const {
  if (!impl_) throw solver_error("SPD solver used before factor()");
  const std::size_t n = n_;
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) b(i) = rhs[i];
  Eigen::VectorXd x = impl_->llt.solve(b);

  // One refinement pass with the residual accumulated in long double.
  // Brings the solution near component-wise roundoff, which the
  // inverse-symmetry and KCL guarantees (1e-10) rely on for ill-scaled
  // conductances.
  std::vector<long double> res(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = rhs[i];
    for (std::size_t j = 0; j < n; ++j) {
      acc -= static_cast<long double>(a_[i * n + j]) * x(j);
    }
    res[i] = acc;
  }
  Eigen::VectorXd r(n);
  for (std::size_t i = 0; i < n; ++i) r(i) = static_cast<double>(res[i]);
  Eigen::VectorXd dx = impl_->llt.solve(r);
  x += dx;

  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = x(i);
}

}  // namespace greenchain
