#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace greenchain {

// Tridiagonal system in banded storage. Row i reads
//   sub[i]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1] = b[i],
// with sub[0] and sup[n-1] ignored.
struct Tridiagonal {
  std::vector<double> sub;
  std::vector<double> diag;
  std::vector<double> sup;
  std::size_t size() const { return diag.size(); }
};

// Thomas elimination without pivoting, factored once so many right-hand
// sides can reuse it. Valid for the irreducibly diagonally dominant
// systems this project produces; factor() reports pivot degradation so
// callers can fall back to a pivoted dense solve.
class TridiagonalLU {
 public:
  // Returns false when a pivot falls below tiny * (row scale).
  bool factor(const Tridiagonal& t);
  void solve(const std::vector<double>& rhs, std::vector<double>& out) const;
  std::size_t size() const { return pivot_.size(); }

 private:
  std::vector<long double> lower_;  // multipliers
  std::vector<long double> pivot_;  // eliminated diagonal
  std::vector<long double> sup_;
};

// Symmetric positive definite tridiagonal solve (root-free Cholesky),
// long double accumulation. Used for grounded line Laplacians.
class TridiagonalLDL {
 public:
  bool factor(const Tridiagonal& t);
  void solve(const std::vector<double>& rhs, std::vector<double>& out) const;

 private:
  std::vector<long double> lower_;
  std::vector<long double> d_;
  std::vector<long double> sub_;
};

// Dense row-major matrix helpers backed by Eigen (partial-pivot LU and
// LDLT with one long double refinement pass). Kept behind this interface
// so the callers never depend on Eigen types.
class DenseLU {
 public:
  // a is n*n row-major.
  void factor(const std::vector<double>& a, std::size_t n);
  void solve(const std::vector<double>& rhs, std::vector<double>& out) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// SPD solve with one iterative-refinement pass (residual in long double),
// which keeps the grounded-Laplacian inverse symmetric to ~1e-13 even on
// ill-scaled conductance ranges. Throws solver_error when not SPD.
class DenseSPD {
 public:
  void factor(const std::vector<double>& a, std::size_t n);
  void solve(const std::vector<double>& rhs, std::vector<double>& out) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  std::vector<double> a_;
  std::size_t n_ = 0;
};

}  // namespace greenchain
