#include "greenchain/green_exact.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "greenchain/errors.hpp"
#include "greenchain/linalg.hpp"

namespace greenchain {

const char* route_name(Route r) {
  switch (r) {
    case Route::Exact: return "exact";
    case Route::LocalTime: return "localtime";
    case Route::Voltage: return "voltage";
    case Route::MonteCarlo: return "mc";
  }
  return "unknown";
}

GreenMatrix::GreenMatrix(State lo, State hi, std::vector<double> values,
                         double max_residual)
    : lo_(lo), hi_(hi), dim_(static_cast<std::size_t>(hi - lo + 1)),
      values_(std::move(values)), max_residual_(max_residual) {
  if (values_.size() != dim_ * dim_) {
    throw std::invalid_argument("green matrix shape mismatch");
  }
}

double GreenMatrix::at(State start, State target) const {
  if (start < lo_ || start > hi_ || target < lo_ || target > hi_) {
    throw std::domain_error("state outside the interior range");
  }
  return values_[static_cast<std::size_t>(start - lo_) * dim_ +
                 static_cast<std::size_t>(target - lo_)];
}

namespace {

constexpr std::size_t kDenseCutoff = 64;
constexpr double kResidualFlag = 1e-8;

struct InteriorSystem {
  State lo = 0;  // first interior state
  std::size_t n = 0;
  Tridiagonal t;  // I - Q over the interior block
};

InteriorSystem interior_system(const BirthDeathChain& chain) {
  chain.require_valid();
  if (!chain.both_ends_absorbing()) {
    throw std::domain_error(
        "visit counts need both window endpoints absorbing");
  }
  InteriorSystem sys;
  sys.lo = chain.lo() + 1;
  const State hi = chain.hi() - 1;
  if (hi < sys.lo) {
    throw std::domain_error("chain has no interior states");
  }
  sys.n = static_cast<std::size_t>(hi - sys.lo + 1);
  sys.t.sub.assign(sys.n, 0.0);
  sys.t.diag.assign(sys.n, 0.0);
  sys.t.sup.assign(sys.n, 0.0);
  for (std::size_t i = 0; i < sys.n; ++i) {
    const ProbabilityTriple& row = chain.row(sys.lo + static_cast<State>(i));
    sys.t.diag[i] = 1.0 - row.a;
    if (i > 0) sys.t.sub[i] = -row.l;
    if (i + 1 < sys.n) sys.t.sup[i] = -row.r;
  }
  return sys;
}

// Shared solve driver: Thomas elimination for wide windows, pivoted dense
// LU for narrow ones (< 64 states) or when a Thomas pivot degrades.
class InteriorSolver {
 public:
  explicit InteriorSolver(const InteriorSystem& sys) : sys_(&sys) {
    if (sys.n < kDenseCutoff) {
      use_dense();
      return;
    }
    if (!thomas_.factor(sys.t)) {
      use_dense();
    } else {
      dense_ = false;
    }
  }

  void solve(const std::vector<double>& rhs, std::vector<double>& out) const {
    if (dense_) {
      lu_.solve(rhs, out);
    } else {
      thomas_.solve(rhs, out);
    }
    for (double v : out) {
      if (!std::isfinite(v)) {
        throw solver_error(
            "linear solve produced non-finite values: chain is numerically "
            "non-absorbing");
      }
    }
  }

  // Max-norm residual of (I - Q) u = rhs, accumulated in long double.
  double residual(const std::vector<double>& u,
                  const std::vector<double>& rhs) const {
    const Tridiagonal& t = sys_->t;
    const std::size_t n = sys_->n;
    long double worst = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      long double acc = -static_cast<long double>(rhs[i]);
      acc += static_cast<long double>(t.diag[i]) * u[i];
      if (i > 0) acc += static_cast<long double>(t.sub[i]) * u[i - 1];
      if (i + 1 < n) acc += static_cast<long double>(t.sup[i]) * u[i + 1];
      worst = std::max(worst, std::abs(acc));
    }
    return static_cast<double>(worst);
  }

 private:
  void use_dense() {
    const std::size_t n = sys_->n;
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      a[i * n + i] = sys_->t.diag[i];
      if (i > 0) a[i * n + i - 1] = sys_->t.sub[i];
      if (i + 1 < n) a[i * n + i + 1] = sys_->t.sup[i];
    }
    lu_.factor(a, n);
    dense_ = true;
  }

  const InteriorSystem* sys_;
  TridiagonalLU thomas_;
  DenseLU lu_;
  bool dense_ = true;
};

void check_interior(const InteriorSystem& sys, State s, const char* name) {
  const State hi = sys.lo + static_cast<State>(sys.n) - 1;
  if (s < sys.lo || s > hi) {
    std::ostringstream os;
    os << name << " = " << s << " is not an interior state of ["
       << sys.lo - 1 << ", " << hi + 1 << "]";
    throw std::domain_error(os.str());
  }
}

}  // namespace

GreenResult green(const BirthDeathChain& chain, State x, State y) {
  const InteriorSystem sys = interior_system(chain);
  check_interior(sys, x, "x");
  check_interior(sys, y, "y");
  const InteriorSolver solver(sys);

  std::vector<double> rhs(sys.n, 0.0);
  rhs[static_cast<std::size_t>(y - sys.lo)] = 1.0;
  std::vector<double> u;
  solver.solve(rhs, u);
  const double res = solver.residual(u, rhs);
  if (res > 1e-4) {
    throw solver_error("visit-count solve residual " + std::to_string(res) +
                       ": system is numerically singular");
  }

  GreenResult out;
  out.value = u[static_cast<std::size_t>(x - sys.lo)];
  out.route = Route::Exact;
  out.residual = res;
  out.flagged = res > kResidualFlag;
  return out;
}

GreenMatrix green_matrix(const BirthDeathChain& chain) {
  const InteriorSystem sys = interior_system(chain);
  const InteriorSolver solver(sys);
  const std::size_t n = sys.n;

  std::vector<double> values(n * n, 0.0);
  std::vector<double> rhs(n, 0.0);
  std::vector<double> u;
  double max_res = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    rhs.assign(n, 0.0);
    rhs[col] = 1.0;
    solver.solve(rhs, u);
    max_res = std::max(max_res, solver.residual(u, rhs));
    for (std::size_t row = 0; row < n; ++row) {
      values[row * n + col] = u[row];
    }
  }
  if (max_res > 1e-4) {
    throw solver_error("visit-count solve residual " +
                       std::to_string(max_res) +
                       ": system is numerically singular");
  }
  return GreenMatrix(sys.lo, sys.lo + static_cast<State>(n) - 1,
                     std::move(values), max_res);
}

RatioCheck verify_ratio_identity(const BirthDeathChain& chain) {
  const GreenMatrix gm = green_matrix(chain);
  RatioCheck check;
  for (State j = gm.lo(); j <= gm.hi(); ++j) {
    for (State k = j + 1; k <= gm.hi(); ++k) {
      const double solved = gm.at(j, k) / gm.at(k, j);
      const double closed = symmetry_ratio(chain, j, k).value;
      const double dev = std::abs(solved - closed) / closed;
      if (dev > check.max_rel_dev) {
        check.max_rel_dev = dev;
        check.worst_j = j;
        check.worst_k = k;
      }
    }
  }
  return check;
}

}  // namespace greenchain
