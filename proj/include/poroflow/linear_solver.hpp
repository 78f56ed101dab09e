#pragma once

// Sparse direct LU (UMFPACK) behind a small RAII handle.

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>
#include <umfpack.h>

#include "error.hpp"

namespace poroflow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

/// Failure of the factorisation; carries the original column of the
/// smallest pivot and the reciprocal condition estimate.
class SingularMatrixError : public SolverError {
 public:
  SingularMatrixError(const std::string& what, int column, double rcond)
      : SolverError(what, {}), column_(column), rcond_(rcond) {}
  int column() const { return column_; }
  double rcond() const { return rcond_; }

 private:
  int column_;
  double rcond_;
};

class SparseLU {
 public:
  /// Pivots with |u_ii| / max|u_jj| below this are treated as zero.
  static constexpr double kTinyPivot = 1e-20;

  SparseLU() = default;
  explicit SparseLU(const SparseMatrix& a) { factorize(a); }

  void factorize(const SparseMatrix& a) {
    if (a.rows() != a.cols()) throw SolverError("linear solve: matrix is not square", {});
    a_ = a;
    a_.makeCompressed();
    numeric_.reset();
    const int n = static_cast<int>(a_.rows());
    if (n == 0) return;

    double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    void* symbolic = nullptr;
    int status = umfpack_di_symbolic(n, n, a_.outerIndexPtr(), a_.innerIndexPtr(), a_.valuePtr(),
                                     &symbolic, control, info);
    const std::unique_ptr<void, FreeSymbolic> sym(symbolic);
    if (status != UMFPACK_OK) fail_status("symbolic analysis", status);

    void* numeric = nullptr;
    status = umfpack_di_numeric(a_.outerIndexPtr(), a_.innerIndexPtr(), a_.valuePtr(), symbolic,
                                &numeric, control, info);
    numeric_.reset(numeric);
    rcond_ = info[UMFPACK_RCOND];
    if (status == UMFPACK_WARNING_singular_matrix || (status == UMFPACK_OK && !(rcond_ > kTinyPivot)))
      fail_singular();
    if (status != UMFPACK_OK) fail_status("numeric factorisation", status);
  }

  Vector solve(const Vector& b) const {
    const int n = static_cast<int>(a_.rows());
    if (b.size() != n) throw SolverError("linear solve: right-hand side has wrong size", {});
    Vector x = Vector::Zero(n);
    if (n == 0) return x;
    solve_into(b, x);
    // UMFPACK refines already; a couple of extra steps guard badly scaled blocks.
    const double bn = std::max(b.norm(), 1e-300);
    for (int step = 0; step < 3; ++step) {
      const Vector r = b - a_ * x;
      residual_ = r.norm() / bn;
      if (residual_ <= 1e-13) break;
      Vector dx = Vector::Zero(n);
      solve_into(r, dx);
      x += dx;
    }
    return x;
  }

  double rcond() const { return rcond_; }
  /// Relative residual of the last solve.
  double residual() const { return residual_; }

 private:
  struct FreeSymbolic {
    void operator()(void* p) const { umfpack_di_free_symbolic(&p); }
  };
  struct FreeNumeric {
    void operator()(void* p) const { umfpack_di_free_numeric(&p); }
  };

  void solve_into(const Vector& b, Vector& x) const {
    double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    const int status = umfpack_di_solve(UMFPACK_A, a_.outerIndexPtr(), a_.innerIndexPtr(), a_.valuePtr(),
                                        x.data(), b.data(), numeric_.get(), control, info);
    if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
      fail_status("solve", status);
  }

  [[noreturn]] void fail_singular() const {
    const int n = static_cast<int>(a_.rows());
    std::vector<int> q(n);
    std::vector<double> d(n);
    int do_recip = 0;
    int column = -1;
    double smallest = 0.0;
    if (umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, q.data(),
                               d.data(), &do_recip, nullptr, numeric_.get()) == UMFPACK_OK) {
      int pos = 0;
      for (int i = 1; i < n; ++i)
        if (std::abs(d[i]) < std::abs(d[pos])) pos = i;
      column = q[pos];
      smallest = d[pos];
    }
    std::ostringstream msg;
    msg << "linear solve: singular matrix (rcond " << rcond_ << "), smallest pivot " << smallest
        << " at column " << column;
    throw SingularMatrixError(msg.str(), column, rcond_);
  }

  [[noreturn]] static void fail_status(const char* stage, int status) {
    std::ostringstream msg;
    msg << "linear solve: UMFPACK " << stage << " failed with status " << status;
    if (status == UMFPACK_ERROR_out_of_memory) msg << " (out of memory)";
    throw SolverError(msg.str(), {});
  }

  SparseMatrix a_;
  std::unique_ptr<void, FreeNumeric> numeric_;
  double rcond_ = 1.0;
  mutable double residual_ = 0.0;
};

inline Vector linear_solve(const SparseMatrix& a, const Vector& b) { return SparseLU(a).solve(b); }

}  // namespace poroflow
