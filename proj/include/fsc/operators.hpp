#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsc/dense.hpp"
#include "fsc/dense_eigen.hpp"
#include "fsc/fairness.hpp"
#include "fsc/graph.hpp"

namespace fsc {

// Matrix-free square operator. apply() counts invocations; the count is
// the cost unit every solver statistic is expressed in. self_adjoint()
// routes the operator to the right eigensolver: symmetric Lanczos when
// true, Arnoldi when false.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual int dim() const = 0;
  virtual bool self_adjoint() const { return true; }

  void apply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != dim() || static_cast<int>(y.size()) != dim())
      throw std::invalid_argument("LinearOperator::apply: vector size mismatch");
    ++applies_;
    apply_impl(x, y);
  }

  std::uint64_t apply_count() const { return applies_; }
  void reset_apply_count() const { applies_ = 0; }

 protected:
  virtual void apply_impl(std::span<const double> x, std::span<double> y) const = 0;

 private:
  mutable std::uint64_t applies_ = 0;
};

class DenseOperator : public LinearOperator {
 public:
  explicit DenseOperator(Matrix a, bool self_adjoint = true)
      : a_(std::move(a)), self_adjoint_(self_adjoint) {
    if (a_.rows() != a_.cols()) throw std::invalid_argument("DenseOperator: matrix not square");
  }
  int dim() const override { return a_.rows(); }
  bool self_adjoint() const override { return self_adjoint_; }
  const Matrix& matrix() const { return a_; }

 protected:
  void apply_impl(std::span<const double> x, std::span<double> y) const override {
    matvec(a_, x, y);
  }

 private:
  Matrix a_;
  bool self_adjoint_;
};

enum class GVariant { sym, rw, aff };

inline const char* to_string(GVariant v) {
  switch (v) {
    case GVariant::sym: return "sym";
    case GVariant::rw: return "rw";
    case GVariant::aff: return "aff";
  }
  return "?";
}

// Shifted similarity operator G. The canonical shifts place the spectrum
// strictly above zero so that the constraint Gram matrix downstream stays
// nonsingular:
//   sym: D^{-1/2} W D^{-1/2} + 2I      rw: D^{-1} W + 2I      aff: W + nI
// An explicit shift (including 0) can be passed for diagnostics.
class GOperator : public LinearOperator {
 public:
  GOperator(const Graph& g, GVariant variant)
      : GOperator(g, variant, default_shift(variant, g.order())) {}

  GOperator(const Graph& g, GVariant variant, double shift)
      : g_(&g), variant_(variant), shift_(shift) {
    if (variant_ != GVariant::aff) g.require_positive_degrees("GOperator");
    if (variant_ == GVariant::sym) {
      inv_sqrt_deg_.resize(g.order());
      for (int v = 0; v < g.order(); ++v) inv_sqrt_deg_[v] = 1.0 / std::sqrt(g.degrees()[v]);
    } else if (variant_ == GVariant::rw) {
      inv_deg_.resize(g.order());
      for (int v = 0; v < g.order(); ++v) inv_deg_[v] = 1.0 / g.degrees()[v];
    }
  }

  static double default_shift(GVariant variant, int n) {
    return variant == GVariant::aff ? static_cast<double>(n) : 2.0;
  }

  int dim() const override { return g_->order(); }
  GVariant variant() const { return variant_; }
  double shift() const { return shift_; }
  const Graph& graph() const { return *g_; }

  bool symmetric() const { return variant_ != GVariant::rw; }
  bool self_adjoint() const override { return symmetric(); }

  // y = G^T x. Uncounted: it is a setup aid, not an operator application.
  void apply_transpose(std::span<const double> x, std::span<double> y) const {
    if (variant_ != GVariant::rw) {
      apply_impl(x, y);
      return;
    }
    std::vector<double> t(x.begin(), x.end());
    for (int v = 0; v < dim(); ++v) t[v] *= inv_deg_[v];
    g_->adjacency_matvec(t, y);
    axpy(shift_, x, y);
  }

 protected:
  void apply_impl(std::span<const double> x, std::span<double> y) const override {
    switch (variant_) {
      case GVariant::sym:
        g_->normalized_adjacency_matvec(x, y);
        break;
      case GVariant::rw:
        g_->adjacency_matvec(x, y);
        for (int v = 0; v < dim(); ++v) y[v] *= inv_deg_[v];
        break;
      case GVariant::aff:
        g_->adjacency_matvec(x, y);
        break;
    }
    axpy(shift_, x, y);
  }

 private:
  const Graph* g_;
  GVariant variant_;
  double shift_;
  std::vector<double> inv_sqrt_deg_;
  std::vector<double> inv_deg_;
};

inline GOperator make_g_operator(const Graph& g, GVariant variant) { return {g, variant}; }

class SingularGramError : public std::runtime_error {
 public:
  explicit SingularGramError(const std::string& what) : std::runtime_error(what) {}
};

// Fairness-constrained similarity operator
//   U = G - G F (F^T G F)^{-1} F^T G,
// the infinite-penalty limit of (G^{-1} + mu F F^T)^{-1}. Applying U costs
// one G matvec plus O(n h) vector work; setup costs h-1 G matvecs for
// M = G F (plus uncounted transpose passes when G itself is unsymmetric).
class FairOperator : public LinearOperator {
 public:
  FairOperator(GOperator g, const ConstraintMatrix& f, double cond_limit = 1e12)
      : g_(std::move(g)), f_(&f) {
    const int n = g_.dim();
    const int r = f.cols();
    if (f.n() != n) throw std::invalid_argument("FairOperator: constraint size mismatch");
    m_ = Matrix(n, r);
    std::vector<double> fcol(n);
    for (int j = 0; j < r; ++j) {
      std::copy(f.dense().col(j), f.dense().col(j) + n, fcol.begin());
      g_.apply(fcol, m_.col_span(j));
    }
    if (g_.symmetric()) {
      n_ = m_;
    } else {
      n_ = Matrix(n, r);
      for (int j = 0; j < r; ++j) {
        std::copy(f.dense().col(j), f.dense().col(j) + n, fcol.begin());
        g_.apply_transpose(fcol, n_.col_span(j));
      }
    }
    Matrix s(r, r);
    std::vector<double> ftm(r);
    for (int j = 0; j < r; ++j) {
      f.apply_transpose(m_.col_span(j), ftm);
      for (int i = 0; i < r; ++i) s(i, j) = ftm[i];
    }
    const DenseEigen sq = dense_eigen(matmul_at_b(s, s), 1e-6);
    const double top = sq.values.empty() ? 0.0 : sq.values.back();
    const double bottom = sq.values.empty() ? 0.0 : sq.values.front();
    gram_cond_ = (top <= 0.0 || bottom <= 0.0) ? std::numeric_limits<double>::infinity()
                                               : std::sqrt(top / bottom);
    if (!(gram_cond_ < cond_limit)) {
      std::ostringstream msg;
      msg << "FairOperator: constraint Gram matrix F^T G F is singular or near-singular "
          << "(condition estimate " << gram_cond_ << "). An unshifted similarity operator can "
          << "map the constraint columns to zero; use the shifted G variants.";
      throw SingularGramError(msg.str());
    }
    s_lu_ = lu_factor(std::move(s));
  }

  int dim() const override { return g_.dim(); }
  const GOperator& inner() const { return g_; }
  const ConstraintMatrix& constraint() const { return *f_; }
  double gram_condition() const { return gram_cond_; }
  bool symmetric() const { return g_.symmetric(); }
  bool self_adjoint() const override { return symmetric(); }

 protected:
  // y = G x - M S^{-1} N^T x  with M = G F, N = G^T F, S = F^T G F.
  void apply_impl(std::span<const double> x, std::span<double> y) const override {
    g_.apply(x, y);
    std::vector<double> t(f_->cols());
    matvec_t(n_, x, t);
    lu_solve(s_lu_, t);
    for (int j = 0; j < f_->cols(); ++j) axpy(-t[j], m_.col_span(j), y);
  }

 private:
  GOperator g_;
  const ConstraintMatrix* f_;
  Matrix m_;
  Matrix n_;
  LuFactors s_lu_;
  double gram_cond_ = 0.0;
};

// Deflation-based fair operator: with Q an orthonormal basis of
// range(D^{-1/2} F) and P = I - Q Q^T,
//   y = P L_sym P x + sigma (I - P) x.
// The sigma term parks the constrained directions at eigenvalue sigma;
// any sigma above 2 (the top of the L_sym spectrum) keeps them away from
// the smallest-k end.
class DeflatedOperator : public LinearOperator {
 public:
  DeflatedOperator(const Graph& g, const ConstraintMatrix& f, double sigma = 3.0)
      : g_(&g), sigma_(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("DeflatedOperator: sigma must be positive");
    if (f.n() != g.order())
      throw std::invalid_argument("DeflatedOperator: constraint size mismatch");
    g.require_positive_degrees("DeflatedOperator");
    Matrix c = f.dense();
    for (int j = 0; j < c.cols(); ++j)
      for (int v = 0; v < c.rows(); ++v) c(v, j) /= std::sqrt(g.degrees()[v]);
    q_ = orthonormal_range(c);
  }

  int dim() const override { return g_->order(); }
  double sigma() const { return sigma_; }
  const Matrix& deflation_basis() const { return q_; }

 protected:
  void apply_impl(std::span<const double> x, std::span<double> y) const override {
    const int n = dim();
    std::vector<double> px(x.begin(), x.end());
    project_out(px);
    std::vector<double> lx(n);
    g_->normalized_adjacency_matvec(px, lx);
    for (int i = 0; i < n; ++i) lx[i] = px[i] - lx[i];
    project_out(lx);
    for (int i = 0; i < n; ++i) y[i] = lx[i] + sigma_ * (x[i] - px[i]);
  }

 private:
  void project_out(std::vector<double>& v) const {
    std::vector<double> qt(q_.cols());
    matvec_t(q_, v, qt);
    for (int j = 0; j < q_.cols(); ++j) axpy(-qt[j], q_.col_span(j), v);
  }

  const Graph* g_;
  double sigma_;
  Matrix q_;
};

// Orthonormal basis of ker(F^T) for the dense baselines. Refuses large n:
// the result is n x (n-h+1) dense.
inline Matrix null_space_basis(const ConstraintMatrix& f, int dense_limit = 3000) {
  if (f.n() > dense_limit)
    throw std::invalid_argument("null_space_basis: dense path refuses n > " +
                                std::to_string(dense_limit) + " (got n = " +
                                std::to_string(f.n()) + ")");
  return orthonormal_complement(f.dense());
}

// || (G^{-1} + mu F F^T)^{-1} - U ||_F for dense spd G: the finite-penalty
// operator approaches the projected operator U at rate O(1/mu).
inline double smw_limit_check(const Matrix& g, const Matrix& f, double mu) {
  if (g.rows() != g.cols() || f.rows() != g.rows())
    throw std::invalid_argument("smw_limit_check: dimension mismatch");
  const int n = g.rows();
  Matrix ginv = lu_invert(lu_factor(g));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < f.cols(); ++l) ginv(i, j) += mu * f(i, l) * f(j, l);
  const Matrix penalized = lu_invert(lu_factor(std::move(ginv)));

  const Matrix gf = matmul(g, f);
  const Matrix s = matmul_at_b(f, gf);
  const Matrix sinv_ftg = lu_solve_mat(lu_factor(s), matmul_at_b(f, g));
  const Matrix correction = matmul(gf, sinv_ftg);
  double acc = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double d = penalized(i, j) - (g(i, j) - correction(i, j));
      acc += d * d;
    }
  return std::sqrt(acc);
}

}  // namespace fsc
