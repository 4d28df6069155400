#ifndef LIEJET_ALGEBROID_HPP
#define LIEJET_ALGEBROID_HPP

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "liejet/expr.hpp"
#include "liejet/rng.hpp"

namespace liejet {

/// One structure-tensor entry C^gamma_{alpha beta} (0-based indices).
struct CEntry {
  int gamma, alpha, beta;
  Expr value;
};

/// Lie algebroid in local data: base dimension n, fiber rank m, anchor
/// matrix rho[i][alpha](x) and structure functions C^gamma_{alpha beta}(x).
///
/// The C tensor is stored antisymmetrically in (alpha, beta); entries are
/// supplied for one orientation and completed with the opposite sign.
/// Expressions may use the base variables x1..xn only.
class LieAlgebroid {
public:
  /// rho is n x m; entries give the C tensor before antisymmetric
  /// completion. Conflicting or diagonal entries are config errors.
  LieAlgebroid(std::string name, int n, int m,
               std::vector<std::vector<Expr>> rho, const std::vector<CEntry>& entries);

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  int m() const { return m_; }

  const Expr& rho_expr(int i, int alpha) const { return rho_[idx_nm(i, alpha)]; }
  /// Null when the entry is identically zero.
  const Expr& c_expr(int gamma, int alpha, int beta) const {
    return c_[idx_mmm(gamma, alpha, beta)];
  }
  bool c_all_zero() const { return c_all_zero_; }

  /// rho^i_alpha at base entries xs (any scalar shape).
  Scalar rho_at(int i, int alpha, std::span<const Scalar> xs) const;
  /// C^gamma_{alpha beta} at base entries xs.
  Scalar c_at(int gamma, int alpha, int beta, std::span<const Scalar> xs) const;

private:
  std::size_t idx_nm(int i, int a) const { return std::size_t(i) * std::size_t(m_) + std::size_t(a); }
  std::size_t idx_mmm(int g, int a, int b) const {
    return (std::size_t(g) * std::size_t(m_) + std::size_t(a)) * std::size_t(m_) + std::size_t(b);
  }

  std::string name_;
  int n_, m_;
  std::vector<Expr> rho_;           // n*m, never null
  std::vector<Expr> c_;             // m*m*m, null = zero
  std::vector<BoundExpr> rho_bound_;
  std::vector<BoundExpr> c_bound_;  // only for non-null entries, parallel flags
  std::vector<int> c_bound_index_;  // -1 for zero entries
  bool c_all_zero_ = true;
};

using AlgebroidPtr = std::shared_ptr<const LieAlgebroid>;

/// Sampling recipe for structure and identity checks. box[i] bounds base
/// coordinate x_{i+1}; fiber entries for jet sampling use fiber_box.
struct SamplePlan {
  int count = 100;
  std::vector<std::array<double, 2>> box;  // size n; defaults to [-1,1]^n
  std::array<double, 2> fiber_box{-1.0, 1.0};
  std::uint64_t seed = 1;
};

std::vector<double> sample_base_point(const LieAlgebroid& A, const SamplePlan& plan, Rng& rng);

struct IdentityResidual {
  std::string identity;
  double max_residual = 0.0;
  std::vector<double> worst_point;
};

struct StructureReport {
  std::vector<IdentityResidual> identities;
  double tol = 0.0;
  bool passed = false;
  double residual(const std::string& identity) const;
};

/// Verifies antisymmetry of C, anchor/bracket compatibility and the Jacobi
/// identity at sampled base points. The Jacobi cyclic sum runs over all
/// index triples including repeated indices; with antisymmetry intact the
/// repeated-index triples vanish identically, without it they flag the
/// defect.
StructureReport check_structure(const LieAlgebroid& A, const SamplePlan& plan, double tol);

// ---- catalog -------------------------------------------------------------

/// (gamma, alpha, beta, value), 0-based, one orientation per pair.
struct ConstantEntry {
  int gamma, alpha, beta;
  double value;
};

AlgebroidPtr make_tangent(int n);
AlgebroidPtr make_lie_algebra(int m, const std::vector<ConstantEntry>& constants,
                              const std::string& name = "lie_algebra");
/// Anchor given as expressions in x1..xn together with the bracket data the
/// basis satisfies; check_structure validates their compatibility.
AlgebroidPtr make_quasi_velocity(int n, const std::vector<std::vector<std::string>>& rho_exprs,
                                 const std::vector<CEntry>& entries,
                                 const std::string& name = "quasi_velocity");
/// Action algebroid M x g: anchor column alpha is the infinitesimal
/// generator of basis element e_alpha, as expressions in x1..xn.
AlgebroidPtr make_action(int n, int m, const std::vector<ConstantEntry>& constants,
                         const std::vector<std::vector<std::string>>& generator_exprs,
                         const std::string& name = "action");
/// Trivial Atiyah algebroid TM + g over an n-dimensional base with a rank
/// m_g Lie algebra block; total rank n + m_g.
AlgebroidPtr make_atiyah_trivial(int n, int m_g, const std::vector<ConstantEntry>& constants,
                                 const std::string& name = "atiyah_trivial");

/// so(3) structure constants: [e_alpha, e_beta] = sum_gamma eps_{alpha beta gamma} e_gamma.
std::vector<ConstantEntry> so3_constants();
/// Heisenberg algebra h3: [e_1, e_2] = e_3.
std::vector<ConstantEntry> heisenberg_constants();

} // namespace liejet

#endif
