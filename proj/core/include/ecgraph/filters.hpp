#pragma once

#include "ecgraph/spectral.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace ecgraph {

// Monomials of the adjacency-convention argument: (1 - mu)^k.
struct GprMonomial {
  friend bool operator==(const GprMonomial&, const GprMonomial&) = default;
};

// 2^{-K} C(K,k) (2 - mu)^{K-k} mu^k.
struct Bernstein {
  friend bool operator==(const Bernstein&, const Bernstein&) = default;
};

// Jacobi polynomials P_k^{a,b}(1 - mu); requires a, b > -1.
struct Jacobi {
  double a = 1.0;
  double b = 1.0;
  friend bool operator==(const Jacobi&, const Jacobi&) = default;
};

using Basis = std::variant<GprMonomial, Bernstein, Jacobi>;

/// Short name used in CLI flags and reports: "gpr", "bern" or "jacobi".
std::string basis_name(const Basis& basis);
Basis parse_basis(std::string_view name, double jacobi_a = 1.0, double jacobi_b = 1.0);
void validate_basis(const Basis& basis);

/// Values P_0(x) .. P_order(x) of the Jacobi three-term recurrence.
Eigen::VectorXd jacobi_polynomials(double a, double b, double x, int order);

/// n x (order + 1) design matrix of the basis evaluated at each mu_i. The
/// basis-specific argument transform (1 - mu for GPR and Jacobi, mu itself for
/// Bernstein) is applied here, not by callers.
Eigen::MatrixXd basis_matrix(const Basis& basis, std::span<const double> mu, int order);

enum class TargetFilter { Low, High, Band, Reject, Comb };

inline constexpr std::array<TargetFilter, 5> kAllTargetFilters = {
    TargetFilter::Low, TargetFilter::High, TargetFilter::Band, TargetFilter::Reject,
    TargetFilter::Comb};

std::string_view target_name(TargetFilter kind);
TargetFilter parse_target(std::string_view name);

/// Ground-truth gain g(lambda) for lambda in [0, 2].
double target_response(TargetFilter kind, double lambda);

/// Polynomial filter: basis, order K and a (K+1) x C coefficient table with
/// one column per output channel. A single column is shared by all channels.
class FilterModel {
 public:
  FilterModel(Basis basis, int order, Eigen::MatrixXd coeffs);

  const Basis& basis() const noexcept { return basis_; }
  int order() const noexcept { return order_; }
  const Eigen::MatrixXd& coeffs() const noexcept { return coeffs_; }
  Index channels() const noexcept { return coeffs_.cols(); }

  // Bernstein filters trained with projection keep every coefficient >= 0.
  bool coefficients_nonnegative() const { return (coeffs_.array() >= 0.0).all(); }

 private:
  Basis basis_;
  int order_;
  Eigen::MatrixXd coeffs_;
};

/// n x C per-eigenvalue responses h_l(mu_i).
Eigen::MatrixXd filter_response(const FilterModel& model, std::span<const double> mu);

/// Z[:, l] = U diag(h_l(mu)) U^T (X W)[:, l], evaluated through the
/// eigenvalues. A single-channel model is broadcast across all columns of XW.
Eigen::MatrixXd apply_filter(const EigenSystem& eig, const FilterModel& model,
                             std::span<const double> mu, const Eigen::MatrixXd& features,
                             const Eigen::MatrixXd& weights);

/// Same filter evaluated as a matrix polynomial in `op` (the Laplacian or the
/// corrected operator) using repeated matrix products against XW; H^k is
/// never formed.
Eigen::MatrixXd apply_filter_matrix_form(const Eigen::MatrixXd& op, const FilterModel& model,
                                         const Eigen::MatrixXd& features,
                                         const Eigen::MatrixXd& weights);

/// {"basis": ..., "a": ..., "b": ..., "K": ..., "coeffs": [row-major]}
std::string to_json(const FilterModel& model);
FilterModel filter_model_from_json(std::string_view text);

}  // namespace ecgraph
