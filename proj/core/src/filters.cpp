#include "ecgraph/filters.hpp"

#include "ecgraph/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace ecgraph {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// P_k = (c1 * x + c0) * P_{k-1} - c2 * P_{k-2}, valid for k >= 2.
struct JacobiStep {
  double c1;
  double c0;
  double c2;
};

JacobiStep jacobi_step(double a, double b, int k) {
  const double kk = k;
  const double s = 2.0 * kk + a + b;
  const double denom = 2.0 * kk * (kk + a + b) * (s - 2.0);
  return {
      (s - 1.0) * s * (s - 2.0) / denom,
      (s - 1.0) * (a * a - b * b) / denom,
      (kk + a - 1.0) * (kk + b - 1.0) * s / (kk * (kk + a + b) * (s - 2.0)),
  };
}

void require_order(int order) {
  if (order < 0) throw ValidationError("polynomial order must be non-negative");
}

// acc += v scaled by this row's coefficients (broadcast when single-channel).
void accumulate(Eigen::MatrixXd& acc, const Eigen::MatrixXd& v, const Eigen::MatrixXd& coeffs,
                Index k, double scale = 1.0) {
  if (coeffs.cols() == 1) {
    acc += (scale * coeffs(k, 0)) * v;
  } else {
    acc += v * (scale * coeffs.row(k).transpose()).asDiagonal();
  }
}

Eigen::MatrixXd project_features(const FilterModel& model, Index n, const Eigen::MatrixXd& features,
                                 const Eigen::MatrixXd& weights) {
  if (features.rows() != n) {
    throw ValidationError("feature matrix has " + std::to_string(features.rows()) +
                          " rows, expected " + std::to_string(n));
  }
  if (weights.rows() != features.cols()) {
    throw ValidationError("weight matrix rows must equal the feature width");
  }
  if (model.channels() != 1 && model.channels() != weights.cols()) {
    throw ValidationError("filter has " + std::to_string(model.channels()) +
                          " channels but the output width is " + std::to_string(weights.cols()));
  }
  return features * weights;
}

}  // namespace

std::string basis_name(const Basis& basis) {
  return std::visit(Overloaded{[](const GprMonomial&) { return std::string("gpr"); },
                               [](const Bernstein&) { return std::string("bern"); },
                               [](const Jacobi&) { return std::string("jacobi"); }},
                    basis);
}

Basis parse_basis(std::string_view name, double jacobi_a, double jacobi_b) {
  Basis basis;
  if (name == "gpr") {
    basis = GprMonomial{};
  } else if (name == "bern" || name == "bernstein") {
    basis = Bernstein{};
  } else if (name == "jacobi") {
    basis = Jacobi{jacobi_a, jacobi_b};
  } else {
    throw ValidationError("unknown basis '" + std::string(name) + "' (expected gpr, bern or jacobi)");
  }
  validate_basis(basis);
  return basis;
}

void validate_basis(const Basis& basis) {
  if (const auto* jacobi = std::get_if<Jacobi>(&basis)) {
    if (!(jacobi->a > -1.0 && jacobi->b > -1.0)) {
      throw ValidationError("Jacobi parameters must satisfy a > -1 and b > -1");
    }
  }
}

Eigen::VectorXd jacobi_polynomials(double a, double b, double x, int order) {
  validate_basis(Jacobi{a, b});
  require_order(order);
  Eigen::VectorXd p(order + 1);
  p(0) = 1.0;
  if (order >= 1) p(1) = 0.5 * a - 0.5 * b + (0.5 * a + 0.5 * b + 1.0) * x;
  for (int k = 2; k <= order; ++k) {
    const JacobiStep step = jacobi_step(a, b, k);
    p(k) = (step.c1 * x + step.c0) * p(k - 1) - step.c2 * p(k - 2);
  }
  return p;
}

Eigen::MatrixXd basis_matrix(const Basis& basis, std::span<const double> mu, int order) {
  validate_basis(basis);
  require_order(order);
  const auto n = static_cast<Index>(mu.size());
  for (const double m : mu) {
    if (!(m >= 0.0 && m <= 2.0)) {
      throw ValidationError("basis argument " + std::to_string(m) + " outside [0, 2]");
    }
  }
  Eigen::MatrixXd design(n, order + 1);
  std::visit(
      Overloaded{
          [&](const GprMonomial&) {
            for (Index i = 0; i < n; ++i) {
              const double x = 1.0 - mu[static_cast<std::size_t>(i)];
              double power = 1.0;
              for (int k = 0; k <= order; ++k) {
                design(i, k) = power;
                power *= x;
              }
            }
          },
          [&](const Bernstein&) {
            // Binomials built multiplicatively: C(K,k) = C(K,k-1) (K-k+1) / k.
            Eigen::VectorXd weight(order + 1);
            weight(0) = std::ldexp(1.0, -order);
            for (int k = 1; k <= order; ++k) weight(k) = weight(k - 1) * (order - k + 1) / k;
            for (Index i = 0; i < n; ++i) {
              const double x = mu[static_cast<std::size_t>(i)];
              for (int k = 0; k <= order; ++k) {
                design(i, k) = weight(k) * std::pow(2.0 - x, order - k) * std::pow(x, k);
              }
            }
          },
          [&](const Jacobi& j) {
            for (Index i = 0; i < n; ++i) {
              design.row(i) =
                  jacobi_polynomials(j.a, j.b, 1.0 - mu[static_cast<std::size_t>(i)], order)
                      .transpose();
            }
          },
      },
      basis);
  return design;
}

std::string_view target_name(TargetFilter kind) {
  switch (kind) {
    case TargetFilter::Low: return "low";
    case TargetFilter::High: return "high";
    case TargetFilter::Band: return "band";
    case TargetFilter::Reject: return "reject";
    case TargetFilter::Comb: return "comb";
  }
  return "unknown";
}

TargetFilter parse_target(std::string_view name) {
  for (const TargetFilter kind : kAllTargetFilters) {
    if (target_name(kind) == name) return kind;
  }
  throw ValidationError("unknown target filter '" + std::string(name) +
                        "' (expected low, high, band, reject or comb)");
}

double target_response(TargetFilter kind, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 2.0)) {
    throw ValidationError("target filter input " + std::to_string(lambda) + " outside [0, 2]");
  }
  switch (kind) {
    case TargetFilter::Low: return std::exp(-10.0 * lambda * lambda);
    case TargetFilter::High: return 1.0 - std::exp(-10.0 * lambda * lambda);
    case TargetFilter::Band: return std::exp(-10.0 * (lambda - 1.0) * (lambda - 1.0));
    case TargetFilter::Reject: return 1.0 - std::exp(-10.0 * (lambda - 1.0) * (lambda - 1.0));
    case TargetFilter::Comb: return std::abs(std::sin(std::numbers::pi * lambda));
  }
  throw ValidationError("unknown target filter");
}

FilterModel::FilterModel(Basis basis, int order, Eigen::MatrixXd coeffs)
    : basis_(basis), order_(order), coeffs_(std::move(coeffs)) {
  validate_basis(basis_);
  require_order(order_);
  if (coeffs_.rows() != order_ + 1 || coeffs_.cols() < 1) {
    throw ValidationError("coefficient table must be (K+1) x C with C >= 1");
  }
  if (!coeffs_.allFinite()) throw ValidationError("coefficient table has non-finite entries");
}

Eigen::MatrixXd filter_response(const FilterModel& model, std::span<const double> mu) {
  return basis_matrix(model.basis(), mu, model.order()) * model.coeffs();
}

Eigen::MatrixXd apply_filter(const EigenSystem& eig, const FilterModel& model,
                             std::span<const double> mu, const Eigen::MatrixXd& features,
                             const Eigen::MatrixXd& weights) {
  const Index n = eig.size();
  if (static_cast<Index>(mu.size()) != n) {
    throw ValidationError("eigenvalue vector length does not match the eigensystem");
  }
  const Eigen::MatrixXd projected = project_features(model, n, features, weights);
  const Eigen::MatrixXd response = filter_response(model, mu);
  Eigen::MatrixXd spectral = eig.eigenvectors().transpose() * projected;
  if (response.cols() == 1) {
    spectral = response.col(0).asDiagonal() * spectral;
  } else {
    spectral.array() *= response.array();
  }
  return eig.eigenvectors() * spectral;
}

Eigen::MatrixXd apply_filter_matrix_form(const Eigen::MatrixXd& op, const FilterModel& model,
                                         const Eigen::MatrixXd& features,
                                         const Eigen::MatrixXd& weights) {
  const Index n = op.rows();
  if (op.cols() != n) throw ValidationError("filter operator must be square");
  const Eigen::MatrixXd projected = project_features(model, n, features, weights);
  const Eigen::MatrixXd& coeffs = model.coeffs();
  const int order = model.order();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, projected.cols());

  std::visit(
      Overloaded{
          [&](const GprMonomial&) {
            // v_k = (I - op)^k XW
            Eigen::MatrixXd v = projected;
            accumulate(acc, v, coeffs, 0);
            for (int k = 1; k <= order; ++k) {
              v -= op * v;
              accumulate(acc, v, coeffs, k);
            }
          },
          [&](const Bernstein&) {
            // (2I - op)^{K-k} op^k XW; quadratic in K like the original filter.
            double weight = std::ldexp(1.0, -order);
            Eigen::MatrixXd power = projected;
            for (int k = 0; k <= order; ++k) {
              if (k > 0) {
                power = op * power;
                weight = weight * (order - k + 1) / k;
              }
              Eigen::MatrixXd term = power;
              for (int r = 0; r < order - k; ++r) term = 2.0 * term - op * term;
              accumulate(acc, term, coeffs, k, weight);
            }
          },
          [&](const Jacobi& j) {
            // Recurrence with x replaced by the operator I - op.
            Eigen::MatrixXd prev = projected;
            accumulate(acc, prev, coeffs, 0);
            if (order == 0) return;
            Eigen::MatrixXd cur = (0.5 * j.a - 0.5 * j.b) * projected +
                                  (0.5 * j.a + 0.5 * j.b + 1.0) * (projected - op * projected);
            accumulate(acc, cur, coeffs, 1);
            for (int k = 2; k <= order; ++k) {
              const JacobiStep step = jacobi_step(j.a, j.b, k);
              Eigen::MatrixXd next = step.c1 * (cur - op * cur) + step.c0 * cur - step.c2 * prev;
              prev = std::move(cur);
              cur = std::move(next);
              accumulate(acc, cur, coeffs, k);
            }
          },
      },
      model.basis());
  return acc;
}

std::string to_json(const FilterModel& model) {
  nlohmann::json j;
  j["basis"] = basis_name(model.basis());
  if (const auto* jacobi = std::get_if<Jacobi>(&model.basis())) {
    j["a"] = jacobi->a;
    j["b"] = jacobi->b;
  } else {
    j["a"] = nullptr;
    j["b"] = nullptr;
  }
  j["K"] = model.order();
  j["channels"] = model.channels();
  auto flat = nlohmann::json::array();
  for (Index r = 0; r < model.coeffs().rows(); ++r) {
    for (Index c = 0; c < model.coeffs().cols(); ++c) flat.push_back(model.coeffs()(r, c));
  }
  j["coeffs"] = std::move(flat);
  return j.dump();
}

FilterModel filter_model_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const auto name = j.at("basis").get<std::string>();
    const double a = j.contains("a") && !j["a"].is_null() ? j["a"].get<double>() : 1.0;
    const double b = j.contains("b") && !j["b"].is_null() ? j["b"].get<double>() : 1.0;
    const int order = j.at("K").get<int>();
    if (order < 0) throw ValidationError("K must be non-negative");
    const auto flat = j.at("coeffs").get<std::vector<double>>();
    const auto rows = static_cast<std::size_t>(order) + 1;
    if (flat.empty() || flat.size() % rows != 0) {
      throw ValidationError("coeffs length must be a positive multiple of K+1");
    }
    const auto cols = static_cast<Index>(flat.size() / rows);
    if (j.contains("channels") && j["channels"].get<Index>() != cols) {
      throw ValidationError("channels field disagrees with coeffs length");
    }
    Eigen::MatrixXd coeffs(static_cast<Index>(rows), cols);
    for (Index r = 0; r < coeffs.rows(); ++r) {
      for (Index c = 0; c < cols; ++c) coeffs(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
    return FilterModel(parse_basis(name, a, b), order, std::move(coeffs));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid filter model JSON: ") + e.what());
  }
}

}  // namespace ecgraph
