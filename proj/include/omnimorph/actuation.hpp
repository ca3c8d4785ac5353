#pragma once

// Rank analysis of the wrench sensitivity [A(alpha) | dA/dalpha * u_w] and
// classification of the platform's actuation regime at an operating point.

#include "omnimorph/geometry.hpp"
#include "omnimorph/types.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace omnimorph {

enum class ActuationTag {
  Underactuated,          // wrench sensitivity rank <= 4
  ReducedManifold5,       // rank 5
  FullyActuated,          // rank 6 only with the tilt rate as an extra input
  FullyActuatedRedundant  // rank 6 from the eight speeds alone
};

struct ActuationClass {
  ActuationTag tag = ActuationTag::Underactuated;
  int rank = 0;
  Vec6 singular_values = Vec6::Zero();
};

inline const char* to_string(ActuationTag t) {
  switch (t) {
    case ActuationTag::Underactuated: return "underactuated";
    case ActuationTag::ReducedManifold5: return "reduced-manifold-5";
    case ActuationTag::FullyActuated: return "fully-actuated";
    case ActuationTag::FullyActuatedRedundant: return "fully-actuated-redundant";
  }
  return "?";
}

// [A(alpha) | dA/dalpha * u_w]: sensitivity of the body wrench to all nine
// inputs (eight squared speeds plus the tilt angle).
inline Mat69 full_allocation(const PlatformParams& params, const PropellerLayout& layout,
                             double alpha, const Vec8& u_w) {
  Mat69 F;
  F.leftCols<8>() = allocation_matrix(params, layout, alpha);
  F.col(8) = allocation_alpha_jacobian(params, layout, alpha, u_w);
  return F;
}

// Count of singular values above tol * sigma_max; 0 for the zero matrix.
inline int numerical_rank(const Eigen::MatrixXd& M, double tol = 1e-9) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("numerical_rank: tol must be in (0,1)");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * sv[0]) ++r;
  return r;
}

inline ActuationClass classify_actuation(const PlatformParams& params,
                                         const PropellerLayout& layout, double alpha,
                                         const Vec8& u_w, double tol = 1e-9) {
  if (!(tol > 0.0 && tol < 1.0))
    throw std::invalid_argument("classify_actuation: tol must be in (0,1)");
  const Mat69 F = full_allocation(params, layout, alpha, u_w);

  // Rank the speed map on its own spectrum, then ask whether the tilt
  // column leaves its range. Judging the column against its own length
  // keeps the result invariant to uniform speed scaling, which only
  // stretches that column without turning it.
  const Eigen::MatrixXd A = F.leftCols<8>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_a(A, Eigen::ComputeFullU);
  const auto& sv_a = svd_a.singularValues();
  int rank_a = 0;
  for (int i = 0; i < sv_a.size(); ++i)
    if (sv_a[0] > 0.0 && sv_a[i] > tol * sv_a[0]) ++rank_a;

  ActuationClass out;
  out.rank = rank_a;
  const Vec6 tilt_col = F.col(8);
  if (tilt_col.norm() > 0.0 && rank_a < 6) {
    const Eigen::MatrixXd Ur = svd_a.matrixU().leftCols(rank_a);
    const double resid = (tilt_col - Ur * (Ur.transpose() * tilt_col)).norm();
    if (resid > tol * tilt_col.norm()) ++out.rank;
  }

  const Eigen::MatrixXd Fd = F;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_f(Fd);
  out.singular_values = svd_f.singularValues();

  if (out.rank <= 4) {
    out.tag = ActuationTag::Underactuated;
  } else if (out.rank == 5) {
    out.tag = ActuationTag::ReducedManifold5;
  } else {
    out.tag = (rank_a == 6) ? ActuationTag::FullyActuatedRedundant
                            : ActuationTag::FullyActuated;
  }
  return out;
}

}  // namespace omnimorph
