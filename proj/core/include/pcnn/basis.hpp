// SPDX-License-Identifier: MIT
//
// Moment-based orthonormal polynomial bases: univariate construction from raw
// moments, total-degree multi-index sets, and multi-dimensional evaluation.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "pcnn/rv.hpp"

namespace pcnn {

/// Orthogonal polynomials of one standardized variable up to a given degree.
///
/// Row j of `coeffs` holds the coefficients a_0..a_j of the degree-j
/// polynomial (higher entries zero). Construction solves, for each degree j,
/// the (j+1)x(j+1) linear system whose first j rows are consecutive raw-moment
/// windows (row r: mu^(r)..mu^(r+j), right-hand side 0) and whose last row
/// pins the leading coefficient to 1, so the raw solution is monic. The
/// stored rows are divided by the polynomial's norm under the moment measure;
/// `norms` keeps those divisors so the monic form stays recoverable.
struct UnivariateBasis {
  int degree = 0;
  Eigen::MatrixXd coeffs;  // (degree+1) x (degree+1), lower triangular
  Eigen::VectorXd norms;   // pre-normalization L2 norms
  bool normalized = false;
  bool mgs_applied = false;  // sample-Gram re-orthonormalization pass ran

  /// Value of the degree-j polynomial at xi (Horner).
  double eval(int j, double xi) const;

  /// Values of all degrees 0..degree at xi; out.size() == degree+1.
  void eval_all(double xi, std::span<double> out) const;
};

/// Inner product <phi_j, phi_k> under the moment measure:
/// sum_{m,m'} a_m^(j) a_m'^(k) mu^(m+m'). Moments must reach order j+k.
double moment_inner_product(const UnivariateBasis& basis, int j, int k,
                            const MomentVector& moments);

/// Build the orthonormal univariate family of the given degree from raw
/// moments (orders 0..2*degree required). Throws ConditioningError carrying
/// the failing degree when the moment matrix has reciprocal condition
/// estimate below 1e-13 or a non-positive norm.
UnivariateBasis apc_univariate(const MomentVector& moments, int degree);

/// One pass of modified Gram-Schmidt against the empirical Gram matrix of the
/// given standardized samples. Used for degree >= 7 with empirical moments,
/// where the moment-matrix route loses orthogonality.
void reorthonormalize(UnivariateBasis& basis, std::span<const double> samples);

/// Copy of the family limited to the given (smaller or equal) degree.
UnivariateBasis truncated(const UnivariateBasis& basis, int degree);

/// Number of multi-indices of d dimensions with total degree <= p,
/// C(d+p, p). Throws CapacityError on overflow.
std::size_t basis_size(int d, int p);

/// All d-tuples of nonnegative integers with total degree <= p, in graded
/// order: ascending total degree, ties broken by descending lexicographic
/// comparison of the tuples. Row 0 is always all zeros.
struct MultiIndexSet {
  int dims = 0;
  int order = 0;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> indices;  // M x d

  std::size_t size() const { return static_cast<std::size_t>(indices.rows()); }
};

MultiIndexSet multi_indices(int d, int p);

/// Where the basis-defining moments came from, kept with the basis so saved
/// models are self-describing.
struct MomentProvenance {
  MomentSource source = MomentSource::Empirical;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
};

using RowMajorMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Multi-dimensional orthonormal basis: one univariate family per dimension
/// plus a multi-index set. Immutable after construction and safe to share
/// across threads.
struct OrthonormalBasis {
  std::vector<UnivariateBasis> univariate;
  MultiIndexSet index_set;
  MomentProvenance provenance;

  int dims() const { return index_set.dims; }
  int order() const { return index_set.order; }
  std::size_t size() const { return index_set.size(); }

  /// Evaluate all M basis functions at one point. Univariate values are
  /// computed once per (dimension, degree) and reused across products.
  void eval(const Eigen::VectorXd& xi, std::span<double> out) const;
  Eigen::VectorXd eval(const Eigen::VectorXd& xi) const;

  /// n x M design matrix for a batch of points (rows of XI). Row-major so
  /// each sample's basis row is contiguous.
  RowMajorMatrixXd eval_matrix(const Eigen::MatrixXd& XI) const;
};

/// Assemble a basis from per-dimension families and a total-degree bound.
/// Every family must reach at least degree p.
OrthonormalBasis tensor_basis(std::vector<UnivariateBasis> univariate, int p,
                              MomentProvenance provenance = {});

/// Build per-dimension univariate families for the given variables at the
/// given degree. Empirical moments are taken column-wise from the
/// standardized pool; the analytic source uses closed forms (Normal/Uniform
/// only). With empirical moments and degree >= 7 the families get one
/// sample-Gram re-orthonormalization pass.
std::vector<UnivariateBasis> univariate_bases(
    std::span<const RandomVariableSpec> specs,
    const Eigen::MatrixXd& standardized_pool, int degree, MomentSource source);

}  // namespace pcnn
