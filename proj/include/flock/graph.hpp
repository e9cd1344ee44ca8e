#pragma once

#include <cstdint>
#include <vector>

#include "flock/core.hpp"

namespace flock {

// Dense square matrix, row-major. Flocks are small (k up to a few hundred),
// so O(k^3) dense routines are fine.
struct SquareMatrix {
  int n = 0;
  std::vector<double> data;

  SquareMatrix() = default;
  explicit SquareMatrix(int n_) : n(n_), data(static_cast<std::size_t>(n_) * n_, 0.0) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
};

// Distance-decaying influence weights a_ij = K / (1 + ||x_i - x_j||)^alpha.
// The diagonal is stored as K but the Laplacian ignores it.
struct AdjacencyMatrix {
  double K = 0.0;
  double alpha = 0.0;
  SquareMatrix m;

  int size() const { return m.n; }
};

struct LaplacianMatrix {
  SquareMatrix m;

  int size() const { return m.n; }
};

/// Builds the adjacency matrix for positions x. Requires K > 0, alpha >= 0,
/// and at least two agents.
AdjacencyMatrix adjacency(const AgentVector& x, double K, double alpha);

/// L = D - A with d_i the i-th row sum of A. Rejects matrices that are
/// asymmetric beyond 1e-12 relative.
LaplacianMatrix laplacian(const AdjacencyMatrix& A);

/// Applies L blockwise: component i is sum_j L_ij * v_j.
AgentVector apply_laplacian(const LaplacianMatrix& L, const AgentVector& v);

/// Second-smallest eigenvalue of L (cyclic Jacobi). Tiny negative results
/// from roundoff are clamped to 0.
double fiedler_number(const LaplacianMatrix& L);

/// k * min_{i != j} a_ij, a guaranteed lower bound on the Fiedler number.
double fiedler_lower_bound(const AdjacencyMatrix& A);

/// 2 (k-1) sqrt(k) K, an upper bound on ||L_x|| valid for every
/// configuration.
double laplacian_norm_bound(int k, double K);

/// All eigenvalues of a symmetric matrix, ascending. Cyclic Jacobi sweeps;
/// converged when the off-diagonal Frobenius mass drops below 1e-12 of the
/// matrix norm.
std::vector<double> symmetric_eigenvalues(SquareMatrix a);

/// Spectral norm by power iteration (200 iterations / 1e-10 relative
/// tolerance, seeded start vector).
double spectral_norm(const SquareMatrix& a, std::uint64_t seed = 20240817);

}  // namespace flock
