#include "flock/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "flock/errors.hpp"
#include "flock/rng.hpp"

namespace flock {

AdjacencyMatrix adjacency(const AgentVector& x, double K, double alpha) {
  if (!(K > 0.0)) throw std::invalid_argument("adjacency: K must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("adjacency: alpha must be nonnegative");
  const int k = static_cast<int>(x.size());
  if (k < 2) throw std::invalid_argument("adjacency: need at least two agents");

  AdjacencyMatrix A;
  A.K = K;
  A.alpha = alpha;
  A.m = SquareMatrix(k);
  for (int i = 0; i < k; ++i) {
    A.m(i, i) = K;
    for (int j = i + 1; j < k; ++j) {
      const double w = K / std::pow(1.0 + norm(x[i] - x[j]), alpha);
      A.m(i, j) = w;
      A.m(j, i) = w;
    }
  }
  return A;
}

LaplacianMatrix laplacian(const AdjacencyMatrix& A) {
  const int k = A.size();
  double amax = 0.0;
  for (double v : A.m.data) amax = std::max(amax, std::fabs(v));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (std::fabs(A.m(i, j) - A.m(j, i)) > 1e-12 * std::max(1.0, amax))
        throw std::invalid_argument("laplacian: adjacency matrix is not symmetric");

  LaplacianMatrix L;
  L.m = SquareMatrix(k);
  for (int i = 0; i < k; ++i) {
    double d = 0.0;
    for (int j = 0; j < k; ++j) d += A.m(i, j);
    for (int j = 0; j < k; ++j) L.m(i, j) = (i == j ? d : 0.0) - A.m(i, j);
  }
  return L;
}

AgentVector apply_laplacian(const LaplacianMatrix& L, const AgentVector& v) {
  const int k = L.size();
  if (static_cast<int>(v.size()) != k)
    throw std::invalid_argument("apply_laplacian: dimension mismatch");
  AgentVector r(v.size());
  for (int i = 0; i < k; ++i) {
    Vec3 acc;
    for (int j = 0; j < k; ++j) acc += L.m(i, j) * v[j];
    r[i] = acc;
  }
  return r;
}

namespace {

double frobenius(const SquareMatrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

double offdiag_mass(const SquareMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

std::vector<double> symmetric_eigenvalues(SquareMatrix a) {
  const int n = a.n;
  if (n == 0) return {};
  if (n == 1) return {a(0, 0)};

  const double fro = frobenius(a);
  const double tol = 1e-12 * std::max(fro, 1e-300);
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag_mass(a) < tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = arp - s * (arq + tau * arp);
          a(p, r) = a(r, p);
          a(r, q) = arq + s * (arp - tau * arq);
          a(q, r) = a(r, q);
        }
      }
    }
    if (sweep == max_sweeps - 1) {
      std::ostringstream msg;
      msg << "symmetric_eigenvalues: Jacobi failed to converge after " << max_sweeps
          << " sweeps; off-diagonal mass " << offdiag_mass(a) << " vs tolerance " << tol;
      throw numerical_error(msg.str());
    }
  }

  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double fiedler_number(const LaplacianMatrix& L) {
  const std::vector<double> ev = symmetric_eigenvalues(L.m);
  if (ev.size() < 2) throw std::invalid_argument("fiedler_number: need k >= 2");
  double phi = ev[1];
  if (phi < 0.0) phi = 0.0;
  return phi;
}

double fiedler_lower_bound(const AdjacencyMatrix& A) {
  const int k = A.size();
  double mu = A.m(0, 1);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) mu = std::min(mu, A.m(i, j));
  return k * mu;
}

double laplacian_norm_bound(int k, double K) {
  if (k < 2) throw std::invalid_argument("laplacian_norm_bound: need k >= 2");
  if (!(K > 0.0)) throw std::invalid_argument("laplacian_norm_bound: K must be positive");
  return 2.0 * (k - 1) * std::sqrt(static_cast<double>(k)) * K;
}

double spectral_norm(const SquareMatrix& a, std::uint64_t seed) {
  const int n = a.n;
  if (n == 0) return 0.0;
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& vi : v) vi = rng.normal();

  auto normalize = [](std::vector<double>& u) {
    double s = 0.0;
    for (double ui : u) s += ui * ui;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& ui : u) ui /= s;
    return s;
  };
  normalize(v);

  std::vector<double> w(static_cast<std::size_t>(n));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += a(i, j) * v[static_cast<std::size_t>(j)];
      w[static_cast<std::size_t>(i)] = s;
    }
    const double next = normalize(w);
    std::swap(v, w);
    if (it > 0 && std::fabs(next - lambda) <= 1e-10 * std::max(1.0, std::fabs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace flock
