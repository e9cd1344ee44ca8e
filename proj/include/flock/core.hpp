#pragma once

#include <vector>

namespace flock {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }

double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

// A point of the flock configuration space: one 3-vector per agent.
using AgentVector = std::vector<Vec3>;

struct FlockState {
  double time = 0.0;
  AgentVector positions;
  AgentVector velocities;

  Vec3 mean_velocity() const;
};

/// Componentwise average (1/k) sum_i w_i. Throws on an empty vector.
Vec3 mean(const AgentVector& w);

/// Projection onto the subspace of zero-mean configurations:
/// (w_1 - m, ..., w_k - m) with m = mean(w).
AgentVector project_perp(const AgentVector& w);

/// Euclidean norm of w seen as a flat 3k-vector.
double norm(const AgentVector& w);

double dot(const AgentVector& a, const AgentVector& b);

/// Norm of the zero-mean projection. Measures how far the agents are
/// from all sharing one common vector (dispersion for positions).
double dissimilarity(const AgentVector& w);

/// max_{i != j} ||x_i - x_j||; requires k >= 2. Always bounded by
/// sqrt(2) * dissimilarity(x).
double diameter(const AgentVector& x);

/// True iff dissimilarity(v) <= nu (inclusive). Requires nu > 0.
bool is_nearly_aligned(const AgentVector& v, double nu);

bool all_finite(const AgentVector& w);

AgentVector operator+(const AgentVector& a, const AgentVector& b);
AgentVector operator-(const AgentVector& a, const AgentVector& b);
AgentVector operator*(double s, const AgentVector& a);

}  // namespace flock
