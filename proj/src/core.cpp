#include "flock/core.hpp"

#include <algorithm>
#include <cmath>

#include "flock/errors.hpp"

namespace flock {

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 FlockState::mean_velocity() const { return mean(velocities); }

Vec3 mean(const AgentVector& w) {
  if (w.empty()) throw std::invalid_argument("mean: empty agent vector");
  Vec3 m;
  for (const Vec3& wi : w) m += wi;
  return m * (1.0 / static_cast<double>(w.size()));
}

AgentVector project_perp(const AgentVector& w) {
  const Vec3 m = mean(w);
  AgentVector r(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) r[i] = w[i] - m;
  return r;
}

double norm(const AgentVector& w) {
  double s = 0.0;
  for (const Vec3& wi : w) s += dot(wi, wi);
  return std::sqrt(s);
}

double dot(const AgentVector& a, const AgentVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += dot(a[i], b[i]);
  return s;
}

double dissimilarity(const AgentVector& w) {
  const Vec3 m = mean(w);
  double s = 0.0;
  for (const Vec3& wi : w) {
    const Vec3 d = wi - m;
    s += dot(d, d);
  }
  return std::sqrt(s);
}

double diameter(const AgentVector& x) {
  if (x.size() < 2) throw std::invalid_argument("diameter: need at least two agents");
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      best = std::max(best, norm(x[i] - x[j]));
  return best;
}

bool is_nearly_aligned(const AgentVector& v, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("is_nearly_aligned: nu must be positive");
  return dissimilarity(v) <= nu;
}

bool all_finite(const AgentVector& w) {
  for (const Vec3& wi : w)
    if (!std::isfinite(wi.x) || !std::isfinite(wi.y) || !std::isfinite(wi.z)) return false;
  return true;
}

AgentVector operator+(const AgentVector& a, const AgentVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("AgentVector +: size mismatch");
  AgentVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

AgentVector operator-(const AgentVector& a, const AgentVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("AgentVector -: size mismatch");
  AgentVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

AgentVector operator*(double s, const AgentVector& a) {
  AgentVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

}  // namespace flock
