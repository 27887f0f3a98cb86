#pragma once

// Splittable seed streams.
//
// Every random draw in the library is made from a std::mt19937_64 whose seed
// is derived from a (root, stream-id, stream-id, ...) path:
//
//   key(root)          = splitmix64(root)
//   key(parent / id)   = splitmix64(key(parent) ^ splitmix64(id + 0x632be59bd9b4e019))
//
// so a module that owns a child stream draws the same numbers no matter what
// other modules consume, and batching or reordering work never changes which
// numbers a given trial sees.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace olvm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Well-known stream ids. Children of the root seed of a run.
namespace streams {
inline constexpr std::uint64_t kFactors = 1;
inline constexpr std::uint64_t kLabels = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kSources = 4;
inline constexpr std::uint64_t kTrialInit = 10;
inline constexpr std::uint64_t kSpectralRestarts = 20;
inline constexpr std::uint64_t kExperimentRun = 30;
}  // namespace streams

class SeedStream {
 public:
  explicit SeedStream(std::uint64_t root) : key_(splitmix64(root)) {}

  SeedStream child(std::uint64_t id) const {
    SeedStream s(0);
    s.key_ = splitmix64(key_ ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    return s;
  }

  std::uint64_t key() const { return key_; }
  std::mt19937_64 engine() const { return std::mt19937_64(key_); }

 private:
  std::uint64_t key_;
};

inline Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index d,
                                       double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = normal(rng);
  return v;
}

/// Uniform draw from the unit sphere S^{d-1}.
inline Eigen::VectorXd unit_sphere_vector(std::mt19937_64& rng, Eigen::Index d) {
  for (;;) {
    Eigen::VectorXd v = gaussian_vector(rng, d);
    const double norm = v.norm();
    if (norm > 0.0) return v / norm;
  }
}

/// d x k matrix with i.i.d. uniform unit-sphere columns.
inline Eigen::MatrixXd unit_sphere_columns(std::mt19937_64& rng, Eigen::Index d,
                                           Eigen::Index k) {
  Eigen::MatrixXd m(d, k);
  for (Eigen::Index j = 0; j < k; ++j) m.col(j) = unit_sphere_vector(rng, d);
  return m;
}

/// Haar-distributed d x k matrix with orthonormal columns (k <= d).
inline Eigen::MatrixXd random_orthonormal_columns(std::mt19937_64& rng,
                                                  Eigen::Index d, Eigen::Index k) {
  Eigen::MatrixXd g(d, k);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  // Fix the sign ambiguity of QR so the law is Haar.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace olvm
