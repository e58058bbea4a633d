#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "jetcalc/curvature.hpp"

namespace jetcalc::testing {

/// Partitions of m into parts of size at most k.
inline std::uint64_t partitions_bounded(int m, int k) {
  if (m == 0) return 1;
  if (m < 0 || k == 0) return 0;
  return partitions_bounded(m, k - 1) + partitions_bounded(m - k, k);
}

/// Hermitian part of a Gaussian random array.
inline CurvatureTensor random_tensor(std::mt19937_64& gen, int n, int r) {
  std::normal_distribution<double> g;
  std::vector<Complex> raw(static_cast<std::size_t>(n * n * r * r)), herm(raw.size());
  for (auto& x : raw) x = {g(gen), g(gen)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < r; ++l)
        for (int m = 0; m < r; ++m) {
          const auto a = static_cast<std::size_t>(((i * n + j) * r + l) * r + m);
          const auto b = static_cast<std::size_t>(((j * n + i) * r + m) * r + l);
          herm[a] = 0.5 * (raw[a] + std::conj(raw[b]));
        }
  return validate_tensor(n, r, herm);
}

inline Eigen::MatrixXcd random_unitary(std::mt19937_64& gen, int r) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = {g(gen), g(gen)};
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

/// Words w in {0..r-1}^l with content alpha.
inline std::vector<std::vector<int>> words_of(const std::vector<int>& alpha) {
  std::vector<int> w;
  for (std::size_t c = 0; c < alpha.size(); ++c) w.insert(w.end(), alpha[c], static_cast<int>(c));
  std::vector<std::vector<int>> out;
  do out.push_back(w);
  while (std::next_permutation(w.begin(), w.end()));
  return out;
}

inline double factorial_d(int n) { return std::tgamma(n + 1.0); }

/// Second-order coefficient of the l-fold tensor-power metric restricted to
/// unit symmetrized vectors sum_{w in words(alpha)} e_w / sqrt(l!/alpha!).
inline Complex tensor_power_oracle(const CurvatureTensor& c, int i, int j, const std::vector<int>& alpha,
                                   const std::vector<int>& beta) {
  const int l = std::accumulate(alpha.begin(), alpha.end(), 0);
  double na = 1.0, nb = 1.0;
  for (int e : alpha) na *= factorial_d(e);
  for (int e : beta) nb *= factorial_d(e);
  const double norm = std::sqrt(na * nb) / factorial_d(l);
  Complex acc = 0.0;
  for (const auto& w : words_of(alpha))
    for (const auto& v : words_of(beta))
      for (int pos = 0; pos < l; ++pos) {
        bool rest = true;
        for (int q = 0; q < l && rest; ++q)
          if (q != pos && w[q] != v[q]) rest = false;
        if (rest) acc += c(i, j, w[pos], v[pos]);
      }
  return norm * acc;
}

}  // namespace jetcalc::testing
