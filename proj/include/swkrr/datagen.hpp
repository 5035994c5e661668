#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "swkrr/measures.hpp"
#include "swkrr/rng.hpp"

namespace swkrr {

/// Gaussian mixture with uniform component weights 1/p.
struct GmmTask {
  int num_components = 1;
  Eigen::MatrixXd means;                     // p x r
  std::vector<Eigen::MatrixXd> covariances;  // p matrices, r x r, SPD

  Eigen::Index dim() const noexcept { return means.cols(); }
};

/// p ~ U{1..C}; mu_j ~ U([-5, 5]^r); Sigma_j = a_j A_j A_j^T + B_j with a_j ~ U[1, 4],
/// A_j entries ~ U[-1, 1], B_j diagonal with entries ~ U[0, 1].
GmmTask sample_gmm_task(int C, int r, Rng& rng);

/// n i.i.d. mixture draws, one per row.
Eigen::MatrixXd sample_points(const GmmTask& task, int n, Rng& rng);

struct LabeledBag {
  EmpiricalMeasured measure;
  int label;
};

/// T independent mode-counting bags. Bag t is drawn from its own stream derived from (seed, t).
std::vector<LabeledBag> make_mode_dataset(int T, int n, int C, int r, std::uint64_t seed);

struct ModeDatasetHeader {
  std::uint32_t T = 0, n = 0, C = 0, r = 0;
  std::uint64_t seed = 0;
};

/// Binary dump: 32-byte header ("GMD1", T, n, C, r as u32, seed as u64, 4 reserved bytes),
/// then T*n*r little-endian f64 atoms (bag-major, row-major), then T little-endian i32 labels.
void write_mode_dataset(const std::string& path, const std::vector<LabeledBag>& bags, const ModeDatasetHeader& header);

std::vector<LabeledBag> read_mode_dataset(const std::string& path, ModeDatasetHeader* header = nullptr);

}  // namespace swkrr
