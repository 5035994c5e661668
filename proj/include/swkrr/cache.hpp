#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "swkrr/sliced.hpp"

namespace swkrr {

/// Sliced-feature cache file layout, all little-endian:
///   bytes 0-3   "SWF1"
///   bytes 4-15  M, N, r as u32
///   bytes 16-23 basis seed as u64
///   bytes 24-27 feature count as u32
///   bytes 28-31 reserved (zero)
/// followed by count row-major M x N blocks of f64.
struct FeatureCacheHeader {
  std::uint32_t M = 0, N = 0, r = 0;
  std::uint64_t seed = 0;
  std::uint32_t count = 0;
};

std::string feature_cache_path(const std::string& dir, const std::string& dataset_id, std::uint64_t seed,
                               std::uint32_t M, std::uint32_t N);

void write_feature_cache(const std::string& path, const std::vector<SlicedFeatured>& features, const SliceBasisd& basis);

FeatureCacheHeader read_feature_cache_header(const std::string& path);

/// Loads features and binds them to `basis`; the header must agree with the basis shape and seed.
std::vector<SlicedFeatured> read_feature_cache(const std::string& path, const SliceBasisd& basis);

/// Gram cache layout: "SWG1", rows u32, cols u32, reserved u32, seed u64, reserved u64,
/// then rows x cols row-major f64.
void write_gram_cache(const std::string& path, const Eigen::MatrixXd& gram, std::uint64_t seed);

Eigen::MatrixXd read_gram_cache(const std::string& path, std::uint64_t* seed = nullptr);

}  // namespace swkrr
