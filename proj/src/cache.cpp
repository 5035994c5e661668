#include "swkrr/cache.hpp"

#include <filesystem>
#include <fstream>

#include "swkrr/binary_io.hpp"
#include "swkrr/error.hpp"

namespace swkrr {

std::string feature_cache_path(const std::string& dir, const std::string& dataset_id, std::uint64_t seed,
                               std::uint32_t M, std::uint32_t N) {
  const std::string name = dataset_id + "_s" + std::to_string(seed) + "_M" + std::to_string(M) + "_N" +
                           std::to_string(N) + ".swf";
  return (std::filesystem::path(dir) / name).string();
}

void write_feature_cache(const std::string& path, const std::vector<SlicedFeatured>& features,
                         const SliceBasisd& basis) {
  const auto M = basis.num_directions();
  const auto N = basis.num_levels();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("write_feature_cache: cannot open " + path);
  out.write("SWF1", 4);
  binio::write_le(out, static_cast<std::uint32_t>(M));
  binio::write_le(out, static_cast<std::uint32_t>(N));
  binio::write_le(out, static_cast<std::uint32_t>(basis.dim()));
  binio::write_le(out, basis.seed());
  binio::write_le(out, static_cast<std::uint32_t>(features.size()));
  binio::write_le(out, std::uint32_t{0});
  for (const auto& f : features) {
    if (f.basis_id != basis.id()) throw ContractViolation("write_feature_cache: feature from a different basis");
    for (Eigen::Index m = 0; m < M; ++m) {
      for (Eigen::Index l = 0; l < N; ++l) binio::write_le(out, f.quantiles(m, l));
    }
  }
  if (!out) throw InvalidInput("write_feature_cache: write failed for " + path);
}

namespace {

FeatureCacheHeader read_header(std::ifstream& in) {
  binio::expect_magic(in, "SWF1", "feature cache");
  FeatureCacheHeader h;
  h.M = binio::read_le<std::uint32_t>(in, "feature cache");
  h.N = binio::read_le<std::uint32_t>(in, "feature cache");
  h.r = binio::read_le<std::uint32_t>(in, "feature cache");
  h.seed = binio::read_le<std::uint64_t>(in, "feature cache");
  h.count = binio::read_le<std::uint32_t>(in, "feature cache");
  binio::read_le<std::uint32_t>(in, "feature cache");
  return h;
}

}  // namespace

FeatureCacheHeader read_feature_cache_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("read_feature_cache: cannot open " + path);
  return read_header(in);
}

std::vector<SlicedFeatured> read_feature_cache(const std::string& path, const SliceBasisd& basis) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("read_feature_cache: cannot open " + path);
  const auto h = read_header(in);
  if (h.M != basis.num_directions() || h.N != basis.num_levels() || h.r != basis.dim() || h.seed != basis.seed()) {
    throw ContractViolation("read_feature_cache: " + path + " was written for a different slice basis");
  }
  std::vector<SlicedFeatured> features(h.count);
  for (auto& f : features) {
    f.quantiles.resize(h.M, h.N);
    f.basis_id = basis.id();
    for (std::uint32_t m = 0; m < h.M; ++m) {
      for (std::uint32_t l = 0; l < h.N; ++l) f.quantiles(m, l) = binio::read_le<double>(in, "feature cache");
    }
  }
  return features;
}

void write_gram_cache(const std::string& path, const Eigen::MatrixXd& gram, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("write_gram_cache: cannot open " + path);
  out.write("SWG1", 4);
  binio::write_le(out, static_cast<std::uint32_t>(gram.rows()));
  binio::write_le(out, static_cast<std::uint32_t>(gram.cols()));
  binio::write_le(out, std::uint32_t{0});
  binio::write_le(out, seed);
  binio::write_le(out, std::uint64_t{0});
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) binio::write_le(out, gram(i, j));
  }
  if (!out) throw InvalidInput("write_gram_cache: write failed for " + path);
}

Eigen::MatrixXd read_gram_cache(const std::string& path, std::uint64_t* seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("read_gram_cache: cannot open " + path);
  binio::expect_magic(in, "SWG1", "gram cache");
  const auto rows = binio::read_le<std::uint32_t>(in, "gram cache");
  const auto cols = binio::read_le<std::uint32_t>(in, "gram cache");
  binio::read_le<std::uint32_t>(in, "gram cache");
  const auto s = binio::read_le<std::uint64_t>(in, "gram cache");
  binio::read_le<std::uint64_t>(in, "gram cache");
  Eigen::MatrixXd gram(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) gram(i, j) = binio::read_le<double>(in, "gram cache");
  }
  if (seed) *seed = s;
  return gram;
}

}  // namespace swkrr
