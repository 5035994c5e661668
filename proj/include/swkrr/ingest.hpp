#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "swkrr/measures.hpp"
#include "swkrr/rng.hpp"

namespace swkrr {

using Image = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Big-endian IDX image file (magic 0x00000803, count, rows, cols, bytes). Gzip input is detected
/// from its magic bytes and inflated transparently.
std::vector<Image> load_idx_images(const std::string& path);

/// Big-endian IDX label file (magic 0x00000801, count, bytes).
std::vector<std::uint8_t> load_idx_labels(const std::string& path);

struct LabeledImages {
  std::vector<Image> images;
  std::vector<std::uint8_t> labels;
};

/// Loads an image/label pair and checks that the counts agree.
LabeledImages load_idx_dataset(const std::string& images_path, const std::string& labels_path);

/// Writes an IDX file; gzip-compressed when `gzip` is set.
void write_idx_images(const std::string& path, const std::vector<Image>& images, bool gzip = false);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels, bool gzip = false);

/// Pads `image` centered into an out_size x out_size frame, rotates by `angle_rad` about the frame
/// center (bilinear, rounded and clamped to [0, 255]) and shifts by (dx, dy) whole pixels.
Image roto_translate_fixed(const Image& image, double angle_rad, int dx, int dy, int out_size = 34);

struct RotoTranslation {
  double angle_rad = 0;
  int dx = 0;
  int dy = 0;
};

/// Angle ~ U(-max, max); integer shifts uniform within the padding slack, (out_size - W) / 2 per side.
RotoTranslation draw_roto_translation(const Image& image, double max_angle_rad, Rng& rng, int out_size = 34);

/// roto_translate_fixed with parameters from draw_roto_translation.
Image roto_translate(const Image& image, double max_angle_rad, Rng& rng, int out_size = 34);

/// Active pixels (intensity > 0) as atoms on [-1, 1]^2 with intensity-proportional weights.
/// Atom coordinates are (x, y) = (column, row) mapped by lattice_coordinate.
EmpiricalMeasured image_to_histogram(const Image& image);

/// The same histogram as a row-major H*W probability vector over every pixel.
Eigen::VectorXd image_grid_weights(const Image& image);

/// Row-major intensities divided by 255.
Eigen::VectorXd flatten_image(const Image& image);

}  // namespace swkrr
