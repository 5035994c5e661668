#include "swkrr/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "swkrr/error.hpp"

namespace swkrr {

namespace {

std::vector<unsigned char> read_plain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<unsigned char> inflate_gzip(const std::string& path) {
  gzFile gz = gzopen(path.c_str(), "rb");
  if (gz == nullptr) throw InvalidInput("cannot open " + path);
  std::vector<unsigned char> out;
  unsigned char buffer[1 << 16];
  int got = 0;
  while ((got = gzread(gz, buffer, sizeof(buffer))) > 0) out.insert(out.end(), buffer, buffer + got);
  int errnum = 0;
  const char* message = gzerror(gz, &errnum);
  const std::string reason = message ? message : "";
  gzclose(gz);
  if (got < 0 || (errnum != Z_OK && errnum != Z_STREAM_END)) {
    throw FormatError(path + ": corrupt gzip stream (" + reason + ")", out.size());
  }
  return out;
}

std::vector<unsigned char> read_maybe_gzip(const std::string& path) {
  auto bytes = read_plain(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return inflate_gzip(path);
  return bytes;
}

std::uint32_t be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::string& path) {
  if (offset + 4 > bytes.size()) throw FormatError(path + ": truncated IDX header", bytes.size());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", v);
  return buf;
}

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes, bool gzip) {
  if (gzip) {
    gzFile gz = gzopen(path.c_str(), "wb9");
    if (gz == nullptr) throw InvalidInput("cannot write " + path);
    const int wrote = gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(gz);
    if (wrote != static_cast<int>(bytes.size())) throw InvalidInput("write failed for " + path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidInput("write failed for " + path);
}

}  // namespace

std::vector<Image> load_idx_images(const std::string& path) {
  const auto bytes = read_maybe_gzip(path);
  const std::uint32_t magic = be32(bytes, 0, path);
  if (magic != kIdxImageMagic) {
    throw FormatError(path + ": bad IDX image magic " + hex32(magic) + ", expected " + hex32(kIdxImageMagic), 0);
  }
  const std::uint32_t count = be32(bytes, 4, path);
  const std::uint32_t rows = be32(bytes, 8, path);
  const std::uint32_t cols = be32(bytes, 12, path);
  const std::size_t header = 16;
  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t needed = header + std::size_t{count} * pixels;
  if (bytes.size() < needed) {
    throw FormatError(path + ": truncated IDX image payload, " + std::to_string(needed) + " bytes expected",
                      bytes.size());
  }
  std::vector<Image> images;
  images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Image img(rows, cols);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(header + i * pixels), pixels, img.data());
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
  const auto bytes = read_maybe_gzip(path);
  const std::uint32_t magic = be32(bytes, 0, path);
  if (magic != kIdxLabelMagic) {
    throw FormatError(path + ": bad IDX label magic " + hex32(magic) + ", expected " + hex32(kIdxLabelMagic), 0);
  }
  const std::uint32_t count = be32(bytes, 4, path);
  const std::size_t header = 8;
  if (bytes.size() < header + count) {
    throw FormatError(path + ": truncated IDX label payload, " + std::to_string(header + count) + " bytes expected",
                      bytes.size());
  }
  return {bytes.begin() + header, bytes.begin() + static_cast<std::ptrdiff_t>(header + count)};
}

LabeledImages load_idx_dataset(const std::string& images_path, const std::string& labels_path) {
  LabeledImages out{load_idx_images(images_path), load_idx_labels(labels_path)};
  if (out.images.size() != out.labels.size()) {
    throw FormatError("IDX count mismatch: " + std::to_string(out.images.size()) + " images vs " +
                          std::to_string(out.labels.size()) + " labels",
                      4);
  }
  return out;
}

void write_idx_images(const std::string& path, const std::vector<Image>& images, bool gzip) {
  const auto rows = images.empty() ? 0 : images.front().rows();
  const auto cols = images.empty() ? 0 : images.front().cols();
  std::vector<unsigned char> bytes;
  bytes.reserve(16 + images.size() * static_cast<std::size_t>(rows * cols));
  put_be32(bytes, kIdxImageMagic);
  put_be32(bytes, static_cast<std::uint32_t>(images.size()));
  put_be32(bytes, static_cast<std::uint32_t>(rows));
  put_be32(bytes, static_cast<std::uint32_t>(cols));
  for (const auto& img : images) {
    if (img.rows() != rows || img.cols() != cols) throw InvalidInput("write_idx_images: images differ in shape");
    bytes.insert(bytes.end(), img.data(), img.data() + img.size());
  }
  write_bytes(path, bytes, gzip);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels, bool gzip) {
  std::vector<unsigned char> bytes;
  put_be32(bytes, kIdxLabelMagic);
  put_be32(bytes, static_cast<std::uint32_t>(labels.size()));
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  write_bytes(path, bytes, gzip);
}

Image roto_translate_fixed(const Image& image, double angle_rad, int dx, int dy, int out_size) {
  const auto H = image.rows();
  const auto W = image.cols();
  if (H > out_size || W > out_size) throw InvalidInput("roto_translate: image larger than the output frame");
  Image padded = Image::Zero(out_size, out_size);
  padded.block((out_size - H) / 2, (out_size - W) / 2, H, W) = image;

  const double center = 0.5 * (out_size - 1);
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  auto at = [&](long row, long col) -> double {
    if (row < 0 || col < 0 || row >= out_size || col >= out_size) return 0.0;
    return padded(row, col);
  };

  Image out(out_size, out_size);
  for (int row = 0; row < out_size; ++row) {
    for (int col = 0; col < out_size; ++col) {
      // Inverse map: undo the shift, then rotate back about the center.
      const double u = (col - dx) - center;
      const double v = (row - dy) - center;
      const double sx = c * u + s * v + center;
      const double sy = -s * u + c * v + center;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const double ax = sx - fx;
      const double ay = sy - fy;
      const long x0 = static_cast<long>(fx);
      const long y0 = static_cast<long>(fy);
      double value = at(y0, x0) * (1.0 - ax) * (1.0 - ay);
      if (ax > 0.0) value += at(y0, x0 + 1) * ax * (1.0 - ay);
      if (ay > 0.0) value += at(y0 + 1, x0) * (1.0 - ax) * ay;
      if (ax > 0.0 && ay > 0.0) value += at(y0 + 1, x0 + 1) * ax * ay;
      out(row, col) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
    }
  }
  return out;
}

RotoTranslation draw_roto_translation(const Image& image, double max_angle_rad, Rng& rng, int out_size) {
  if (max_angle_rad < 0.0) throw InvalidInput("roto_translate: max angle must be nonnegative");
  const int slack_x = std::max<int>(0, (out_size - static_cast<int>(image.cols())) / 2);
  const int slack_y = std::max<int>(0, (out_size - static_cast<int>(image.rows())) / 2);
  std::uniform_real_distribution<double> angle(-max_angle_rad, max_angle_rad);
  std::uniform_int_distribution<int> shift_x(-slack_x, slack_x);
  std::uniform_int_distribution<int> shift_y(-slack_y, slack_y);
  RotoTranslation out;
  out.angle_rad = max_angle_rad > 0.0 ? angle(rng) : 0.0;
  out.dx = shift_x(rng);
  out.dy = shift_y(rng);
  return out;
}

Image roto_translate(const Image& image, double max_angle_rad, Rng& rng, int out_size) {
  const auto t = draw_roto_translation(image, max_angle_rad, rng, out_size);
  return roto_translate_fixed(image, t.angle_rad, t.dx, t.dy, out_size);
}

EmpiricalMeasured image_to_histogram(const Image& image) {
  const auto H = image.rows();
  const auto W = image.cols();
  Eigen::Index active = 0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    if (image.data()[i] > 0) {
      ++active;
      total += image.data()[i];
    }
  }
  if (active == 0) throw InvalidInput("image_to_histogram: image has no active pixel");
  Eigen::MatrixXd points(active, 2);
  Eigen::VectorXd weights(active);
  Eigen::Index k = 0;
  for (Eigen::Index row = 0; row < H; ++row) {
    for (Eigen::Index col = 0; col < W; ++col) {
      const auto value = image(row, col);
      if (value == 0) continue;
      points(k, 0) = lattice_coordinate(col, W);
      points(k, 1) = lattice_coordinate(row, H);
      weights(k) = double(value) / total;
      ++k;
    }
  }
  return EmpiricalMeasured::weighted(std::move(points), std::move(weights));
}

Eigen::VectorXd image_grid_weights(const Image& image) {
  Eigen::VectorXd w = image.cast<double>().reshaped<Eigen::RowMajor>();
  const double total = w.sum();
  if (!(total > 0.0)) throw InvalidInput("image_grid_weights: image has no active pixel");
  return w / total;
}

Eigen::VectorXd flatten_image(const Image& image) {
  return image.cast<double>().reshaped<Eigen::RowMajor>() / 255.0;
}

}  // namespace swkrr
