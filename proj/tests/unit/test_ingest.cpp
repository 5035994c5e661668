#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "swkrr/ingest.hpp"

using namespace swkrr;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<Image> random_images(int count, int H, int W, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<Image> out;
  for (int i = 0; i < count; ++i) {
    Image img(H, W);
    for (Eigen::Index k = 0; k < img.size(); ++k) img.data()[k] = static_cast<std::uint8_t>(byte(rng) < 128 ? 0 : byte(rng));
    out.push_back(img);
  }
  return out;
}

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("IDX round-trip, plain and gzip") {
  TempDir tmp("swkrr_ingest_roundtrip");
  const auto images = random_images(6, 28, 28, 1);
  const std::vector<std::uint8_t> labels{0, 1, 9, 3, 3, 7};
  for (bool gz : {false, true}) {
    const auto ip = tmp.file(gz ? "img.gz" : "img");
    const auto lp = tmp.file(gz ? "lab.gz" : "lab");
    write_idx_images(ip, images, gz);
    write_idx_labels(lp, labels, gz);
    const auto data = load_idx_dataset(ip, lp);
    REQUIRE(data.images.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(data.images[i] == images[i]);
    CHECK(data.labels == labels);
    if (!gz) {
      const auto bytes = slurp(ip);
      CHECK(bytes.size() == 16 + 6 * 784);
      CHECK(bytes[2] == 0x08);
      CHECK(bytes[3] == 0x03);
      CHECK(bytes[7] == 6);
      CHECK(bytes[11] == 28);
      // Rewriting what was read is bitwise identical.
      write_idx_images(tmp.file("again"), load_idx_images(ip));
      CHECK(slurp(tmp.file("again")) == bytes);
    }
  }
}

TEST_CASE("IDX format errors") {
  TempDir tmp("swkrr_ingest_errors");
  write_idx_images(tmp.file("img"), random_images(3, 4, 4, 2));
  write_idx_labels(tmp.file("lab"), {1, 2});

  // Labels opened as images: wrong magic, message names the expected one.
  try {
    load_idx_images(tmp.file("lab"));
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("0x00000803") != std::string::npos);
    CHECK(e.offset() == 0);
  }
  CHECK_THROWS_AS(load_idx_labels(tmp.file("img")), FormatError);
  CHECK_THROWS_AS(load_idx_dataset(tmp.file("img"), tmp.file("lab")), FormatError);

  auto bytes = slurp(tmp.file("img"));
  bytes.resize(bytes.size() - 5);
  {
    std::ofstream out(tmp.file("short"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(load_idx_images(tmp.file("short")), FormatError);
  CHECK_THROWS_AS(load_idx_images(tmp.file("missing")), Error);
}

TEST_CASE("roto_translate") {
  const auto img = random_images(1, 28, 28, 3).front();
  const Image padded = roto_translate_fixed(img, 0.0, 0, 0);
  REQUIRE(padded.rows() == 34);
  CHECK(padded.block(3, 3, 28, 28) == img);
  CHECK(padded.cast<int>().sum() == img.cast<int>().sum());

  // Pure translation moves bytes losslessly while content stays inside the frame.
  for (int dx = -3; dx <= 3; ++dx) {
    for (int dy = -3; dy <= 3; ++dy) {
      const Image moved = roto_translate_fixed(img, 0.0, dx, dy);
      CHECK(moved.block(3 + dy, 3 + dx, 28, 28) == img);
      const double mass = moved.cast<double>().sum();
      CHECK(std::abs(mass - img.cast<double>().sum()) <= 0.02 * img.cast<double>().sum());
    }
  }

  Rng rng(5);
  const Image zero_angle = roto_translate(img, 0.0, rng);
  CHECK(zero_angle.cast<int>().sum() == img.cast<int>().sum());

  // Rotation by pi/2 about the center is an exact permutation of pixels.
  const Image quarter = roto_translate_fixed(img, M_PI / 2, 0, 0);
  const Image twice = roto_translate_fixed(quarter, M_PI / 2, 0, 0, 34);
  const Image half = roto_translate_fixed(img, M_PI, 0, 0);
  CHECK(twice == half);
  CHECK(half.block(3, 3, 28, 28) == img.reverse());

  CHECK_THROWS_AS(roto_translate(img, -0.1, rng), InvalidInput);
}

TEST_CASE("roto-translation draws are uniform") {
  const auto img = random_images(1, 28, 28, 4).front();
  Rng rng(17);
  const double max_angle = M_PI / 6;
  std::vector<double> u;
  std::vector<int> shift_counts(7, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto t = draw_roto_translation(img, max_angle, rng);
    REQUIRE(std::abs(t.angle_rad) <= max_angle);
    REQUIRE(std::abs(t.dx) <= 3);
    REQUIRE(std::abs(t.dy) <= 3);
    u.push_back((t.angle_rad + max_angle) / (2 * max_angle));
    ++shift_counts[static_cast<std::size_t>(t.dx + 3)];
  }
  std::sort(u.begin(), u.end());
  double ks = 0;
  for (int i = 0; i < n; ++i) ks = std::max({ks, std::abs(u[i] - double(i) / n), std::abs(u[i] - double(i + 1) / n)});
  CHECK(ks < 1.95 / std::sqrt(double(n)));  // 0.1% critical value
  for (int c : shift_counts) CHECK(std::abs(c - n / 7.0) < 6 * std::sqrt(n / 7.0));
}

TEST_CASE("image_to_histogram") {
  Image one = Image::Zero(28, 28);
  one(5, 9) = 200;
  const auto h1 = image_to_histogram(one);
  CHECK(h1.size() == 1);
  CHECK(h1.weights()(0) == 1.0);

  Image two = Image::Zero(28, 28);
  two(0, 0) = 100;
  two(27, 27) = 50;
  const auto h2 = image_to_histogram(two);
  REQUIRE(h2.size() == 2);
  CHECK(h2.weights()(0) == doctest::Approx(2.0 / 3.0));
  CHECK(h2.weights()(1) == doctest::Approx(1.0 / 3.0));
  CHECK(h2.points().row(0) == Eigen::RowVector2d(-1, -1));
  CHECK(h2.points().row(1) == Eigen::RowVector2d(1, 1));

  Image corner = Image::Zero(28, 28);
  corner(0, 27) = 1;
  CHECK(image_to_histogram(corner).points().row(0) == Eigen::RowVector2d(1, -1));

  CHECK_THROWS_AS(image_to_histogram(Image::Zero(28, 28)), InvalidInput);

  for (const auto& img : random_images(20, 28, 28, 8)) {
    const auto h = image_to_histogram(img);
    CHECK(h.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.points().cwiseAbs().maxCoeff() <= 1.0);
    const Eigen::VectorXd grid = image_grid_weights(img);
    CHECK(grid.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grid.size() == 784);
  }
}

TEST_CASE("flatten_image") {
  CHECK(flatten_image(Image::Zero(28, 28)).isZero(0));
  CHECK(flatten_image(Image::Zero(34, 34)).size() == 1156);
  Image img = Image::Zero(2, 3);
  img(1, 0) = 255;
  const Eigen::VectorXd v = flatten_image(img);
  CHECK(v(3) == 1.0);
  CHECK(v.sum() == 1.0);
}
