// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "splitpriv/datasets.hpp"
#include "splitpriv/image_io.hpp"

using namespace splitpriv;
namespace fs = std::filesystem;

namespace {

SyntheticAttributeSpec small_spec(uint64_t seed = 7) {
  SyntheticAttributeSpec s;
  s.image_size = 8;
  s.seed = seed;
  return s;
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("splitpriv_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("synthetic generation is a pure function of spec and sizes") {
  auto a = generate_synthetic(small_spec(7), {64, 48, 32});
  auto b = generate_synthetic(small_spec(7), {64, 48, 32});
  CHECK(a.user_train.images.data == b.user_train.images.data);
  CHECK(a.attacker_train.images.data == b.attacker_train.images.data);
  CHECK(a.test.images.data == b.test.images.data);
  CHECK(a.user_train.y == b.user_train.y);
  CHECK(a.user_train.z == b.user_train.z);

  auto c = generate_synthetic(small_spec(8), {64, 48, 32});
  CHECK(a.user_train.images.data != c.user_train.images.data);
}

TEST_CASE("synthetic images are in range and on the 8-bit grid") {
  auto b = generate_synthetic(small_spec(3), {32, 8, 8});
  for (float v : b.user_train.images.data) {
    CHECK(v >= 0.f);
    CHECK(v <= 1.f);
    const float q = std::round(v * 255.f) / 255.f;
    CHECK(v == doctest::Approx(q).epsilon(1e-7));
  }
}

TEST_CASE("correlation=0 gives statistically independent labels") {
  auto spec = small_spec(11);
  auto b = generate_synthetic(spec, {10000, 8, 8});
  // sample Pearson correlation of the two binary labels
  double my = 0, mz = 0;
  const auto n = static_cast<double>(b.user_train.y.size());
  for (size_t i = 0; i < b.user_train.y.size(); ++i) {
    my += b.user_train.y[i];
    mz += b.user_train.z[i];
  }
  my /= n;
  mz /= n;
  double cyz = 0, vy = 0, vz = 0;
  for (size_t i = 0; i < b.user_train.y.size(); ++i) {
    cyz += (b.user_train.y[i] - my) * (b.user_train.z[i] - mz);
    vy += (b.user_train.y[i] - my) * (b.user_train.y[i] - my);
    vz += (b.user_train.z[i] - mz) * (b.user_train.z[i] - mz);
  }
  CHECK(std::abs(cyz / std::sqrt(vy * vz)) < 0.05);

  // balanced generator: majority-class rate of y within 50% +/- 2 pts
  CHECK(std::max(my, 1.0 - my) < 0.52);
}

TEST_CASE("correlation=1 ties z to y") {
  auto spec = small_spec(12);
  spec.correlation = 1.0;
  auto b = generate_synthetic(spec, {256, 8, 8});
  for (size_t i = 0; i < b.user_train.y.size(); ++i)
    CHECK(b.user_train.z[i] == b.user_train.y[i] % spec.K_z);
}

TEST_CASE("label skew flows through to the trivial classifier") {
  auto spec = small_spec(13);
  spec.y_probs = {0.7, 0.3};
  auto b = generate_synthetic(spec, {4000, 8, 2000});
  CHECK(trivial_classifier(b, Attribute::Desired) == doctest::Approx(0.70).epsilon(0.03));
  // direct recomputation oracle: majority class frequency on the test split
  double f1 = 0;
  for (int v : b.test.y) f1 += v == 0 ? 1 : 0;
  f1 /= static_cast<double>(b.test.y.size());
  CHECK(trivial_classifier(b, Attribute::Desired) == doctest::Approx(std::max(f1, 1.0 - f1)));
}

TEST_CASE("invalid synthetic specs are configuration errors") {
  auto bad = small_spec();
  bad.K_y = 1;
  CHECK_THROWS_AS(generate_synthetic(bad, {8, 8, 8}), ConfigError);
  auto bad2 = small_spec();
  bad2.correlation = 1.5;
  CHECK_THROWS_AS(generate_synthetic(bad2, {8, 8, 8}), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(small_spec(), {0, 8, 8}), ConfigError);
}

TEST_CASE("split identifiers are pairwise disjoint") {
  auto b = generate_synthetic(small_spec(5), {64, 48, 32});
  std::set<std::string> seen;
  for (const auto* s : {&b.user_train, &b.attacker_train, &b.test})
    for (const auto& id : s->ids) CHECK(seen.insert(id).second);
}

TEST_CASE("the test split rejects training access") {
  auto b = generate_synthetic(small_spec(5), {16, 16, 16});
  CHECK_THROWS_AS(b.test.for_training(), ConfigError);
  CHECK_NOTHROW(b.user_train.for_training());
  CHECK_NOTHROW(b.attacker_train.for_training());
}

TEST_CASE("png round trip is exact for quantized images") {
  auto b = generate_synthetic(small_spec(21), {4, 4, 4});
  const auto dir = temp_dir("png");
  const auto img = b.user_train.image(0);
  write_png((dir / "x.png").string(), img);
  const auto back = read_png((dir / "x.png").string());
  CHECK(back.shape == img.shape);
  CHECK(back.data == img.data);
}

TEST_CASE("save_bundle / load_external round trip preserves images and labels") {
  auto b = generate_synthetic(small_spec(31), {24, 16, 12});
  const auto dir = temp_dir("bundle");
  save_bundle(b, dir.string());

  LoadOptions opts;
  opts.seed = 99;
  auto loaded = load_external(dir.string(), "desired", "sensitive", {24, 16, 12}, opts);

  // id -> (y,z,image offset) from the source bundle
  std::map<std::string, std::tuple<int, int, TensorF>> src;
  for (const auto* s : {&b.user_train, &b.attacker_train, &b.test})
    for (int64_t i = 0; i < s->size(); ++i)
      src[s->ids[static_cast<size_t>(i)] + ".png"] = {s->y[static_cast<size_t>(i)], s->z[static_cast<size_t>(i)],
                                                      s->image(i)};

  int64_t checked = 0;
  for (const auto* s : {&loaded.user_train, &loaded.attacker_train, &loaded.test})
    for (int64_t i = 0; i < s->size(); ++i) {
      auto it = src.find(s->ids[static_cast<size_t>(i)]);
      REQUIRE(it != src.end());
      CHECK(std::get<0>(it->second) == s->y[static_cast<size_t>(i)]);
      CHECK(std::get<1>(it->second) == s->z[static_cast<size_t>(i)]);
      CHECK(std::get<2>(it->second).data == s->image(i).data);
      ++checked;
    }
  CHECK(checked == 52);

  // same path + seed -> identical split membership
  auto again = load_external(dir.string(), "desired", "sensitive", {24, 16, 12}, opts);
  CHECK(loaded.user_train.ids == again.user_train.ids);
  CHECK(loaded.test.ids == again.test.ids);
}

TEST_CASE("load_external rejects bad schemas and oversize requests") {
  auto b = generate_synthetic(small_spec(33), {8, 8, 8});
  const auto dir = temp_dir("schema");
  save_bundle(b, dir.string());

  CHECK_THROWS_AS(load_external(dir.string(), "nope", "sensitive", {4, 4, 4}, {}), SchemaError);
  CHECK_THROWS_AS(load_external(dir.string(), "desired", "sensitive", {100, 100, 100}, {}), SizeError);
  CHECK_THROWS_AS(load_external((dir / "missing").string(), "a", "b", {1, 1, 1}, {}), SchemaError);
}

TEST_CASE("attribute values accept both {-1,1} and {0,1} encodings") {
  const auto dir = temp_dir("attrs");
  fs::create_directories(dir / "images");
  auto b = generate_synthetic(small_spec(41), {3, 3, 3});
  for (int i = 0; i < 3; ++i) write_png((dir / "images" / ("img" + std::to_string(i) + ".png")).string(), b.test.image(i));
  std::ofstream csv(dir / "attributes.csv");
  csv << "filename,Smiling,Male\n";
  csv << "img0.png,1,-1\n";
  csv << "img1.png,-1,1\n";
  csv << "img2.png,0,1\n";
  csv.close();

  auto loaded = load_external(dir.string(), "Smiling", "Male", {1, 1, 1}, {});
  for (const auto* s : {&loaded.user_train, &loaded.attacker_train, &loaded.test}) {
    CHECK(s->size() == 1);
    CHECK((s->y[0] == 0 || s->y[0] == 1));
    CHECK((s->z[0] == 0 || s->z[0] == 1));
  }
}

TEST_CASE("resize_bilinear shrinks and preserves range") {
  auto b = generate_synthetic(small_spec(43), {2, 2, 2});
  auto img = b.user_train.image(0);
  auto half = resize_bilinear(img, 4, 4);
  CHECK(half.shape == Shape{3, 4, 4});
  for (float v : half.data) {
    CHECK(v >= 0.f);
    CHECK(v <= 1.f);
  }
}
