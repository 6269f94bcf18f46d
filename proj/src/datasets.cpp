// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "splitpriv/image_io.hpp"

namespace fs = std::filesystem;

namespace splitpriv {

std::string split_role_name(SplitRole r) {
  switch (r) {
    case SplitRole::UserTrain: return "user_train";
    case SplitRole::AttackerTrain: return "attacker_train";
    case SplitRole::Test: return "test";
  }
  return "?";
}

TensorF SampleSet::image(int64_t i) const {
  const Shape sh{images.shape[1], images.shape[2], images.shape[3]};
  TensorF out(sh);
  std::copy_n(images.ptr() + i * numel(sh), numel(sh), out.ptr());
  return out;
}

void SyntheticAttributeSpec::validate() const {
  if (K_y < 2 || K_y > 4) throw ConfigError("synthetic: K_y must be in [2,4]");
  if (K_z < 2 || K_z > 3) throw ConfigError("synthetic: K_z must be in [2,3]");
  if (image_size < 8 || image_size % 4 != 0) throw ConfigError("synthetic: image_size must be >= 8, multiple of 4");
  if (correlation < 0.0 || correlation > 1.0) throw ConfigError("synthetic: correlation must be in [0,1]");
  if (desired_factor != "shape") throw ConfigError("synthetic: unknown desired_factor " + desired_factor);
  if (sensitive_factor != "hue") throw ConfigError("synthetic: unknown sensitive_factor " + sensitive_factor);
  if (!y_probs.empty()) {
    if (static_cast<int>(y_probs.size()) != K_y) throw ConfigError("synthetic: y_probs must have K_y entries");
    double s = 0;
    for (double p : y_probs) {
      if (p < 0) throw ConfigError("synthetic: y_probs must be nonnegative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ConfigError("synthetic: y_probs must sum to 1");
  }
  if (background < 0 || background > 1 || background_noise < 0 || background + background_noise > 1)
    throw ConfigError("synthetic: background levels out of range");
}

namespace {

inline float quantize8(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<float>(std::lround(c * 255.0) / 255.0);
}

// Dominant-hue palette per sensitive class (r,g,b).
constexpr double kHues[3][3] = {{0.85, 0.30, 0.15}, {0.15, 0.30, 0.85}, {0.20, 0.80, 0.25}};

// Soft-edged membership of a pixel in the class shape; alpha in [0,1].
// Class silhouettes are chosen with well-separated foreground masses so the
// desired attribute stays decodable from coarse statistics as well as from
// fine geometry.
double shape_alpha(int y_class, double dx, double dy, double r) {
  const double d = std::sqrt(dx * dx + dy * dy);
  auto edge = [](double signed_dist) { return std::clamp(0.5 - signed_dist, 0.0, 1.0); };
  switch (y_class) {
    case 0:  // filled disk
      return edge(d - r);
    case 1:  // thin ring
      return std::min(edge(d - r), edge(0.72 * r - d));
    case 2: {  // plus
      const double ax = std::abs(dx), ay = std::abs(dy);
      const double arm = 0.34 * r;
      const double in_x = std::min(edge(ax - arm), edge(ay - r));
      const double in_y = std::min(edge(ay - arm), edge(ax - r));
      return std::max(in_x, in_y);
    }
    default: {  // checkerboard square
      const double a = std::max(std::abs(dx), std::abs(dy));
      if (a > r + 0.5) return 0.0;
      const double cell = std::max(2.0, r / 1.5);
      const auto ix = static_cast<int64_t>(std::floor((dx + r) / cell));
      const auto iy = static_cast<int64_t>(std::floor((dy + r) / cell));
      return ((ix + iy) % 2 == 0) ? edge(a - r) : 0.0;
    }
  }
}

SampleSet make_split(const SyntheticAttributeSpec& spec, SplitRole role, int64_t n, Rng rng) {
  const int64_t sz = spec.image_size;
  SampleSet set;
  set.role = role;
  set.images = TensorF({n, 3, sz, sz});
  set.y.resize(static_cast<size_t>(n));
  set.z.resize(static_cast<size_t>(n));
  set.ids.resize(static_cast<size_t>(n));

  for (int64_t i = 0; i < n; ++i) {
    int y;
    if (spec.y_probs.empty()) {
      y = static_cast<int>(rng.uniform_int(spec.K_y));
    } else {
      const double u = rng.uniform();
      double acc = 0;
      y = spec.K_y - 1;
      for (int k = 0; k < spec.K_y; ++k) {
        acc += spec.y_probs[static_cast<size_t>(k)];
        if (u < acc) {
          y = k;
          break;
        }
      }
    }
    const int z = rng.uniform() < spec.correlation ? y % spec.K_z : static_cast<int>(rng.uniform_int(spec.K_z));

    const double cx = sz / 2.0 + rng.uniform(-0.12, 0.12) * sz;
    const double cy = sz / 2.0 + rng.uniform(-0.12, 0.12) * sz;
    const double r = rng.uniform(0.30, 0.36) * sz;
    double rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = std::clamp(kHues[z][c] + rng.uniform(-0.08, 0.08), 0.0, 1.0);

    float* img = set.images.ptr() + i * 3 * sz * sz;
    for (int64_t py = 0; py < sz; ++py)
      for (int64_t px = 0; px < sz; ++px) {
        const double bg = spec.background + rng.uniform(-spec.background_noise, spec.background_noise);
        const double a = shape_alpha(y, px + 0.5 - cx, py + 0.5 - cy, r);
        for (int64_t c = 0; c < 3; ++c)
          img[c * sz * sz + py * sz + px] = quantize8(a * rgb[c] + (1.0 - a) * bg);
      }

    set.y[static_cast<size_t>(i)] = y;
    set.z[static_cast<size_t>(i)] = z;
    set.ids[static_cast<size_t>(i)] = "syn_" + split_role_name(role) + "_" + std::to_string(i);
  }
  return set;
}

}  // namespace

DatasetBundle generate_synthetic(const SyntheticAttributeSpec& spec, const SplitSizes& sizes) {
  spec.validate();
  for (int64_t n : sizes)
    if (n <= 0) throw ConfigError("generate_synthetic: split sizes must be positive");

  Rng root(spec.seed);
  DatasetBundle b;
  b.user_train = make_split(spec, SplitRole::UserTrain, sizes[0], root.fork(1));
  b.attacker_train = make_split(spec, SplitRole::AttackerTrain, sizes[1], root.fork(2));
  b.test = make_split(spec, SplitRole::Test, sizes[2], root.fork(3));
  b.K_y = spec.K_y;
  b.K_z = spec.K_z;
  b.descriptor = {"synthetic", 3, spec.image_size, spec.image_size, spec.K_y, spec.K_z, sizes};
  return b;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) {
    while (!cur.empty() && (cur.back() == '\r' || cur.back() == ' ')) cur.pop_back();
    size_t s = 0;
    while (s < cur.size() && cur[s] == ' ') ++s;
    out.push_back(cur.substr(s));
  }
  return out;
}

int attr_to_binary(const std::string& v, const std::string& col) {
  if (v == "1") return 1;
  if (v == "0" || v == "-1") return 0;
  throw SchemaError("attribute column '" + col + "' has non-binary value '" + v + "'");
}

}  // namespace

DatasetBundle load_external(const std::string& dir, const std::string& desired_attr, const std::string& sensitive_attr,
                            const SplitSizes& sizes, const LoadOptions& opts) {
  const fs::path root(dir);
  const fs::path table = root / "attributes.csv";
  if (!fs::exists(table)) throw SchemaError("load_external: missing attribute table " + table.string());

  std::ifstream in(table);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("load_external: empty attribute table");
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw SchemaError("load_external: attribute table needs filename + attribute columns");

  auto find_col = [&](const std::string& name) {
    for (size_t i = 1; i < header.size(); ++i)
      if (header[i] == name) return i;
    std::string have;
    for (size_t i = 1; i < header.size(); ++i) have += (i > 1 ? "," : "") + header[i];
    throw SchemaError("load_external: attribute column '" + name + "' not found (have: " + have + ")");
  };
  const size_t col_y = find_col(desired_attr);
  const size_t col_z = find_col(sensitive_attr);

  struct Row {
    std::string file;
    int y, z;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw SchemaError("load_external: row with " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    rows.push_back({cells[0], attr_to_binary(cells[col_y], desired_attr), attr_to_binary(cells[col_z], sensitive_attr)});
  }

  const int64_t need = sizes[0] + sizes[1] + sizes[2];
  if (static_cast<int64_t>(rows.size()) < need)
    throw SizeError("load_external: requested " + std::to_string(need) + " samples, table has " +
                    std::to_string(rows.size()));

  std::vector<int64_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng(opts.seed).fork(0xDA7A);
  rng.shuffle(order.begin(), order.end());

  // Probe the first image for the native resolution.
  const fs::path img_root = fs::exists(root / "images") ? root / "images" : root;
  auto img_path = [&](const std::string& f) { return (img_root / f).string(); };
  TensorF first = read_png(img_path(rows[static_cast<size_t>(order[0])].file));
  const int64_t out_hw = opts.image_size > 0 ? opts.image_size : first.shape[1];

  DatasetBundle b;
  b.K_y = 2;
  b.K_z = 2;
  b.descriptor = {fs::path(dir).filename().string(), 3, out_hw, out_hw, 2, 2, sizes};

  int64_t cursor = 0;
  auto take = [&](SplitRole role, int64_t n) {
    SampleSet set;
    set.role = role;
    set.images = TensorF({n, 3, out_hw, out_hw});
    set.y.resize(static_cast<size_t>(n));
    set.z.resize(static_cast<size_t>(n));
    set.ids.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      const Row& row = rows[static_cast<size_t>(order[static_cast<size_t>(cursor++)])];
      TensorF img = read_png(img_path(row.file));
      if (img.shape[0] == 1) {  // replicate grayscale into three channels
        TensorF rgb({3, img.shape[1], img.shape[2]});
        for (int64_t c = 0; c < 3; ++c) std::copy_n(img.ptr(), img.shape[1] * img.shape[2], rgb.ptr() + c * img.shape[1] * img.shape[2]);
        img = rgb;
      }
      img = resize_bilinear(img, out_hw, out_hw);
      std::copy_n(img.ptr(), img.size(), set.images.ptr() + i * img.size());
      set.y[static_cast<size_t>(i)] = row.y;
      set.z[static_cast<size_t>(i)] = row.z;
      set.ids[static_cast<size_t>(i)] = row.file;
    }
    return set;
  };

  b.user_train = take(SplitRole::UserTrain, sizes[0]);
  b.attacker_train = take(SplitRole::AttackerTrain, sizes[1]);
  b.test = take(SplitRole::Test, sizes[2]);
  return b;
}

void save_bundle(const DatasetBundle& bundle, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root / "images");

  std::ofstream csv(root / "attributes.csv");
  auto write_header_cols = [&](const std::string& base, int k) {
    if (k == 2) {
      csv << "," << base;
    } else {
      for (int i = 0; i < k; ++i) csv << "," << base << "_" << i;
    }
  };
  csv << "filename";
  write_header_cols("desired", bundle.K_y);
  write_header_cols("sensitive", bundle.K_z);
  csv << "\n";

  auto write_split = [&](const SampleSet& s) {
    for (int64_t i = 0; i < s.size(); ++i) {
      const std::string file = s.ids[static_cast<size_t>(i)] + ".png";
      write_png((root / "images" / file).string(), s.image(i));
      csv << file;
      auto write_val = [&](int v, int k) {
        if (k == 2) {
          csv << "," << v;
        } else {
          for (int c = 0; c < k; ++c) csv << "," << (v == c ? 1 : 0);
        }
      };
      write_val(s.y[static_cast<size_t>(i)], bundle.K_y);
      write_val(s.z[static_cast<size_t>(i)], bundle.K_z);
      csv << "\n";
    }
  };
  write_split(bundle.user_train);
  write_split(bundle.attacker_train);
  write_split(bundle.test);
}

double trivial_classifier(const DatasetBundle& bundle, Attribute which) {
  const auto& train_labels = which == Attribute::Desired ? bundle.user_train.y : bundle.user_train.z;
  const auto& test_labels = which == Attribute::Desired ? bundle.test.y : bundle.test.z;
  const int k = which == Attribute::Desired ? bundle.K_y : bundle.K_z;
  if (train_labels.empty() || test_labels.empty()) throw ConfigError("trivial_classifier: empty bundle");

  std::vector<int64_t> counts(static_cast<size_t>(k), 0);
  for (int v : train_labels) ++counts[static_cast<size_t>(v)];
  int majority = 0;
  for (int c = 1; c < k; ++c)
    if (counts[static_cast<size_t>(c)] > counts[static_cast<size_t>(majority)]) majority = c;  // ties -> lower index

  int64_t hits = 0;
  for (int v : test_labels)
    if (v == majority) ++hits;
  return static_cast<double>(hits) / static_cast<double>(test_labels.size());
}

}  // namespace splitpriv
