// Copyright 2026 The aqs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tensornet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "core/rng.hpp"

namespace aqs::tensornet {

namespace {

// Standardize every feature by the train split's mean/std.
void standardize(Tensor& train, Tensor& val) {
  const std::size_t d = train.item_size();
  const int n = train.batch();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (int m = 0; m < n; ++m) {
    const double* x = train.item(m);
    for (std::size_t i = 0; i < d; ++i) mean[i] += x[i];
  }
  for (std::size_t i = 0; i < d; ++i) mean[i] /= n;
  for (int m = 0; m < n; ++m) {
    const double* x = train.item(m);
    for (std::size_t i = 0; i < d; ++i) var[i] += (x[i] - mean[i]) * (x[i] - mean[i]);
  }
  for (std::size_t i = 0; i < d; ++i)
    var[i] = std::sqrt(var[i] / std::max(1, n - 1)) + 1e-12;
  auto apply = [&](Tensor& t) {
    for (int m = 0; m < t.batch(); ++m) {
      double* x = t.item(m);
      for (std::size_t i = 0; i < d; ++i) x[i] = (x[i] - mean[i]) / var[i];
    }
  };
  apply(train);
  apply(val);
}

// Balanced label sequence 0,1,...,C-1,0,1,... shuffled.
std::vector<int> balanced_labels(int n, int classes, core::Rng& rng) {
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) y[i] = i % classes;
  rng.shuffle(y);
  return y;
}

// Block-average any HxW image down to 8x8.
void downsample_to_8x8(const std::vector<double>& src, int h, int w, double* dst) {
  for (int oy = 0; oy < 8; ++oy) {
    const int y0 = oy * h / 8, y1 = std::max(y0 + 1, (oy + 1) * h / 8);
    for (int ox = 0; ox < 8; ++ox) {
      const int x0 = ox * w / 8, x1 = std::max(x0 + 1, (ox + 1) * w / 8);
      double acc = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) acc += src[static_cast<std::size_t>(y) * w + x];
      dst[oy * 8 + ox] = acc / ((y1 - y0) * (x1 - x0));
    }
  }
}

std::uint32_t read_be32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("truncated IDX file");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

Dataset split_images(std::vector<std::vector<double>> images, std::vector<int> labels,
                     int h, int w, int n_train, int n_val) {
  const int total = static_cast<int>(images.size());
  if (total < n_train + n_val)
    throw std::runtime_error("dataset has only " + std::to_string(total) +
                             " samples, need " + std::to_string(n_train + n_val));
  Dataset data;
  data.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  data.train_x = Tensor({n_train, 8, 8, 1});
  data.val_x = Tensor({n_val, 8, 8, 1});
  for (int i = 0; i < n_train; ++i) {
    downsample_to_8x8(images[i], h, w, data.train_x.item(i));
    data.train_y.push_back(labels[i]);
  }
  for (int i = 0; i < n_val; ++i) {
    downsample_to_8x8(images[n_train + i], h, w, data.val_x.item(i));
    data.val_y.push_back(labels[n_train + i]);
  }
  standardize(data.train_x, data.val_x);
  return data;
}

}  // namespace

Dataset make_blobs(std::uint64_t seed, int n_train, int n_val, int dim,
                   int classes, int components) {
  core::Rng rng(seed);
  // seeded component centers; classes are mixtures, so the boundary is
  // not linear in general
  std::vector<std::vector<double>> centers(
      static_cast<std::size_t>(classes) * components, std::vector<double>(dim));
  for (auto& c : centers)
    for (double& v : c) v = rng.normal(0.0, 2.0);

  Dataset data;
  data.num_classes = classes;
  data.train_y = balanced_labels(n_train, classes, rng);
  data.val_y = balanced_labels(n_val, classes, rng);
  data.train_x = Tensor({n_train, dim});
  data.val_x = Tensor({n_val, dim});
  auto fill = [&](Tensor& x, const std::vector<int>& y) {
    for (int m = 0; m < x.batch(); ++m) {
      const auto& c = centers[static_cast<std::size_t>(y[m]) * components +
                              rng.below(components)];
      double* row = x.item(m);
      for (int i = 0; i < dim; ++i) row[i] = c[i] + rng.normal();
    }
  };
  fill(data.train_x, data.train_y);
  fill(data.val_x, data.val_y);
  standardize(data.train_x, data.val_x);
  return data;
}

Dataset make_tiles(std::uint64_t seed, int n_train, int n_val, int classes) {
  core::Rng rng(seed);
  Dataset data;
  data.num_classes = classes;
  data.train_y = balanced_labels(n_train, classes, rng);
  data.val_y = balanced_labels(n_val, classes, rng);
  data.train_x = Tensor({n_train, 8, 8, 1});
  data.val_x = Tensor({n_val, 8, 8, 1});
  auto fill = [&](Tensor& x, const std::vector<int>& y) {
    for (int m = 0; m < x.batch(); ++m) {
      // one grating orientation per class, random phase, mild noise
      const double theta = std::numbers::pi * y[m] / classes;
      const double cx = std::cos(theta), sy = std::sin(theta);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double freq = 2.0 * std::numbers::pi * 0.25;
      double* img = x.item(m);
      for (int py = 0; py < 8; ++py)
        for (int px = 0; px < 8; ++px)
          img[py * 8 + px] =
              std::sin(freq * (px * cx + py * sy) + phase) + rng.normal(0.0, 0.3);
    }
  };
  fill(data.train_x, data.train_y);
  fill(data.val_x, data.val_y);
  standardize(data.train_x, data.val_x);
  return data;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int n_train, int n_val) {
  std::ifstream img_in(images_path, std::ios::binary);
  if (!img_in) throw std::runtime_error("cannot open " + images_path);
  if (read_be32(img_in) != 0x00000803)
    throw std::runtime_error("bad IDX image magic in " + images_path);
  const int n = static_cast<int>(read_be32(img_in));
  const int h = static_cast<int>(read_be32(img_in));
  const int w = static_cast<int>(read_be32(img_in));

  std::ifstream lbl_in(labels_path, std::ios::binary);
  if (!lbl_in) throw std::runtime_error("cannot open " + labels_path);
  if (read_be32(lbl_in) != 0x00000801)
    throw std::runtime_error("bad IDX label magic in " + labels_path);
  if (static_cast<int>(read_be32(lbl_in)) != n)
    throw std::runtime_error("IDX image/label counts differ");

  std::vector<std::vector<double>> images(n);
  std::vector<int> labels(n);
  std::vector<unsigned char> buf(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < n; ++i) {
    img_in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (!img_in) throw std::runtime_error("truncated IDX images");
    images[i].resize(buf.size());
    for (std::size_t j = 0; j < buf.size(); ++j) images[i][j] = buf[j] / 255.0;
    unsigned char lbl;
    lbl_in.read(reinterpret_cast<char*>(&lbl), 1);
    if (!lbl_in) throw std::runtime_error("truncated IDX labels");
    labels[i] = lbl;
  }
  return split_images(std::move(images), std::move(labels), h, w, n_train, n_val);
}

Dataset load_csv(const std::string& path, int n_train, int n_val) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> images;
  std::vector<int> labels;
  std::string line;
  int side = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> px;
    std::size_t pos = 0;
    bool first = true;
    int label = 0;
    while (pos <= line.size()) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      const std::string tok = line.substr(pos, next - pos);
      if (first) {
        label = std::stoi(tok);
        first = false;
      } else {
        px.push_back(std::stod(tok));
      }
      pos = next + 1;
    }
    if (side == 0) {
      side = static_cast<int>(std::lround(std::sqrt(double(px.size()))));
      if (side * side != static_cast<int>(px.size()))
        throw std::runtime_error("CSV rows must hold square images");
    } else if (static_cast<int>(px.size()) != side * side) {
      throw std::runtime_error("inconsistent CSV row length");
    }
    labels.push_back(label);
    images.push_back(std::move(px));
  }
  if (images.empty()) throw std::runtime_error("empty CSV dataset " + path);
  return split_images(std::move(images), std::move(labels), side, side, n_train,
                      n_val);
}

}  // namespace aqs::tensornet
