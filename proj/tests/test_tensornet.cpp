#include <cmath>
#include <fstream>

#include "afdsl/graph.hpp"
#include "afdsl/space.hpp"
#include "core/rng.hpp"
#include "doctest.h"
#include "tensornet/conv.hpp"
#include "tensornet/data.hpp"
#include "tensornet/net.hpp"
#include "tensornet/task.hpp"
#include "tensornet/train.hpp"

using namespace aqs;
using namespace aqs::tensornet;

namespace {

afdsl::ActivationGraph act(const char* s) { return afdsl::ActivationGraph::parse(s); }

NetworkSpec small_mlp(int in, int h, int out) {
  NetworkSpec spec;
  spec.layers = {DenseSpec{in, h, true}, DenseSpec{h, h, true},
                 DenseSpec{h, out, true}, SoftmaxHeadSpec{}};
  return spec;
}

double mean_loss(const Network& net, const Tensor& x, const std::vector<int>& y) {
  BatchTrace t = forward(net, x, false);
  double loss = 0.0;
  for (int m = 0; m < x.batch(); ++m) loss -= std::log(t.probs(m, y[m]));
  return loss / x.batch();
}

// Two well-separated Gaussians; linearly separable by construction.
Dataset separable_blobs(std::uint64_t seed, int n_train, int n_val, int dim) {
  core::Rng rng(seed);
  Dataset d;
  d.num_classes = 2;
  d.train_x = Tensor({n_train, dim});
  d.val_x = Tensor({n_val, dim});
  auto fill = [&](Tensor& x, std::vector<int>& y) {
    for (int m = 0; m < x.batch(); ++m) {
      const int cls = m % 2;
      y.push_back(cls);
      for (int i = 0; i < dim; ++i)
        x.item(m)[i] = (cls ? 2.0 : -2.0) + rng.normal();
    }
  };
  fill(d.train_x, d.train_y);
  fill(d.val_x, d.val_y);
  return d;
}

// Logistic-regression oracle: plain gradient descent on the same data.
double logistic_regression_accuracy(const Dataset& d) {
  const int dim = static_cast<int>(d.train_x.item_size());
  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> gw(dim, 0.0);
    double gb = 0.0;
    for (int m = 0; m < d.train_x.batch(); ++m) {
      const double* x = d.train_x.item(m);
      double z = b;
      for (int i = 0; i < dim; ++i) z += w[i] * x[i];
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double err = p - d.train_y[m];
      for (int i = 0; i < dim; ++i) gw[i] += err * x[i];
      gb += err;
    }
    for (int i = 0; i < dim; ++i) w[i] -= 0.1 * gw[i] / d.train_x.batch();
    b -= 0.1 * gb / d.train_x.batch();
  }
  int correct = 0;
  for (int m = 0; m < d.val_x.batch(); ++m) {
    const double* x = d.val_x.item(m);
    double z = b;
    for (int i = 0; i < dim; ++i) z += w[i] * x[i];
    if ((z > 0.0) == (d.val_y[m] == 1)) ++correct;
  }
  return static_cast<double>(correct) / d.val_x.batch();
}

}  // namespace

TEST_CASE("init_weights is fan-in scaled, zero-bias, deterministic") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{4, 4, true}, SoftmaxHeadSpec{}};
  Network net = init_weights(spec, act("unary_relu(x)"), 9);
  REQUIRE(net.weights.size() == 1);
  double mean = 0.0;
  for (std::size_t i = 0; i < net.weights[0].size(); ++i)
    mean += net.weights[0].data()[i];
  mean /= net.weights[0].size();
  // N(0, 2/4) over 16 samples: |mean| < 3 * sqrt(0.5/16)
  CHECK(std::fabs(mean) < 3.0 * std::sqrt(0.5 / 16.0));
  for (double b : net.biases[0]) CHECK(b == 0.0);

  Network net2 = init_weights(spec, act("unary_relu(x)"), 9);
  for (std::size_t i = 0; i < net.weights[0].size(); ++i)
    CHECK(net.weights[0].data()[i] == net2.weights[0].data()[i]);
  Network net3 = init_weights(spec, act("unary_relu(x)"), 10);
  CHECK(net.weights[0].data()[0] != net3.weights[0].data()[0]);
}

TEST_CASE("forward of a single dense layer is the affine map") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{2, 2, true}, SoftmaxHeadSpec{}};
  Network net = init_weights(spec, act("unary_identity(x)"), 1);
  net.weights[0](0, 0) = 1.0;
  net.weights[0](0, 1) = 2.0;
  net.weights[0](1, 0) = -3.0;
  net.weights[0](1, 1) = 0.5;
  net.biases[0] = {0.25, -1.0};
  Tensor x({1, 2});
  x.data = {2.0, -1.0};
  BatchTrace t = forward(net, x, false);
  CHECK(t.logits(0, 0) == doctest::Approx(1.0 * 2 + 2.0 * -1 + 0.25));
  CHECK(t.logits(0, 1) == doctest::Approx(-3.0 * 2 + 0.5 * -1 - 1.0));
  CHECK(t.probs(0, 0) + t.probs(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1x1 conv with identity kernel passes channels through") {
  NetworkSpec spec;
  spec.layers = {Conv2dSpec{2, 2, 1, 1, 0, false}, FlattenSpec{},
                 DenseSpec{8, 2, false}, SoftmaxHeadSpec{}};
  Network net = init_weights(spec, act("unary_identity(x)"), 3);
  net.weights[0].fill(0.0);
  net.weights[0](0, 0) = 1.0;  // out0 <- in0
  net.weights[0](1, 1) = 1.0;  // out1 <- in1
  Tensor x({1, 2, 2, 2});
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = 0.5 * i - 1.0;
  BatchTrace t = forward(net, x, false);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    CHECK(t.preacts[0].data[i] == x.data[i]);
}

TEST_CASE("zero weights give uniform softmax") {
  NetworkSpec spec = small_mlp(4, 8, 3);
  Network net = init_weights(spec, act("unary_relu(x)"), 4);
  for (auto& w : net.weights) w.fill(0.0);
  Tensor x({2, 4});
  x.data = {1, -2, 3, 4, 0, 1, 2, -1};
  BatchTrace t = forward(net, x, false);
  for (int m = 0; m < 2; ++m)
    for (int c = 0; c < 3; ++c) {
      CHECK(t.logits(m, c) == 0.0);
      CHECK(t.probs(m, c) == doctest::Approx(1.0 / 3));
    }
}

TEST_CASE("head pre-activation gradient is softmax minus onehot") {
  NetworkSpec spec = small_mlp(3, 5, 4);
  Network net = init_weights(spec, act("unary_tanh(x)"), 11);
  Tensor x({2, 3});
  x.data = {0.3, -1.2, 0.7, 1.5, 0.2, -0.4};
  BatchTrace t = forward(net, x, true);
  backward(net, t, {2, 0});
  for (int c = 0; c < 4; ++c) {
    CHECK(t.preact_grads[2].item(0)[c] ==
          doctest::Approx(t.probs(0, c) - (c == 2 ? 1 : 0)).epsilon(1e-12));
    CHECK(t.preact_grads[2].item(1)[c] ==
          doctest::Approx(t.probs(1, c) - (c == 0 ? 1 : 0)).epsilon(1e-12));
  }
}

TEST_CASE("gradients match central finite differences on an MLP") {
  NetworkSpec spec = small_mlp(3, 4, 2);
  for (const char* a : {"unary_identity(x)", "unary_tanh(x)", "unary_swish(x)"}) {
    Network net = init_weights(spec, act(a), 17);
    core::Rng rng(5);
    Tensor x({4, 3});
    for (auto& v : x.data) v = rng.normal();
    std::vector<int> y = {0, 1, 1, 0};

    BatchTrace t = forward(net, x, true);
    backward(net, t, y);

    const double h = 1e-6;
    // bias FD equals the batch-mean pre-activation gradient
    for (int wl = 0; wl < 3; ++wl) {
      for (std::size_t i = 0; i < net.biases[wl].size(); ++i) {
        Network p = net, m = net;
        p.biases[wl][i] += h;
        m.biases[wl][i] -= h;
        const double fd = (mean_loss(p, x, y) - mean_loss(m, x, y)) / (2 * h);
        double ds = 0.0;
        for (int s = 0; s < 4; ++s) ds += t.preact_grads[wl].item(s)[i];
        ds /= 4.0;
        CHECK(std::fabs(ds - fd) <= 1e-5 * std::fmax(1.0, std::fabs(fd)));
      }
      // spot-check a few weights
      for (std::size_t k = 0; k < net.weights[wl].size(); k += 5) {
        Network p = net, m = net;
        p.weights[wl].data()[k] += h;
        m.weights[wl].data()[k] -= h;
        const double fd = (mean_loss(p, x, y) - mean_loss(m, x, y)) / (2 * h);
        // reconstruct dW from the trace: mean over samples of g_o * x_i
        const auto* d = std::get_if<DenseSpec>(&spec.layers[wl]);
        const int o = static_cast<int>(k / d->in), ii = static_cast<int>(k % d->in);
        double dw = 0.0;
        for (int s = 0; s < 4; ++s)
          dw += t.preact_grads[wl].item(s)[o] * t.inputs[wl].item(s)[ii];
        dw /= 4.0;
        CHECK(std::fabs(dw - fd) <= 1e-5 * std::fmax(1.0, std::fabs(fd)));
      }
    }
  }
}

TEST_CASE("conv and depthwise gradients match finite differences") {
  Task task = make_task("tiles", 3);
  Network net = init_weights(task.net, act("unary_tanh(x)"), 23);
  Tensor x({3, 8, 8, 1});
  core::Rng rng(6);
  for (auto& v : x.data) v = rng.normal();
  std::vector<int> y = {0, 2, 1};

  BatchTrace t = forward(net, x, true);
  backward(net, t, y);

  // weighted-layer index -> layer spec (skipping pool/flatten/head entries)
  std::vector<const LayerSpec*> weighted;
  for (const auto& l : task.net.layers)
    if (!std::holds_alternative<GlobalAvgPoolSpec>(l) &&
        !std::holds_alternative<FlattenSpec>(l) &&
        !std::holds_alternative<SoftmaxHeadSpec>(l))
      weighted.push_back(&l);

  const double h = 1e-6;
  for (std::size_t wl = 0; wl < net.weights.size(); ++wl) {
    for (std::size_t k = 0; k < net.weights[wl].size();
         k += std::max<std::size_t>(1, net.weights[wl].size() / 7)) {
      Network p = net, m = net;
      p.weights[wl].data()[k] += h;
      m.weights[wl].data()[k] -= h;
      const double fd = (mean_loss(p, x, y) - mean_loss(m, x, y)) / (2 * h);
      // the per-sample gradients contracted with the expanded patches
      double dw = 0.0;
      if (auto* c = std::get_if<Conv2dSpec>(weighted[wl])) {
        core::Mat cols = im2col(t.inputs[wl], c->kernel, c->stride, c->padding);
        const int o = static_cast<int>(k / cols.cols());
        const std::size_t ii = k % cols.cols();
        for (std::size_t r = 0; r < cols.rows(); ++r)
          dw += t.preact_grads[wl].data[r * c->out_ch + o] * cols(r, ii);
      } else if (auto* dwc = std::get_if<Depthwise2dSpec>(weighted[wl])) {
        core::Mat cols =
            im2col_depthwise(t.inputs[wl], dwc->kernel, dwc->stride, dwc->padding);
        const int ci = static_cast<int>(k / cols.cols());
        const std::size_t ii = k % cols.cols();
        for (std::size_t r = 0; r < cols.rows(); ++r)
          if (static_cast<int>(r % dwc->ch) == ci)
            dw += t.preact_grads[wl].data[r] * cols(r, ii);
      } else if (auto* d = std::get_if<DenseSpec>(weighted[wl])) {
        const int o = static_cast<int>(k / d->in), ii = static_cast<int>(k % d->in);
        for (int s = 0; s < 3; ++s)
          dw += t.preact_grads[wl].item(s)[o] * t.inputs[wl].item(s)[ii];
      }
      dw /= 3.0;
      CHECK(std::fabs(dw - fd) <= 2e-5 * std::fmax(1.0, std::fabs(fd)));
    }
  }
}

TEST_CASE("sampled head gradients average to zero at large sample counts") {
  NetworkSpec spec = small_mlp(3, 4, 3);
  Network net = init_weights(spec, act("unary_tanh(x)"), 31);
  Tensor x({2, 3});
  x.data = {0.5, -0.3, 1.2, -0.7, 0.1, 0.9};
  BatchTrace t = forward(net, x, true);
  const int mc = 10000;
  backward_sampled(net, t, mc, 77);
  REQUIRE(t.preact_grads[2].shape[0] == 2 * mc);
  for (int orig = 0; orig < 2; ++orig) {
    for (int c = 0; c < 3; ++c) {
      double mean = 0.0;
      for (int d = 0; d < mc; ++d)
        mean += t.preact_grads[2].item(d * 2 + orig)[c];
      mean /= mc;
      const double p = t.probs(orig, c);
      const double se = std::sqrt(p * (1 - p) / mc);
      CHECK(std::fabs(mean) <= 3.5 * se + 1e-12);
    }
  }
}

TEST_CASE("negation transform preserves the forward map") {
  core::Rng rng(41);
  Tensor x({6, 8});
  for (auto& v : x.data) v = rng.normal();
  for (int trial = 0; trial < 5; ++trial) {
    const auto id = trial % 2 ? afdsl::SpaceId::kThreeNode : afdsl::SpaceId::kFourNode;
    afdsl::ActivationGraph g = afdsl::graph_at(id, rng.below(afdsl::space_size(id)));
    Network net = init_weights(small_mlp(8, 16, 4), g, 100 + trial);
    for (bool flip : {false, true}) {
      Network neg = negation_transform(net, flip);
      BatchTrace a = forward(net, x, false);
      BatchTrace b = forward(neg, x, false);
      for (std::size_t i = 0; i < a.logits.size(); ++i) {
        const double va = a.logits.data()[i], vb = b.logits.data()[i];
        if (std::isfinite(va) || std::isfinite(vb))
          CHECK(std::fabs(va - vb) <= 1e-12 * std::fmax(1.0, std::fabs(va)));
      }
    }
  }
  // with nonzero biases the exact transform keeps biases unchanged
  Network net = init_weights(small_mlp(8, 16, 4), act("unary_elu(x)"), 7);
  core::Rng rng2(8);
  for (auto& b : net.biases)
    for (auto& v : b) v = rng2.normal();
  Network neg = negation_transform(net, /*flip_biases=*/false);
  BatchTrace a = forward(net, x, false);
  BatchTrace b = forward(neg, x, false);
  for (std::size_t i = 0; i < a.logits.size(); ++i)
    CHECK(a.logits.data()[i] == doctest::Approx(b.logits.data()[i]).epsilon(1e-12));
}

TEST_CASE("training separable blobs reaches the oracle accuracy") {
  Dataset d = separable_blobs(13, 600, 200, 4);
  const double oracle = logistic_regression_accuracy(d);
  CHECK(oracle >= 0.95);  // data really is separable

  NetworkSpec spec = small_mlp(4, 16, 2);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.warmup_epochs = 2;
  cfg.batch_size = 64;
  cfg.seed = 5;

  Network relu_net = init_weights(spec, act("unary_relu(x)"), 55);
  CHECK(train(relu_net, d, cfg).best_val_accuracy >= 0.95);

  Network id_net = init_weights(spec, act("unary_identity(x)"), 55);
  CHECK(train(id_net, d, cfg).best_val_accuracy >= 0.95);
}

TEST_CASE("constant-zero activation trains at chance") {
  Task task = make_task("blobs", 2);
  Network net = init_weights(task.net, act("unary_zero(x)"), 3);
  TrainConfig cfg = task.train_cfg;
  cfg.epochs = 4;
  cfg.warmup_epochs = 1;
  TrainResult r = train(net, task.data, cfg);
  CHECK(r.best_val_accuracy == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("training is deterministic given seed and config") {
  Task task = make_task("blobs", 4);
  TrainConfig cfg = task.train_cfg;
  cfg.epochs = 3;
  cfg.warmup_epochs = 1;
  Network a = init_weights(task.net, act("unary_swish(x)"), 9);
  Network b = init_weights(task.net, act("unary_swish(x)"), 9);
  TrainResult ra = train(a, task.data, cfg);
  TrainResult rb = train(b, task.data, cfg);
  CHECK(ra.best_val_accuracy == rb.best_val_accuracy);
  CHECK(ra.epoch_val_accuracy == rb.epoch_val_accuracy);
}

TEST_CASE("exploding activations are recorded, not raised") {
  NetworkSpec spec = small_mlp(8, 16, 4);
  Network net = init_weights(
      spec, act("unary_exp(unary_exp(unary_exp(unary_square(x))))"), 3);
  for (auto& w : net.weights)
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] *= 50.0;
  Tensor x({4, 8});
  core::Rng rng(2);
  for (auto& v : x.data) v = rng.normal(0.0, 3.0);
  BatchTrace t = forward(net, x, false);
  CHECK(!t.finite);
}

TEST_CASE("IDX and CSV loaders downsample and standardize") {
  // tiny IDX pair: 6 images of 16x16, labels 0/1
  const char* img_path = "/tmp/aqs_test_images.idx";
  const char* lbl_path = "/tmp/aqs_test_labels.idx";
  {
    std::ofstream img(img_path, std::ios::binary);
    auto be32 = [&](std::uint32_t v) {
      char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
      img.write(b, 4);
    };
    be32(0x803);
    be32(6);
    be32(16);
    be32(16);
    for (int i = 0; i < 6; ++i)
      for (int p = 0; p < 256; ++p) {
        unsigned char v = static_cast<unsigned char>((i * 40 + p) % 256);
        img.write(reinterpret_cast<char*>(&v), 1);
      }
    std::ofstream lbl(lbl_path, std::ios::binary);
    auto be32l = [&](std::uint32_t v) {
      char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
      lbl.write(b, 4);
    };
    be32l(0x801);
    be32l(6);
    for (int i = 0; i < 6; ++i) {
      unsigned char v = i % 2;
      lbl.write(reinterpret_cast<char*>(&v), 1);
    }
  }
  Dataset d = load_idx(img_path, lbl_path, 4, 2);
  CHECK(d.train_x.shape == std::vector<int>{4, 8, 8, 1});
  CHECK(d.val_x.shape == std::vector<int>{2, 8, 8, 1});
  CHECK(d.num_classes == 2);

  const char* csv_path = "/tmp/aqs_test_data.csv";
  {
    std::ofstream csv(csv_path);
    for (int i = 0; i < 5; ++i) {
      csv << (i % 2);
      for (int p = 0; p < 16; ++p) csv << "," << (i + p * 0.1);
      csv << "\n";
    }
  }
  Dataset c = load_csv(csv_path, 3, 2);
  CHECK(c.train_x.shape == std::vector<int>{3, 8, 8, 1});
  CHECK(c.num_classes == 2);
}

TEST_CASE("tiles task is learnable by relu at short budgets") {
  Task task = make_task("tiles", 6);
  TrainConfig cfg = task.train_cfg;
  cfg.epochs = 6;
  cfg.warmup_epochs = 1;
  Network net = init_weights(task.net, act("unary_relu(x)"), 12);
  TrainResult r = train(net, task.data, cfg);
  CHECK(r.best_val_accuracy > 0.5);  // chance is 0.25
}
