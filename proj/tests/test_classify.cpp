#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "seeker/classify.hpp"
#include "seeker/rng.hpp"

using namespace seeker;
using Catch::Approx;

namespace {

SampleWindow window_1d(std::vector<float> vals) {
  SampleWindow w;
  w.rows = static_cast<int>(vals.size());
  w.cols = 1;
  w.points = std::move(vals);
  return w;
}

struct Blobs {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};

// Well-separated Gaussian blobs: class c centered at c*10 on every axis.
Blobs make_blobs(int classes, int per_class, int dim, std::uint64_t seed) {
  Blobs b;
  Rng rng(seed);
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      std::vector<double> x(dim);
      for (int d = 0; d < dim; ++d) x[d] = c * 10.0 + 0.5 * rng.next_normal();
      b.features.push_back(std::move(x));
      b.labels.push_back(c);
    }
  return b;
}

classify::TrainOptions quick_opts(std::uint64_t seed = 1) {
  classify::TrainOptions opt;
  opt.epochs = 60;
  opt.batch_size = 16;
  opt.learning_rate = 0.05;
  opt.hidden_dim = 16;
  opt.seed = seed;
  return opt;
}

}  // namespace

TEST_CASE("feature extraction reference values") {
  const auto w = window_1d({1, 2, 3, 10});
  const auto f = classify::extract_features(w);
  REQUIRE(f.size() == 8);
  CHECK(f[0] == Approx(4.0).epsilon(0).margin(1e-15));                 // mean
  CHECK(f[1] == Approx(3.5355339059327378).epsilon(0).margin(1e-12));  // population std
  CHECK(f[2] == 1.0);                                                  // min
  CHECK(f[3] == 10.0);                                                 // max
  CHECK(f[4] == Approx(5.3385391260156556).epsilon(0).margin(1e-12));  // rms
  CHECK(f[5] == Approx(2.5).epsilon(0).margin(1e-15));                 // median
  CHECK(f[6] == Approx(3.0).epsilon(0).margin(1e-12));                 // iqr
  CHECK(f[7] == Approx(0.5).epsilon(0).margin(1e-15));                 // crossing rate

  SECTION("channels are laid out in order") {
    SampleWindow two;
    two.rows = 4;
    two.cols = 2;
    two.points = {1, 0, 2, 0, 3, 1, 10, 1};
    const auto g = classify::extract_features(two);
    REQUIRE(g.size() == 16);
    for (int i = 0; i < 8; ++i) CHECK(g[i] == Approx(f[i]).epsilon(0).margin(1e-12));
    CHECK(g[8] == Approx(0.5));  // second channel mean
  }
}

TEST_CASE("features ignore sample order") {
  Rng rng(42);
  SampleWindow w;
  w.rows = 30;
  w.cols = 2;
  for (int i = 0; i < 60; ++i) w.points.push_back(static_cast<float>(rng.next_normal()));

  auto shuffled = w;
  for (int r = w.rows - 1; r > 0; --r) {
    const int j = static_cast<int>(rng.next_index(r + 1));
    for (int c = 0; c < w.cols; ++c) std::swap(shuffled.at(r, c), shuffled.at(j, c));
  }

  const auto a = classify::extract_features(w);
  const auto b = classify::extract_features(shuffled);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] == Approx(b[i]).epsilon(0).margin(1e-12));
}

TEST_CASE("feature extraction rejects bad windows") {
  CHECK_THROWS_AS(classify::extract_features(window_1d({1})), std::invalid_argument);
  SampleWindow broken;
  broken.rows = 4;
  broken.cols = 1;
  broken.points = {1, 2};  // size mismatch
  CHECK_THROWS_AS(classify::extract_features(broken), std::invalid_argument);
}

TEST_CASE("training is deterministic and learns separable data") {
  const auto blobs = make_blobs(3, 40, 4, 7);

  classify::TrainReport report;
  const auto m = classify::train_model(blobs.features, blobs.labels, 3, quick_opts(), &report);
  CHECK(report.train_accuracy == 1.0);
  CHECK(report.final_loss < 0.1);

  SECTION("same options reproduce the exact model") {
    const auto again = classify::train_model(blobs.features, blobs.labels, 3, quick_opts());
    CHECK(classify::model_digest(again) == classify::model_digest(m));
    const auto other = classify::train_model(blobs.features, blobs.labels, 3, quick_opts(2));
    CHECK(classify::model_digest(other) != classify::model_digest(m));
  }

  SECTION("held-out points classify correctly with sane confidence") {
    for (int c = 0; c < 3; ++c) {
      std::vector<double> probe(4, c * 10.0 + 0.2);
      const auto [cls, conf] = classify::infer(m, probe);
      CHECK(cls == c);
      CHECK(conf > 0.34);
      CHECK(conf <= 1.0);
    }
  }

  SECTION("feature dimension is checked at inference") {
    CHECK_THROWS_AS(classify::infer(m, std::vector<double>{1.0}), std::invalid_argument);
  }
}

TEST_CASE("training input validation") {
  const auto blobs = make_blobs(2, 10, 3, 1);

  CHECK_THROWS_AS(classify::train_model({}, {}, 2), std::invalid_argument);
  CHECK_THROWS_AS(classify::train_model(blobs.features, std::vector<int>(3, 0), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(classify::train_model(blobs.features, blobs.labels, 1), classify::SingleClassInput);

  SECTION("labels that collapse to one class refuse to train") {
    auto flat = blobs.labels;
    std::fill(flat.begin(), flat.end(), 1);
    CHECK_THROWS_AS(classify::train_model(blobs.features, flat, 2), classify::SingleClassInput);
  }

  SECTION("out-of-range labels refuse") {
    auto bad = blobs.labels;
    bad[0] = 5;
    CHECK_THROWS_AS(classify::train_model(blobs.features, bad, 2), std::invalid_argument);
  }

  SECTION("ragged features refuse") {
    auto ragged = blobs.features;
    ragged[3].pop_back();
    CHECK_THROWS_AS(classify::train_model(ragged, blobs.labels, 2), std::invalid_argument);
  }
}

TEST_CASE("power-of-two quantization") {
  const auto blobs = make_blobs(3, 40, 4, 9);
  const auto m = classify::train_model(blobs.features, blobs.labels, 3, quick_opts());

  SECTION("bit widths set the code range") {
    const auto f16 = classify::quantize_model(m, 16, blobs.features);
    CHECK(f16.qmax == 32767);
    const auto f12 = classify::quantize_model(m, 12, blobs.features);
    CHECK(f12.qmax == 2047);
    CHECK_THROWS_AS(classify::quantize_model(m, 11, blobs.features), std::invalid_argument);
    CHECK_THROWS_AS(classify::quantize_model(m, 16, {}), std::invalid_argument);
  }

  SECTION("auto exponents never saturate the weights") {
    classify::FixedStats stats;
    const auto f = classify::quantize_model(m, 16, blobs.features, &stats);
    CHECK(stats.weight_sats == 0);
    std::int32_t peak = 0;
    for (auto v : f.w1) peak = std::max(peak, std::abs(v));
    CHECK(peak <= f.qmax);
    CHECK(peak > f.qmax / 2);  // tight exponent: top half of the range is used
  }

  SECTION("fixed inference tracks the float model") {
    const auto f16 = classify::quantize_model(m, 16, blobs.features);
    const auto f12 = classify::quantize_model(m, 12, blobs.features);
    int agree16 = 0, agree12 = 0;
    for (const auto& x : blobs.features) {
      const int ref = classify::infer(m, x).first;
      if (classify::infer_fixed(f16, x).first == ref) ++agree16;
      if (classify::infer_fixed(f12, x).first == ref) ++agree12;
    }
    const int n = static_cast<int>(blobs.features.size());
    CHECK(agree16 >= n * 95 / 100);
    CHECK(agree12 >= n * 90 / 100);
    CHECK(agree16 >= agree12);

    const auto [cls, conf] = classify::infer_fixed(f16, blobs.features[0]);
    CHECK(cls == blobs.labels[0]);
    CHECK(conf > 0.0);
    CHECK(conf <= 1.0);
    CHECK_THROWS_AS(classify::infer_fixed(f16, std::vector<double>{1.0}), std::invalid_argument);
  }
}

TEST_CASE("canonical coreset vectors sort, pad, and truncate") {
  QuantSpec spec;
  spec.min_v = {0.0};
  spec.max_v = {1.0};
  spec.radius_max = 1.0;

  std::vector<coreset::QuantCluster> clusters{{65535, 255}, {0, 51}};
  const auto v = classify::canonical_coreset_vector(clusters, spec, 3);
  REQUIRE(v.size() == 6);  // pad_k * (D + 1)
  CHECK(v[0] == Approx(0.0));
  CHECK(v[1] == Approx(51.0 / 255.0));
  CHECK(v[2] == Approx(1.0));
  CHECK(v[3] == Approx(1.0));
  CHECK(v[4] == 0.0);
  CHECK(v[5] == 0.0);

  SECTION("oversized coresets keep the first pad_k sorted clusters") {
    const auto t = classify::canonical_coreset_vector(clusters, spec, 1);
    CHECK(t == std::vector<double>{0.0, 51.0 / 255.0});
  }

  SECTION("equal centers order by radius") {
    std::vector<coreset::QuantCluster> same{{100, 200}, {100, 10}};
    const auto s = classify::canonical_coreset_vector(same, spec, 2);
    CHECK(s[1] == Approx(10.0 / 255.0));
    CHECK(s[3] == Approx(200.0 / 255.0));
  }
}

TEST_CASE("ensemble vote weighs confidence by sensor reliability") {
  const std::vector<classify::SensorReport> reports{
      {0, 1, 0.9, Strategy::D2},
      {1, 0, 0.9, Strategy::D2},
      {2, 1, 0.6, Strategy::D3},
  };
  const std::vector<double> weights{1.0, 0.9, 0.9};
  // class 1 scores 0.9*1.0 + 0.6*0.9 = 1.44 against class 0's 0.81
  CHECK(classify::ensemble(reports, weights) == 1);

  SECTION("exact ties resolve to the lowest class") {
    const std::vector<classify::SensorReport> tied{
        {0, 0, 0.5, Strategy::D2},
        {1, 1, 0.5, Strategy::D2},
    };
    CHECK(classify::ensemble(tied, std::vector<double>{1.0, 1.0}) == 0);
  }

  SECTION("invalid reports throw") {
    CHECK_THROWS_AS(classify::ensemble({}, weights), std::invalid_argument);
    const std::vector<classify::SensorReport> oob{{7, 0, 0.5, Strategy::D2}};
    CHECK_THROWS_AS(classify::ensemble(oob, weights), std::invalid_argument);
    const std::vector<classify::SensorReport> neg{{0, -1, 0.5, Strategy::D2}};
    CHECK_THROWS_AS(classify::ensemble(neg, weights), std::invalid_argument);
  }
}

TEST_CASE("template store selection picks the most central exemplar") {
  std::vector<SampleWindow> windows;
  auto add = [&](std::vector<float> vals, int label) {
    auto w = window_1d(std::move(vals));
    w.label = label;
    windows.push_back(std::move(w));
  };
  // Class 0: the middle window correlates positively with one peer and
  // negatively with the other two's mutual anti-correlation pulling them down.
  add({1, 2, 3, 4}, 0);
  add({1, 2, 3, 4.5f}, 0);
  add({4, 3, 2, 1}, 0);
  // Class 1: a single window is its own template.
  add({5, 1, 5, 1}, 1);

  const auto store = classify::build_template_store(windows, 3);
  REQUIRE(store.classes() == 3);
  REQUIRE(store.templates[0].has_value());
  CHECK(store.templates[0]->points == std::vector<float>{1, 2, 3, 4.5f});
  REQUIRE(store.templates[1].has_value());
  CHECK(store.templates[1]->points == std::vector<float>{5, 1, 5, 1});
  CHECK(!store.templates[2].has_value());
}

TEST_CASE("model serialization round trips") {
  const auto blobs = make_blobs(2, 15, 3, 3);
  auto opt = quick_opts();
  opt.epochs = 20;
  const auto m = classify::train_model(blobs.features, blobs.labels, 2, opt);

  std::vector<std::uint8_t> buf;
  classify::write_model(buf, m);
  binio::Reader r(buf);
  const auto back = classify::read_model(r);
  CHECK(classify::model_digest(back) == classify::model_digest(m));
  CHECK(back.input_dim == m.input_dim);
  CHECK(back.w1 == m.w1);
  CHECK(back.b2 == m.b2);

  SECTION("fixed models survive the trip bit-for-bit") {
    const auto f = classify::quantize_model(m, 12, blobs.features);
    std::vector<std::uint8_t> fbuf;
    classify::write_fixed_model(fbuf, f);
    binio::Reader fr(fbuf);
    const auto fback = classify::read_fixed_model(fr);
    CHECK(fback.bits == f.bits);
    CHECK(fback.qmax == f.qmax);
    CHECK(fback.e_in == f.e_in);
    CHECK(fback.e_h == f.e_h);
    CHECK(fback.w1 == f.w1);
    CHECK(fback.b1 == f.b1);
    CHECK(fback.w2 == f.w2);
    CHECK(fback.b2 == f.b2);

    const auto a = classify::infer_fixed(f, blobs.features[5]);
    const auto b = classify::infer_fixed(fback, blobs.features[5]);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}
