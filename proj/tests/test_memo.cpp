#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "seeker/memo.hpp"
#include "seeker/rng.hpp"

using namespace seeker;

namespace {

SampleWindow window_of(std::vector<float> vals, int cols = 1) {
  SampleWindow w;
  w.cols = cols;
  w.rows = static_cast<int>(vals.size()) / cols;
  w.points = std::move(vals);
  return w;
}

}  // namespace

TEST_CASE("pearson reference value") {
  const std::vector<float> a{1, 2, 3, 4};
  const std::vector<float> b{1, 2, 3, 10};
  // sab=14, saa=5, sbb=50 -> 14/sqrt(250)
  CHECK(memo::pearson(a, b) == Catch::Approx(0.8854377448471462).epsilon(0).margin(1e-15));
}

TEST_CASE("pearson identities") {
  Rng rng(11);
  std::vector<float> a(250);
  for (auto& v : a) v = static_cast<float>(rng.next_normal());

  CHECK(memo::pearson(a, a) == Catch::Approx(1.0).epsilon(0).margin(1e-12));

  std::vector<float> scaled(a.size()), negated(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    scaled[i] = 2.0f * a[i] + 3.0f;
    negated[i] = -a[i];
  }
  CHECK(memo::pearson(a, scaled) == Catch::Approx(1.0).epsilon(0).margin(1e-9));
  CHECK(memo::pearson(a, negated) == Catch::Approx(-1.0).epsilon(0).margin(1e-12));

  SECTION("symmetric in its arguments") {
    std::vector<float> b(a.size());
    for (auto& v : b) v = static_cast<float>(rng.next_normal());
    CHECK(memo::pearson(a, b) == memo::pearson(b, a));
  }
}

TEST_CASE("pearson degenerate inputs") {
  const std::vector<float> flat{2, 2, 2, 2};
  const std::vector<float> ramp{1, 2, 3, 4};
  CHECK(!memo::pearson_opt(flat, ramp).has_value());
  CHECK(!memo::pearson_opt(ramp, flat).has_value());
  CHECK_THROWS_AS(memo::pearson(flat, ramp), memo::ConstantInput);

  const std::vector<float> three{1, 2, 3};
  CHECK_THROWS_AS(memo::pearson(ramp, three), std::invalid_argument);
  const std::vector<float> one{1};
  CHECK_THROWS_AS(memo::pearson(one, one), std::invalid_argument);
}

TEST_CASE("template store grows on demand") {
  memo::TemplateStore store;
  CHECK(store.classes() == 0);
  store.set(3, window_of({1, 2, 3, 4}));
  CHECK(store.classes() == 4);
  CHECK(!store.templates[0].has_value());
  CHECK(store.templates[3].has_value());
  CHECK_THROWS_AS(store.set(-1, window_of({1, 2})), std::invalid_argument);
}

TEST_CASE("template matching honors threshold, ties, and shape") {
  memo::TemplateStore store;
  store.set(0, window_of({1, 2, 3, 4}));
  store.set(1, window_of({4, 3, 2, 1}));

  SECTION("exact and affine matches clear the default threshold") {
    const auto hit = memo::match_template(store, window_of({2, 4, 6, 8}));
    REQUIRE(hit.has_value());
    CHECK(hit->first == 0);
    CHECK(hit->second == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("the threshold is inclusive") {
    const auto query = window_of({1, 2, 3, 4});
    const auto exact = memo::match_template(store, query, 1.0);
    REQUIRE(exact.has_value());
    CHECK(exact->first == 0);
    // Marginally above 1.0 can never be reached.
    CHECK(!memo::match_template(store, window_of({1, 2, 3, 3.9f}), 1.0).has_value());
  }

  SECTION("ties go to the lowest class index") {
    memo::TemplateStore dup;
    dup.set(0, window_of({1, 2, 3, 4}));
    dup.set(1, window_of({1, 2, 3, 4}));
    dup.set(2, window_of({2, 4, 6, 8}));  // also correlation 1.0
    const auto hit = memo::match_template(dup, window_of({1, 2, 3, 4}));
    REQUIRE(hit.has_value());
    CHECK(hit->first == 0);
  }

  SECTION("a strictly better late match replaces an early one") {
    memo::TemplateStore mixed;
    mixed.set(0, window_of({1, 2, 3, 3}));  // high but imperfect vs ramp
    mixed.set(1, window_of({1, 2, 3, 4}));
    const auto hit = memo::match_template(mixed, window_of({1, 2, 3, 4}), 0.5);
    REQUIRE(hit.has_value());
    CHECK(hit->first == 1);
  }

  SECTION("shape mismatches are skipped, not errors") {
    memo::TemplateStore shaped;
    shaped.set(0, window_of({1, 2, 3, 4, 5, 6}, 2));  // 3x2
    shaped.set(1, window_of({1, 2, 3, 4}));           // 4x1
    const auto hit = memo::match_template(shaped, window_of({1, 2, 3, 4}), 0.9);
    REQUIRE(hit.has_value());
    CHECK(hit->first == 1);
  }

  SECTION("constant queries and constant templates never match") {
    CHECK(!memo::match_template(store, window_of({5, 5, 5, 5})).has_value());
    memo::TemplateStore flat;
    flat.set(0, window_of({5, 5, 5, 5}));
    CHECK(!memo::match_template(flat, window_of({1, 2, 3, 4})).has_value());
  }

  SECTION("anti-correlation does not match") {
    memo::TemplateStore ramp_only;
    ramp_only.set(0, window_of({1, 2, 3, 4}));
    CHECK(!memo::match_template(ramp_only, window_of({4, 3, 2, 1}), 0.95).has_value());
  }
}
