#include <doctest.h>

#include "qslice/catalog.hpp"
#include "qslice/errors.hpp"

using namespace qslice;

TEST_CASE("builtin catalog rates come from frame size and period") {
  const auto c = builtin_factory_catalog();
  REQUIRE(c.size() == 4);
  // 15 B every 50 ms, 50 B every 0.5 ms, 30 B every 2 ms, 15 B every 5 ms.
  CHECK(c.rate(0) == doctest::Approx(15 * 8 / 0.050));
  CHECK(c.rate(1) == doctest::Approx(50 * 8 / 0.0005));
  CHECK(c.rate(2) == doctest::Approx(30 * 8 / 0.002));
  CHECK(c.rate(3) == doctest::Approx(15 * 8 / 0.005));
  CHECK(c.rate(0) == 2400.0);
  CHECK(c.rate(1) == 800000.0);
  CHECK(c.rate(2) == 120000.0);
  CHECK(c.rate(3) == 24000.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.probability(i) == 0.25);
  CHECK(mean_rate(c) == doctest::Approx((2400.0 + 800000.0 + 120000.0 + 24000.0) / 4.0));
  CHECK(c.type(0).name == "manufacturing cell");
  CHECK(c.type(1).transmission_period_ms == 0.5);
}

TEST_CASE("catalog rejects malformed input") {
  auto types = builtin_factory_catalog().types();
  CHECK_THROWS_AS(Catalog(types, {0.5, 0.5, 0.5}), InvalidInput);
  CHECK_THROWS_AS(Catalog(types, {0.3, 0.3, 0.3, 0.3}), InvalidInput);
  CHECK_THROWS_AS(Catalog(types, {-0.1, 0.4, 0.4, 0.3}), InvalidInput);
  CHECK_THROWS_AS(Catalog({}, {}), InvalidInput);

  auto bad_period = types;
  bad_period[2].transmission_period_ms = 0.0;
  CHECK_THROWS_AS(Catalog(bad_period, {0.25, 0.25, 0.25, 0.25}), InvalidInput);

  auto bad_frame = types;
  bad_frame[0].frame_size_bytes = 0;
  CHECK_THROWS_AS(Catalog(bad_frame, {0.25, 0.25, 0.25, 0.25}), InvalidInput);

  auto bad_id = types;
  bad_id[3].id = 7;
  CHECK_THROWS_AS(Catalog(bad_id, {0.25, 0.25, 0.25, 0.25}), InvalidInput);
}

TEST_CASE("with_probabilities keeps the types") {
  const auto c = builtin_factory_catalog().with_probabilities({1.0, 0.0, 0.0, 0.0});
  CHECK(c.probability(0) == 1.0);
  CHECK(mean_rate(c) == 2400.0);
  CHECK(c.rate(1) == 800000.0);
}

TEST_CASE("catalog JSON round trip") {
  const auto c = builtin_factory_catalog();
  const auto back = catalog_from_json(catalog_to_json(c));
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back.type(i).name == c.type(i).name);
    CHECK(back.rate(i) == c.rate(i));
    CHECK(back.probability(i) == c.probability(i));
  }
}

TEST_CASE("catalog JSON validation") {
  using nlohmann::json;
  const json two = {{"types",
                     {{{"name", "a"}, {"transmission_period_ms", 10.0}, {"frame_size_bytes", 10}},
                      {{"name", "b"}, {"transmission_period_ms", 1.0}, {"frame_size_bytes", 100}}}},
                    {"type_probabilities", {0.75, 0.25}}};
  const auto c = catalog_from_json(two);
  CHECK(c.size() == 2);
  CHECK(c.rate(0) == 8000.0);
  CHECK(c.rate(1) == 800000.0);

  auto unknown = two;
  unknown["colour"] = "blue";
  CHECK_THROWS_AS(catalog_from_json(unknown), InvalidInput);

  auto unknown_type_key = two;
  unknown_type_key["types"][0]["speed"] = 3;
  CHECK_THROWS_AS(catalog_from_json(unknown_type_key), InvalidInput);

  auto fractional_frame = two;
  fractional_frame["types"][1]["frame_size_bytes"] = 1.5;
  CHECK_THROWS_AS(catalog_from_json(fractional_frame), InvalidInput);

  auto missing_period = two;
  missing_period["types"][0].erase("transmission_period_ms");
  CHECK_THROWS_AS(catalog_from_json(missing_period), InvalidInput);

  CHECK_THROWS_AS(catalog_from_json(json::array()), InvalidInput);
}
