#include "doctest.h"

#include "statlens/serialize.hpp"

#include "support/test_helpers.hpp"

using namespace statlens;
using namespace statlens::testing;

TEST_CASE("distributions round-trip through JSON in both modes") {
  SplitMix64 rng(110);
  const FiniteSpace x = make_space("x", 5);

  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_rational_dist(rng, x);
    const auto parsed = dist_from_json<Rat>(Json::parse(dist_to_json(d).dump()));
    CHECK(parsed == d);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_float_dist(rng, x);
    const auto parsed = dist_from_json<double>(Json::parse(dist_to_json(d).dump()));
    CHECK(parsed.weights() == d.weights());
  }
}

TEST_CASE("rational weights are p/q strings, float weights are numbers") {
  const FiniteSpace bit = binary_space();
  const auto j = dist_to_json(Dist<Rat>(bit, {Rat(1, 3), Rat(2, 3)}));
  CHECK(j["weights"]["0"] == "1/3");
  CHECK(j["weights"]["1"] == "2/3");

  const auto jf = dist_to_json(Dist<double>(bit, {0.25, 0.75}));
  CHECK(jf["weights"]["0"].is_number());

  // cross-mode decoding is rejected
  CHECK_THROWS_AS(dist_from_json<double>(j), InvalidValue);
  CHECK_THROWS_AS(dist_from_json<Rat>(jf), InvalidValue);
}

TEST_CASE("missing weights mean zero, unknown keys are rejected") {
  const Json j = {{"space", {"a", "b", "c"}}, {"weights", {{"a", "1/2"}, {"c", "1/2"}}}};
  const auto d = dist_from_json<Rat>(j);
  CHECK(d.weight("b") == Rat(0));

  const Json bad = {{"space", {"a", "b"}}, {"weights", {{"z", "1"}}}};
  CHECK_THROWS_AS(dist_from_json<Rat>(bad), UnknownOutcome);

  // weights and rows must be objects
  CHECK_THROWS_AS(dist_from_json<Rat>(Json{{"space", {"a"}}, {"weights", "1"}}), InvalidValue);
  CHECK_THROWS_AS(kernel_from_json<Rat>(
                      Json{{"dom", {"a"}}, {"cod", {"b"}}, {"rows", {{"a", "oops"}}}}),
                  InvalidValue);
}

TEST_CASE("kernels round-trip and partial kernels drop undefined rows") {
  SplitMix64 rng(111);
  const FiniteSpace x = make_space("x", 3);
  const FiniteSpace y = make_space("y", 4);
  const auto k = random_rational_kernel(rng, x, y);
  CHECK(kernel_from_json<Rat>(Json::parse(kernel_to_json(k).dump())) == k);

  // a posterior with an unsupported observation serializes only its defined
  // rows; reloading such a kernel fails the totality requirement
  const Kernel<Rat> c(binary_space(), y,
                      std::vector<Dist<Rat>>{Dist<Rat>(y, {Rat(1, 2), Rat(1, 2), Rat(0), Rat(0)}),
                                             Dist<Rat>(y, {Rat(1, 4), Rat(3, 4), Rat(0), Rat(0)})});
  const auto posterior = invert(c, Dist<Rat>::uniform(binary_space())).posterior;
  const auto j = kernel_to_json(posterior);
  CHECK(j["rows"].size() == 2);
  CHECK_THROWS_AS(kernel_from_json<Rat>(j), InvalidValue);
}

TEST_CASE("exact lenses serialize as their forward channel") {
  SplitMix64 rng(112);
  const FiniteSpace x = make_space("x", 3);
  const FiniteSpace y = make_space("y", 2);
  const auto lens = exact_lens(random_rational_kernel(rng, x, y, true));
  const auto j = exact_lens_to_json(lens);
  CHECK(j["tag"] == "exact");

  const auto reloaded = lens_from_json<Rat>(Json::parse(j.dump()));
  CHECK(reloaded.forward() == lens.forward());
  const auto pi = random_rational_dist(rng, x, true);
  CHECK(reloaded.backward().at(pi) == lens.backward().at(pi));

  CHECK_THROWS_AS(lens_from_json<Rat>(Json{{"tag", "mystery"}}), InvalidValue);
}

TEST_CASE("the unit space encodes as the empty array") {
  CHECK(space_to_json(FiniteSpace::unit()) == Json::array());
  CHECK(space_from_json(Json::array(), "I").is_unit());
  const auto x = space_from_json(Json{"a", "b"}, "X");
  CHECK(x.size() == 2);
}
