#include <catch2/catch_amalgamated.hpp>

#include "ccmp/message.hpp"

using namespace ccmp;

TEST_CASE("message products", "[message]") {
  SECTION("uninformative is the neutral element") {
    MessageProduct p;
    p.multiply_by(Uninformative{});
    p.multiply_by(GaussianMsg{Gaussian1D(2.0, 3.0)});
    p.multiply_by(Uninformative{});
    const Gaussian1D belief = p.belief();
    CHECK(belief.mean() == Catch::Approx(2.0));
    CHECK(belief.variance() == Catch::Approx(3.0));
  }
  SECTION("point masses dominate Gaussian factors") {
    MessageProduct p;
    p.multiply_by(GaussianMsg{Gaussian1D(0.0, 1.0)});
    p.multiply_by(PointMass{1.5});
    REQUIRE(is_point_mass(p.message()));
    CHECK(std::get<PointMass>(p.message()).value == 1.5);
    CHECK_THROWS_AS(p.belief(), InferenceError);
  }
  SECTION("conflicting point masses are rejected") {
    MessageProduct p;
    p.multiply_by(PointMass{1.0});
    CHECK_THROWS_AS(p.multiply_by(PointMass{2.0}), InferenceError);
  }
  SECTION("improper carriers recombine into proper beliefs") {
    MessageProduct p;
    p.multiply_by(ImproperGaussian{{-1.0, 0.5}});
    p.multiply_by(GaussianMsg{Gaussian1D(0.0, 0.25)});  // precision 4
    const Gaussian1D belief = p.belief();
    CHECK(belief.variance() == Catch::Approx(1.0 / 3.0));
    CHECK(belief.mean() == Catch::Approx(0.5 / 3.0));
  }
  SECTION("an empty or flat product has no belief") {
    MessageProduct p;
    CHECK(is_uninformative(p.message()));
    CHECK_THROWS_AS(p.belief(), InferenceError);
  }
}

TEST_CASE("division results classify into message forms", "[message]") {
  CHECK(is_gaussian(message_from_canonical({2.0, 1.0})));
  CHECK(is_uninformative(message_from_canonical({0.0, 0.0})));
  // A pure linear tilt carries no usable shape.
  CHECK(is_uninformative(message_from_canonical({0.0, 0.7})));
  CHECK(is_improper(message_from_canonical({-0.5, 0.0})));
}
