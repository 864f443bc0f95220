#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "stit/config.hpp"
#include "stit/error.hpp"
#include "stit/io.hpp"
#include "stit/simulator.hpp"

namespace stit {
namespace {

TessellationState small_state(std::uint64_t seed) {
  const auto m = HyperplaneMeasure::isotropic(2.0 * std::numbers::pi, 2);
  RandomStream rng(seed, 0);
  return simulate(m, Window(1.0, 2), 2.0, rng);
}

TEST(CsvField, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(csv_field(""), "");
}

TEST(TessellationJson, RoundTripPreservesCells) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto t = to_tessellation(small_state(seed));
    const std::string text = tessellation_json(t);
    const auto back = tessellation_from_json(text);
    ASSERT_EQ(back.cells.size(), t.cells.size());
    EXPECT_NEAR(total_volume(back), 4.0, 1e-9);
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
      EXPECT_NEAR(back.cells[i].volume(), t.cells[i].volume(), 1e-12);
      ASSERT_EQ(back.cells[i].facets().size(), t.cells[i].facets().size());
      for (const Facet& f : back.cells[i].facets()) {
        const auto& orig = t.cells[i].facets();
        const auto same = std::find_if(orig.begin(), orig.end(), [&](const Facet& g) {
          return g.tag.to_string() == f.tag.to_string() && (g.normal - f.normal).norm() < kGeomEps &&
                 std::abs(g.offset - f.offset) < kGeomEps;
        });
        EXPECT_NE(same, orig.end()) << f.tag.to_string();
      }
    }
    // Normals are rebuilt from the stored vertices (short edges lose a few
    // digits), so text is a fixed point from the second write on.
    const std::string again = tessellation_json(back);
    EXPECT_EQ(tessellation_json(tessellation_from_json(again)), again);
  }
}

TEST(SnapshotJson, ReadsBackAsTessellation) {
  const auto state = small_state(4);
  const auto t = tessellation_from_json(snapshot_json(state));
  EXPECT_EQ(t.cells.size(), state.live_count());
  const auto direct = tessellation_from_json(tessellation_json(to_tessellation(state)));
  EXPECT_EQ(tessellation_json(t), tessellation_json(direct));
}

TEST(TessellationJson, RejectsMalformedInput) {
  EXPECT_THROW(tessellation_from_json("not json"), DomainError);
  EXPECT_THROW(tessellation_from_json("{\"format\": \"other\"}"), DomainError);
}

TEST(Svg, Version11WithOnePolygonPerCell) {
  const auto t = to_tessellation(small_state(5));
  std::ostringstream out;
  write_svg(out, t);
  const std::string svg = out.str();
  EXPECT_NE(svg.find("<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\""), std::string::npos);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
  std::size_t polygons = 0;
  for (auto p = svg.find("<polygon"); p != std::string::npos; p = svg.find("<polygon", p + 1)) ++polygons;
  EXPECT_GE(polygons, t.cells.size());
}

TEST(Svg, RejectsNonPlanar) {
  const auto m = HyperplaneMeasure::axis_parallel(6.0, 3);
  RandomStream rng(1, 0);
  const auto state = simulate(m, Window(1.0, 3), 0.5, rng);
  std::ostringstream out;
  EXPECT_THROW(write_svg(out, to_tessellation(state)), DomainError);
}

TEST(Config, DefaultsAreValid) {
  const RunConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(parse_config("{}").seed, c.seed);
}

TEST(Config, RoundTripThroughJson) {
  RunConfig c = parse_config(R"({"measure": {"kind": "axis_parallel", "gamma": 4, "dim": 3},
                                 "a": 0.5, "b": 2, "t": 1, "s": 0.25, "seed": 99,
                                 "b_grid": [1, 2, 3]})");
  EXPECT_EQ(c.measure.kind, "axis_parallel");
  EXPECT_EQ(c.measure.dim, 3);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_NO_THROW(validate(c));
  const std::string text = config_json(c);
  EXPECT_EQ(config_json(parse_config(text)), text);
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  EXPECT_THROW(parse_config(R"({"replicate": 10})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"measure": {"kind": "isotropic", "gama": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"a": "one"})"), ConfigError);
  EXPECT_THROW(parse_config("{"), ConfigError);
}

TEST(Config, CrossFieldValidation) {
  auto bad = [](const char* text) { EXPECT_THROW(validate(parse_config(text)), ConfigError) << text; };
  bad(R"({"a": 4, "b": 2})");
  bad(R"({"a": 0, "b": 2})");
  bad(R"({"s": 1, "t": 0.5})");
  bad(R"({"replicates": 0})");
  bad(R"({"b_grid": [4, 3]})");
  bad(R"({"b_grid": [0.5, 3]})");
  bad(R"({"margin": 1})");
  bad(R"({"measure": {"dim": 5}})");
  bad(R"({"measure": {"gamma": -1}})");
  bad(R"({"measure": {"kind": "cubic"}})");
}

TEST(Config, InvalidThetaOnlyRejectedWhenRequired) {
  const auto c = parse_config(R"({"measure": {"kind": "discrete", "gamma": 4,
      "atoms": [{"direction": [1, 0], "weight": 0.75}, {"direction": [-1, 0], "weight": 0.25},
                {"direction": [0, 1], "weight": 0.0}]}})");
  EXPECT_THROW(validate(c, true), ConfigError);
  EXPECT_NO_THROW(validate(c, false));
  EXPECT_FALSE(c.measure.theta().violations().empty());
}

TEST(Config, DiscreteAtomsAreNormalized) {
  const auto c = parse_config(R"({"measure": {"kind": "discrete", "gamma": 4,
      "atoms": [{"direction": [2, 0], "weight": 0.25}, {"direction": [-2, 0], "weight": 0.25},
                {"direction": [0, 3], "weight": 0.25}, {"direction": [0, -3], "weight": 0.25}]}})");
  EXPECT_NO_THROW(validate(c));
  const auto m = c.measure.build();
  EXPECT_NEAR(lambda_hit(m, Window(1.0, 2).polytope()), 4.0, 1e-12);
}

}  // namespace
}  // namespace stit
