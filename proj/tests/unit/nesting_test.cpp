#include "stit/nesting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "stit/error.hpp"

namespace stit {
namespace {

HyperplaneMeasure iso() { return HyperplaneMeasure::isotropic(2.0 * std::numbers::pi, 2); }
HyperplaneMeasure axis() { return HyperplaneMeasure::axis_parallel(4.0, 2); }

Tessellation sample(const HyperplaneMeasure& m, const Window& w, double t, std::uint64_t id) {
  RandomStream rng(71, id);
  return to_tessellation(simulate(m, w, t, rng));
}

Tessellation trivial(const Polytope& w) { return {w, {w}}; }

TEST(NumberCells, ZeroCellFirstThenByDistance) {
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto nt = number_cells(sample(iso(), Window(1.0, 2), 2.0, r));
    ASSERT_FALSE(nt.cells.empty());
    EXPECT_TRUE(nt.cells.front().contains(Vec::Zero(2), 0.0));
    for (std::size_t k = 2; k < nt.cells.size(); ++k) {
      EXPECT_LE(nt.cells[k - 1].centroid().norm(), nt.cells[k].centroid().norm());
    }
  }
}

TEST(NumberCells, InvariantUnderStorageOrder) {
  const auto t = sample(axis(), Window(1.0, 2), 2.0, 3);
  Tessellation shuffled = t;
  std::reverse(shuffled.cells.begin(), shuffled.cells.end());
  std::rotate(shuffled.cells.begin(), shuffled.cells.begin() + shuffled.cells.size() / 2,
              shuffled.cells.end());
  const auto a = number_cells(t);
  const auto b = number_cells(shuffled);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].centroid(), b.cells[k].centroid());
  }
}

TEST(Iterate, TrivialFrameGivesNestedTessellation) {
  const Polytope w = Window(1.0, 2).polytope();
  const auto r = sample(iso(), Window(1.0, 2), 2.0, 4);
  const std::vector<Tessellation> rs = {r};
  const auto out = iterate(number_cells(trivial(w)), rs);
  EXPECT_EQ(out.cells.size(), r.cells.size());
  EXPECT_NEAR(total_volume(out), 4.0, 1e-9);
}

TEST(Iterate, TrivialNestedGivesFrame) {
  const Polytope w = Window(1.0, 2).polytope();
  const auto frame = number_cells(sample(iso(), Window(1.0, 2), 2.0, 5));
  const std::vector<Tessellation> rs(frame.cells.size(), trivial(w));
  const auto out = iterate(frame, rs);
  ASSERT_EQ(out.cells.size(), frame.cells.size());
  for (std::size_t k = 0; k < out.cells.size(); ++k) {
    EXPECT_NEAR(out.cells[k].volume(), frame.cells[k].volume(), 1e-12);
  }
}

TEST(Iterate, CountIsSumOfClippedCounts) {
  const Polytope w = Window(1.0, 2).polytope();
  const auto frame = number_cells(sample(axis(), Window(1.0, 2), 1.5, 6));
  std::vector<Tessellation> rs;
  for (std::size_t k = 0; k < frame.cells.size(); ++k) rs.push_back(sample(iso(), Window(1.0, 2), 1.5, 100 + k));
  // Recount oracle: cells of R^k whose intersection with C^k has positive area.
  std::size_t expected = 0;
  for (std::size_t k = 0; k < frame.cells.size(); ++k) {
    for (const Polytope& c : rs[k].cells) {
      const Polytope piece = intersect(c, frame.cells[k]);
      expected += !piece.empty() && piece.volume() > 1e-12 * frame.cells[k].volume();
    }
  }
  const auto out = iterate(frame, rs);
  EXPECT_EQ(out.cells.size(), expected);
  EXPECT_NEAR(total_volume(out), 4.0, 4e-6);
}

TEST(Iterate, ExhaustedSequenceThrows) {
  const auto frame = number_cells(sample(axis(), Window(1.0, 2), 3.0, 7));
  ASSERT_GT(frame.cells.size(), 1u);
  const std::vector<Tessellation> rs(1, trivial(Window(1.0, 2).polytope()));
  EXPECT_THROW(iterate(frame, rs), DomainError);
}

TEST(Rescale, IdentityAreasAndRoundTrip) {
  const auto t = sample(iso(), Window(1.0, 2), 2.0, 8);
  const auto same = rescale(t, 1.0);
  const auto twice = rescale(t, 2.0);
  const auto back = rescale(twice, 0.5);
  for (std::size_t k = 0; k < t.cells.size(); ++k) {
    EXPECT_EQ(same.cells[k].volume(), t.cells[k].volume());
    EXPECT_NEAR(twice.cells[k].volume(), 4.0 * t.cells[k].volume(), 1e-12);
    for (std::size_t v = 0; v < t.cells[k].vertices().size(); ++v) {
      EXPECT_NEAR((back.cells[k].vertices()[v] - t.cells[k].vertices()[v]).norm(), 0.0, 1e-12);
    }
  }
  EXPECT_THROW(rescale(t, 0.0), DomainError);
}

TEST(Summary, SingleCut) {
  Tessellation t{Window(1.0, 2).polytope(), {}};
  const auto parts = split(t.window, Hyperplane(0.5, Direction::axis(2, 0)), 0);
  t.cells = {parts->plus, parts->minus};
  const auto s = summarize(t);
  EXPECT_EQ(s.cell_count, 2.0);
  EXPECT_NEAR(s.zero_cell_volume, 3.0, 1e-12);
  EXPECT_NEAR(s.edge_length, 2.0, 1e-12);
}

TEST(SimulateClipped, CoversRegion) {
  const Polytope region = Polytope::polygon({make_vec({-0.5, -0.5}), make_vec({0.8, 0.0}), make_vec({0.0, 0.9})});
  const auto t = simulate_clipped(iso(), Window(1.0, 2).polytope(), region, 3.0, RandomStream(72, 0));
  EXPECT_NEAR(total_volume(t), region.volume(), 1e-9);
}

TEST(StitProperty, SmallRunIsConsistent) {
  const auto report = stit_property_test(axis(), Window(1.0, 2), 0.5, 0.3, 300, 73, 1);
  EXPECT_EQ(report.rows.size(), 12u);
  EXPECT_GT(report.min_p(), 1e-4);
  std::ostringstream csv;
  write_csv(csv, report);
  EXPECT_NE(csv.str().find("Y_t vs 2*Y_2t"), std::string::npos);
}

TEST(Consistency, SmallRunIsConsistent) {
  const auto report = consistency_test(iso(), Window(2.0, 2), Window(1.0, 2), 1.0, 300, 74, 1);
  EXPECT_EQ(report.rows.size(), 3u);
  EXPECT_GT(report.min_p(), 1e-4);
}

}  // namespace
}  // namespace stit
