#include "attractors/geometry.hpp"

#include <gtest/gtest.h>

using namespace attractors;

namespace {

Ring square(double x0, double y0, double side) {
    return Ring{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}};
}

TEST(Geometry, RingAreaAndOrientation) {
    Ring ccw = square(0, 0, 2);
    EXPECT_DOUBLE_EQ(ring_signed_area(ccw), 4.0);
    Ring cw(ccw.rbegin(), ccw.rend());
    EXPECT_DOUBLE_EQ(ring_signed_area(cw), -4.0);
}

TEST(Geometry, UnitSquareCentroid) {
    std::vector<Polygon> polys{Polygon{square(0, 0, 2)}};
    Point c = multipolygon_centroid(polys);
    EXPECT_DOUBLE_EQ(c.x, 1.0);
    EXPECT_DOUBLE_EQ(c.y, 1.0);
}

TEST(Geometry, HoleSubtractsAreaAndShiftsCentroid) {
    Polygon with_hole{square(0, 0, 4), square(0, 0, 2)};
    EXPECT_DOUBLE_EQ(polygon_area(with_hole), 12.0);
    // Hole in the lower-left corner pushes the centroid up-right.
    Point c = multipolygon_centroid({with_hole});
    EXPECT_GT(c.x, 2.0);
    EXPECT_GT(c.y, 2.0);
}

TEST(Geometry, PointInPolygon) {
    Polygon poly{square(0, 0, 2)};
    EXPECT_TRUE(point_in_polygon({1, 1}, poly));
    EXPECT_FALSE(point_in_polygon({100, 100}, poly));
    EXPECT_FALSE(point_in_polygon({-0.5, 1}, poly));
}

TEST(Geometry, PointInPolygonRespectsHoles) {
    Polygon poly{square(0, 0, 4), square(1, 1, 2)};
    EXPECT_TRUE(point_in_polygon({0.5, 0.5}, poly));
    EXPECT_FALSE(point_in_polygon({2, 2}, poly));  // inside the hole
    EXPECT_TRUE(point_in_multipolygon({0.5, 3.5}, {poly}));
}

TEST(Geometry, MultiPolygonMembership) {
    std::vector<Polygon> polys{Polygon{square(0, 0, 1)}, Polygon{square(10, 10, 1)}};
    EXPECT_TRUE(point_in_multipolygon({10.5, 10.5}, polys));
    EXPECT_FALSE(point_in_multipolygon({5, 5}, polys));
    EXPECT_DOUBLE_EQ(multipolygon_area(polys), 2.0);
}

TEST(Geometry, BBox) {
    BBox box;
    box.expand({1, 2});
    box.expand({-3, 7});
    EXPECT_TRUE(box.contains({0, 5}));
    EXPECT_FALSE(box.contains({2, 5}));
}

}  // namespace
