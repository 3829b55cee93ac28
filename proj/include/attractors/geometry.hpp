#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "attractors/common.hpp"

namespace attractors {

// A ring is an open vertex loop (no repeated closing vertex). A polygon is
// one exterior ring followed by zero or more hole rings; a zone geometry is
// one or more polygons (MultiPolygon support).
using Ring = std::vector<Point>;
using Polygon = std::vector<Ring>;

struct BBox {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();

    void expand(const Point& p) {
        if (p.x < min_x) min_x = p.x;
        if (p.y < min_y) min_y = p.y;
        if (p.x > max_x) max_x = p.x;
        if (p.y > max_y) max_y = p.y;
    }
    bool contains(const Point& p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

inline double ring_signed_area(const Ring& r) {
    double acc = 0.0;
    std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = r[i];
        const Point& b = r[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

// Area centroid of a single ring (shoelace moments).
inline Point ring_centroid(const Ring& r) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = r[i];
        const Point& q = r[(i + 1) % n];
        double cross = p.x * q.y - q.x * p.y;
        a += cross;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    if (a == 0.0) {
        // Degenerate ring: fall back to the vertex mean.
        Point m{0.0, 0.0};
        for (const Point& p : r) {
            m.x += p.x;
            m.y += p.y;
        }
        if (n > 0) {
            m.x /= static_cast<double>(n);
            m.y /= static_cast<double>(n);
        }
        return m;
    }
    return Point{cx / (3.0 * a), cy / (3.0 * a)};
}

// Ring 0 is the exterior, later rings are holes.
inline double polygon_area(const Polygon& poly) {
    double area = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        double a = std::fabs(ring_signed_area(poly[i]));
        area += (i == 0) ? a : -a;
    }
    return area;
}

inline double multipolygon_area(const std::vector<Polygon>& polys) {
    double area = 0.0;
    for (const Polygon& p : polys) area += polygon_area(p);
    return area;
}

// Area-weighted centroid over all polygons, holes subtracted. Falls back to
// the bounding-box center when the total area degenerates to zero.
inline Point multipolygon_centroid(const std::vector<Polygon>& polys) {
    double total = 0.0, mx = 0.0, my = 0.0;
    for (const Polygon& poly : polys) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            double a = std::fabs(ring_signed_area(poly[i]));
            Point c = ring_centroid(poly[i]);
            double w = (i == 0) ? a : -a;
            total += w;
            mx += c.x * w;
            my += c.y * w;
        }
    }
    if (total != 0.0) return Point{mx / total, my / total};
    BBox box;
    for (const Polygon& poly : polys)
        for (const Ring& r : poly)
            for (const Point& p : r) box.expand(p);
    return Point{(box.min_x + box.max_x) / 2.0, (box.min_y + box.max_y) / 2.0};
}

// Even-odd ray cast over one ring. Points exactly on an edge may land on
// either side; zone polygons are assumed not to share POI coordinates with
// their boundaries.
inline bool point_in_ring(const Point& pt, const Ring& r) {
    bool inside = false;
    std::size_t n = r.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = r[i];
        const Point& b = r[j];
        if ((a.y > pt.y) != (b.y > pt.y)) {
            double x_cross = (b.x - a.x) * (pt.y - a.y) / (b.y - a.y) + a.x;
            if (pt.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

inline bool point_in_polygon(const Point& pt, const Polygon& poly) {
    if (poly.empty() || !point_in_ring(pt, poly[0])) return false;
    for (std::size_t i = 1; i < poly.size(); ++i) {
        if (point_in_ring(pt, poly[i])) return false;  // inside a hole
    }
    return true;
}

inline bool point_in_multipolygon(const Point& pt, const std::vector<Polygon>& polys) {
    for (const Polygon& p : polys) {
        if (point_in_polygon(pt, p)) return true;
    }
    return false;
}

}  // namespace attractors
