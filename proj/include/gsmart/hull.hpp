#pragma once

#include "gsmart/types.hpp"

#include <array>
#include <span>
#include <vector>

namespace gsmart {

// Watertight triangle hull. Facet planes satisfy n·x <= d for the interior,
// with unit outward normals.
struct ConvexHull3 {
    struct Facet {
        std::array<int, 3> v; // indices into vertices
        Vec3 normal;
        double offset;
    };
    std::vector<Vec3> vertices;
    std::vector<Facet> facets;
    double bbox_diagonal = 0.0;
};

// Incremental quickhull. Throws DegeneracyError (carrying the affine rank)
// when the input is collinear/coplanar or has fewer than 4 points.
ConvexHull3 build_hull(std::span<const Vec3> core);

// 0 for points inside or on the hull; otherwise the Euclidean distance to the
// nearest point of the hull surface (facet, edge, or vertex).
double distance_to_hull(const ConvexHull3& hull, const Vec3& p);

// closest point on triangle abc to p (Ericson, Real-Time Collision Detection)
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

} // namespace gsmart
