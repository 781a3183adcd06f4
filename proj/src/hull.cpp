#include "gsmart/hull.hpp"
#include "gsmart/error.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace gsmart {

namespace {

struct WorkFacet {
    std::array<int, 3> v;
    Vec3 normal; // not unit during construction
    double offset;
    bool alive = true;
    std::vector<int> outside; // candidate point indices beyond this facet
};

double bbox_diag(std::span<const Vec3> pts) {
    Vec3 lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

WorkFacet make_facet(int a, int b, int c, std::span<const Vec3> pts, const Vec3& interior) {
    WorkFacet f;
    f.v = {a, b, c};
    f.normal = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    f.offset = f.normal.dot(pts[a]);
    if (f.normal.dot(interior) > f.offset) {
        std::swap(f.v[1], f.v[2]);
        f.normal = -f.normal;
        f.offset = -f.offset;
    }
    return f;
}

} // namespace

ConvexHull3 build_hull(std::span<const Vec3> core) {
    const auto n = static_cast<int>(core.size());
    if (n < 4) throw DegeneracyError("hull needs at least 4 points, got " + std::to_string(n),
                                     n <= 1 ? 0 : (n == 2 ? 1 : 2));
    const double diag = bbox_diag(core);
    if (diag <= 0.0) throw DegeneracyError("all hull points coincide", 0);
    const double eps = 1e-9 * diag;

    // initial simplex: extremes along x, farthest from segment, farthest from plane
    int i0 = 0, i1 = 0;
    for (int i = 1; i < n; ++i) {
        if (core[i].x() < core[i0].x()) i0 = i;
        if (core[i].x() > core[i1].x()) i1 = i;
    }
    if ((core[i1] - core[i0]).norm() <= eps) {
        // x-degenerate, search all pairs of axis extremes
        double best = 0;
        for (int axis = 1; axis < 3; ++axis) {
            int lo = 0, hi = 0;
            for (int i = 1; i < n; ++i) {
                if (core[i][axis] < core[lo][axis]) lo = i;
                if (core[i][axis] > core[hi][axis]) hi = i;
            }
            double d = (core[hi] - core[lo]).norm();
            if (d > best) {
                best = d;
                i0 = lo;
                i1 = hi;
            }
        }
        if (best <= eps) throw DegeneracyError("all hull points coincide", 0);
    }

    int i2 = -1;
    double best2 = eps;
    const Vec3 dir = (core[i1] - core[i0]).normalized();
    for (int i = 0; i < n; ++i) {
        Vec3 rel = core[i] - core[i0];
        double d = (rel - rel.dot(dir) * dir).norm();
        if (d > best2) {
            best2 = d;
            i2 = i;
        }
    }
    if (i2 < 0) throw DegeneracyError("hull points are collinear", 1);

    Vec3 plane_n = (core[i1] - core[i0]).cross(core[i2] - core[i0]).normalized();
    double plane_d = plane_n.dot(core[i0]);
    int i3 = -1;
    double best3 = eps;
    for (int i = 0; i < n; ++i) {
        double d = std::abs(plane_n.dot(core[i]) - plane_d);
        if (d > best3) {
            best3 = d;
            i3 = i;
        }
    }
    if (i3 < 0) throw DegeneracyError("hull points are coplanar", 2);

    const Vec3 interior = (core[i0] + core[i1] + core[i2] + core[i3]) / 4.0;

    std::vector<WorkFacet> facets;
    facets.push_back(make_facet(i0, i1, i2, core, interior));
    facets.push_back(make_facet(i0, i1, i3, core, interior));
    facets.push_back(make_facet(i0, i2, i3, core, interior));
    facets.push_back(make_facet(i1, i2, i3, core, interior));

    auto excess = [&](const WorkFacet& f, int i) {
        return (f.normal.dot(core[i]) - f.offset) / f.normal.norm();
    };

    // initial outside sets
    for (int i = 0; i < n; ++i) {
        if (i == i0 || i == i1 || i == i2 || i == i3) continue;
        for (auto& f : facets) {
            if (excess(f, i) > eps) {
                f.outside.push_back(i);
                break;
            }
        }
    }

    bool clean = false;
    while (!clean) {
    while (true) {
        // pick the facet with the farthest outside point
        int fi = -1, pi = -1;
        double far = eps;
        for (int f = 0; f < static_cast<int>(facets.size()); ++f) {
            if (!facets[f].alive) continue;
            for (int i : facets[f].outside) {
                double d = excess(facets[f], i);
                if (d > far) {
                    far = d;
                    fi = f;
                    pi = i;
                }
            }
        }
        if (fi < 0) break;

        // all facets visible from the apex
        std::vector<int> visible;
        for (int f = 0; f < static_cast<int>(facets.size()); ++f)
            if (facets[f].alive && excess(facets[f], pi) > eps) visible.push_back(f);

        // horizon = directed edges of visible facets whose twin is not visible
        std::set<std::pair<int, int>> visible_edges;
        for (int f : visible) {
            const auto& v = facets[f].v;
            visible_edges.insert({v[0], v[1]});
            visible_edges.insert({v[1], v[2]});
            visible_edges.insert({v[2], v[0]});
        }
        std::vector<std::pair<int, int>> horizon;
        for (const auto& e : visible_edges)
            if (!visible_edges.count({e.second, e.first})) horizon.push_back(e);

        // orphaned candidates from the deleted facets
        std::vector<int> orphans;
        for (int f : visible) {
            orphans.insert(orphans.end(), facets[f].outside.begin(), facets[f].outside.end());
            facets[f].outside.clear();
            facets[f].alive = false;
        }
        std::sort(orphans.begin(), orphans.end());
        orphans.erase(std::unique(orphans.begin(), orphans.end()), orphans.end());

        std::vector<int> fresh;
        for (const auto& [a, b] : horizon) {
            facets.push_back(make_facet(a, b, pi, core, interior));
            fresh.push_back(static_cast<int>(facets.size()) - 1);
        }
        for (int i : orphans) {
            if (i == pi) continue;
            for (int f : fresh) {
                if (excess(facets[f], i) > eps) {
                    facets[f].outside.push_back(i);
                    break;
                }
            }
        }
    }

    // a point can drop off the single conflict list while still lying beyond
    // an older facet; sweep and reinsert until the hull covers everything
    clean = true;
    for (int i = 0; i < n && clean; ++i) {
        for (auto& f : facets) {
            if (f.alive && excess(f, i) > eps) {
                bool is_vertex = false;
                for (const auto& g : facets)
                    if (g.alive && (g.v[0] == i || g.v[1] == i || g.v[2] == i)) is_vertex = true;
                if (is_vertex) continue;
                f.outside.push_back(i);
                clean = false;
                break;
            }
        }
    }
    }

    // compact into the result, remapping vertex indices
    ConvexHull3 hull;
    hull.bbox_diagonal = diag;
    std::map<int, int> remap;
    for (const auto& f : facets) {
        if (!f.alive) continue;
        ConvexHull3::Facet out;
        for (int k = 0; k < 3; ++k) {
            auto it = remap.find(f.v[k]);
            if (it == remap.end()) {
                it = remap.emplace(f.v[k], static_cast<int>(hull.vertices.size())).first;
                hull.vertices.push_back(core[f.v[k]]);
            }
            out.v[k] = it->second;
        }
        out.normal = f.normal.normalized();
        out.offset = out.normal.dot(hull.vertices[out.v[0]]);
        hull.facets.push_back(out);
    }
    return hull;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return a;

    Vec3 bp = p - b;
    double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return b;

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

    Vec3 cp = p - c;
    double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return c;

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

    double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

    double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

double distance_to_hull(const ConvexHull3& hull, const Vec3& p) {
    bool inside = true;
    for (const auto& f : hull.facets) {
        if (f.normal.dot(p) - f.offset > 0) {
            inside = false;
            break;
        }
    }
    if (inside) return 0.0;

    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : hull.facets) {
        Vec3 q = closest_point_on_triangle(p, hull.vertices[f.v[0]], hull.vertices[f.v[1]],
                                           hull.vertices[f.v[2]]);
        best = std::min(best, (p - q).norm());
    }
    return best;
}

} // namespace gsmart
