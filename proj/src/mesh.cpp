#include "femlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace femlab {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

Triangulation::Triangulation(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const int nv = n_vertices();
    const int nt = n_triangles();
    if (nt == 0) throw Error("Triangulation: empty triangle list");

    h_.resize(nt);
    area_.resize(nt);
    tri_edges_.resize(nt);
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            const int v = triangles_[t][k];
            if (v < 0 || v >= nv)
                throw Error("Triangulation: triangle " + std::to_string(t) + " references vertex " +
                            std::to_string(v) + " out of range");
        }
        const Vec2& a = vertices_[triangles_[t][0]];
        const Vec2& b = vertices_[triangles_[t][1]];
        const Vec2& c = vertices_[triangles_[t][2]];
        const double ar = signed_area(a, b, c);
        const double hT = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
        if (!(ar > 1e-14 * hT * hT))
            throw Error("Triangulation: triangle " + std::to_string(t) +
                        " is degenerate or not counterclockwise (signed area " + format_g12(ar) + ")");
        area_[t] = ar;
        h_[t] = hT;
    }
    h_max_ = *std::max_element(h_.begin(), h_.end());

    // Edges in first-encounter order; the first (hence lower-indexed)
    // triangle becomes the plus side and fixes direction and normal.
    std::map<std::pair<int, int>, int> index;
    for (int t = 0; t < nt; ++t) {
        for (int i = 0; i < 3; ++i) {
            const int va = triangles_[t][(i + 1) % 3];
            const int vb = triangles_[t][(i + 2) % 3];
            const auto key = std::minmax(va, vb);
            auto it = index.find(key);
            if (it == index.end()) {
                Edge e;
                e.a = va;  // plus triangle traverses a->b counterclockwise
                e.b = vb;
                Vec2 d = vertices_[vb] - vertices_[va];
                const double len = d.norm();
                e.normal = Vec2(d.y(), -d.x()) / len;  // outward for the plus side
                e.tri_plus = t;
                index.emplace(key, static_cast<int>(edges_.size()));
                tri_edges_[t][i] = TriEdge{static_cast<int>(edges_.size()), true};
                edges_.push_back(e);
            } else {
                Edge& e = edges_[it->second];
                if (e.tri_minus >= 0)
                    throw Error("Triangulation: edge (" + std::to_string(key.first) + "," +
                                std::to_string(key.second) + ") shared by more than two triangles");
                if (!(e.a == vb && e.b == va))
                    throw Error("Triangulation: inconsistent orientation across edge (" +
                                std::to_string(key.first) + "," + std::to_string(key.second) + ")");
                e.tri_minus = t;
                tri_edges_[t][i] = TriEdge{it->second, false};
            }
        }
    }
}

Triangulation Triangulation::structured(int m) {
    if (m < 1) throw Error("structured mesh: m must be >= 1");
    const int n = m + 1;
    std::vector<Vec2> verts;
    verts.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            verts.emplace_back(static_cast<double>(i) / m, static_cast<double>(j) / m);

    auto vid = [n](int i, int j) { return j * n + i; };
    std::vector<std::array<int, 3>> tris;
    tris.reserve(2u * m * m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            tris.push_back({v00, v10, v11});
            tris.push_back({v00, v11, v01});
        }
    }
    return Triangulation(std::move(verts), std::move(tris));
}

Triangulation Triangulation::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("mesh file: cannot open '" + path + "'");

    std::string word;
    int nv = 0;
    if (!(in >> word >> nv) || word != "vertices" || nv <= 0)
        throw Error("mesh file '" + path + "': expected header 'vertices N'");
    std::vector<Vec2> verts(nv);
    for (int i = 0; i < nv; ++i)
        if (!(in >> verts[i].x() >> verts[i].y()))
            throw Error("mesh file '" + path + "': failed to read vertex " + std::to_string(i));

    int nt = 0;
    if (!(in >> word >> nt) || word != "triangles" || nt <= 0)
        throw Error("mesh file '" + path + "': expected header 'triangles M'");
    std::vector<std::array<int, 3>> tris(nt);
    for (int t = 0; t < nt; ++t)
        if (!(in >> tris[t][0] >> tris[t][1] >> tris[t][2]))
            throw Error("mesh file '" + path + "': failed to read triangle " + std::to_string(t));

    return Triangulation(std::move(verts), std::move(tris));
}

Triangulation Triangulation::refined() const {
    std::vector<Vec2> verts = vertices_;
    verts.reserve(vertices_.size() + edges_.size());
    for (const Edge& e : edges_) verts.push_back(0.5 * (vertices_[e.a] + vertices_[e.b]));

    const int nv = n_vertices();
    std::vector<std::array<int, 3>> tris;
    tris.reserve(4u * triangles_.size());
    for (int t = 0; t < n_triangles(); ++t) {
        const auto& tri = triangles_[t];
        // midpoint of local edge i (opposite vertex i)
        const int m0 = nv + tri_edges_[t][0].edge;
        const int m1 = nv + tri_edges_[t][1].edge;
        const int m2 = nv + tri_edges_[t][2].edge;
        tris.push_back({tri[0], m2, m1});
        tris.push_back({m2, tri[1], m0});
        tris.push_back({m1, m0, tri[2]});
        tris.push_back({m2, m0, m1});
    }
    return Triangulation(std::move(verts), std::move(tris));
}

double Triangulation::total_area() const {
    double s = 0.0;
    for (double a : area_) s += a;
    return s;
}

double Triangulation::shape_regularity() const {
    double worst = 0.0;
    for (int t = 0; t < n_triangles(); ++t) {
        const Vec2& a = vertices_[triangles_[t][0]];
        const Vec2& b = vertices_[triangles_[t][1]];
        const Vec2& c = vertices_[triangles_[t][2]];
        const double per = (b - a).norm() + (c - b).norm() + (a - c).norm();
        const double inradius = 2.0 * area_[t] / per;
        if (!(inradius > 0.0))
            throw Error("shape_regularity: degenerate element " + std::to_string(t));
        worst = std::max(worst, h_[t] / (2.0 * inradius));
    }
    return worst;
}

Vec2 Triangulation::centroid(int t) const {
    check_element_index(t);
    return (vertex_of(t, 0) + vertex_of(t, 1) + vertex_of(t, 2)) / 3.0;
}

Mat2 Triangulation::jacobian(int t) const {
    Mat2 J;
    J.col(0) = vertex_of(t, 1) - vertex_of(t, 0);
    J.col(1) = vertex_of(t, 2) - vertex_of(t, 0);
    return J;
}

Vec2 Triangulation::map_to_physical(int t, const Vec2& ref) const {
    return vertex_of(t, 0) + jacobian(t) * ref;
}

Vec2 Triangulation::outward_normal(int t, int local_edge) const {
    const Vec2 d = vertex_of(t, (local_edge + 2) % 3) - vertex_of(t, (local_edge + 1) % 3);
    return Vec2(d.y(), -d.x()).normalized();
}

void Triangulation::check_element_index(int t) const {
    if (t < 0 || t >= n_triangles())
        throw Error("element index " + std::to_string(t) + " out of range [0," +
                    std::to_string(n_triangles()) + ")");
}

}  // namespace femlab
