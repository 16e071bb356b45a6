#ifndef FEMLAB_MESH_HPP
#define FEMLAB_MESH_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "femlab/common.hpp"

namespace femlab {

/// One mesh edge. The stored direction a->b and the unit normal form a
/// right-handed pair; the normal is the one fixed normal shared by both
/// neighbours. `tri_plus` is the triangle whose outward normal coincides
/// with `normal` (the lower-indexed neighbour; the only neighbour on the
/// boundary, where the normal points out of the domain).
struct Edge {
    int a = -1;
    int b = -1;
    Vec2 normal = Vec2::Zero();
    int tri_plus = -1;
    int tri_minus = -1;
    bool on_boundary() const { return tri_minus < 0; }
};

/// Incidence of a triangle with one of its three edges. Local edge i sits
/// opposite local vertex i. `is_plus` says whether the triangle's outward
/// normal on that edge equals the edge's stored normal.
struct TriEdge {
    int edge = -1;
    bool is_plus = false;
};

/// Immutable simplicial triangulation of a 2D polygonal domain.
/// Triangles are positively oriented (counterclockwise); construction
/// validates orientation and edge-manifoldness and derives all
/// connectivity, diameters and normals.
class Triangulation {
public:
    Triangulation(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

    /// Criss-cross-free right-triangle mesh of the unit square:
    /// (m+1)^2 vertices, 2m^2 congruent triangles.
    static Triangulation structured(int m);

    /// Plain-text mesh file:
    ///   vertices N
    ///   x y          (N lines)
    ///   triangles M
    ///   i j k        (M lines, 0-based, counterclockwise)
    static Triangulation from_file(const std::string& path);

    /// Red refinement: every triangle split into 4 congruent children via
    /// edge midpoints. Children of triangle t are 4t..4t+3 (corner 0, 1, 2,
    /// center). h_max halves exactly; shape regularity is unchanged.
    Triangulation refined() const;

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_triangles() const { return static_cast<int>(triangles_.size()); }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::array<TriEdge, 3>& triangle_edges(int t) const { return tri_edges_[t]; }

    /// diameter of triangle t (max pairwise vertex distance)
    double h(int t) const { return h_[t]; }
    double h_max() const { return h_max_; }
    double area(int t) const { return area_[t]; }
    /// sum of element areas
    double total_area() const;
    bool boundary_edge(int e) const { return edges_[e].on_boundary(); }

    /// max over elements of diameter / (2 * inradius)
    double shape_regularity() const;

    /// arithmetic mean of the three vertices
    Vec2 centroid(int t) const;

    Vec2 vertex_of(int t, int local) const { return vertices_[triangles_[t][local]]; }

    /// affine map F(xhat) = v0 + J xhat from the reference triangle
    /// (0,0),(1,0),(0,1) onto triangle t
    Mat2 jacobian(int t) const;
    double det_jacobian(int t) const { return 2.0 * area_[t]; }
    Vec2 map_to_physical(int t, const Vec2& ref) const;

    /// outward unit normal of triangle t on its local edge i
    Vec2 outward_normal(int t, int local_edge) const;

private:
    void check_element_index(int t) const;

    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<Edge> edges_;
    std::vector<std::array<TriEdge, 3>> tri_edges_;
    std::vector<double> h_;
    std::vector<double> area_;
    double h_max_ = 0.0;
};

}  // namespace femlab

#endif
