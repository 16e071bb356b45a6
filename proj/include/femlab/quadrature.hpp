#ifndef FEMLAB_QUADRATURE_HPP
#define FEMLAB_QUADRATURE_HPP

#include <span>
#include <vector>

#include "femlab/common.hpp"

namespace femlab {

/// Quadrature node in barycentric coordinates on the reference triangle
/// (0,0),(1,0),(0,1); weights sum to the reference area 1/2.
struct QuadPoint {
    double l1, l2, l3;
    double w;
};

class Quadrature {
public:
    /// Symmetric 12-point rule, exact for polynomials of total degree <= 6
    /// (Dunavant 1985, rule 6). The one rule used throughout.
    static const Quadrature& triangle_degree6();

    int exactness_degree() const { return exactness_degree_; }
    std::span<const QuadPoint> points() const { return points_; }
    std::size_t size() const { return points_.size(); }

    /// reference coordinates of node i: (l2, l3)
    Vec2 ref_point(std::size_t i) const { return Vec2(points_[i].l2, points_[i].l3); }

private:
    Quadrature(std::vector<QuadPoint> pts, int degree)
        : points_(std::move(pts)), exactness_degree_(degree) {}
    std::vector<QuadPoint> points_;
    int exactness_degree_;
};

/// Gauss-Legendre nodes on [0,1]; exact for polynomials of degree <= 7.
/// Used for edge moments (degrees of freedom, trace checks).
struct EdgeRule {
    struct Node {
        double t, w;
    };
    static std::span<const Node> gauss4();
};

}  // namespace femlab

#endif
