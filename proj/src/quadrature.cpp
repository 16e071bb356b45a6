#include "femlab/quadrature.hpp"

#include <array>

namespace femlab {

namespace {

void add_sym3(std::vector<QuadPoint>& pts, double a, double w) {
    const double c = 1.0 - 2.0 * a;
    pts.push_back({a, a, c, w});
    pts.push_back({a, c, a, w});
    pts.push_back({c, a, a, w});
}

void add_sym6(std::vector<QuadPoint>& pts, double a, double b, double w) {
    const double c = 1.0 - a - b;
    pts.push_back({a, b, c, w});
    pts.push_back({a, c, b, w});
    pts.push_back({b, a, c, w});
    pts.push_back({b, c, a, w});
    pts.push_back({c, a, b, w});
    pts.push_back({c, b, a, w});
}

std::vector<QuadPoint> dunavant6() {
    // Dunavant 1985, degree 6, 12 points; weights scaled to reference area 1/2.
    std::vector<QuadPoint> pts;
    pts.reserve(12);
    add_sym3(pts, 0.24928674517091042129163855310702, 0.5 * 0.11678627572637936602528961138558);
    add_sym3(pts, 0.06308901449150222834033160287082, 0.5 * 0.05084490637020681692093680910686);
    add_sym6(pts, 0.31035245103378440541660773395655, 0.63650249912139864723014259441205,
             0.5 * 0.08285107561837357519355345642044);
    return pts;
}

}  // namespace

const Quadrature& Quadrature::triangle_degree6() {
    static const Quadrature rule(dunavant6(), 6);
    return rule;
}

std::span<const EdgeRule::Node> EdgeRule::gauss4() {
    // 4-point Gauss-Legendre mapped from [-1,1] to [0,1]
    static const std::array<Node, 4> nodes = {{
        {0.5 * (1.0 - 0.86113631159405257522), 0.5 * 0.34785484513745385737},
        {0.5 * (1.0 - 0.33998104358485626480), 0.5 * 0.65214515486254614263},
        {0.5 * (1.0 + 0.33998104358485626480), 0.5 * 0.65214515486254614263},
        {0.5 * (1.0 + 0.86113631159405257522), 0.5 * 0.34785484513745385737},
    }};
    return nodes;
}

}  // namespace femlab
