#ifndef FEMLAB_COMMON_HPP
#define FEMLAB_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace femlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// All user-facing numeric output is printed with 12 significant digits.
std::string format_g12(double v);

/// Deterministic RNG used everywhere a seed appears in a public interface.
/// std::*_distribution is implementation-defined, so the few samplers we
/// need are spelled out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    /// uniform in [0,1)
    double uniform();
    /// uniform in [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// standard normal (Box-Muller)
    double normal();

private:
    std::uint64_t next_u64();
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace femlab

#endif
