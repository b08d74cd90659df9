#ifndef REACHCAST_HYDRAULICS_HPP
#define REACHCAST_HYDRAULICS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "reachcast/util.hpp"

namespace reachcast {

/**
 * Manning discharge for a rectangular section:
 *   Q = (1/n) A R^(2/3) S^(1/2),  A = w d,  R = A / (w + 2d)
 */
inline double manning_discharge(double depth, double width, double slope, double n) {
    if (!(width > 0.0) || !(slope > 0.0) || !(n > 0.0))
        throw std::domain_error("manning_discharge: width, slope and n must be positive");
    if (depth < 0.0) throw std::domain_error("manning_discharge: negative depth");
    if (depth == 0.0) return 0.0;
    const double area = width * depth;
    const double radius = area / (width + 2.0 * depth);
    return (1.0 / n) * area * std::pow(radius, 2.0 / 3.0) * std::sqrt(slope);
}

/**
 * Invert Manning's relation for depth by bisection with geometric bracket
 * expansion; converges to 1e-9 relative on the discharge.
 */
inline double normal_depth(double q, double width, double slope, double n) {
    if (q < 0.0) throw std::domain_error("normal_depth: negative discharge");
    if (q == 0.0) return 0.0;

    double hi = 1.0;
    int expansions = 0;
    while (manning_discharge(hi, width, slope, n) < q) {
        hi *= 2.0;
        if (++expansions > 40)
            throw NumericError("normal_depth: bracket failure, discharge " +
                               std::to_string(q) + " m^3/s beyond section capacity");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double qm = manning_discharge(mid, width, slope, n);
        if (qm < q) lo = mid;
        else hi = mid;
        if (std::abs(qm - q) <= 1e-9 * q && (hi - lo) <= 1e-12 * std::max(hi, 1.0)) break;
    }
    return 0.5 * (lo + hi);
}

/// Kinematic wave celerity c = (5/3) v at the given discharge.
inline double wave_celerity(double q, double width, double slope, double n,
                            double min_depth = 1e-3) {
    const double d = std::max(normal_depth(q, width, slope, n), min_depth);
    const double v = manning_discharge(d, width, slope, n) / (width * d);
    return (5.0 / 3.0) * std::max(v, 1e-6);
}

} // namespace reachcast

#endif // REACHCAST_HYDRAULICS_HPP
