#include "isac/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "isac/core.hpp"

namespace isac {

void Constellation::validate() const {
    if (points.size() < 2)
        throw std::invalid_argument("Constellation: need at least 2 points");
    if (probabilities.size() != points.size())
        throw std::invalid_argument("Constellation: probabilities/points size mismatch");
    double sum = 0.0;
    for (double p : probabilities) {
        if (p < 0.0 || !std::isfinite(p))
            throw std::invalid_argument("Constellation: probabilities must be >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("Constellation: probabilities must sum to 1");
    bool distinct = false;
    for (std::size_t i = 1; i < points.size() && !distinct; ++i)
        distinct = points[i] != points[0];
    if (!distinct)
        throw std::invalid_argument("Constellation: all points coincide");
}

double Constellation::average_power() const {
    double p2 = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        p2 += probabilities[i] * std::norm(points[i]);
    return p2;
}

Constellation Constellation::normalized() const {
    validate();
    const double p2 = average_power();
    if (p2 <= 0.0)
        throw std::invalid_argument("Constellation: zero average power");
    Constellation out = *this;
    const double g = 1.0 / std::sqrt(p2);
    for (auto& z : out.points) z *= g;
    return out;
}

ConstellationMetrics compute_metrics(const Constellation& c) {
    c.validate();
    ConstellationMetrics m;
    double peak = 0.0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const auto z = c.points[i];
        const double p = c.probabilities[i];
        m.mean += p * z;
        m.second_moment += p * z * z;
        m.fourth_moment += p * z * z * z * z;
        m.average_power += p * std::norm(z);
        peak = std::max(peak, std::norm(z));
    }
    // E_peak is not pinned down in the usual tables; here it is the largest
    // point energy, so peak_to_average = max_i |c_i|^2 / E[|X|^2].
    m.peak_to_average = peak / m.average_power;

    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.points.size(); ++i)
        for (std::size_t j = i + 1; j < c.points.size(); ++j)
            dmin = std::min(dmin, std::abs(c.points[i] - c.points[j]));
    if (dmin == 0.0)
        throw std::invalid_argument("compute_metrics: duplicate constellation points");
    m.d_min = dmin;
    m.d_rot_quarter = rotation_separation(c, kPi / 2);
    return m;
}

std::pair<std::size_t, std::complex<double>> slice(const Constellation& c,
                                                   std::complex<double> z) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const double d = std::norm(z - c.points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return {best, c.points[best]};
}

double rotation_separation(const Constellation& c, double phi_rad) {
    const std::complex<double> rot = std::polar(1.0, phi_rad);
    double acc = 0.0;
    for (const auto& a : c.points) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& b : c.points)
            nearest = std::min(nearest, std::abs(a - rot * b));
        acc += nearest;
    }
    return acc / static_cast<double>(c.points.size());
}

Constellation make_qpsk() {
    Constellation c;
    c.label = "qpsk";
    for (int q = 0; q < 4; ++q)
        c.points.push_back(std::polar(1.0, kPi / 4 + q * kPi / 2));
    c.probabilities.assign(4, 0.25);
    return c;
}

Constellation make_bpsk() {
    Constellation c;
    c.label = "bpsk";
    c.points = {{1.0, 0.0}, {-1.0, 0.0}};
    c.probabilities = {0.5, 0.5};
    return c;
}

} // namespace isac
