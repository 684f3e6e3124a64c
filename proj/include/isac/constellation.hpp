#ifndef ISAC_CONSTELLATION_HPP
#define ISAC_CONSTELLATION_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace isac {

/// Complex symbol alphabet with per-point probabilities (uniform unless
/// stated otherwise). Immutable in spirit: every operation returns a copy.
struct Constellation {
    std::vector<std::complex<double>> points;
    std::vector<double> probabilities; // same length as points, sums to 1
    std::string label;

    std::size_t size() const { return points.size(); }

    /// Throws std::invalid_argument unless there are >= 2 distinct points
    /// and the probabilities are a distribution within 1e-12.
    void validate() const;

    /// E[|X|^2] under the stored probabilities.
    double average_power() const;

    /// Copy rescaled so that E[|X|^2] = 1 (within 1e-12).
    Constellation normalized() const;
};

/// Moments and geometry metrics of a constellation. d_rot_quarter is the
/// rotation-separation distance at phi = pi/2, the quantity that decides
/// whether the fourth-power quadrant ambiguity is blindly resolvable.
struct ConstellationMetrics {
    std::complex<double> mean;          // E[X]
    std::complex<double> second_moment; // E[X^2]
    std::complex<double> fourth_moment; // E[X^4] = mu_4
    double average_power = 0.0;         // E[|X|^2]
    double d_min = 0.0;                 // min pairwise Euclidean distance
    double d_rot_quarter = 0.0;         // d_rot(pi/2)
    double peak_to_average = 0.0;       // max_i |c_i|^2 / E[|X|^2]
};

/// Probability-weighted moments plus brute-force distance metrics.
/// Throws on a degenerate alphabet (all points coincident, d_min = 0).
ConstellationMetrics compute_metrics(const Constellation& c);

/// Nearest-neighbor slicer: index and value of argmin_i |z - c_i|^2,
/// ties broken toward the lowest index. Total function.
std::pair<std::size_t, std::complex<double>> slice(const Constellation& c,
                                                   std::complex<double> z);

/// Rotation-separation distance
///   d_rot(phi) = (1/|C|) * sum_c min_{c'} |c - e^{j phi} c'|.
/// Zero exactly when the constellation is invariant under the rotation.
/// Note the mean is over points, unweighted by probabilities.
double rotation_separation(const Constellation& c, double phi_rad);

/// Unit-power QPSK, points (+-1 +- j)/sqrt(2) ordered by quadrant angle.
Constellation make_qpsk();

/// BPSK {+1, -1}.
Constellation make_bpsk();

} // namespace isac

#endif
