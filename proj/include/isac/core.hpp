#ifndef ISAC_CORE_HPP
#define ISAC_CORE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

namespace isac {

/// Unrecoverable numerical failure (e.g. a rank-deficient mixing matrix on
/// every bin). The CLI maps this to exit code 3, config errors to 2.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSpeedOfLight = 2.998e8; // m/s

/// OFDM grid geometry and physical constants shared by every stage.
/// The simulator works on the post-DFT frequency-domain grid, so only the
/// total symbol duration (useful part + cyclic prefix) enters any phase.
struct OfdmConfig {
    std::size_t num_subcarriers = 128;  // K
    std::size_t num_symbols = 200;      // N_sym
    std::size_t num_antennas = 16;      // M
    double subcarrier_spacing_hz = 1e6; // delta_f
    double symbol_duration_s = 1e-6;    // T_sym
    double carrier_frequency_hz = 28e9; // f_c
    double antenna_spacing_ratio = 0.5; // d / lambda
    double noise_variance = 0.0;        // sigma_n^2, linear power

    double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }

    /// Total processing gain of the 3D data cube, K * N_sym * M.
    std::size_t grid_size() const {
        return num_subcarriers * num_symbols * num_antennas;
    }

    void validate() const {
        if (num_subcarriers < 1 || num_symbols < 1 || num_antennas < 1)
            throw std::invalid_argument("OfdmConfig: grid dimensions must be >= 1");
        if (subcarrier_spacing_hz <= 0 || symbol_duration_s <= 0 ||
            carrier_frequency_hz <= 0)
            throw std::invalid_argument("OfdmConfig: spacings and carrier must be > 0");
        if (antenna_spacing_ratio <= 0)
            throw std::invalid_argument("OfdmConfig: antenna spacing must be > 0");
        if (noise_variance < 0 || !std::isfinite(noise_variance))
            throw std::invalid_argument("OfdmConfig: noise variance must be >= 0");
    }
};

/// Ground-truth channel parameters of one source: delay, Doppler, angle of
/// arrival and complex gain. Angles are radians in [-pi/2, pi/2).
struct SourceParams {
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    double angle_rad = 0.0;
    std::complex<double> gain = {1.0, 0.0};

    /// Radial-velocity view of the Doppler shift, v = nu * lambda.
    double velocity_mps(double wavelength_m) const { return doppler_hz * wavelength_m; }

    void validate() const {
        if (delay_s < 0)
            throw std::invalid_argument("SourceParams: delay must be >= 0");
        if (!(std::abs(angle_rad) < kPi / 2))
            throw std::invalid_argument("SourceParams: |angle| must be < pi/2");
    }
};

} // namespace isac

#endif
