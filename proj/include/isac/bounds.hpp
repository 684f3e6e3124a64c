#ifndef ISAC_BOUNDS_HPP
#define ISAC_BOUNDS_HPP

#include <array>
#include <cstddef>

#include "isac/hos.hpp"
#include "isac/scenario.hpp"

namespace isac {

/// Closed-form single-source bounds. Delay and Doppler bounds are reported
/// in both native units (s^2, Hz^2) and the velocity view (m/s)^2; the angle
/// bound keeps the cos^2(theta) factor of the appendix derivation and is
/// reported in rad^2 with a degrees^2 view. stochastic_factor is
/// SNR_eff / (1 + SNR_eff); it equals 1 in a data-aided report.
struct CrlbReport {
    double crlb_delay_s2 = 0.0;
    double crlb_doppler_hz2 = 0.0;
    double crlb_velocity_mps2 = 0.0;
    double crlb_angle_rad2 = 0.0;
    double crlb_angle_deg2 = 0.0;
    double beta_f2 = 0.0; // effective squared bandwidth, (rad*Hz)^2
    double beta_t2 = 0.0; // effective squared duration, (rad*s)^2
    double beta_s2 = 0.0; // effective squared aperture, rad^2
    std::size_t processing_gain = 0; // G_tot = K * N_sym * M
    double snr_linear = 0.0;
    double stochastic_factor = 1.0;
};

/// Data-aided bounds: CRLB(tau) = 1 / (2 SNR G beta_f^2) and friends,
/// with beta_f^2 = (2 pi df)^2 (K^2-1)/12 etc. Axes of size 1 yield an
/// infinite bound, as does theta -> +-pi/2 for the angle.
CrlbReport crlb_data_aided(const OfdmConfig& cfg, double snr_linear,
                           double theta_rad);

/// Stochastic (blind) bounds under the Gaussian-symbol surrogate: the
/// data-aided bounds divided by SNR_eff / (1 + SNR_eff), SNR_eff = SNR * L,
/// L = K * N_sym * M.
CrlbReport crlb_stochastic(const OfdmConfig& cfg, double snr_linear,
                           double theta_rad);

/// 3x3 Fisher information matrix for (tau, nu, theta), computed by central
/// finite differences of the noiseless mean on a centered grid, with a
/// Richardson step-halving consistency check. Validates the closed forms.
struct FimOracleResult {
    std::array<std::array<double, 3>, 3> fim{}; // order: tau, nu (Hz), theta
    bool richardson_ok = true;
};

FimOracleResult numerical_fim_oracle(const OfdmConfig& cfg, const SourceParams& src,
                                     double snr_linear);

/// Data-aided baseline: per source hypothesis, divide the tensor by the
/// known symbols (zero symbols excluded), run the first-order periodogram
/// (virtual scale 1) and accept the strongest peak. Detections come back in
/// source order. `symbols` is the K x N_sym x P ground-truth cube.
EstimateReport data_aided_estimate(const ReceivedTensor& y, const Cube& symbols,
                                   const EstimatorConfig& est);

/// Pilot-aided baseline under a comb-pilot pattern: num_pilots evenly
/// spaced subcarriers (all symbols, all antennas) are treated as known;
/// modulation is removed there and the rest of the grid is zero-filled
/// before the same first-order machinery. num_pilots must be in [2, K];
/// with num_pilots == K this coincides with data_aided_estimate.
EstimateReport pilot_aided_estimate(const ReceivedTensor& y, std::size_t num_pilots,
                                    const Cube& symbols, const EstimatorConfig& est);

/// Comb subcarrier indices used by pilot_aided_estimate.
std::vector<std::size_t> pilot_comb_indices(std::size_t num_subcarriers,
                                            std::size_t num_pilots);

/// Delay interval unambiguously resolvable with a comb of num_pilots
/// subcarriers: 1 / (spacing * df). Beyond it estimates fold back.
double pilot_unambiguous_delay(const OfdmConfig& cfg, std::size_t num_pilots);

} // namespace isac

#endif
