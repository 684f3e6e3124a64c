#ifndef ISAC_HOS_HPP
#define ISAC_HOS_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "isac/scenario.hpp"

namespace isac {

/// Tuning of the blind estimator: FFT sizes of the padded 3D periodogram,
/// CFAR geometry, masking radius and the constellation's fourth moment.
///
/// mask_radius, guard and training half-widths are expressed in unpadded
/// resolution cells (one cell = one bin of the critically sampled grid) and
/// are scaled internally by the per-axis zero-padding factor, so the masked
/// and excluded regions track the physical mainlobe width rather than the
/// FFT bin size.
struct EstimatorConfig {
    std::array<std::size_t, 3> fft_sizes = {0, 0, 0}; // N_tau, N_nu, N_theta
    double mask_radius_cells = 3.0;
    double detection_threshold = 20.0; // gamma, linear power ratio (~13 dB)
    std::size_t max_sources = 10;
    double guard_cells = 2.0;
    double training_cells = 5.0;
    std::complex<double> fourth_moment = {-1.0, 0.0}; // mu_4 of the alphabet
    bool gain_at_refined_peak = false; // exact DFT at fractional peak instead
                                       // of the integer-bin spectrum value

    void validate(const OfdmConfig& cfg) const;

    /// fft_sizes filled with 8x zero-padding per axis, everything else default.
    static EstimatorConfig defaults_for(const OfdmConfig& cfg,
                                        std::complex<double> mu4 = {-1.0, 0.0});
};

/// Padded 3D spectrum plus the running suppression mask used by the
/// iterative peak enumeration. grid_dims are the dimensions of the tensor
/// the spectrum was computed from (pre-padding).
struct HosSpectrum {
    Cube values;
    std::vector<std::uint8_t> mask; // 1 = suppressed, excluded from search
    std::array<std::size_t, 3> grid_dims = {0, 0, 0};
};

struct DetectedSource {
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    double angle_rad = 0.0;
    std::complex<double> gain; // up to the e^{j k pi/2} quadrant ambiguity
    double peak_power = 0.0;   // |S|^2 at the integer peak bin
    double peak_to_background = 0.0;
    std::array<double, 3> refined_bins = {0, 0, 0}; // fractional (u, v, w)
    bool flat_refinement = false; // some axis had a zero parabola denominator

    double velocity_mps(double wavelength_m) const {
        return doppler_hz * wavelength_m;
    }
};

/// One row per enumeration pass, including the final rejected one.
struct DetectionPass {
    std::array<std::size_t, 3> bin = {0, 0, 0};
    double peak_power = 0.0;
    double background = 0.0;
    double ratio = 0.0;
    bool accepted = false;
    std::string note;
};

struct EstimateReport {
    std::vector<DetectedSource> detections; // in detection order
    std::vector<DetectionPass> iterations;
    std::size_t num_detected() const { return detections.size(); }
};

/// Elementwise fourth power Z = Y.^4.
ReceivedTensor fourth_power_tensor(const ReceivedTensor& y);

/// Zero-padded 3D DFT of the fourth-order tensor (Eq. of the HOS spectrum),
/// with an all-clear mask.
HosSpectrum hos_periodogram(const ReceivedTensor& z, const EstimatorConfig& est);

/// Sub-bin offset from a three-point parabola through magnitudes
/// (y_minus, y0, y_plus), clamped to [-1/2, 1/2]. A flat triple (zero
/// denominator) yields 0 and sets *flat.
double parabolic_refine(double y_minus, double y0, double y_plus,
                        bool* flat = nullptr);

struct InverseMapping {
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    double angle_rad = 0.0;
    bool valid = true; // false when the arcsin argument falls outside [-1, 1]
};

/// Maps refined fractional bins back to physical parameters, dividing by
/// `virtual_scale` (4 for the fourth-power domain, 1 for first-order
/// processing). Bins above half the FFT size count as negative frequencies;
/// delay is folded into [0, 1/(scale*df)) and Doppler into the symmetric
/// interval. Rejects (valid=false) when the spatial frequency maps outside
/// |sin theta| <= 1.
InverseMapping invert_mapping(double u, double v, double w, const OfdmConfig& cfg,
                              const EstimatorConfig& est, double virtual_scale = 4.0);

/// Inverts the fourth-power scaling: alpha = (peak / (mu4 * G_fft))^{1/4},
/// principal root. The true gain is recovered only up to e^{j k pi/2}.
std::complex<double> estimate_gain(std::complex<double> peak_value,
                                   const EstimatorConfig& est, std::size_t g_fft);

/// How enumerate_peaks turns a spectral peak value into a gain estimate.
enum class GainMode {
    FourthRoot, // blind: (peak / (mu4 * gain_norm))^{1/4}
    Linear      // first-order: peak / gain_norm
};

/// Shared iterative enumeration core: peak search over the unmasked
/// spectrum, cube-shell CFAR acceptance, separable parabolic refinement,
/// inverse mapping, gain recovery and ball masking, until the CFAR test
/// fails or max_sources are accepted. Mutates `spec` (masking).
/// Used by detect_all (virtual_scale 4) and by the data-aided / pilot-aided
/// baselines (virtual_scale 1). `gain_norm` is the coherent gain of one
/// source atom in the spectrum (number of coherently summed bins).
EstimateReport enumerate_peaks(HosSpectrum& spec, const OfdmConfig& cfg,
                               const EstimatorConfig& est, double virtual_scale,
                               GainMode gain_mode, double gain_norm,
                               const Cube* source_tensor = nullptr);

/// Algorithm: fourth-power tensor, padded periodogram, then enumerate_peaks
/// with the x4 virtual scalings and fourth-root gain recovery.
EstimateReport detect_all(const ReceivedTensor& y, const EstimatorConfig& est);

/// |S|^2 collapsed onto two axes for heatmap export: reduce="max" over the
/// remaining axis. axis0/axis1 in {0,1,2} pick (row, column).
std::vector<std::vector<double>> spectrum_slice_power(const HosSpectrum& spec,
                                                      int axis0, int axis1);

} // namespace isac

#endif
