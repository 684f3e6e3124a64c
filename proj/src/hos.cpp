#include "isac/hos.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "isac/fft3.hpp"

namespace isac {

void EstimatorConfig::validate(const OfdmConfig& cfg) const {
    if (fft_sizes[0] < cfg.num_subcarriers || fft_sizes[1] < cfg.num_symbols ||
        fft_sizes[2] < cfg.num_antennas)
        throw std::invalid_argument("EstimatorConfig: fft sizes must cover the grid");
    if (detection_threshold <= 1.0)
        throw std::invalid_argument("EstimatorConfig: threshold must be > 1");
    if (mask_radius_cells < 1.0)
        throw std::invalid_argument("EstimatorConfig: mask radius must be >= 1 cell");
    if (max_sources < 1)
        throw std::invalid_argument("EstimatorConfig: max_sources must be >= 1");
    if (guard_cells < 0 || training_cells <= guard_cells)
        throw std::invalid_argument("EstimatorConfig: need training > guard >= 0");
    if (fourth_moment == std::complex<double>(0.0, 0.0))
        throw std::invalid_argument("EstimatorConfig: fourth moment must be nonzero");
}

EstimatorConfig EstimatorConfig::defaults_for(const OfdmConfig& cfg,
                                              std::complex<double> mu4) {
    EstimatorConfig est;
    est.fft_sizes = {8 * cfg.num_subcarriers, 8 * cfg.num_symbols,
                     8 * cfg.num_antennas};
    est.fourth_moment = mu4;
    return est;
}

ReceivedTensor fourth_power_tensor(const ReceivedTensor& y) {
    ReceivedTensor z;
    z.config = y.config;
    z.data = y.data;
    cdouble* d = z.data.data();
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        const cdouble v = d[i];
        const cdouble v2 = v * v;
        d[i] = v2 * v2;
    }
    return z;
}

HosSpectrum hos_periodogram(const ReceivedTensor& z, const EstimatorConfig& est) {
    est.validate(z.config);
    HosSpectrum spec;
    spec.grid_dims = {z.data.dim0(), z.data.dim1(), z.data.dim2()};
    spec.values = Cube(est.fft_sizes[0], est.fft_sizes[1], est.fft_sizes[2]);
    dft3_zero_padded(z.data, spec.values);
    spec.mask.assign(spec.values.size(), 0);
    return spec;
}

double parabolic_refine(double y_minus, double y0, double y_plus, bool* flat) {
    if (flat) *flat = false;
    const double den = y_minus - 2.0 * y0 + y_plus;
    if (den == 0.0) {
        if (flat) *flat = true;
        return 0.0;
    }
    const double delta = 0.5 * (y_minus - y_plus) / den;
    return std::clamp(delta, -0.5, 0.5);
}

InverseMapping invert_mapping(double u, double v, double w, const OfdmConfig& cfg,
                              const EstimatorConfig& est, double virtual_scale) {
    const double n0 = static_cast<double>(est.fft_sizes[0]);
    const double n1 = static_cast<double>(est.fft_sizes[1]);
    const double n2 = static_cast<double>(est.fft_sizes[2]);
    const double su = (u >= n0 / 2.0) ? u - n0 : u;
    const double sv = (v >= n1 / 2.0) ? v - n1 : v;
    const double sw = (w >= n2 / 2.0) ? w - n2 : w;

    InverseMapping out;
    const double delay_range = 1.0 / (virtual_scale * cfg.subcarrier_spacing_hz);
    out.delay_s = -su / (virtual_scale * n0 * cfg.subcarrier_spacing_hz);
    if (out.delay_s < 0.0) out.delay_s += delay_range;
    if (out.delay_s >= delay_range) out.delay_s -= delay_range;

    out.doppler_hz = sv / (virtual_scale * n1 * cfg.symbol_duration_s);

    const double sin_theta = -sw / (virtual_scale * n2 * cfg.antenna_spacing_ratio);
    if (std::abs(sin_theta) > 1.0) {
        out.valid = false;
        return out;
    }
    out.angle_rad = std::asin(sin_theta);
    return out;
}

std::complex<double> estimate_gain(std::complex<double> peak_value,
                                   const EstimatorConfig& est, std::size_t g_fft) {
    if (peak_value == std::complex<double>(0.0, 0.0)) return {0.0, 0.0};
    const auto ratio =
        peak_value / (est.fourth_moment * static_cast<double>(g_fft));
    return std::pow(ratio, 0.25); // principal root; true gain times e^{j k pi/2}
}

namespace {

struct AxisWindow {
    long guard = 0;
    long training = 0;
    double mask_radius = 1.0;
};

std::array<AxisWindow, 3> axis_windows(const HosSpectrum& spec,
                                       const EstimatorConfig& est) {
    std::array<AxisWindow, 3> win;
    const std::array<std::size_t, 3> sizes = {spec.values.dim0(), spec.values.dim1(),
                                              spec.values.dim2()};
    for (int a = 0; a < 3; ++a) {
        const double pad = static_cast<double>(sizes[a]) /
                           static_cast<double>(spec.grid_dims[a]);
        long t = std::lround(est.training_cells * pad);
        long g = std::lround(est.guard_cells * pad);
        const long half = (static_cast<long>(sizes[a]) - 1) / 2;
        t = std::clamp(t, 1L, half);
        g = std::clamp(g, 0L, t - 1);
        win[a] = {g, t, std::max(1.0, est.mask_radius_cells * pad)};
    }
    return win;
}

std::size_t wrap(long idx, std::size_t n) {
    long r = idx % static_cast<long>(n);
    if (r < 0) r += static_cast<long>(n);
    return static_cast<std::size_t>(r);
}

/// Mean |S|^2 over unmasked training cells in the cube shell around the peak
/// (guard box excluded). Falls back to the global unmasked mean when every
/// shell cell is masked.
double cfar_background(const HosSpectrum& spec, const std::array<std::size_t, 3>& peak,
                       const std::array<AxisWindow, 3>& win) {
    const auto& s = spec.values;
    const std::array<std::size_t, 3> n = {s.dim0(), s.dim1(), s.dim2()};
    double acc = 0.0;
    std::size_t count = 0;
    for (long d0 = -win[0].training; d0 <= win[0].training; ++d0)
        for (long d1 = -win[1].training; d1 <= win[1].training; ++d1)
            for (long d2 = -win[2].training; d2 <= win[2].training; ++d2) {
                if (std::labs(d0) <= win[0].guard && std::labs(d1) <= win[1].guard &&
                    std::labs(d2) <= win[2].guard)
                    continue;
                const std::size_t i0 = wrap(static_cast<long>(peak[0]) + d0, n[0]);
                const std::size_t i1 = wrap(static_cast<long>(peak[1]) + d1, n[1]);
                const std::size_t i2 = wrap(static_cast<long>(peak[2]) + d2, n[2]);
                const std::size_t flat = (i0 * n[1] + i1) * n[2] + i2;
                if (spec.mask[flat]) continue;
                acc += std::norm(s.data()[flat]);
                ++count;
            }
    if (count > 0) return acc / static_cast<double>(count);

    acc = 0.0;
    count = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (spec.mask[i]) continue;
        acc += std::norm(s.data()[i]);
        ++count;
    }
    return count > 0 ? acc / static_cast<double>(count) : 0.0;
}

void mask_ball(HosSpectrum& spec, const std::array<std::size_t, 3>& center,
               const std::array<AxisWindow, 3>& win) {
    auto& s = spec.values;
    const std::array<std::size_t, 3> n = {s.dim0(), s.dim1(), s.dim2()};
    std::array<long, 3> ext;
    for (int a = 0; a < 3; ++a) {
        ext[a] = static_cast<long>(std::ceil(win[a].mask_radius));
        ext[a] = std::min(ext[a], static_cast<long>(n[a] / 2));
    }
    for (long d0 = -ext[0]; d0 <= ext[0]; ++d0)
        for (long d1 = -ext[1]; d1 <= ext[1]; ++d1)
            for (long d2 = -ext[2]; d2 <= ext[2]; ++d2) {
                const double q0 = static_cast<double>(d0) / win[0].mask_radius;
                const double q1 = static_cast<double>(d1) / win[1].mask_radius;
                const double q2 = static_cast<double>(d2) / win[2].mask_radius;
                if (q0 * q0 + q1 * q1 + q2 * q2 >= 1.0) continue;
                const std::size_t i0 = wrap(static_cast<long>(center[0]) + d0, n[0]);
                const std::size_t i1 = wrap(static_cast<long>(center[1]) + d1, n[1]);
                const std::size_t i2 = wrap(static_cast<long>(center[2]) + d2, n[2]);
                const std::size_t flat = (i0 * n[1] + i1) * n[2] + i2;
                spec.mask[flat] = 1;
                s.data()[flat] = {0.0, 0.0};
            }
}

/// Exact single-point DTFT of the source tensor at fractional bins.
cdouble point_dtft(const Cube& z, const std::array<std::size_t, 3>& fft_sizes,
                   double u, double v, double w) {
    const double f0 = u / static_cast<double>(fft_sizes[0]);
    const double f1 = v / static_cast<double>(fft_sizes[1]);
    const double f2 = w / static_cast<double>(fft_sizes[2]);
    std::vector<cdouble> e0(z.dim0()), e1(z.dim1()), e2(z.dim2());
    for (std::size_t k = 0; k < z.dim0(); ++k)
        e0[k] = std::polar(1.0, -2.0 * kPi * f0 * static_cast<double>(k));
    for (std::size_t n = 0; n < z.dim1(); ++n)
        e1[n] = std::polar(1.0, -2.0 * kPi * f1 * static_cast<double>(n));
    for (std::size_t m = 0; m < z.dim2(); ++m)
        e2[m] = std::polar(1.0, -2.0 * kPi * f2 * static_cast<double>(m));
    cdouble acc = 0.0;
    for (std::size_t k = 0; k < z.dim0(); ++k)
        for (std::size_t n = 0; n < z.dim1(); ++n) {
            cdouble row = 0.0;
            for (std::size_t m = 0; m < z.dim2(); ++m) row += z(k, n, m) * e2[m];
            acc += row * e0[k] * e1[n];
        }
    return acc;
}

} // namespace

EstimateReport enumerate_peaks(HosSpectrum& spec, const OfdmConfig& cfg,
                               const EstimatorConfig& est, double virtual_scale,
                               GainMode gain_mode, double gain_norm,
                               const Cube* source_tensor) {
    EstimateReport report;
    const auto win = axis_windows(spec, est);
    const auto& s = spec.values;
    const std::array<std::size_t, 3> n = {s.dim0(), s.dim1(), s.dim2()};
    const std::size_t max_rejects = est.max_sources + 8;
    std::size_t rejects = 0;

    while (report.detections.size() < est.max_sources && rejects < max_rejects) {
        // Dominant residual peak over unmasked bins.
        double best = -1.0;
        std::size_t best_flat = 0;
        const cdouble* d = s.data();
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (spec.mask[i]) continue;
            const double p = std::norm(d[i]);
            if (p > best) {
                best = p;
                best_flat = i;
            }
        }
        if (best < 0.0) break; // fully masked

        std::array<std::size_t, 3> peak;
        peak[2] = best_flat % n[2];
        peak[1] = (best_flat / n[2]) % n[1];
        peak[0] = best_flat / (n[1] * n[2]);

        DetectionPass pass;
        pass.bin = peak;
        pass.peak_power = best;
        pass.background = cfar_background(spec, peak, win);
        pass.ratio = pass.background > 0.0
                         ? best / pass.background
                         : std::numeric_limits<double>::infinity();
        if (!(pass.ratio > est.detection_threshold)) {
            pass.note = "stopped: peak-to-background at or below threshold";
            report.iterations.push_back(pass);
            break;
        }

        // Separable parabolic refinement on magnitudes, circular neighbors.
        auto mag_at = [&](long i0, long i1, long i2) {
            return std::abs(s(wrap(i0, n[0]), wrap(i1, n[1]), wrap(i2, n[2])));
        };
        const long p0 = static_cast<long>(peak[0]);
        const long p1 = static_cast<long>(peak[1]);
        const long p2 = static_cast<long>(peak[2]);
        const double y0 = std::abs(s(peak[0], peak[1], peak[2]));
        bool flat0 = false, flat1 = false, flat2 = false;
        const double du =
            parabolic_refine(mag_at(p0 - 1, p1, p2), y0, mag_at(p0 + 1, p1, p2), &flat0);
        const double dv =
            parabolic_refine(mag_at(p0, p1 - 1, p2), y0, mag_at(p0, p1 + 1, p2), &flat1);
        const double dw =
            parabolic_refine(mag_at(p0, p1, p2 - 1), y0, mag_at(p0, p1, p2 + 1), &flat2);
        const double u = static_cast<double>(peak[0]) + du;
        const double v = static_cast<double>(peak[1]) + dv;
        const double w = static_cast<double>(peak[2]) + dw;

        const auto mapped = invert_mapping(u, v, w, cfg, est, virtual_scale);
        if (!mapped.valid) {
            pass.note = "rejected: virtual spatial frequency aliases (|sin| > 1)";
            report.iterations.push_back(pass);
            mask_ball(spec, peak, win);
            ++rejects;
            continue;
        }

        cdouble peak_value = s(peak[0], peak[1], peak[2]);
        if (est.gain_at_refined_peak && source_tensor)
            peak_value = point_dtft(*source_tensor, est.fft_sizes, u, v, w);

        DetectedSource det;
        det.delay_s = mapped.delay_s;
        det.doppler_hz = mapped.doppler_hz;
        det.angle_rad = mapped.angle_rad;
        det.peak_power = best;
        det.peak_to_background = pass.ratio;
        det.refined_bins = {u, v, w};
        det.flat_refinement = flat0 || flat1 || flat2;
        det.gain = gain_mode == GainMode::FourthRoot
                       ? estimate_gain(peak_value, est,
                                       static_cast<std::size_t>(gain_norm))
                       : peak_value / gain_norm;

        pass.accepted = true;
        report.iterations.push_back(pass);
        report.detections.push_back(det);
        mask_ball(spec, peak, win);
    }
    return report;
}

EstimateReport detect_all(const ReceivedTensor& y, const EstimatorConfig& est) {
    est.validate(y.config);
    const ReceivedTensor z = fourth_power_tensor(y);
    HosSpectrum spec = hos_periodogram(z, est);
    const double g_fft = static_cast<double>(y.config.grid_size());
    return enumerate_peaks(spec, y.config, est, 4.0, GainMode::FourthRoot, g_fft,
                           est.gain_at_refined_peak ? &z.data : nullptr);
}

std::vector<std::vector<double>> spectrum_slice_power(const HosSpectrum& spec,
                                                      int axis0, int axis1) {
    if (axis0 < 0 || axis0 > 2 || axis1 < 0 || axis1 > 2 || axis0 == axis1)
        throw std::invalid_argument("spectrum_slice_power: bad axes");
    const int axis2 = 3 - axis0 - axis1;
    const auto& s = spec.values;
    const std::array<std::size_t, 3> n = {s.dim0(), s.dim1(), s.dim2()};
    std::vector<std::vector<double>> out(
        n[axis0], std::vector<double>(n[axis1], 0.0));
    std::array<std::size_t, 3> idx;
    for (idx[0] = 0; idx[0] < n[0]; ++idx[0])
        for (idx[1] = 0; idx[1] < n[1]; ++idx[1])
            for (idx[2] = 0; idx[2] < n[2]; ++idx[2]) {
                (void)axis2;
                double& cell = out[idx[axis0]][idx[axis1]];
                cell = std::max(cell, std::norm(s(idx[0], idx[1], idx[2])));
            }
    return out;
}

} // namespace isac
