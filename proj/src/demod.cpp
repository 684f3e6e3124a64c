#include "isac/demod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace isac {

void FitConfig::validate() const {
    if (coarse_phase_points < 1 || dd_iterations < 1 || regularizer <= 0.0)
        throw std::invalid_argument("FitConfig: all fields must be positive");
}

namespace {

std::vector<std::complex<double>> steering(const OfdmConfig& cfg, double theta,
                                           std::size_t m_count) {
    std::vector<std::complex<double>> a(m_count);
    for (std::size_t m = 0; m < m_count; ++m)
        a[m] = std::polar(1.0, -2.0 * kPi * cfg.antenna_spacing_ratio *
                                   static_cast<double>(m) * std::sin(theta));
    return a;
}

std::complex<double> tf_phase(const OfdmConfig& cfg, const DetectedSource& d,
                              std::size_t k, std::size_t n) {
    return std::polar(1.0, -2.0 * kPi * static_cast<double>(k) *
                               cfg.subcarrier_spacing_hz * d.delay_s +
                               2.0 * kPi * static_cast<double>(n) *
                                   cfg.symbol_duration_s * d.doppler_hz);
}

} // namespace

std::vector<std::complex<double>> build_mixing(const EstimateReport& report,
                                               const OfdmConfig& cfg, std::size_t k,
                                               std::size_t n) {
    const std::size_t M = cfg.num_antennas;
    const std::size_t P = report.detections.size();
    if (P == 0) throw std::invalid_argument("build_mixing: no detections");
    std::vector<std::complex<double>> a(M * P);
    for (std::size_t p = 0; p < P; ++p) {
        const auto& det = report.detections[p];
        const auto col = steering(cfg, det.angle_rad, M);
        const auto scale = det.gain * tf_phase(cfg, det, k, n);
        for (std::size_t m = 0; m < M; ++m) a[p * M + m] = scale * col[m];
    }
    return a;
}

SeparatedStreams zf_separate(const ReceivedTensor& y, const EstimateReport& report) {
    const auto& cfg = y.config;
    const std::size_t K = y.data.dim0(), N = y.data.dim1(), M = y.data.dim2();
    const std::size_t P = report.detections.size();
    if (P == 0) throw std::invalid_argument("zf_separate: no detections");
    if (P > M)
        throw std::invalid_argument("zf_separate: more streams than antennas");

    // A[k,n] = S * diag(Phi_p(k,n)) with unit-modulus Phi, so
    // pinv(A[k,n]) = diag(Phi)^H * pinv(S): one pseudoinverse serves every
    // bin, and the bin condition number equals cond(S).
    Eigen::MatrixXcd S(M, P);
    for (std::size_t p = 0; p < P; ++p) {
        const auto& det = report.detections[p];
        const auto col = steering(cfg, det.angle_rad, M);
        for (std::size_t m = 0; m < M; ++m)
            S(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p)) =
                det.gain * col[m];
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const bool valid = smin > 0.0 && smax / smin <= 1e10;

    SeparatedStreams out;
    out.streams = Cube(K, N, P);
    out.bin_valid.assign(K * N, valid ? 1 : 0);
    if (!valid) {
        out.invalid_bins = K * N;
        return out;
    }

    Eigen::MatrixXcd pinv =
        svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() *
        svd.matrixU().adjoint(); // P x M

    // Per-source TF phase factors, separable in k and n.
    std::vector<std::vector<std::complex<double>>> fk(P), fn(P);
    for (std::size_t p = 0; p < P; ++p) {
        const auto& det = report.detections[p];
        fk[p].resize(K);
        fn[p].resize(N);
        for (std::size_t k = 0; k < K; ++k)
            fk[p][k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) *
                                           cfg.subcarrier_spacing_hz * det.delay_s);
        for (std::size_t n = 0; n < N; ++n)
            fn[p][n] = std::polar(1.0, 2.0 * kPi * static_cast<double>(n) *
                                           cfg.symbol_duration_s * det.doppler_hz);
    }

    Eigen::VectorXcd r(M), xs(P);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t m = 0; m < M; ++m)
                r(static_cast<Eigen::Index>(m)) = y.data(k, n, m);
            xs = pinv * r;
            for (std::size_t p = 0; p < P; ++p)
                out.streams(k, n, p) =
                    std::conj(fk[p][k] * fn[p][n]) * xs(static_cast<Eigen::Index>(p));
        }
    return out;
}

namespace {

double fit_objective(std::span<const std::complex<double>> samples,
                     const Constellation& c, std::complex<double> beta) {
    double j = 0.0;
    for (const auto& x : samples) {
        const auto [idx, point] = slice(c, x / beta);
        (void)idx;
        j += std::norm(x - beta * point);
    }
    return j;
}

} // namespace

StreamFit fit_stream(std::span<const std::complex<double>> samples,
                     const Constellation& c, const FitConfig& fit) {
    fit.validate();
    c.validate();
    if (samples.empty())
        throw std::invalid_argument("fit_stream: need at least one sample");

    StreamFit out;
    double sample_mag = 0.0;
    for (const auto& x : samples) sample_mag += std::abs(x);
    sample_mag /= static_cast<double>(samples.size());
    if (sample_mag == 0.0) {
        out.beta = 0.0;
        out.residual = 0.0;
        out.degenerate = true;
        out.sliced.assign(samples.size(), 0);
        return out;
    }

    double point_mag = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        point_mag += c.probabilities[i] * std::abs(c.points[i]);
    const double mag0 = sample_mag / point_mag;

    // Coarse phase grid at moment-matched magnitude.
    std::complex<double> beta = mag0;
    double best_j = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fit.coarse_phase_points; ++i) {
        const double phi =
            2.0 * kPi * static_cast<double>(i) / static_cast<double>(fit.coarse_phase_points);
        const auto cand = std::polar(mag0, phi);
        const double j = fit_objective(samples, c, cand);
        if (j < best_j) {
            best_j = j;
            beta = cand;
        }
    }

    // Decision-directed rounds: slice x/beta, then LS-refit beta.
    std::vector<std::uint16_t> sliced(samples.size());
    for (std::size_t t = 0; t < fit.dd_iterations; ++t) {
        std::complex<double> num = 0.0;
        double den = fit.regularizer;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto [idx, point] = slice(c, samples[i] / beta);
            sliced[i] = static_cast<std::uint16_t>(idx);
            num += samples[i] * std::conj(point);
            den += std::norm(point);
        }
        beta = num / den;
        out.residual_trace.push_back(fit_objective(samples, c, beta));
    }

    // Final slicing under the last beta, and the residual it implies.
    double j_final = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [idx, point] = slice(c, samples[i] / beta);
        sliced[i] = static_cast<std::uint16_t>(idx);
        j_final += std::norm(samples[i] - beta * point);
    }
    out.beta = beta;
    out.sliced = std::move(sliced);
    out.residual = j_final;
    return out;
}

namespace {

bool same_alphabet(const Constellation& a, const Constellation& b) {
    return a.points == b.points && a.probabilities == b.probabilities;
}

std::vector<std::size_t> min_cost_assignment(
    const std::vector<std::vector<double>>& cost, std::vector<std::string>& warnings) {
    const std::size_t P = cost.size();
    std::vector<std::size_t> best(P);
    std::iota(best.begin(), best.end(), 0);
    if (P <= 6) {
        std::vector<std::size_t> perm = best;
        double best_total = std::numeric_limits<double>::infinity();
        do {
            double total = 0.0;
            for (std::size_t p = 0; p < P; ++p) total += cost[p][perm[p]];
            if (total < best_total) {
                best_total = total;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    warnings.push_back("permutation search: more than 6 streams, greedy assignment");
    std::vector<bool> stream_used(P, false), label_used(P, false);
    for (std::size_t step = 0; step < P; ++step) {
        double m = std::numeric_limits<double>::infinity();
        std::size_t bp = 0, bq = 0;
        for (std::size_t p = 0; p < P; ++p) {
            if (stream_used[p]) continue;
            for (std::size_t q = 0; q < P; ++q) {
                if (label_used[q]) continue;
                if (cost[p][q] < m) {
                    m = cost[p][q];
                    bp = p;
                    bq = q;
                }
            }
        }
        stream_used[bp] = true;
        label_used[bq] = true;
        best[bp] = bq;
    }
    return best;
}

} // namespace

DemodResult resolve_permutation(const SeparatedStreams& streams,
                                const std::vector<Constellation>& constellations,
                                const FitConfig& fit) {
    const std::size_t K = streams.streams.dim0();
    const std::size_t N = streams.streams.dim1();
    const std::size_t P = streams.streams.dim2();
    if (P == 0 || constellations.size() != P)
        throw std::invalid_argument("resolve_permutation: need one constellation per stream");

    DemodResult out;
    for (std::size_t q = 0; q < P; ++q)
        if (rotation_separation(constellations[q], kPi / 2) < 1e-9)
            out.warnings.push_back("label " + std::to_string(q) +
                                   ": d_rot(pi/2) = 0, quadrant ambiguity unresolvable");

    // Valid-bin samples per stream, row-major k then n.
    std::vector<std::vector<std::complex<double>>> samples(P);
    for (std::size_t p = 0; p < P; ++p) samples[p].reserve(K * N);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t n = 0; n < N; ++n) {
            if (!streams.bin_valid[k * N + n]) continue;
            for (std::size_t p = 0; p < P; ++p)
                samples[p].push_back(streams.streams(k, n, p));
        }
    if (samples[0].empty())
        throw NumericalError("resolve_permutation: every bin is rank-deficient");

    bool shared = true;
    for (std::size_t q = 1; q < P && shared; ++q)
        shared = same_alphabet(constellations[q], constellations[0]);

    std::vector<std::size_t> perm(P);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<StreamFit> chosen(P);
    if (shared) {
        // Residuals cannot depend on the label: fit once, keep identity.
        for (std::size_t p = 0; p < P; ++p)
            chosen[p] = fit_stream(samples[p], constellations[0], fit);
    } else {
        std::vector<std::vector<StreamFit>> fits(P, std::vector<StreamFit>(P));
        std::vector<std::vector<double>> cost(P, std::vector<double>(P));
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t q = 0; q < P; ++q) {
                fits[p][q] = fit_stream(samples[p], constellations[q], fit);
                cost[p][q] = fits[p][q].residual;
            }
        perm = min_cost_assignment(cost, out.warnings);
        for (std::size_t p = 0; p < P; ++p) chosen[p] = std::move(fits[p][perm[p]]);
    }

    out.permutation = perm;
    out.beta.resize(P);
    out.residuals.resize(P);
    out.sliced.assign(P, std::vector<std::uint16_t>(K * N, kInvalidSymbol));
    for (std::size_t p = 0; p < P; ++p) {
        out.beta[p] = chosen[p].beta;
        out.residuals[p] = chosen[p].residual;
        std::size_t s = 0;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t n = 0; n < N; ++n) {
                if (!streams.bin_valid[k * N + n]) continue;
                out.sliced[p][k * N + n] = chosen[p].sliced[s++];
            }
    }
    return out;
}

double symbol_error_rate(std::span<const std::uint16_t> sliced,
                         std::span<const std::uint16_t> truth) {
    if (sliced.size() != truth.size())
        throw std::invalid_argument("symbol_error_rate: length mismatch");
    std::size_t errors = 0, counted = 0;
    for (std::size_t i = 0; i < sliced.size(); ++i) {
        if (sliced[i] == kInvalidSymbol) continue;
        ++counted;
        if (sliced[i] != truth[i]) ++errors;
    }
    return counted == 0 ? 0.0
                        : static_cast<double>(errors) / static_cast<double>(counted);
}

std::vector<std::size_t> align_by_parameters(const EstimateReport& report,
                                             const std::vector<SourceParams>& truth,
                                             const OfdmConfig& cfg) {
    const std::size_t P = report.detections.size();
    const std::size_t T = truth.size();
    if (P == 0) return {};
    // Normalized distance in resolution units per axis.
    const double res_tau = 1.0 / (cfg.subcarrier_spacing_hz *
                                  static_cast<double>(cfg.num_subcarriers));
    const double res_nu =
        1.0 / (cfg.symbol_duration_s * static_cast<double>(cfg.num_symbols));
    const double res_sin =
        1.0 / (cfg.antenna_spacing_ratio * static_cast<double>(cfg.num_antennas));
    std::vector<std::vector<double>> cost(P, std::vector<double>(T));
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t t = 0; t < T; ++t) {
            const auto& d = report.detections[p];
            const auto& s = truth[t];
            cost[p][t] = std::abs(d.delay_s - s.delay_s) / res_tau +
                         std::abs(d.doppler_hz - s.doppler_hz) / res_nu +
                         std::abs(std::sin(d.angle_rad) - std::sin(s.angle_rad)) / res_sin;
        }
    // Greedy best-match: repeatedly take the globally closest unused pair.
    std::vector<std::size_t> align(P, 0);
    std::vector<bool> used_t(T, false);
    for (std::size_t step = 0; step < std::min(P, T); ++step) {
        double m = std::numeric_limits<double>::infinity();
        std::size_t bp = 0, bt = 0;
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t t = 0; t < T; ++t) {
                if (used_t[t]) continue;
                if (cost[p][t] < m) {
                    m = cost[p][t];
                    bp = p;
                    bt = t;
                }
            }
        align[bp] = bt;
        used_t[bt] = true;
        for (std::size_t t = 0; t < T; ++t)
            cost[bp][t] = std::numeric_limits<double>::infinity();
    }
    return align;
}

DemodResult demodulate(const ReceivedTensor& y, const EstimateReport& report,
                       const std::vector<Constellation>& constellations,
                       const FitConfig& fit, const Cube* truth_symbols,
                       const std::vector<SourceParams>* truth_sources) {
    const SeparatedStreams streams = zf_separate(y, report);
    DemodResult out = resolve_permutation(streams, constellations, fit);
    if (truth_symbols && truth_sources) {
        const std::size_t K = y.data.dim0(), N = y.data.dim1();
        const std::size_t P = report.detections.size();
        out.truth_alignment = align_by_parameters(report, *truth_sources, y.config);
        out.ser.resize(P);
        for (std::size_t p = 0; p < P; ++p) {
            const std::size_t t = out.truth_alignment[p];
            const auto& c = constellations[std::min(t, constellations.size() - 1)];
            std::vector<std::uint16_t> truth_idx(K * N);
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t n = 0; n < N; ++n)
                    truth_idx[k * N + n] = static_cast<std::uint16_t>(
                        slice(c, (*truth_symbols)(k, n, t)).first);
            out.ser[p] = symbol_error_rate(out.sliced[p], truth_idx);
        }
    }
    return out;
}

} // namespace isac
