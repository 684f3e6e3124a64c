#include "isac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isac/rng.hpp"

namespace isac {

namespace {
constexpr std::uint64_t kNoisePurpose = 0x6e6f697365; // stream tags
constexpr std::uint64_t kSymbolPurpose = 0x73796d73;
} // namespace

std::vector<std::string> Scenario::validate() const {
    config.validate();
    if (sources.empty())
        throw std::invalid_argument("Scenario: need at least one source");
    if (!source_constellations.empty() &&
        source_constellations.size() != sources.size())
        throw std::invalid_argument(
            "Scenario: per-source constellations must match source count");
    for (const auto& s : sources) s.validate();
    for (std::size_t p = 0; p < sources.size(); ++p) constellation_of(p).validate();

    std::vector<std::string> warnings;
    for (std::size_t p = 0; p < sources.size(); ++p) {
        const auto& s = sources[p];
        const std::string tag = "source " + std::to_string(p) + ": ";
        if (4.0 * config.subcarrier_spacing_hz * s.delay_s >= 1.0)
            warnings.push_back(tag + "delay beyond the x4 virtual unambiguous range");
        if (std::abs(4.0 * config.symbol_duration_s * s.doppler_hz) >= 0.5)
            warnings.push_back(tag + "Doppler aliases in the x4 virtual domain");
        if (std::abs(4.0 * config.antenna_spacing_ratio * std::sin(s.angle_rad)) >= 0.5)
            warnings.push_back(tag + "angle aliases in the x4 virtual domain");
    }
    return warnings;
}

std::complex<double> channel_response(const OfdmConfig& cfg, const SourceParams& src,
                                      std::size_t k, std::size_t n, std::size_t m) {
    const double phase =
        -2.0 * kPi * static_cast<double>(k) * cfg.subcarrier_spacing_hz * src.delay_s +
        2.0 * kPi * static_cast<double>(n) * cfg.symbol_duration_s * src.doppler_hz -
        2.0 * kPi * cfg.antenna_spacing_ratio * static_cast<double>(m) *
            std::sin(src.angle_rad);
    return std::polar(1.0, phase);
}

SynthesisResult synthesize(const Scenario& sc, const ImpairmentConfig& imp) {
    sc.validate();
    const auto& cfg = sc.config;
    const std::size_t K = cfg.num_subcarriers;
    const std::size_t N = cfg.num_symbols;
    const std::size_t M = cfg.num_antennas;
    const std::size_t P = sc.sources.size();

    SynthesisResult out;
    out.received.config = cfg;
    out.received.data = Cube(K, N, M);
    out.symbols = Cube(K, N, P);
    Cube& y = out.received.data;

    for (std::size_t p = 0; p < P; ++p) {
        const auto& src = sc.sources[p];
        const auto& cst = sc.constellation_of(p);
        Rng sym_rng(Rng::derive(sc.rng_seed, kSymbolPurpose, p));

        // Inverse-CDF draw honors non-uniform symbol probabilities; for the
        // default uniform case it reduces to an even split of [0, 1).
        std::vector<double> cdf(cst.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < cst.size(); ++i) {
            acc += cst.probabilities[i];
            cdf[i] = acc;
        }
        cdf.back() = 1.0;
        const auto draw = [&]() {
            const double u = sym_rng.uniform();
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            return static_cast<std::size_t>(it - cdf.begin());
        };

        // Per-axis phase factors; the (k,n,m) response is their product.
        std::vector<std::complex<double>> fk(K), fn(N), fm(M);
        for (std::size_t k = 0; k < K; ++k)
            fk[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) *
                                        cfg.subcarrier_spacing_hz * src.delay_s);
        for (std::size_t n = 0; n < N; ++n)
            fn[n] = std::polar(1.0, 2.0 * kPi * static_cast<double>(n) *
                                        cfg.symbol_duration_s * src.doppler_hz);
        for (std::size_t m = 0; m < M; ++m)
            fm[m] = std::polar(1.0, -2.0 * kPi * cfg.antenna_spacing_ratio *
                                        static_cast<double>(m) * std::sin(src.angle_rad));

        // Symbols are drawn in (n, k) order: one column of the TF grid per
        // OFDM symbol, matching the transmit-time ordering.
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t k = 0; k < K; ++k) {
                const auto x = cst.points[draw()];
                out.symbols(k, n, p) = x;
                const auto scaled = src.gain * x * fk[k] * fn[n];
                for (std::size_t m = 0; m < M; ++m) y(k, n, m) += scaled * fm[m];
            }
        }
    }

    if (cfg.noise_variance > 0.0) {
        Rng noise_rng(Rng::derive(sc.rng_seed, kNoisePurpose));
        const double amp = std::sqrt(cfg.noise_variance);
        cdouble* d = y.data();
        const std::size_t total = y.size();
        for (std::size_t i = 0; i < total; ++i) d[i] += amp * noise_rng.complex_gaussian();
    }

    if (imp.any()) {
        std::vector<std::complex<double>> gk(K), gn(N);
        for (std::size_t k = 0; k < K; ++k)
            gk[k] = std::polar(1.0, -2.0 * kPi * cfg.subcarrier_spacing_hz *
                                        imp.timing_offset_s * static_cast<double>(k));
        for (std::size_t n = 0; n < N; ++n)
            gn[n] = std::polar(1.0, 2.0 * kPi * cfg.symbol_duration_s * imp.cfo_hz *
                                        static_cast<double>(n));
        const auto g0 = std::polar(1.0, imp.phase_offset_rad);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t n = 0; n < N; ++n) {
                const auto g = gk[k] * gn[n] * g0;
                for (std::size_t m = 0; m < M; ++m) y(k, n, m) *= g;
            }
    }
    return out;
}

std::vector<double> snr_of(const Scenario& sc) {
    if (sc.config.noise_variance <= 0.0)
        throw std::invalid_argument("snr_of: noise variance must be > 0");
    std::vector<double> snr(sc.sources.size());
    for (std::size_t p = 0; p < sc.sources.size(); ++p) {
        const double sx2 = sc.constellation_of(p).average_power();
        snr[p] = std::norm(sc.sources[p].gain) * sx2 / sc.config.noise_variance;
    }
    return snr;
}

double noise_variance_for_snr_db(const Scenario& sc, double snr_db,
                                 std::size_t ref_source) {
    if (ref_source >= sc.sources.size())
        throw std::invalid_argument("noise_variance_for_snr_db: bad source index");
    const double sx2 = sc.constellation_of(ref_source).average_power();
    const double snr_lin = std::pow(10.0, snr_db / 10.0);
    return std::norm(sc.sources[ref_source].gain) * sx2 / snr_lin;
}

} // namespace isac
