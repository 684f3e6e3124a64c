#ifndef ISAC_SCENARIO_HPP
#define ISAC_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "isac/constellation.hpp"
#include "isac/core.hpp"
#include "isac/tensor.hpp"

namespace isac {

/// Receiver-side synchronization impairments, applied multiplicatively to
/// the received tensor: a subcarrier phase ramp for a timing offset, a
/// symbol phase rotation for CFO, and a common phase offset.
struct ImpairmentConfig {
    double timing_offset_s = 0.0; // tau_sync
    double cfo_hz = 0.0;          // nu_sync
    double phase_offset_rad = 0.0;

    bool any() const {
        return timing_offset_s != 0.0 || cfo_hz != 0.0 || phase_offset_rad != 0.0;
    }
};

/// Everything needed to synthesize one received tensor: grid, sources,
/// symbol alphabet(s) and the RNG seed. Per-source constellations are
/// supported; when source_constellations is empty all sources share
/// `constellation`.
struct Scenario {
    OfdmConfig config;
    std::vector<SourceParams> sources;
    Constellation constellation;
    std::vector<Constellation> source_constellations; // optional, per source
    std::uint64_t rng_seed = 0;

    const Constellation& constellation_of(std::size_t p) const {
        return source_constellations.empty() ? constellation
                                             : source_constellations.at(p);
    }

    /// Throws on an invalid grid/sources; returns human-readable warnings
    /// for parameter regimes outside the model's assumptions (virtual-domain
    /// aliasing of delay, Doppler or angle after the x4 scaling).
    std::vector<std::string> validate() const;
};

/// Received observation cube Y[k,n,m] of shape K x N_sym x M.
struct ReceivedTensor {
    Cube data;
    OfdmConfig config;
};

/// Result of synthesize(): the noisy observation and the ground-truth
/// transmitted symbols X[k,n,p] (complex values) for benchmarking.
struct SynthesisResult {
    ReceivedTensor received;
    Cube symbols; // K x N_sym x P
};

/// Unit-modulus 3D channel response
///   H(k,n,m) = e^{-j 2 pi k df tau} * e^{+j 2 pi n T nu} * e^{-j 2 pi (d/lambda) m sin(theta)}.
std::complex<double> channel_response(const OfdmConfig& cfg, const SourceParams& src,
                                      std::size_t k, std::size_t n, std::size_t m);

/// Synthesizes Y = sum_p alpha_p X_p H_p + W directly on the frequency-domain
/// grid, then applies the impairment phases to the whole tensor. Symbols are
/// i.i.d. uniform over each source's constellation and independent across
/// sources; per-source streams depend only on (seed, source index), so adding
/// a source never changes the others' symbols. Noise is circular complex
/// Gaussian with variance config.noise_variance.
SynthesisResult synthesize(const Scenario& sc, const ImpairmentConfig& imp = {});

/// Linear per-source SNR, |alpha_p|^2 * E[|X|^2] / sigma_n^2.
/// Throws if sigma_n^2 = 0.
std::vector<double> snr_of(const Scenario& sc);

/// Noise variance that puts source `ref_source` at the requested SNR.
double noise_variance_for_snr_db(const Scenario& sc, double snr_db,
                                 std::size_t ref_source = 0);

} // namespace isac

#endif
