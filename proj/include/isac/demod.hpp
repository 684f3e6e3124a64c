#ifndef ISAC_DEMOD_HPP
#define ISAC_DEMOD_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isac/constellation.hpp"
#include "isac/hos.hpp"
#include "isac/scenario.hpp"

namespace isac {

/// Sentinel slicer index for bins excluded by a rank-deficient mixing matrix.
inline constexpr std::uint16_t kInvalidSymbol = 0xFFFF;

struct FitConfig {
    std::size_t coarse_phase_points = 64;
    std::size_t dd_iterations = 5; // decision-directed LS rounds
    double regularizer = 1e-12;    // epsilon in the LS denominator

    void validate() const;
};

/// Mixing-matrix column p at TF bin (k, n):
///   a_p = alpha_p * e^{-j 2 pi k df tau_p} * e^{+j 2 pi n T nu_p} * steering(theta_p),
/// steering element m = e^{-j 2 pi (d/lambda) m sin(theta)}. Returned as an
/// M x P column-major array (column p starts at p * M).
std::vector<std::complex<double>> build_mixing(const EstimateReport& report,
                                               const OfdmConfig& cfg, std::size_t k,
                                               std::size_t n);

/// Per-bin zero-forcing outputs x_hat[k,n] = pinv(A[k,n]) r[k,n].
/// Requires P_hat <= M. Bins whose mixing matrix is ill-conditioned
/// (condition number > 1e10) are flagged invalid and excluded downstream;
/// with the factored mixing model this is an all-or-nothing property.
struct SeparatedStreams {
    Cube streams;                        // K x N_sym x P_hat
    std::vector<std::uint8_t> bin_valid; // K * N_sym entries, row-major k then n
    std::size_t invalid_bins = 0;
};

SeparatedStreams zf_separate(const ReceivedTensor& y, const EstimateReport& report);

/// Blind scalar-ambiguity fit of one separated stream: coarse phase grid for
/// initialization, then decision-directed least squares. Returns the complex
/// factor, the final sliced indices and the residual J.
struct StreamFit {
    std::complex<double> beta;
    std::vector<std::uint16_t> sliced;
    double residual = 0.0;
    bool degenerate = false;            // all-zero input
    std::vector<double> residual_trace; // J after each decision-directed round
};

StreamFit fit_stream(std::span<const std::complex<double>> samples,
                     const Constellation& c, const FitConfig& fit);

struct DemodResult {
    std::vector<std::complex<double>> beta;          // per stream
    std::vector<std::size_t> permutation;            // stream -> source label
    std::vector<std::vector<std::uint16_t>> sliced;  // per stream, k-major over (k,n)
    std::vector<double> residuals;                   // J_p
    std::vector<double> ser;                         // filled when truth is given
    std::vector<std::size_t> truth_alignment;        // stream -> truth source (scoring)
    std::vector<std::string> warnings;
};

/// Fits every stream against every candidate source label and selects the
/// permutation minimizing the total residual (exhaustive up to 6 streams,
/// greedy assignment with a warning beyond). When all labels share one
/// constellation the residuals cannot distinguish labels and the identity
/// permutation is returned. `constellations` has one entry per source label.
DemodResult resolve_permutation(const SeparatedStreams& streams,
                                const std::vector<Constellation>& constellations,
                                const FitConfig& fit);

/// Fraction of mismatched symbol indices; invalid (sentinel) bins are
/// excluded from the count. Throws on length mismatch.
double symbol_error_rate(std::span<const std::uint16_t> sliced,
                         std::span<const std::uint16_t> truth);

/// Stream -> truth-source assignment by normalized parameter distance
/// (delay, Doppler, sin(angle), each scaled by the grid resolution).
/// Used for scoring only; independent of the blind residual permutation.
std::vector<std::size_t> align_by_parameters(const EstimateReport& report,
                                             const std::vector<SourceParams>& truth,
                                             const OfdmConfig& cfg);

/// End-to-end convenience: ZF separation, ambiguity fitting and permutation
/// selection; when truth symbols are provided, also per-stream symbol error
/// rates against the parameter-matched sources.
DemodResult demodulate(const ReceivedTensor& y, const EstimateReport& report,
                       const std::vector<Constellation>& constellations,
                       const FitConfig& fit, const Cube* truth_symbols = nullptr,
                       const std::vector<SourceParams>* truth_sources = nullptr);

} // namespace isac

#endif
