#ifndef ISAC_IO_HPP
#define ISAC_IO_HPP

#include <cstdint>
#include <string>

#include "isac/bounds.hpp"
#include "isac/constellation.hpp"
#include "isac/demod.hpp"
#include "isac/hos.hpp"
#include "isac/scenario.hpp"
#include "isac/sweep.hpp"

namespace isac {

/// All structured-text files are JSON with a schema_version field; doubles
/// are serialized with shortest round-trip formatting, so write -> read is
/// bit-identical for finite values. Schema errors throw std::runtime_error
/// with the file name and location.

void save_constellation(const Constellation& c, const std::string& path);
Constellation load_constellation(const std::string& path);

void save_scenario(const Scenario& sc, const std::string& path);

/// Scenario loader. Units are annotated by key name: delay_s/delay_ns,
/// doppler_hz/velocity_mps, angle_rad/angle_deg, gain [re, im] or a scalar.
/// The noise level is either config.noise_variance or a top-level snr_db
/// (converted w.r.t. source 0). The constellation entry is a named preset
/// ("qpsk", "bpsk", "balanced", "comm", "sensing"), an inline constellation
/// object, or {"file": path}.
Scenario load_scenario(const std::string& path);

/// Binary tensor dump, documented bit-exactly:
///   line 1: "#isac-tensor 1"
///   line 2: "dims <d0> <d1> <d2>"
///   line 3: "layout row-major re,im float64 little-endian"
///   line 4: "data"
/// followed by d0*d1*d2 complex values as little-endian IEEE-754 doubles
/// (re then im), last index fastest. The received tensor uses (K, N_sym, M);
/// truth symbol dumps use (K, N_sym, P).
void save_cube(const Cube& t, const std::string& path);
Cube load_cube(const std::string& path);

void save_estimate_report(const EstimateReport& r, const std::string& path);
EstimateReport load_estimate_report(const std::string& path);

void save_demod_report(const DemodResult& r, const std::string& path);

/// CRLB table as CSV with columns
///   snr_db, crlb_tau, crlb_v, crlb_theta, stochastic_factor
/// (delay in s^2, velocity in (m/s)^2, angle in rad^2).
void save_crlb_table(const OfdmConfig& cfg, const std::vector<double>& snr_db,
                     double theta_rad, const std::string& path);

/// Heatmap CSV: first row is the column axis, first column the row axis,
/// cells are |S|^2 maxima over the remaining axis.
void save_heatmap_csv(const std::vector<std::vector<double>>& grid,
                      const std::vector<double>& row_axis,
                      const std::vector<double>& col_axis, const std::string& path);

/// Estimator config from a JSON object file. Absent fields keep the 8x-pad
/// defaults for `cfg`; the fourth moment defaults to `mu4_default` (usually
/// computed from the scenario constellation).
EstimatorConfig load_estimator_config(const std::string& path, const OfdmConfig& cfg,
                                      std::complex<double> mu4_default);

/// Experiment file: name, scenario (inline or {"file": path}), optional
/// estimator object, sweep {axis, values}, trials, base_seed, threads,
/// data_aided, demod.
Experiment load_experiment(const std::string& path);

/// Canonical JSON text of a scenario (sorted keys), used for config hashing.
std::string scenario_canonical_json(const Scenario& sc);

/// FNV-1a 64-bit over a string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Shortest round-trip decimal text for a double (std::to_chars).
std::string format_double(double v);

} // namespace isac

#endif
