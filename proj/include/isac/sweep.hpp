#ifndef ISAC_SWEEP_HPP
#define ISAC_SWEEP_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "isac/demod.hpp"
#include "isac/hos.hpp"
#include "isac/scenario.hpp"

namespace isac {

inline constexpr const char* kCodeVersion = "0.1.0";

enum class SweepAxis {
    SnrDb,         // sets noise variance from the value, w.r.t. source 0
    PilotCount,    // pilot-aided baseline with N_p comb subcarriers
    TimingOffset,  // impairment tau_sync, seconds
    Cfo,           // impairment nu_sync, Hz
    PhaseOffset,   // impairment phi_0, radians
    Constellation  // named preset per point (preset_values)
};

std::string axis_name(SweepAxis axis);
SweepAxis axis_from_name(const std::string& name);

/// One Monte-Carlo experiment: a base scenario, an estimator configuration,
/// one sweep axis, and a trial count per point. Trials use derived seeds
/// (base_seed xor trial index), so the same trial index sees the same noise
/// and symbols at every sweep point (common random numbers).
struct Experiment {
    std::string name = "experiment";
    Scenario scenario;
    EstimatorConfig estimator;
    SweepAxis axis = SweepAxis::SnrDb;
    std::vector<double> values;              // for all axes except Constellation
    std::vector<std::string> preset_values;  // for SweepAxis::Constellation
    std::size_t trials = 50;
    bool run_data_aided = true;
    bool run_demod = false;
    std::uint64_t base_seed = 1;
    std::size_t threads = 1;

    void validate() const;
};

struct ResultRow {
    double sweep_value = 0.0;
    std::string metric;
    double mean = 0.0;
    double stdev = 0.0;
    std::size_t trials = 0; // samples aggregated into this row
};

struct ResultTable {
    std::string name;
    std::uint64_t seed = 0;
    std::string config_hash; // of the canonical experiment description
    std::string code_version = kCodeVersion;
    std::vector<ResultRow> rows;

    /// Mean of a (sweep_value, metric) row; throws when absent.
    double mean_of(double sweep_value, const std::string& metric) const;
    /// sqrt(mean) convenience for squared-error metrics.
    double rmse_of(double sweep_value, const std::string& metric) const;

    void save_csv(const std::string& path) const;
};

/// Metric names emitted per trial (subset depends on configuration):
///   err2_tau_<est>_s<i>, err2_v_<est>_s<i>, err2_theta_<est>_s<i>
///       squared errors of the parameter-matched detection for truth source
///       i, in s^2, (m/s)^2, rad^2; <est> is blind | da | pilot
///   num_detected_blind       detections per trial
///   miss_<est>_s<i>          1 when truth source i had no detection at all
///   ser_mean                 mean symbol error rate across streams (demod)
/// RMSE curves follow as sqrt(mean) of the err2 rows.
ResultTable run_experiment(const Experiment& ex);

/// Canonical text form used for the config hash.
std::string experiment_canonical_text(const Experiment& ex);

} // namespace isac

#endif
