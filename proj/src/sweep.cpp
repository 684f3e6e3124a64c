#include "isac/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "isac/bounds.hpp"
#include "isac/design.hpp"
#include "isac/io.hpp"

namespace isac {

std::string axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::SnrDb: return "snr_db";
        case SweepAxis::PilotCount: return "pilot_count";
        case SweepAxis::TimingOffset: return "timing_offset_s";
        case SweepAxis::Cfo: return "cfo_hz";
        case SweepAxis::PhaseOffset: return "phase_offset_rad";
        case SweepAxis::Constellation: return "constellation";
    }
    return "unknown";
}

SweepAxis axis_from_name(const std::string& name) {
    if (name == "snr_db") return SweepAxis::SnrDb;
    if (name == "pilot_count") return SweepAxis::PilotCount;
    if (name == "timing_offset_s") return SweepAxis::TimingOffset;
    if (name == "cfo_hz") return SweepAxis::Cfo;
    if (name == "phase_offset_rad") return SweepAxis::PhaseOffset;
    if (name == "constellation") return SweepAxis::Constellation;
    throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

void Experiment::validate() const {
    scenario.validate();
    estimator.validate(scenario.config);
    if (trials < 1) throw std::invalid_argument("Experiment: trials must be >= 1");
    const bool preset_axis = axis == SweepAxis::Constellation;
    if (preset_axis ? preset_values.empty() : values.empty())
        throw std::invalid_argument("Experiment: sweep values must be nonempty");
}

namespace {

using TrialMetrics = std::map<std::string, double>;

const Constellation& preset_by_name(const std::string& name) {
    if (name == "qpsk") {
        static const Constellation c = make_qpsk();
        return c;
    }
    if (name == "balanced") return balanced_apsk16();
    if (name == "comm") return communication_apsk16();
    if (name == "sensing") return sensing_apsk16();
    throw std::invalid_argument("unknown constellation preset '" + name + "'");
}

void record_errors(TrialMetrics& out, const std::string& est_name,
                   const EstimateReport& report, const Scenario& sc) {
    const auto& truth = sc.sources;
    const double lambda = sc.config.wavelength_m();
    if (report.detections.empty()) {
        for (std::size_t i = 0; i < truth.size(); ++i)
            out["miss_" + est_name + "_s" + std::to_string(i)] = 1.0;
        return;
    }
    const auto align = align_by_parameters(report, truth, sc.config);
    std::vector<bool> covered(truth.size(), false);
    for (std::size_t p = 0; p < report.detections.size(); ++p) {
        const std::size_t t = align[p];
        if (t >= truth.size() || covered[t]) continue;
        covered[t] = true;
        const auto& d = report.detections[p];
        const auto& s = truth[t];
        const std::string suffix = "_" + est_name + "_s" + std::to_string(t);
        const double dtau = d.delay_s - s.delay_s;
        const double dv = (d.doppler_hz - s.doppler_hz) * lambda;
        const double dth = d.angle_rad - s.angle_rad;
        out["err2_tau" + suffix] = dtau * dtau;
        out["err2_v" + suffix] = dv * dv;
        out["err2_theta" + suffix] = dth * dth;
        out["miss_" + est_name + "_s" + std::to_string(t)] = 0.0;
    }
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!covered[i]) out["miss_" + est_name + "_s" + std::to_string(i)] = 1.0;
}

TrialMetrics run_trial(const Experiment& ex, double value, const std::string& preset,
                       std::size_t trial) {
    Scenario sc = ex.scenario;
    EstimatorConfig est = ex.estimator;
    ImpairmentConfig imp;
    std::size_t pilot_count = 0;

    switch (ex.axis) {
        case SweepAxis::SnrDb:
            sc.config.noise_variance = noise_variance_for_snr_db(sc, value);
            break;
        case SweepAxis::PilotCount:
            pilot_count = static_cast<std::size_t>(value);
            break;
        case SweepAxis::TimingOffset: imp.timing_offset_s = value; break;
        case SweepAxis::Cfo: imp.cfo_hz = value; break;
        case SweepAxis::PhaseOffset: imp.phase_offset_rad = value; break;
        case SweepAxis::Constellation: {
            sc.constellation = preset_by_name(preset);
            sc.source_constellations.clear();
            est.fourth_moment = compute_metrics(sc.constellation).fourth_moment;
            break;
        }
    }
    sc.rng_seed = ex.base_seed ^ static_cast<std::uint64_t>(trial);

    const SynthesisResult synth = synthesize(sc, imp);
    TrialMetrics out;

    const EstimateReport blind = detect_all(synth.received, est);
    out["num_detected_blind"] = static_cast<double>(blind.num_detected());
    record_errors(out, "blind", blind, sc);

    if (ex.run_data_aided) {
        const EstimateReport da = data_aided_estimate(synth.received, synth.symbols, est);
        record_errors(out, "da", da, sc);
    }
    if (ex.axis == SweepAxis::PilotCount) {
        const EstimateReport pilot =
            pilot_aided_estimate(synth.received, pilot_count, synth.symbols, est);
        record_errors(out, "pilot", pilot, sc);
    }
    if (ex.run_demod && blind.num_detected() > 0 &&
        blind.num_detected() <= sc.config.num_antennas) {
        std::vector<Constellation> cs(blind.num_detected(), sc.constellation);
        FitConfig fit;
        const DemodResult demod = demodulate(synth.received, blind, cs, fit,
                                             &synth.symbols, &sc.sources);
        if (!demod.ser.empty()) {
            double acc = 0.0;
            for (const double s : demod.ser) acc += s;
            out["ser_mean"] = acc / static_cast<double>(demod.ser.size());
        }
    }
    return out;
}

} // namespace

std::string experiment_canonical_text(const Experiment& ex) {
    std::ostringstream out;
    out << "name=" << ex.name << ";axis=" << axis_name(ex.axis) << ";values=";
    for (const double v : ex.values) out << format_double(v) << ",";
    for (const auto& p : ex.preset_values) out << p << ",";
    out << ";trials=" << ex.trials << ";seed=" << ex.base_seed
        << ";da=" << ex.run_data_aided << ";demod=" << ex.run_demod
        << ";fft=" << ex.estimator.fft_sizes[0] << "x" << ex.estimator.fft_sizes[1]
        << "x" << ex.estimator.fft_sizes[2]
        << ";gamma=" << format_double(ex.estimator.detection_threshold)
        << ";scenario=" << scenario_canonical_json(ex.scenario);
    return out.str();
}

ResultTable run_experiment(const Experiment& ex) {
    ex.validate();
    ResultTable table;
    table.name = ex.name;
    table.seed = ex.base_seed;
    table.config_hash = fnv1a_hex(experiment_canonical_text(ex));

    const std::size_t num_points =
        ex.axis == SweepAxis::Constellation ? ex.preset_values.size() : ex.values.size();

    for (std::size_t pt = 0; pt < num_points; ++pt) {
        const double value =
            ex.axis == SweepAxis::Constellation ? static_cast<double>(pt) : ex.values[pt];
        const std::string preset =
            ex.axis == SweepAxis::Constellation ? ex.preset_values[pt] : "";

        std::vector<TrialMetrics> per_trial(ex.trials);
        const std::size_t workers = std::max<std::size_t>(1, ex.threads);
        if (workers == 1) {
            for (std::size_t t = 0; t < ex.trials; ++t)
                per_trial[t] = run_trial(ex, value, preset, t);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    for (std::size_t t = w; t < ex.trials; t += workers)
                        per_trial[t] = run_trial(ex, value, preset, t);
                });
            for (auto& th : pool) th.join();
        }

        // Deterministic aggregation: metric names sorted, trials in order.
        std::map<std::string, std::vector<double>> samples;
        for (const auto& m : per_trial)
            for (const auto& [k, v] : m) samples[k].push_back(v);
        for (const auto& [metric, xs] : samples) {
            ResultRow row;
            row.sweep_value = value;
            row.metric = metric;
            row.trials = xs.size();
            double mean = 0.0;
            for (const double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            double var = 0.0;
            for (const double x : xs) var += (x - mean) * (x - mean);
            row.mean = mean;
            row.stdev = xs.size() > 1
                            ? std::sqrt(var / static_cast<double>(xs.size() - 1))
                            : 0.0;
            table.rows.push_back(row);
        }
    }
    return table;
}

double ResultTable::mean_of(double sweep_value, const std::string& metric) const {
    for (const auto& r : rows)
        if (r.metric == metric && r.sweep_value == sweep_value) return r.mean;
    throw std::out_of_range("ResultTable: no row " + metric + " at " +
                            format_double(sweep_value));
}

double ResultTable::rmse_of(double sweep_value, const std::string& metric) const {
    return std::sqrt(mean_of(sweep_value, metric));
}

void ResultTable::save_csv(const std::string& path) const {
    std::ostringstream out;
    out << "# isac-result schema_version=1\n";
    out << "# name=" << name << " seed=" << seed << " config_hash=" << config_hash
        << " code_version=" << code_version << "\n";
    out << "sweep_value,metric,mean,std,trials\n";
    for (const auto& r : rows)
        out << format_double(r.sweep_value) << "," << r.metric << ","
            << format_double(r.mean) << "," << format_double(r.stdev) << ","
            << r.trials << "\n";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open for writing");
    f << out.str();
    if (!f) throw std::runtime_error(path + ": write failed");
}

} // namespace isac
