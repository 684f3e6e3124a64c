// Command-line front end: simulate | estimate | demod | sweep | design | crlb.
// Exit codes: 0 success, 2 configuration/schema error, 3 numerical failure.

#include <complex>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isac/bounds.hpp"
#include "isac/demod.hpp"
#include "isac/design.hpp"
#include "isac/hos.hpp"
#include "isac/io.hpp"
#include "isac/sweep.hpp"

namespace {

using namespace isac;

std::string default_meta_path(const std::string& tensor_path) {
    const std::string suffix = ".tensor";
    if (tensor_path.size() > suffix.size() &&
        tensor_path.compare(tensor_path.size() - suffix.size(), suffix.size(),
                            suffix) == 0)
        return tensor_path.substr(0, tensor_path.size() - suffix.size()) +
               ".meta.json";
    return tensor_path + ".meta.json";
}

struct MetaInfo {
    Scenario scenario;
};

void save_meta(const Scenario& sc, const ImpairmentConfig& imp,
               const std::vector<std::string>& warnings, const std::string& path) {
    // The meta sidecar is a fully valid scenario file plus bookkeeping.
    save_scenario(sc, path + ".tmp");
    std::ifstream in(path + ".tmp");
    std::string body((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    in.close();
    std::remove((path + ".tmp").c_str());
    // Splice bookkeeping fields before the final brace.
    const auto pos = body.rfind('}');
    std::ostringstream extra;
    extra << ",\n  \"config_hash\": \"" << fnv1a_hex(scenario_canonical_json(sc))
          << "\",\n  \"code_version\": \"" << kCodeVersion << "\"";
    extra << ",\n  \"impairments\": {\"timing_offset_s\": "
          << format_double(imp.timing_offset_s)
          << ", \"cfo_hz\": " << format_double(imp.cfo_hz)
          << ", \"phase_offset_rad\": " << format_double(imp.phase_offset_rad) << "}";
    extra << ",\n  \"warnings\": [";
    for (std::size_t i = 0; i < warnings.size(); ++i)
        extra << (i ? ", " : "") << "\"" << warnings[i] << "\"";
    extra << "]\n";
    body.insert(pos, extra.str());
    std::ofstream out(path, std::ios::binary);
    out << body;
}

Constellation constellation_by_flag(const std::string& name) {
    if (name == "qpsk") return make_qpsk();
    if (name == "bpsk") return make_bpsk();
    if (name == "balanced") return balanced_apsk16();
    if (name == "comm") return communication_apsk16();
    if (name == "sensing") return sensing_apsk16();
    return load_constellation(name); // treat as a path
}

int cmd_simulate(const std::string& scenario_path, const std::string& out,
                 std::optional<std::uint64_t> seed, double timing_ns, double cfo_hz,
                 double phase_deg) {
    Scenario sc = load_scenario(scenario_path);
    if (seed) sc.rng_seed = *seed;
    ImpairmentConfig imp;
    imp.timing_offset_s = timing_ns * 1e-9;
    imp.cfo_hz = cfo_hz;
    imp.phase_offset_rad = phase_deg * kPi / 180.0;
    const auto warnings = sc.validate();
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const SynthesisResult r = synthesize(sc, imp);
    save_cube(r.received.data, out + ".tensor");
    save_cube(r.symbols, out + ".truth.tensor");
    save_meta(sc, imp, warnings, out + ".meta.json");
    std::cout << "wrote " << out << ".tensor (" << r.received.data.dim0() << "x"
              << r.received.data.dim1() << "x" << r.received.data.dim2() << "), "
              << out << ".truth.tensor, " << out << ".meta.json\n";
    return 0;
}

int cmd_estimate(const std::string& tensor_path, std::string meta_path,
                 const std::string& est_path, const std::string& out,
                 const std::string& heatmap) {
    if (meta_path.empty()) meta_path = default_meta_path(tensor_path);
    const Scenario sc = load_scenario(meta_path);
    ReceivedTensor y;
    y.config = sc.config;
    y.data = load_cube(tensor_path);
    y.data.check_shape(sc.config.num_subcarriers, sc.config.num_symbols,
                       sc.config.num_antennas);

    const auto mu4 = compute_metrics(sc.constellation).fourth_moment;
    const EstimatorConfig est =
        est_path.empty() ? EstimatorConfig::defaults_for(sc.config, mu4)
                         : load_estimator_config(est_path, sc.config, mu4);

    if (!heatmap.empty()) {
        const ReceivedTensor z = fourth_power_tensor(y);
        HosSpectrum spec = hos_periodogram(z, est);
        // Physical axes: delay (ns) rows; velocity (m/s) / angle (deg) cols.
        const auto& n = est.fft_sizes;
        std::vector<double> delay_axis(n[0]), vel_axis(n[1]), ang_axis(n[2]);
        for (std::size_t u = 0; u < n[0]; ++u)
            delay_axis[u] =
                invert_mapping(static_cast<double>(u), 0, 0, sc.config, est).delay_s *
                1e9;
        for (std::size_t v = 0; v < n[1]; ++v)
            vel_axis[v] =
                invert_mapping(0, static_cast<double>(v), 0, sc.config, est).doppler_hz *
                sc.config.wavelength_m();
        for (std::size_t w = 0; w < n[2]; ++w) {
            const auto m = invert_mapping(0, 0, static_cast<double>(w), sc.config, est);
            ang_axis[w] = m.valid ? m.angle_rad * 180.0 / kPi : 90.0;
        }
        save_heatmap_csv(spectrum_slice_power(spec, 0, 1), delay_axis, vel_axis,
                         heatmap + ".range_velocity.csv");
        save_heatmap_csv(spectrum_slice_power(spec, 0, 2), delay_axis, ang_axis,
                         heatmap + ".range_angle.csv");
    }

    const EstimateReport report = detect_all(y, est);
    save_estimate_report(report, out);
    std::cout << "detected " << report.num_detected() << " source(s); report in "
              << out << "\n";
    for (const auto& d : report.detections)
        std::cout << "  tau=" << d.delay_s * 1e9
                  << " ns, v=" << d.velocity_mps(sc.config.wavelength_m())
                  << " m/s, theta=" << d.angle_rad * 180.0 / kPi
                  << " deg, |alpha|=" << std::abs(d.gain) << "\n";
    return 0;
}

int cmd_demod(const std::string& tensor_path, std::string meta_path,
              const std::string& report_path, const std::string& constellation,
              const std::string& truth_path, const std::string& out) {
    if (meta_path.empty()) meta_path = default_meta_path(tensor_path);
    const Scenario sc = load_scenario(meta_path);
    ReceivedTensor y;
    y.config = sc.config;
    y.data = load_cube(tensor_path);
    const EstimateReport report = load_estimate_report(report_path);
    if (report.detections.empty()) {
        std::cerr << "error: estimate report contains no detections\n";
        return 3;
    }
    const Constellation c =
        constellation.empty() ? sc.constellation : constellation_by_flag(constellation);
    std::vector<Constellation> cs(report.detections.size(), c);
    FitConfig fit;

    DemodResult result;
    if (!truth_path.empty()) {
        const Cube truth = load_cube(truth_path);
        result = demodulate(y, report, cs, fit, &truth, &sc.sources);
    } else {
        result = demodulate(y, report, cs, fit);
    }
    save_demod_report(result, out);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "demodulated " << report.detections.size() << " stream(s); report in "
              << out << "\n";
    for (std::size_t p = 0; p < result.beta.size(); ++p) {
        std::cout << "  stream " << p << ": |beta|=" << std::abs(result.beta[p])
                  << " arg(beta)=" << std::arg(result.beta[p])
                  << " J=" << result.residuals[p];
        if (p < result.ser.size()) std::cout << " ser=" << result.ser[p];
        std::cout << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& experiment_path, std::string out,
              std::optional<std::uint64_t> seed, std::optional<std::size_t> threads) {
    Experiment ex = load_experiment(experiment_path);
    if (seed) ex.base_seed = *seed;
    if (threads) ex.threads = *threads;
    if (out.empty()) out = ex.name + ".csv";
    const ResultTable table = run_experiment(ex);
    table.save_csv(out);
    std::cout << "sweep '" << ex.name << "': " << table.rows.size() << " rows -> "
              << out << " (config_hash " << table.config_hash << ")\n";
    return 0;
}

int cmd_design(const std::string& weights_name, std::vector<double> weights,
               std::size_t budget, std::uint64_t seed, const std::string& out) {
    DesignWeights w;
    if (!weights_name.empty()) {
        if (weights_name == "balanced") w = balanced_weights();
        else if (weights_name == "comm") w = communication_weights();
        else if (weights_name == "sensing") w = sensing_weights();
        else throw std::runtime_error("unknown weights preset '" + weights_name + "'");
    } else if (weights.size() == 5) {
        w = {weights[0], weights[1], weights[2], weights[3], weights[4]};
    } else {
        throw std::runtime_error("give --preset or five --weights values");
    }
    const DesignResult r = optimize(ApskGeometry{}, w, budget, seed);
    save_constellation(r.constellation, out + ".json");

    std::ostringstream side;
    const auto& m = r.metrics;
    side << "{\n  \"schema_version\": 1,\n";
    side << "  \"d_min\": " << format_double(m.d_min) << ",\n";
    side << "  \"abs_mu4\": " << format_double(std::abs(m.fourth_moment)) << ",\n";
    side << "  \"d_rot_quarter\": " << format_double(m.d_rot_quarter) << ",\n";
    side << "  \"abs_mean\": " << format_double(std::abs(m.mean)) << ",\n";
    side << "  \"abs_second_moment\": " << format_double(std::abs(m.second_moment))
         << ",\n";
    side << "  \"peak_to_average\": " << format_double(m.peak_to_average) << ",\n";
    side << "  \"objective\": " << format_double(r.objective_value) << ",\n";
    side << "  \"evaluations\": " << r.evaluations << "\n}\n";
    std::ofstream f(out + ".metrics.json", std::ios::binary);
    f << side.str();

    std::cout << "design -> " << out << ".json: d_min=" << m.d_min
              << " |mu4|=" << std::abs(m.fourth_moment)
              << " d_rot(pi/2)=" << m.d_rot_quarter
              << " peak/avg=" << m.peak_to_average << "\n";
    return 0;
}

int cmd_crlb(const std::string& scenario_path, std::vector<double> snr_db,
             double theta_deg, const std::string& out) {
    const Scenario sc = load_scenario(scenario_path);
    if (snr_db.empty()) snr_db = {0, 5, 10, 15, 20};
    save_crlb_table(sc.config, snr_db, theta_deg * kPi / 180.0, out);
    std::cout << "CRLB table (" << snr_db.size() << " rows) -> " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blind OFDM ISAC simulator: multi-source synthesis, fourth-order "
                 "blind delay/Doppler/angle estimation, ZF separation with "
                 "ambiguity-resolved demodulation, CRLB benchmarks"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    app.add_option("--seed", seed, "Override the RNG seed");
    app.add_option("--threads", threads, "Worker threads for sweeps");

    auto* sim = app.add_subcommand("simulate", "Synthesize a received tensor");
    std::string sim_scenario, sim_out = "sim";
    double sim_timing = 0, sim_cfo = 0, sim_phase = 0;
    sim->add_option("--scenario", sim_scenario, "Scenario JSON file")->required();
    sim->add_option("--out", sim_out, "Output basename");
    sim->add_option("--timing-offset-ns", sim_timing, "Timing offset impairment (ns)");
    sim->add_option("--cfo-hz", sim_cfo, "Carrier frequency offset (Hz)");
    sim->add_option("--phase-offset-deg", sim_phase, "Common phase offset (deg)");

    auto* est = app.add_subcommand("estimate", "Blind HOS estimation on a tensor");
    std::string est_tensor, est_meta, est_cfg, est_out = "estimate.json", est_heat;
    est->add_option("--tensor", est_tensor, "Tensor dump")->required();
    est->add_option("--meta", est_meta, "Meta/scenario JSON (default: sidecar)");
    est->add_option("--config", est_cfg, "Estimator config JSON");
    est->add_option("--out", est_out, "Report path");
    est->add_option("--heatmap", est_heat, "Also write <name>.range_*.csv heatmaps");

    auto* dem = app.add_subcommand("demod", "ZF separation and blind demodulation");
    std::string dem_tensor, dem_meta, dem_report, dem_const, dem_truth,
        dem_out = "demod.json";
    dem->add_option("--tensor", dem_tensor, "Tensor dump")->required();
    dem->add_option("--meta", dem_meta, "Meta/scenario JSON (default: sidecar)");
    dem->add_option("--report", dem_report, "Estimate report JSON")->required();
    dem->add_option("--constellation", dem_const,
                    "qpsk|bpsk|balanced|comm|sensing or a file (default: scenario's)");
    dem->add_option("--truth", dem_truth, "Truth symbol tensor for SER");
    dem->add_option("--out", dem_out, "Report path");

    auto* swp = app.add_subcommand("sweep", "Run a Monte-Carlo experiment");
    std::string swp_file, swp_out;
    swp->add_option("--experiment", swp_file, "Experiment JSON file")->required();
    swp->add_option("--out", swp_out, "Result CSV path");

    auto* dsg = app.add_subcommand("design", "Optimize an asymmetric constellation");
    std::string dsg_preset, dsg_out = "design";
    std::vector<double> dsg_weights;
    std::size_t dsg_budget = kDefaultDesignBudget;
    dsg->add_option("--preset", dsg_preset, "balanced|comm|sensing weight row");
    dsg->add_option("--weights", dsg_weights, "w_d w_4 w_r w_1 w_2")->expected(5);
    dsg->add_option("--budget", dsg_budget, "Objective evaluation budget");
    dsg->add_option("--out", dsg_out, "Output basename");

    auto* crb = app.add_subcommand("crlb", "Data-aided and stochastic CRLB table");
    std::string crb_scenario, crb_out = "crlb.csv";
    std::vector<double> crb_snr;
    double crb_theta = 0.0;
    crb->add_option("--scenario", crb_scenario, "Scenario JSON (grid config)")
        ->required();
    crb->add_option("--snr-db", crb_snr, "SNR points in dB");
    crb->add_option("--theta-deg", crb_theta, "Angle for the angle bound");
    crb->add_option("--out", crb_out, "CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim)
            return cmd_simulate(sim_scenario, sim_out, seed, sim_timing, sim_cfo,
                                sim_phase);
        if (*est) return cmd_estimate(est_tensor, est_meta, est_cfg, est_out, est_heat);
        if (*dem)
            return cmd_demod(dem_tensor, dem_meta, dem_report, dem_const, dem_truth,
                             dem_out);
        if (*swp) return cmd_sweep(swp_file, swp_out, seed, threads);
        if (*dsg)
            return cmd_design(dsg_preset, dsg_weights, dsg_budget, seed.value_or(0),
                              dsg_out);
        if (*crb) return cmd_crlb(crb_scenario, crb_snr, crb_theta, crb_out);
    } catch (const isac::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
