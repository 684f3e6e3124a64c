#include "isac/io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "isac/design.hpp"

namespace isac {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "tensor dumps are specified little-endian");

namespace {

json require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw std::runtime_error(where + ": missing field '" + key + "'");
    return j.at(key);
}

void check_schema(const json& j, const std::string& where) {
    if (require(j, "schema_version", where).get<int>() != 1)
        throw std::runtime_error(where + ": unsupported schema_version");
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << text;
    if (!out) throw std::runtime_error(path + ": write failed");
}

json constellation_to_json(const Constellation& c) {
    json j;
    j["schema_version"] = 1;
    j["label"] = c.label;
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back({p.real(), p.imag()});
    j["points"] = pts;
    j["probabilities"] = c.probabilities;
    return j;
}

Constellation constellation_from_json(const json& j, const std::string& where) {
    Constellation c;
    c.label = j.value("label", "");
    for (const auto& p : require(j, "points", where)) {
        if (!p.is_array() || p.size() != 2)
            throw std::runtime_error(where + ": points must be [re, im] pairs");
        c.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    if (j.contains("probabilities"))
        c.probabilities = j.at("probabilities").get<std::vector<double>>();
    else
        c.probabilities.assign(c.points.size(),
                               1.0 / static_cast<double>(c.points.size()));
    c.validate();
    return c;
}

} // namespace

void save_constellation(const Constellation& c, const std::string& path) {
    write_text(path, constellation_to_json(c).dump(2) + "\n");
}

Constellation load_constellation(const std::string& path) {
    const json j = load_json(path);
    check_schema(j, path);
    return constellation_from_json(j, path);
}

namespace {

json config_to_json(const OfdmConfig& c) {
    json j;
    j["num_subcarriers"] = c.num_subcarriers;
    j["num_symbols"] = c.num_symbols;
    j["num_antennas"] = c.num_antennas;
    j["subcarrier_spacing_hz"] = c.subcarrier_spacing_hz;
    j["symbol_duration_s"] = c.symbol_duration_s;
    j["carrier_frequency_hz"] = c.carrier_frequency_hz;
    j["antenna_spacing_ratio"] = c.antenna_spacing_ratio;
    j["noise_variance"] = c.noise_variance;
    return j;
}

OfdmConfig config_from_json(const json& j, const std::string& where) {
    OfdmConfig c;
    c.num_subcarriers = require(j, "num_subcarriers", where).get<std::size_t>();
    c.num_symbols = require(j, "num_symbols", where).get<std::size_t>();
    c.num_antennas = require(j, "num_antennas", where).get<std::size_t>();
    c.subcarrier_spacing_hz = require(j, "subcarrier_spacing_hz", where).get<double>();
    c.symbol_duration_s = require(j, "symbol_duration_s", where).get<double>();
    c.carrier_frequency_hz = require(j, "carrier_frequency_hz", where).get<double>();
    c.antenna_spacing_ratio = j.value("antenna_spacing_ratio", 0.5);
    c.noise_variance = j.value("noise_variance", 0.0);
    return c;
}

std::complex<double> gain_from_json(const json& g, const std::string& where) {
    if (g.is_number()) return {g.get<double>(), 0.0};
    if (g.is_array() && g.size() == 2)
        return {g[0].get<double>(), g[1].get<double>()};
    throw std::runtime_error(where + ": gain must be a scalar or [re, im]");
}

SourceParams source_from_json(const json& j, const OfdmConfig& cfg,
                              const std::string& where) {
    SourceParams s;
    if (j.contains("delay_s")) s.delay_s = j.at("delay_s").get<double>();
    else if (j.contains("delay_ns")) s.delay_s = j.at("delay_ns").get<double>() * 1e-9;
    else throw std::runtime_error(where + ": source needs delay_s or delay_ns");

    if (j.contains("doppler_hz")) s.doppler_hz = j.at("doppler_hz").get<double>();
    else if (j.contains("velocity_mps"))
        s.doppler_hz = j.at("velocity_mps").get<double>() / cfg.wavelength_m();
    else throw std::runtime_error(where + ": source needs doppler_hz or velocity_mps");

    if (j.contains("angle_rad")) s.angle_rad = j.at("angle_rad").get<double>();
    else if (j.contains("angle_deg"))
        s.angle_rad = j.at("angle_deg").get<double>() * kPi / 180.0;
    else throw std::runtime_error(where + ": source needs angle_rad or angle_deg");

    if (j.contains("gain")) s.gain = gain_from_json(j.at("gain"), where);
    return s;
}

Constellation constellation_from_spec(const json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "qpsk") return make_qpsk();
        if (name == "bpsk") return make_bpsk();
        if (name == "balanced") return balanced_apsk16();
        if (name == "comm") return communication_apsk16();
        if (name == "sensing") return sensing_apsk16();
        throw std::runtime_error(where + ": unknown constellation '" + name + "'");
    }
    if (j.is_object() && j.contains("file"))
        return load_constellation(j.at("file").get<std::string>());
    if (j.is_object()) return constellation_from_json(j, where);
    throw std::runtime_error(where + ": bad constellation entry");
}

} // namespace

void save_scenario(const Scenario& sc, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    j["config"] = config_to_json(sc.config);
    json sources = json::array();
    for (const auto& s : sc.sources) {
        json js;
        js["delay_s"] = s.delay_s;
        js["doppler_hz"] = s.doppler_hz;
        js["angle_rad"] = s.angle_rad;
        js["gain"] = {s.gain.real(), s.gain.imag()};
        sources.push_back(js);
    }
    j["sources"] = sources;
    j["constellation"] = constellation_to_json(sc.constellation);
    if (!sc.source_constellations.empty()) {
        json per = json::array();
        for (const auto& c : sc.source_constellations)
            per.push_back(constellation_to_json(c));
        j["source_constellations"] = per;
    }
    j["rng_seed"] = sc.rng_seed;
    write_text(path, j.dump(2) + "\n");
}

Scenario load_scenario(const std::string& path) {
    const json j = load_json(path);
    check_schema(j, path);
    Scenario sc;
    sc.config = config_from_json(require(j, "config", path), path);
    for (const auto& js : require(j, "sources", path))
        sc.sources.push_back(source_from_json(js, sc.config, path));
    sc.constellation = constellation_from_spec(require(j, "constellation", path), path);
    if (j.contains("source_constellations"))
        for (const auto& jc : j.at("source_constellations"))
            sc.source_constellations.push_back(constellation_from_spec(jc, path));
    sc.rng_seed = j.value("rng_seed", std::uint64_t{0});
    if (j.contains("snr_db")) {
        if (sc.config.noise_variance != 0.0)
            throw std::runtime_error(path + ": give either noise_variance or snr_db");
        if (!sc.sources.empty())
            sc.config.noise_variance =
                noise_variance_for_snr_db(sc, j.at("snr_db").get<double>());
    }
    sc.validate();
    return sc;
}

void save_cube(const Cube& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "#isac-tensor 1\n";
    out << "dims " << t.dim0() << " " << t.dim1() << " " << t.dim2() << "\n";
    out << "layout row-major re,im float64 little-endian\n";
    out << "data\n";
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(cdouble)));
    if (!out) throw std::runtime_error(path + ": write failed");
}

Cube load_cube(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line != "#isac-tensor 1")
        throw std::runtime_error(path + ": line 1: not an isac tensor file");
    if (!std::getline(in, line) || line.rfind("dims ", 0) != 0)
        throw std::runtime_error(path + ": line 2: expected 'dims d0 d1 d2'");
    std::istringstream dims(line.substr(5));
    std::size_t d0 = 0, d1 = 0, d2 = 0;
    if (!(dims >> d0 >> d1 >> d2) || d0 == 0 || d1 == 0 || d2 == 0)
        throw std::runtime_error(path + ": line 2: bad dimensions");
    if (!std::getline(in, line) ||
        line != "layout row-major re,im float64 little-endian")
        throw std::runtime_error(path + ": line 3: unsupported layout");
    if (!std::getline(in, line) || line != "data")
        throw std::runtime_error(path + ": line 4: expected 'data'");
    Cube t(d0, d1, d2);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(cdouble)));
    if (in.gcount() != static_cast<std::streamsize>(t.size() * sizeof(cdouble)))
        throw std::runtime_error(path + ": truncated data section");
    return t;
}

void save_estimate_report(const EstimateReport& r, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    json dets = json::array();
    for (const auto& d : r.detections) {
        json jd;
        jd["delay_s"] = d.delay_s;
        jd["doppler_hz"] = d.doppler_hz;
        jd["angle_rad"] = d.angle_rad;
        jd["gain"] = {d.gain.real(), d.gain.imag()};
        jd["peak_power"] = d.peak_power;
        jd["peak_to_background"] = d.peak_to_background;
        jd["refined_bins"] = d.refined_bins;
        jd["flat_refinement"] = d.flat_refinement;
        dets.push_back(jd);
    }
    j["detections"] = dets;
    json iters = json::array();
    for (const auto& it : r.iterations) {
        json ji;
        ji["bin"] = it.bin;
        ji["peak_power"] = it.peak_power;
        ji["background"] = it.background;
        ji["ratio"] = it.ratio;
        ji["accepted"] = it.accepted;
        ji["note"] = it.note;
        iters.push_back(ji);
    }
    j["iterations"] = iters;
    write_text(path, j.dump(2) + "\n");
}

EstimateReport load_estimate_report(const std::string& path) {
    const json j = load_json(path);
    check_schema(j, path);
    EstimateReport r;
    for (const auto& jd : require(j, "detections", path)) {
        DetectedSource d;
        d.delay_s = require(jd, "delay_s", path).get<double>();
        d.doppler_hz = require(jd, "doppler_hz", path).get<double>();
        d.angle_rad = require(jd, "angle_rad", path).get<double>();
        d.gain = gain_from_json(require(jd, "gain", path), path);
        d.peak_power = jd.value("peak_power", 0.0);
        d.peak_to_background = jd.value("peak_to_background", 0.0);
        if (jd.contains("refined_bins")) {
            const auto rb = jd.at("refined_bins");
            for (int a = 0; a < 3; ++a) d.refined_bins[a] = rb.at(a).get<double>();
        }
        d.flat_refinement = jd.value("flat_refinement", false);
        r.detections.push_back(d);
    }
    return r;
}

void save_demod_report(const DemodResult& r, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    json betas = json::array();
    for (const auto& b : r.beta) betas.push_back({b.real(), b.imag()});
    j["beta"] = betas;
    j["permutation"] = r.permutation;
    j["residuals"] = r.residuals;
    if (!r.ser.empty()) j["ser"] = r.ser;
    if (!r.truth_alignment.empty()) j["truth_alignment"] = r.truth_alignment;
    j["warnings"] = r.warnings;
    write_text(path, j.dump(2) + "\n");
}

void save_crlb_table(const OfdmConfig& cfg, const std::vector<double>& snr_db,
                     double theta_rad, const std::string& path) {
    std::ostringstream out;
    out << "snr_db,crlb_tau,crlb_v,crlb_theta,stochastic_factor\n";
    for (const double db : snr_db) {
        const double snr = std::pow(10.0, db / 10.0);
        const CrlbReport da = crlb_data_aided(cfg, snr, theta_rad);
        const CrlbReport sto = crlb_stochastic(cfg, snr, theta_rad);
        out << format_double(db) << "," << format_double(da.crlb_delay_s2) << ","
            << format_double(da.crlb_velocity_mps2) << ","
            << format_double(da.crlb_angle_rad2) << ","
            << format_double(sto.stochastic_factor) << "\n";
    }
    write_text(path, out.str());
}

void save_heatmap_csv(const std::vector<std::vector<double>>& grid,
                      const std::vector<double>& row_axis,
                      const std::vector<double>& col_axis, const std::string& path) {
    if (grid.size() != row_axis.size() ||
        (!grid.empty() && grid[0].size() != col_axis.size()))
        throw std::invalid_argument("save_heatmap_csv: axis/grid size mismatch");
    std::ostringstream out;
    out << "axis";
    for (const double c : col_axis) out << "," << format_double(c);
    out << "\n";
    for (std::size_t r = 0; r < grid.size(); ++r) {
        out << format_double(row_axis[r]);
        for (const double v : grid[r]) out << "," << format_double(v);
        out << "\n";
    }
    write_text(path, out.str());
}

namespace {

EstimatorConfig estimator_from_json(const json& j, const OfdmConfig& cfg,
                                    std::complex<double> mu4_default,
                                    const std::string& where) {
    EstimatorConfig est = EstimatorConfig::defaults_for(cfg, mu4_default);
    if (j.contains("fft_sizes")) {
        const auto& f = j.at("fft_sizes");
        if (!f.is_array() || f.size() != 3)
            throw std::runtime_error(where + ": fft_sizes must have 3 entries");
        for (int a = 0; a < 3; ++a) est.fft_sizes[a] = f.at(a).get<std::size_t>();
    }
    est.mask_radius_cells = j.value("mask_radius_cells", est.mask_radius_cells);
    est.detection_threshold = j.value("detection_threshold", est.detection_threshold);
    est.max_sources = j.value("max_sources", est.max_sources);
    est.guard_cells = j.value("guard_cells", est.guard_cells);
    est.training_cells = j.value("training_cells", est.training_cells);
    est.gain_at_refined_peak = j.value("gain_at_refined_peak", est.gain_at_refined_peak);
    if (j.contains("fourth_moment"))
        est.fourth_moment = gain_from_json(j.at("fourth_moment"), where);
    est.validate(cfg);
    return est;
}

} // namespace

EstimatorConfig load_estimator_config(const std::string& path, const OfdmConfig& cfg,
                                      std::complex<double> mu4_default) {
    return estimator_from_json(load_json(path), cfg, mu4_default, path);
}

Experiment load_experiment(const std::string& path) {
    const json j = load_json(path);
    check_schema(j, path);
    Experiment ex;
    ex.name = j.value("name", "experiment");
    const json jsc = require(j, "scenario", path);
    if (jsc.is_object() && jsc.contains("file"))
        ex.scenario = load_scenario(jsc.at("file").get<std::string>());
    else {
        // Inline scenario: same schema as a scenario file.
        Scenario sc;
        sc.config = config_from_json(require(jsc, "config", path), path);
        for (const auto& js : require(jsc, "sources", path))
            sc.sources.push_back(source_from_json(js, sc.config, path));
        sc.constellation =
            constellation_from_spec(require(jsc, "constellation", path), path);
        sc.rng_seed = jsc.value("rng_seed", std::uint64_t{0});
        if (jsc.contains("snr_db") && !sc.sources.empty())
            sc.config.noise_variance =
                noise_variance_for_snr_db(sc, jsc.at("snr_db").get<double>());
        ex.scenario = sc;
    }
    const std::complex<double> mu4 =
        compute_metrics(ex.scenario.constellation).fourth_moment;
    ex.estimator = j.contains("estimator")
                       ? estimator_from_json(j.at("estimator"), ex.scenario.config,
                                             mu4, path)
                       : EstimatorConfig::defaults_for(ex.scenario.config, mu4);
    const json sweep = require(j, "sweep", path);
    ex.axis = axis_from_name(require(sweep, "axis", path).get<std::string>());
    if (ex.axis == SweepAxis::Constellation)
        ex.preset_values = require(sweep, "values", path).get<std::vector<std::string>>();
    else
        ex.values = require(sweep, "values", path).get<std::vector<double>>();
    ex.trials = j.value("trials", std::size_t{50});
    ex.base_seed = j.value("base_seed", std::uint64_t{1});
    ex.threads = j.value("threads", std::size_t{1});
    ex.run_data_aided = j.value("data_aided", true);
    ex.run_demod = j.value("demod", false);
    ex.validate();
    return ex;
}

std::string scenario_canonical_json(const Scenario& sc) {
    json j;
    j["config"] = config_to_json(sc.config);
    json sources = json::array();
    for (const auto& s : sc.sources)
        sources.push_back({s.delay_s, s.doppler_hz, s.angle_rad, s.gain.real(),
                           s.gain.imag()});
    j["sources"] = sources;
    j["constellation"] = constellation_to_json(sc.constellation);
    j["rng_seed"] = sc.rng_seed;
    return j.dump();
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xF];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace isac
