#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "isac/constellation.hpp"
#include "isac/rng.hpp"
#include "isac/scenario.hpp"

using namespace isac;
using cplx = std::complex<double>;

namespace {

OfdmConfig small_config() {
    OfdmConfig c;
    c.num_subcarriers = 16;
    c.num_symbols = 12;
    c.num_antennas = 4;
    c.subcarrier_spacing_hz = 1e6;
    c.symbol_duration_s = 1e-6;
    c.carrier_frequency_hz = 28e9;
    c.noise_variance = 0.0;
    return c;
}

Scenario base_scenario() {
    Scenario sc;
    sc.config = small_config();
    sc.sources = {{30e-9, 1200.0, 0.1, {1.0, 0.0}}};
    sc.constellation = make_qpsk();
    sc.rng_seed = 5;
    return sc;
}

} // namespace

TEST_CASE("channel response at the origin and at quarter-cycle phases") {
    const auto cfg = small_config();
    SourceParams zero;
    for (std::size_t k : {0u, 3u})
        for (std::size_t n : {0u, 5u})
            for (std::size_t m : {0u, 2u})
                CHECK(std::abs(channel_response(cfg, zero, k, n, m) - cplx{1.0, 0.0}) <
                      1e-15);

    SourceParams quarter;
    quarter.delay_s = 0.25 / cfg.subcarrier_spacing_hz;
    CHECK(std::abs(channel_response(cfg, quarter, 1, 0, 0) - cplx{0.0, -1.0}) < 1e-12);

    SourceParams oblique;
    oblique.angle_rad = kPi / 6; // sin = 0.5, d/lambda = 0.5 -> phase -pi/2
    CHECK(std::abs(channel_response(cfg, oblique, 0, 0, 1) - cplx{0.0, -1.0}) < 1e-12);
}

TEST_CASE("channel response is unit modulus") {
    const auto cfg = small_config();
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        SourceParams s;
        s.delay_s = rng.uniform() * 1e-7;
        s.doppler_hz = (rng.uniform() - 0.5) * 1e5;
        s.angle_rad = (rng.uniform() - 0.5) * kPi * 0.9;
        const auto h = channel_response(cfg, s, rng.index(16), rng.index(12),
                                        rng.index(4));
        CHECK(std::abs(h) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("degenerate single-point alphabet with flat channel gives all ones") {
    Scenario sc = base_scenario();
    sc.sources = {{0.0, 0.0, 0.0, {1.0, 0.0}}};
    // Two-point alphabet whose second point has probability zero.
    sc.constellation.points = {{1.0, 0.0}, {-1.0, 0.0}};
    sc.constellation.probabilities = {1.0, 0.0};
    sc.constellation.label = "degenerate";
    const auto r = synthesize(sc);
    for (std::size_t k = 0; k < 16; ++k)
        for (std::size_t n = 0; n < 12; ++n)
            for (std::size_t m = 0; m < 4; ++m)
                CHECK(std::abs(r.received.data(k, n, m) - cplx{1.0, 0.0}) < 1e-12);
}

TEST_CASE("noiseless single source has |Y| = |alpha| |X| everywhere") {
    Scenario sc = base_scenario();
    sc.sources[0].gain = {0.6, 0.45};
    const auto r = synthesize(sc);
    const double ga = std::abs(sc.sources[0].gain);
    for (std::size_t k = 0; k < 16; ++k)
        for (std::size_t n = 0; n < 12; ++n)
            for (std::size_t m = 0; m < 4; ++m)
                CHECK(std::abs(r.received.data(k, n, m)) ==
                      doctest::Approx(ga * std::abs(r.symbols(k, n, 0)))
                          .epsilon(1e-12));
}

TEST_CASE("noise-only tensor has the configured variance") {
    Scenario sc;
    sc.config = small_config();
    sc.config.num_subcarriers = 64;
    sc.config.num_symbols = 100;
    sc.config.num_antennas = 16; // 102400 entries
    sc.config.noise_variance = 1.0;
    sc.sources = {{0.0, 0.0, 0.0, {0.0, 0.0}}}; // zero gain: pure noise
    sc.constellation = make_qpsk();
    sc.rng_seed = 99;
    const auto r = synthesize(sc);
    double acc = 0.0;
    const auto& d = r.received.data;
    for (std::size_t i = 0; i < d.size(); ++i) acc += std::norm(d.data()[i]);
    const double var = acc / static_cast<double>(d.size());
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("same seed reproduces the tensor bit for bit") {
    Scenario sc = base_scenario();
    sc.config.noise_variance = 0.5;
    const auto a = synthesize(sc);
    const auto b = synthesize(sc);
    REQUIRE(a.received.data.size() == b.received.data.size());
    for (std::size_t i = 0; i < a.received.data.size(); ++i)
        CHECK(a.received.data.data()[i] == b.received.data.data()[i]);
}

TEST_CASE("noiseless synthesis is additive across sources") {
    Scenario both = base_scenario();
    both.sources.push_back({80e-9, -700.0, -0.2, {0.8, 0.1}});
    Scenario only_a = both;
    only_a.sources = {both.sources[0]};
    // Source streams depend on the source index, so "only B" is expressed by
    // zeroing A's gain rather than dropping it from the list.
    Scenario only_b = both;
    only_b.sources[0].gain = {0.0, 0.0};

    const auto rb = synthesize(both);
    const auto ra = synthesize(only_a);
    const auto rbs = synthesize(only_b);

    for (std::size_t i = 0; i < rb.received.data.size(); ++i) {
        const cplx sum =
            ra.received.data.data()[i] + rbs.received.data.data()[i];
        CHECK(std::abs(rb.received.data.data()[i] - sum) < 1e-12);
    }
}

TEST_CASE("timing offset is indistinguishable from extra delay (noiseless)") {
    Scenario sc = base_scenario();
    ImpairmentConfig imp;
    imp.timing_offset_s = 12e-9;
    const auto with_imp = synthesize(sc, imp);

    Scenario shifted = sc;
    shifted.sources[0].delay_s += 12e-9;
    const auto with_delay = synthesize(shifted);

    for (std::size_t i = 0; i < with_imp.received.data.size(); ++i)
        CHECK(std::abs(with_imp.received.data.data()[i] -
                       with_delay.received.data.data()[i]) < 1e-10);
}

TEST_CASE("snr helpers follow the definition") {
    Scenario sc = base_scenario();
    sc.config.noise_variance = 0.1;
    CHECK(snr_of(sc)[0] == doctest::Approx(10.0).epsilon(1e-12));

    sc.sources[0].gain = {0.9, 0.0};
    sc.config.noise_variance = 1.0;
    CHECK(snr_of(sc)[0] == doctest::Approx(0.81).epsilon(1e-12));

    sc.sources[0].gain = {1.0, 0.0};
    CHECK(noise_variance_for_snr_db(sc, 5.0) ==
          doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-12));

    sc.config.noise_variance = 0.0;
    CHECK_THROWS_AS(snr_of(sc), std::invalid_argument);
}

TEST_CASE("scenario validation flags virtual-domain aliasing") {
    Scenario sc = base_scenario();
    CHECK(sc.validate().empty());

    sc.sources[0].doppler_hz = 0.6 / (4.0 * sc.config.symbol_duration_s);
    const auto warnings = sc.validate();
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("Doppler") != std::string::npos);

    sc.sources[0].doppler_hz = 0.0;
    sc.sources[0].angle_rad = kPi / 3; // 2 sin(60 deg) = 1.73 >= 0.5
    CHECK(sc.validate().size() == 1);

    sc.sources.clear();
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}

TEST_CASE("per-source constellations must match the source count") {
    Scenario sc = base_scenario();
    sc.source_constellations = {make_qpsk(), make_bpsk()};
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}
