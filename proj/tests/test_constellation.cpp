#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "isac/constellation.hpp"
#include "isac/core.hpp"
#include "isac/rng.hpp"

using namespace isac;
using cplx = std::complex<double>;

namespace {

// Independent brute-force oracles, kept free of the library's internals.

double oracle_dmin(const std::vector<cplx>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (i != j) best = std::min(best, std::abs(pts[i] - pts[j]));
    return best;
}

double oracle_drot(const std::vector<cplx>& pts, double phi) {
    double acc = 0.0;
    for (const auto& a : pts) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& b : pts)
            nearest = std::min(nearest, std::abs(a - std::polar(1.0, phi) * b));
        acc += nearest;
    }
    return acc / static_cast<double>(pts.size());
}

std::size_t oracle_slice(const std::vector<cplx>& pts, cplx z) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = std::abs(z - pts[i]);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

Constellation random_constellation(Rng& rng, std::size_t n) {
    Constellation c;
    for (std::size_t i = 0; i < n; ++i)
        c.points.emplace_back(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    c.probabilities.assign(n, 1.0 / static_cast<double>(n));
    return c;
}

} // namespace

TEST_CASE("qpsk moments match the known fourth-power collapse") {
    const auto m = compute_metrics(make_qpsk());
    CHECK(std::abs(m.fourth_moment - cplx{-1.0, 0.0}) < 1e-12);
    CHECK(std::abs(m.mean) < 1e-12);
    CHECK(std::abs(m.second_moment) < 1e-12);
    CHECK(m.average_power == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.d_min == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(m.d_rot_quarter == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.peak_to_average == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bpsk moments") {
    const auto m = compute_metrics(make_bpsk());
    CHECK(std::abs(m.mean) < 1e-15);
    CHECK(std::abs(m.second_moment - cplx{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(m.fourth_moment - cplx{1.0, 0.0}) < 1e-15);
}

TEST_CASE("rotation separation distances") {
    const auto q = make_qpsk();
    CHECK(rotation_separation(q, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rotation_separation(q, kPi / 2) == doctest::Approx(0.0).epsilon(1e-12));
    // pi/4 rotation of QPSK: nearest-point distance is 2 sin(pi/8) = sqrt(2-sqrt(2)).
    CHECK(rotation_separation(q, kPi / 4) ==
          doctest::Approx(std::sqrt(2.0 - std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("slicer agrees with exhaustive scan and breaks ties low") {
    const auto q = make_qpsk();
    const auto near_first = slice(q, {0.9, 0.9});
    CHECK(std::abs(near_first.second - cplx{std::sqrt(0.5), std::sqrt(0.5)}) < 1e-15);
    CHECK(slice(q, {0.0, 0.0}).first == 0); // four-way tie -> lowest index

    Rng rng(42);
    auto c = random_constellation(rng, 16);
    for (int t = 0; t < 200; ++t) {
        const cplx z{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
        CHECK(slice(c, z).first == oracle_slice(c.points, z));
    }
}

TEST_CASE("metrics match brute-force oracles on random alphabets") {
    Rng rng(7);
    for (int t = 0; t < 25; ++t) {
        auto c = random_constellation(rng, 4 + rng.index(12));
        const auto m = compute_metrics(c);
        CHECK(m.d_min == doctest::Approx(oracle_dmin(c.points)).epsilon(1e-12));
        CHECK(m.d_rot_quarter ==
              doctest::Approx(oracle_drot(c.points, kPi / 2)).epsilon(1e-12));
    }
}

TEST_CASE("scaling laws: d_min, mu4 and d_rot scale as s, s^4 and s") {
    Rng rng(11);
    auto c = random_constellation(rng, 8);
    const auto m = compute_metrics(c);
    for (const double s : {0.5, 2.0, 3.7}) {
        Constellation cs = c;
        for (auto& p : cs.points) p *= s;
        const auto ms = compute_metrics(cs);
        CHECK(ms.d_min == doctest::Approx(s * m.d_min).epsilon(1e-12));
        CHECK(std::abs(ms.fourth_moment) ==
              doctest::Approx(std::pow(s, 4) * std::abs(m.fourth_moment))
                  .epsilon(1e-12));
        CHECK(ms.d_rot_quarter ==
              doctest::Approx(s * m.d_rot_quarter).epsilon(1e-12));
    }
}

TEST_CASE("global rotation leaves d_rot unchanged") {
    Rng rng(13);
    auto c = random_constellation(rng, 10);
    for (const double psi : {0.3, 1.1, 2.9}) {
        Constellation cr = c;
        for (auto& p : cr.points) p *= std::polar(1.0, psi);
        for (const double phi : {0.4, kPi / 2, 1.9})
            CHECK(rotation_separation(cr, phi) ==
                  doctest::Approx(rotation_separation(c, phi)).epsilon(1e-9));
    }
}

TEST_CASE("slice is idempotent on constellation points") {
    Rng rng(17);
    auto c = random_constellation(rng, 12);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto [idx, pt] = slice(c, c.points[i]);
        CHECK(idx == i);
        CHECK(pt == c.points[i]);
    }
}

TEST_CASE("normalized gives unit average power") {
    Rng rng(19);
    for (int t = 0; t < 10; ++t) {
        auto c = random_constellation(rng, 6);
        for (auto& p : c.points) p *= 3.3;
        CHECK(compute_metrics(c.normalized()).average_power ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("validation rejects degenerate alphabets") {
    Constellation dup;
    dup.points = {{1.0, 0.0}, {1.0, 0.0}};
    dup.probabilities = {0.5, 0.5};
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
    CHECK_THROWS_AS((void)compute_metrics(dup), std::invalid_argument);

    Constellation bad_prob = make_qpsk();
    bad_prob.probabilities = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(bad_prob.validate(), std::invalid_argument);

    Constellation single;
    single.points = {{1.0, 0.0}};
    single.probabilities = {1.0};
    CHECK_THROWS_AS(single.validate(), std::invalid_argument);
}

TEST_CASE("nonuniform probabilities weight the moments") {
    Constellation c;
    c.points = {{1.0, 0.0}, {-1.0, 0.0}};
    c.probabilities = {0.75, 0.25};
    const auto m = compute_metrics(c);
    CHECK(std::abs(m.mean - cplx{0.5, 0.0}) < 1e-15);
    CHECK(std::abs(m.second_moment - cplx{1.0, 0.0}) < 1e-15);
}
