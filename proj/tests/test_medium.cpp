#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nlhom/nlhom.hpp"

using namespace nlhom;

TEST_CASE("constant medium statistics") {
    GridSpec g(2, 4.0, 32);
    MediumField f = sample_constant(g, 1.7);
    FieldStatistics st = field_statistics(f);
    REQUIRE(st.mean == Catch::Approx(1.7).margin(1e-12));
    REQUIRE(st.min == 1.7);
    REQUIRE(st.max == 1.7);
    REQUIRE(st.variance <= 1e-20);
    REQUIRE_THROWS_AS(sample_constant(g, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_constant(g, -1.0), std::invalid_argument);
}

TEST_CASE("checkerboard bounds and determinism") {
    GridSpec g(1, 32.0, 256);
    MediumField a = sample_checkerboard(g, 1.0, 3.0, 1.0, 42);
    MediumField b = sample_checkerboard(g, 1.0, 3.0, 1.0, 42);
    MediumField c = sample_checkerboard(g, 1.0, 3.0, 1.0, 43);
    REQUIRE(a.values == b.values);
    REQUIRE(a.values != c.values);
    for (double v : a.values) REQUIRE((v == 1.0 || v == 3.0));
    // continuous variant stays within the bounds
    MediumField u = sample_checkerboard(g, 1.0, 3.0, 1.0, 42, false);
    for (double v : u.values) {
        REQUIRE(v >= 1.0);
        REQUIRE(v <= 3.0);
    }
    // degenerate bounds give a constant field
    MediumField k = sample_checkerboard(g, 2.0, 2.0, 1.0, 7, false);
    for (double v : k.values) REQUIRE(v == 2.0);
}

TEST_CASE("checkerboard is piecewise constant on cells") {
    GridSpec g(1, 32.0, 256);   // 8 grid points per unit cell
    MediumField f = sample_checkerboard(g, 1.0, 3.0, 1.0, 5);
    int transitions = 0;
    for (int i = 0; i < g.points; ++i)
        if (f.values[static_cast<std::size_t>(i)] !=
            f.values[static_cast<std::size_t>(g.wrap(i + 1))])
            ++transitions;
    REQUIRE(transitions <= 32);   // at most one boundary per cell
    REQUIRE(transitions >= 2);    // and the field is not constant (p = 2^-32 fluke)
}

TEST_CASE("two-phase cell fractions are binomial") {
    // one grid point per cell: the values are 16384 fair coin flips
    GridSpec g(1, 16384.0, 16384);
    MediumField f = sample_checkerboard(g, 1.0, 3.0, 1.0, 11);
    FieldStatistics st = field_statistics(f);
    const double se = 0.5 * (3.0 - 1.0) / std::sqrt(16384.0);
    REQUIRE(std::abs(st.mean - 2.0) <= 3.0 * se);
}

TEST_CASE("seed ensemble of cell means concentrates") {
    GridSpec g(1, 1024.0, 1024);
    const double se = 0.5 * (3.0 - 1.0) / std::sqrt(1024.0);
    int within = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        FieldStatistics st = field_statistics(sample_checkerboard(g, 1.0, 3.0, 1.0, s));
        if (std::abs(st.mean - 2.0) <= 4.0 * se) ++within;
    }
    REQUIRE(within >= 99);
}

TEST_CASE("checkerboard lattice shift is seeded and nontrivial") {
    GridSpec g(2, 8.0, 32);
    MediumField a = sample_checkerboard(g, 1.0, 2.0, 1.0, 1);
    MediumField b = sample_checkerboard(g, 1.0, 2.0, 1.0, 2);
    REQUIRE(a.shift != b.shift);
    for (int ax = 0; ax < 2; ++ax) {
        REQUIRE(a.shift[static_cast<std::size_t>(ax)] >= 0.0);
        REQUIRE(a.shift[static_cast<std::size_t>(ax)] < 1.0);
    }
}

TEST_CASE("checkerboard rejections") {
    GridSpec g(1, 8.0, 64);   // h = 1/8
    REQUIRE_THROWS_AS(sample_checkerboard(g, 1.0, 2.0, 0.3, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_checkerboard(g, 1.0, 2.0, 3.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_checkerboard(g, 0.0, 2.0, 1.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_checkerboard(g, 2.0, 1.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("smoothed threshold: range, determinism, correlation") {
    GridSpec g(1, 16.0, 512);
    MediumField f = sample_smoothed_threshold(g, 1.0, 2.0, 4.0, 3);
    MediumField f2 = sample_smoothed_threshold(g, 1.0, 2.0, 4.0, 3);
    REQUIRE(f.values == f2.values);
    for (double v : f.values) {
        REQUIRE(v > 1.0);
        REQUIRE(v < 2.0);
    }
    // correlation length >> h makes neighbours strongly correlated
    FieldStatistics st = field_statistics(f);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.points; ++i) {
        const double x = f.values[static_cast<std::size_t>(i)] - st.mean;
        const double y = f.values[static_cast<std::size_t>(g.wrap(i + 1))] - st.mean;
        num += x * y;
        den += x * x;
    }
    REQUIRE(num / den > 0.5);
    REQUIRE_THROWS_AS(sample_smoothed_threshold(g, 1.0, 2.0, 0.01, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_smoothed_threshold(g, 1.0, 2.0, 10.0, 3), std::invalid_argument);
    // degenerate bounds short-circuit to a constant
    MediumField c = sample_smoothed_threshold(g, 1.5, 1.5, 4.0, 3);
    for (double v : c.values) REQUIRE(v == 1.5);
}

TEST_CASE("periodic profile tiles the first axis") {
    GridSpec g(1, 4.0, 64);
    MediumField f = sample_periodic(g, {1.0, 3.0}, 1.0);
    const double h = g.spacing();
    for (int i = 0; i < g.points; ++i) {
        const double x = std::fmod(i * h, 1.0);
        REQUIRE(f.values[static_cast<std::size_t>(i)] == (x < 0.5 ? 1.0 : 3.0));
    }
    REQUIRE(f.alpha1 == 1.0);
    REQUIRE(f.alpha2 == 3.0);
    // in 2-d the profile varies only along the first axis
    GridSpec g2(2, 4.0, 32);
    MediumField f2 = sample_periodic(g2, {1.0, 2.0, 3.0, 2.0}, 2.0);
    for (int i = 0; i < g2.points; ++i)
        for (int j = 1; j < g2.points; ++j)
            REQUIRE(f2.values[g2.index({i, j, 0})] == f2.values[g2.index({i, 0, 0})]);
    REQUIRE_THROWS_AS(sample_periodic(g, {}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_periodic(g, {1.0, 2.0}, 3.0), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_periodic(g, {0.0, 2.0}, 1.0), std::invalid_argument);
}

TEST_CASE("field round trip through NLHF is bit exact") {
    GridSpec g(2, 8.0, 16);
    MediumField f = sample_checkerboard(g, 1.25, 2.75, 1.0, 99);
    const std::string path = "roundtrip_test.nlhf";
    save_field(path, f);
    MediumField r = load_field(path);
    REQUIRE(r.grid == f.grid);
    REQUIRE(r.alpha1 == f.alpha1);
    REQUIRE(r.alpha2 == f.alpha2);
    REQUIRE(r.seed == f.seed);
    REQUIRE(r.values == f.values);
    std::remove(path.c_str());
}

TEST_CASE("NLHF rejects corrupt input") {
    const std::string path = "corrupt_test.nlhf";
    {
        std::ofstream os(path, std::ios::binary);
        os.write("XLHF", 4);
        std::uint32_t pad = 0;
        os.write(reinterpret_cast<const char*>(&pad), 4);
    }
    REQUIRE_THROWS_AS(load_field(path), std::runtime_error);
    {
        // good magic, truncated payload
        GridSpec g(1, 1.0, 8);
        MediumField f = sample_constant(g, 1.0);
        save_field(path, f);
        std::filesystem::resize_file(path, 20);
    }
    REQUIRE_THROWS_AS(load_field(path), std::runtime_error);
    std::remove(path.c_str());
}
