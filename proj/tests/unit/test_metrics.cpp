#include <algorithm>
#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "hflow/errors.hpp"
#include "hflow/metrics.hpp"

using namespace hflow;
using Catch::Approx;

namespace {

HarmonicSet random_set(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    HarmonicSet s;
    s.fundamental = 0.1 + u(rng);
    for (int h = 2; h <= 49; ++h) {
        if (u(rng) < 0.5) s.components.push_back({static_cast<double>(h), 0.1 * u(rng)});
    }
    return s;
}

// Direct summation written independently of the library.
double eddy_oracle(double i1, const std::vector<std::pair<int, double>>& parts, double p) {
    double sum = i1 * i1;
    for (const auto& [h, i] : parts) sum += i * i * h * h;
    return p * sum;
}

}  // namespace

TEST_CASE("THD examples") {
    CHECK(thd({1.0, {}}) == 0.0);
    const HarmonicSet s{1.0, {{3, 0.05}, {5, 0.03}}};
    CHECK(std::abs(thd(s) - 5.830951894845301) < 1e-12);
    HarmonicSet scaled{3.0, {{3, 0.15}, {5, 0.09}}};
    CHECK(thd(scaled) == Approx(thd(s)).epsilon(1e-14));
}

TEST_CASE("THD needs a fundamental") {
    try {
        (void)thd({0.0, {{3, 0.1}}});
        FAIL("expected ZeroFundamental");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroFundamental);
    }
}

TEST_CASE("eddy loss examples") {
    CHECK(eddy_current_loss({1.0, {}}, 0.05) == 0.05);
    CHECK(eddy_current_loss({1.0, {}}) == 0.05);
    CHECK(std::abs(eddy_current_loss({1.0, {{3, 0.1}}}, 0.05) - eddy_oracle(1.0, {{3, 0.1}}, 0.05)) < 1e-15);
    CHECK(std::abs(eddy_current_loss({1.0, {{3, 0.1}}}, 0.05) - 0.0545) < 1e-12);
    CHECK(std::abs(eddy_current_loss({0.0, {{27, 0.1}}}, 0.05) - 0.3645) < 1e-12);
}

TEST_CASE("harmonic eddy component excludes the fundamental term") {
    const HarmonicSet s{1.0, {{3, 0.1}, {5, 0.05}}};
    CHECK(eddy_harmonic_component({0.8, {}}) == 0.0);
    CHECK(eddy_harmonic_component(s) == Approx(eddy_current_loss(s) - 0.05).epsilon(1e-13));
}

TEST_CASE("summary examples") {
    const std::vector<double> flat{5, 5, 5};
    const auto a = summarize(flat);
    CHECK(a.min == 5);
    CHECK(a.q1 == 5);
    CHECK(a.median == 5);
    CHECK(a.q3 == 5);
    CHECK(a.max == 5);
    CHECK(a.mean == 5);

    const std::vector<double> ramp{1, 2, 3, 4, 5};
    const auto b = summarize(ramp);
    CHECK(b.median == 3);
    CHECK(b.q1 == 2);
    CHECK(b.q3 == 4);
    CHECK(b.mean == 3);

    const std::vector<double> one{7};
    const auto c = summarize(one);
    CHECK(c.min == 7);
    CHECK(c.q1 == 7);
    CHECK(c.median == 7);
    CHECK(c.q3 == 7);
    CHECK(c.max == 7);
    CHECK(c.mean == 7);

    const std::vector<double> four{1, 2, 3, 4};
    const auto d = summarize(four);
    CHECK(d.q1 == Approx(1.75));
    CHECK(d.median == Approx(2.5));
    CHECK(d.q3 == Approx(3.25));
}

TEST_CASE("summary of an empty series") {
    try {
        (void)summarize(std::vector<double>{});
        FAIL("expected EmptySeries");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptySeries);
    }
}

TEST_CASE("THD is unchanged by uniform scaling", "[property]") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        auto s = random_set(rng);
        const double before = thd(s);
        const double c = 1e-3 + 1e3 * u(rng);
        s.fundamental *= c;
        for (auto& comp : s.components) comp.magnitude *= c;
        CHECK(thd(s) == Approx(before).epsilon(1e-12));
        CHECK(thd(s) >= 0.0);
    }
}

TEST_CASE("eddy loss is monotone in magnitude and order", "[property]") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        auto s = random_set(rng);
        const double base = eddy_current_loss(s);
        if (!s.components.empty()) {
            auto bigger = s;
            bigger.components[0].magnitude += 0.01 + u(rng);
            CHECK(eddy_current_loss(bigger) >= base);
        }
        auto f = s;
        f.fundamental += u(rng);
        CHECK(eddy_current_loss(f) >= base);

        const double m = 0.01 + u(rng);
        const double h = 2.0 + std::floor(40.0 * u(rng));
        CHECK(eddy_current_loss({0.0, {{h + 1.0, m}}}) > eddy_current_loss({0.0, {{h, m}}}));
    }
}

TEST_CASE("summary ignores the order of its input", "[property]") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_int_distribution<int> len(1, 200);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(len(rng)));
        for (auto& x : v) x = u(rng);
        const auto a = summarize(v);
        std::shuffle(v.begin(), v.end(), rng);
        const auto b = summarize(v);
        CHECK(a.min == b.min);
        CHECK(a.q1 == b.q1);
        CHECK(a.median == b.median);
        CHECK(a.q3 == b.q3);
        CHECK(a.max == b.max);
        CHECK(a.mean == Approx(b.mean).epsilon(1e-12));
        CHECK(a.min <= a.q1);
        CHECK(a.q1 <= a.median);
        CHECK(a.median <= a.q3);
        CHECK(a.q3 <= a.max);
    }
}
