#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "circuits.hpp"
#include "hflow/errors.hpp"
#include "hflow/harmonics.hpp"
#include "oracle.hpp"

using namespace hflow;
using Catch::Approx;

namespace {

double angle_deg(Complex z) { return std::arg(z) * 180.0 / kPi; }

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InternalInvariant;
}

std::vector<HarmonicInjection> random_injections(std::mt19937_64& rng, const NetworkModel& model, int order) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<HarmonicInjection> out;
    for (std::size_t i = 0; i < model.bus_count(); ++i) {
        if (u(rng) < 0.0) continue;
        out.push_back({model.bus_id(i), order, Complex{0.05 * u(rng), 0.05 * u(rng)}});
    }
    return out;
}

std::vector<Complex> dense_rhs(const NetworkModel& model, const std::vector<HarmonicInjection>& inj) {
    std::vector<Complex> rhs(model.bus_count());
    for (const auto& i : inj) rhs[model.index_of(i.bus)] += i.current;
    return rhs;
}

}  // namespace

TEST_CASE("injection magnitude follows the spectrum multiplier") {
    const HarmonicSpectrum s("s", {{1, 1.0, 0.0}, {5, 0.04, 0.0}});
    const Complex i5 = injection_from_spectrum(s, Complex{100.0, 0.0}, 0.0, 5);
    CHECK(std::abs(i5) == Approx(4.0));
}

TEST_CASE("injection angle shifts by k times the fundamental angle plus 180 degrees") {
    const HarmonicSpectrum s("s", {{1, 1.0, 0.0}, {3, 0.2, 10.0}});
    const Complex i1 = std::polar(1.0, -30.0 * kPi / 180.0);
    const Complex i3 = injection_from_spectrum(s, i1, 0.0, 3);
    CHECK(angle_deg(i3) == Approx(100.0));
    CHECK(std::abs(i3) == Approx(0.2));

    InjectionOptions raw;
    raw.reverse_direction = false;
    CHECK(angle_deg(injection_from_spectrum(s, i1, 0.0, 3, raw)) == Approx(-80.0));

    // The slack angle is subtracted before multiplying by k.
    CHECK(angle_deg(injection_from_spectrum(s, i1, -30.0, 3)) == Approx(-170.0));
}

TEST_CASE("injection for an order absent from the spectrum") {
    const HarmonicSpectrum s("s", {{1, 1.0, 0.0}, {5, 0.04, 0.0}});
    CHECK(kind_of([&] { (void)injection_from_spectrum(s, Complex{1.0, 0.0}, 0.0, 7); }) == ErrorKind::MissingOrder);
}

TEST_CASE("injection magnitude is homogeneous in the fundamental current", "[property]") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const HarmonicSpectrum s("s", {{1, 1.0, 0.0}, {3, u(rng), 360.0 * u(rng)}, {11, u(rng), 0.0}});
        const Complex i1 = std::polar(0.1 + u(rng), 6.0 * u(rng));
        for (int k : {3, 11}) {
            const double a = std::abs(injection_from_spectrum(s, i1, 5.0, k));
            const double b = std::abs(injection_from_spectrum(s, 2.0 * i1, 5.0, k));
            CHECK(b == Approx(2.0 * a).epsilon(1e-14));
        }
    }
}

TEST_CASE("zero injections give zero harmonic voltages") {
    const NetworkModel model(circuits::resonant_two_bus());
    const auto sol = solve_harmonic(model, 5, {});
    for (const auto& v : sol.voltages) CHECK(v == Complex{});
    CHECK(sol.residual < kResidualBound);
}

TEST_CASE("harmonic solve rejects the fundamental order") {
    const NetworkModel model(circuits::resonant_two_bus());
    CHECK(kind_of([&] { (void)solve_harmonic(model, 1, {}); }) == ErrorKind::InvalidInput);
    const std::vector<HarmonicInjection> wrong{{"pcc", 7, Complex{1.0, 0.0}}};
    CHECK(kind_of([&] { (void)solve_harmonic(model, 5, wrong); }) == ErrorKind::InvalidInput);
}

TEST_CASE("resonant injection matches the closed-form tank impedance") {
    const double r = 1.0;
    const double l = 1e-3;
    const double c = 10e-6;
    const NetworkModel model(circuits::lc_tank(r, l, c));
    const double fr = resonant_frequency(l, c);
    const int k = static_cast<int>(std::lround(fr / 60.0));
    const std::vector<HarmonicInjection> inj{{"pcc", k, Complex{1.0 / model.current_base(0), 0.0}}};
    const auto sol = solve_harmonic(model, k, inj);
    const Complex z = sol.voltages[0] * model.voltage_base(0);
    const Complex expected = circuits::lc_tank_impedance(r, l, c, 60.0 * k);
    CHECK(std::abs(std::abs(z) - std::abs(expected)) / std::abs(expected) < 0.005);
    CHECK(sol.residual < kResidualBound);
}

TEST_CASE("harmonic solution matches a dense oracle on random networks", "[property]") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const auto net = oracle::random_network(rng, 8);
        const NetworkModel model(net);
        for (int k : {2, 3, 5, 13, 25}) {
            const auto inj = random_injections(rng, model, k);
            const auto sol = solve_harmonic(model, k, inj);
            const auto ref = oracle::dense_harmonic_solve(net, k, dense_rhs(model, inj));
            for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(sol.voltages[i] - ref[i]) < 1e-9);
            CHECK(sol.residual < kResidualBound);
        }
    }
}

TEST_CASE("harmonic solutions superpose", "[property]") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        const NetworkModel model(oracle::random_network(rng, 10));
        const int k = 7;
        const auto a = random_injections(rng, model, k);
        const auto b = random_injections(rng, model, k);
        auto ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const auto va = solve_harmonic(model, k, a);
        const auto vb = solve_harmonic(model, k, b);
        const auto vab = solve_harmonic(model, k, ab);
        for (const auto* sol : {&va, &vb, &vab}) CHECK(sol->residual < kResidualBound);
        for (std::size_t i = 0; i < model.bus_count(); ++i) {
            CHECK(std::abs(vab.voltages[i] - va.voltages[i] - vb.voltages[i]) < 1e-9);
        }
    }
}

TEST_CASE("device shunts enter the diagonal") {
    const auto net = circuits::resonant_two_bus();
    const NetworkModel model(net);
    RlShunt load;
    load.parallel_g = 0.2;
    load.parallel_b = -0.05;
    const std::vector<DeviceShunt> shunts{{1, load}};
    const std::vector<HarmonicInjection> inj{{"pcc", 11, Complex{0.01, 0.0}}};
    const auto sol = solve_harmonic(model, 11, inj, shunts);

    auto y = oracle::dense_admittance(net, 11.0);
    y[1][1] += load.admittance(11.0);
    y[0][0] += 1.0 / (model.thevenin_impedance(11.0));
    const auto ref = oracle::gauss_solve(y, {Complex{}, Complex{0.01, 0.0}});
    CHECK(std::abs(sol.voltages[1] - ref[1]) < 1e-12);
    CHECK(sol.residual < kResidualBound);
}

TEST_CASE("stiff source holds the slack at zero") {
    auto net = circuits::resonant_two_bus();
    net.source.thevenin_r = 0.0;
    net.source.thevenin_x = 0.0;
    const NetworkModel model(net);
    const std::vector<HarmonicInjection> inj{{"pcc", 5, Complex{0.01, 0.0}}};
    const auto sol = solve_harmonic(model, 5, inj);
    CHECK(sol.voltages[0] == Complex{});
    const auto ref = oracle::dense_harmonic_solve(net, 5.0, {Complex{}, Complex{0.01, 0.0}});
    CHECK(std::abs(sol.voltages[1] - ref[1]) < 1e-12);
}

TEST_CASE("a cached system reproduces fresh solves") {
    std::mt19937_64 rng(24);
    const auto net = oracle::random_network(rng, 10);
    const NetworkModel model(net);
    HarmonicSystem system(model, 9.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        RlShunt s;
        s.parallel_g = u(rng);
        s.parallel_b = -u(rng);
        const std::vector<DeviceShunt> dev{{model.bus_count() - 1, s}};
        const auto inj = random_injections(rng, model, 9);
        std::vector<NodalInjection> nodal;
        for (const auto& i : inj) nodal.push_back({model.index_of(i.bus), i.current});
        const auto cached = system.solve(nodal, evaluate_shunts(dev, 9.0));
        const auto fresh = solve_harmonic(model, 9, inj, dev);
        CHECK(cached.residual < kResidualBound);
        CHECK(fresh.residual < kResidualBound);
        for (std::size_t i = 0; i < model.bus_count(); ++i) {
            CHECK(std::abs(cached.voltages[i] - fresh.voltages[i]) < 1e-13);
        }
    }
}

TEST_CASE("zero diagonal at a harmonic order is a singular network") {
    const NetworkModel model(circuits::resonant_two_bus());
    const auto y = build_admittance(model, 2.0);
    const std::vector<BusShunt> cancel{{1, -y.coeff(1, 1)}};
    HarmonicSystem system(model, 2.0);
    CHECK(kind_of([&] { (void)system.solve({}, cancel); }) == ErrorKind::SingularNetwork);
}

TEST_CASE("frequency scan point count and ordering") {
    const NetworkModel model(circuits::resonant_two_bus());
    const auto curve = frequency_scan(model, "pcc", 60.0, 3000.0, 10.0);
    CHECK(curve.points.size() == 295);
    CHECK(curve.failures.empty());
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].frequency_hz > curve.points[i - 1].frequency_hz);
    }
    CHECK(curve.points.front().frequency_hz == 60.0);
    CHECK(curve.points.back().frequency_hz == 3000.0);
}

TEST_CASE("frequency scan rejects a bad range") {
    const NetworkModel model(circuits::resonant_two_bus());
    CHECK(kind_of([&] { (void)frequency_scan(model, "pcc", 3000.0, 60.0, 10.0); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([&] { (void)frequency_scan(model, "pcc", 0.0, 60.0, 10.0); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([&] { (void)frequency_scan(model, "pcc", 60.0, 600.0, 0.0); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([&] { (void)frequency_scan(model, "nope", 60.0, 600.0, 10.0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("scan without capacitance is inductive and monotone") {
    Network net;
    net.buses = {{"s", 2400.0, true}, {"m", 2400.0, false}, {"l", 2400.0, false}};
    net.branches = {{"a", "s", "m", 0.3, 0.8, 0.0, true}, {"b", "m", "l", 0.2, 0.4, 0.0, true}};
    net.source = {"s", 1.0, 0.0, 0.1, 1.0};
    const NetworkModel model(net);
    const auto curve = frequency_scan(model, "l", 60.0, 3000.0, 10.0);
    REQUIRE(curve.points.size() == 295);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(std::abs(curve.points[i].impedance_ohm) > std::abs(curve.points[i - 1].impedance_ohm));
    }
    for (const auto& p : curve.points) {
        const double h = p.frequency_hz / 60.0;
        std::vector<Complex> rhs(3);
        rhs[model.index_of("l")] = 1.0 / model.current_base(model.index_of("l"));
        const auto ref = oracle::dense_harmonic_solve(net, h, rhs);
        CHECK(std::abs(p.impedance_ohm - ref[model.index_of("l")] * 2400.0) < 1e-9);
    }
}

TEST_CASE("scan of an LC tank peaks at the resonant frequency") {
    const double r = 1.0;
    const double l = 1e-3;
    const double c = 10e-6;
    const NetworkModel model(circuits::lc_tank(r, l, c));
    const auto curve = frequency_scan(model, "pcc", 60.0, 3000.0, 10.0);
    const auto peak = peak_frequency(curve);
    REQUIRE(peak.has_value());
    const double fr = resonant_frequency(l, c);
    CHECK(std::abs(*peak - fr) <= 10.0);
    for (const auto& p : curve.points) {
        if (std::abs(p.frequency_hz - fr) < 20.0) continue;
        const Complex z = circuits::lc_tank_impedance(r, l, c, p.frequency_hz);
        CHECK(std::abs(std::abs(p.impedance_ohm) - std::abs(z)) / std::abs(z) < 0.005);
    }
}

TEST_CASE("peak of an empty curve") {
    CHECK_FALSE(peak_frequency(ImpedanceCurve{}).has_value());
}

TEST_CASE("parallel resonance closed form") {
    const double l = 1e-3;
    const double c = 10e-6;
    const double fr = resonant_frequency(l, c);
    CHECK(fr == Approx(1591.549430918953));
    CHECK(kind_of([&] { (void)parallel_resonance_impedance(l, c, fr); }) == ErrorKind::ResonancePole);

    const Complex z2 = parallel_resonance_impedance(l, c, 2.0 * fr);
    const double w = 2.0 * kPi * 2.0 * fr;
    CHECK(std::abs(z2 - Complex{0.0, -w * l / 3.0}) < 1e-12);

    const double f_low = 0.01;
    const Complex z_low = parallel_resonance_impedance(l, c, f_low);
    CHECK(z_low.imag() == Approx(2.0 * kPi * f_low * l).epsilon(1e-9));

    CHECK(kind_of([&] { (void)parallel_resonance_impedance(0.0, c, 60.0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("resonant frequency values") {
    CHECK(resonant_frequency(1e-3, 10e-6) == Approx(1591.55).epsilon(1e-5));
    CHECK(resonant_frequency(4e-3, 10e-6) == Approx(1591.549430918953 / 2.0));
    CHECK(resonant_frequency(2.533e-3, 1e-6) == Approx(3162.3).epsilon(1e-5));
    CHECK(resonant_frequency(2.533e-3, 1e-3) == Approx(100.0).epsilon(1e-4));
}
