#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "catch_amalgamated.hpp"
#include "hflow/errors.hpp"
#include "hflow/feeder_io.hpp"
#include "hflow/qsts.hpp"

using namespace hflow;

namespace {

const std::filesystem::path kData = HFLOW_DATA_DIR;

struct Bundle {
    Feeder feeder;
    ResourceSet resources;
};

Bundle load_scenario(int n) {
    Bundle b;
    b.feeder = load_feeder(kData / ("feeder_scenario" + std::to_string(n) + ".json"));
    b.resources = load_resources(b.feeder.devices, kData);
    return b;
}

// Four buses in a chain with a linear load on each, 1 kV and 1 MVA bases.
Network chain() {
    Network net;
    net.buses = {{"s", 1000.0, true}, {"a", 1000.0, false}, {"b", 1000.0, false}, {"c", 1000.0, false}};
    net.branches = {{"sa", "s", "a", 0.01, 0.03, 0.0, true},
                    {"ab", "a", "b", 0.01, 0.03, 0.0, true},
                    {"bc", "b", "c", 0.01, 0.03, 0.0, true}};
    net.source = {"s", 1.0, 0.0, 0.002, 0.01};
    return net;
}

DeviceSet chain_loads() {
    DeviceSet d;
    for (const char* bus : {"a", "b", "c"}) {
        d.loads.push_back({std::string("lin_") + bus, bus, 0.05e6, 0.01e6, 0.5, "", "flat"});
    }
    return d;
}

ResourceSet chain_resources(int steps) {
    ResourceSet r;
    r.profiles["flat"] = {"flat", std::vector<double>(static_cast<std::size_t>(steps), 1.0), 60.0};
    r.spectra.emplace("nl", HarmonicSpectrum("nl", {{1, 1.0, 0.0}, {3, 0.3, 0.0}, {5, 0.2, 10.0}, {7, 0.1, 0.0}}));
    return r;
}

void check_residuals(const QstsResult& r) { CHECK(r.max_residual < 1e-9); }

}  // namespace

TEST_CASE("profile lookup by time") {
    const LoadProfile p{"p", {0.5, 0.7, 0.9}, 60.0};
    CHECK(p.at(0.0) == 0.5);
    CHECK(p.at(59.0) == 0.5);
    CHECK(p.at(60.0) == 0.7);
    CHECK(p.at(179.0) == 0.9);
    CHECK(p.coverage_s() == 180.0);
    CHECK_THROWS_AS(p.at(180.0), Error);
    CHECK_THROWS_AS(p.at(-1.0), Error);
}

TEST_CASE("default orders are odd orders plus spectrum orders") {
    DeviceSet d;
    d.loads.push_back({"l", "a", 1.0, 0.0, 0.5, "even", ""});
    ResourceSet r;
    r.spectra.emplace("even", HarmonicSpectrum("even", {{1, 1.0, 0.0}, {2, 0.1, 0.0}, {5, 0.1, 0.0}, {50, 0.01, 0.0}}));
    const auto orders = default_harmonic_orders(d, r);
    std::vector<int> expected{2};
    for (int k = 3; k <= 49; k += 2) expected.push_back(k);
    expected.push_back(50);
    CHECK(orders == expected);

    const auto plain = default_harmonic_orders(DeviceSet{}, r);
    CHECK(plain.size() == 24);
    CHECK(plain.front() == 3);
    CHECK(plain.back() == 49);
}

TEST_CASE("single-step series equals a static solve") {
    auto b = load_scenario(1);
    const NetworkModel model(b.feeder.network);
    QstsOptions opt;
    opt.steps = 1;
    const auto series = run_qsts(model, b.feeder.devices, b.resources, opt);
    check_residuals(series);

    HarmonicPipeline pipeline(model, b.feeder.devices, b.resources, series.orders, opt);
    const auto snap = pipeline.solve(profile_point(b.feeder.devices, b.resources, 0.0));
    REQUIRE(series.monitors.size() == model.bus_count());
    for (std::size_t m = 0; m < model.bus_count(); ++m) {
        const auto& rec = series.monitors[m].voltages[0];
        CHECK(rec[0] == snap.fundamental.voltages[m]);
        for (std::size_t o = 0; o < series.orders.size(); ++o) CHECK(rec[o + 1] == snap.harmonics[o].voltages[m]);
        CHECK(series.monitors[m].thd_pct[0] == thd(bus_voltage_set(snap, m, series.orders)));
    }
}

TEST_CASE("identical inputs give identical results") {
    auto b = load_scenario(3);
    const NetworkModel model(b.feeder.network);
    QstsOptions opt;
    opt.steps = 1000;
    opt.monitors = {"pcc", "800"};
    const auto r1 = run_qsts(model, b.feeder.devices, b.resources, opt);
    const auto r2 = run_qsts(model, b.feeder.devices, b.resources, opt);
    REQUIRE(r1.monitors.size() == r2.monitors.size());
    for (std::size_t m = 0; m < r1.monitors.size(); ++m) {
        CHECK(r1.monitors[m].voltages == r2.monitors[m].voltages);
        CHECK(r1.monitors[m].thd_pct == r2.monitors[m].thd_pct);
    }
    for (std::size_t j = 0; j < r1.transformers.size(); ++j) {
        CHECK(r1.transformers[j].eddy_total == r2.transformers[j].eddy_total);
    }
    CHECK(r1.evs[0].soc == r2.evs[0].soc);
    check_residuals(r1);
}

TEST_CASE("steps without stateful devices are order independent", "[property]") {
    auto b = load_scenario(1);
    const NetworkModel model(b.feeder.network);
    const int steps = 24;
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.2, 1.2);
    ResourceSet base = b.resources;
    for (auto& [name, prof] : base.profiles) {
        prof.values.resize(static_cast<std::size_t>(steps));
        for (auto& v : prof.values) v = u(rng);
    }
    std::vector<std::size_t> perm(static_cast<std::size_t>(steps));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ResourceSet permuted = base;
    for (auto& [name, prof] : permuted.profiles) {
        const auto& src = base.profiles.at(name).values;
        for (std::size_t s = 0; s < perm.size(); ++s) prof.values[s] = src[perm[s]];
    }
    QstsOptions opt;
    opt.steps = steps;
    opt.monitors = {"pcc", "840", "800"};
    const auto a = run_qsts(model, b.feeder.devices, base, opt);
    const auto p = run_qsts(model, b.feeder.devices, permuted, opt);
    for (std::size_t m = 0; m < a.monitors.size(); ++m) {
        for (std::size_t s = 0; s < perm.size(); ++s) {
            CHECK(p.monitors[m].voltages[s] == a.monitors[m].voltages[perm[s]]);
            CHECK(p.monitors[m].thd_pct[s] == a.monitors[m].thd_pct[perm[s]]);
        }
    }
}

TEST_CASE("high-order signature distorts the PCC more than the low-order one") {
    QstsOptions opt;
    opt.monitors = {"pcc"};
    auto s1 = load_scenario(1);
    auto s2 = load_scenario(2);
    const NetworkModel m1(s1.feeder.network);
    const NetworkModel m2(s2.feeder.network);
    const auto r1 = run_qsts(m1, s1.feeder.devices, s1.resources, opt);
    const auto r2 = run_qsts(m2, s2.feeder.devices, s2.resources, opt);
    const double peak1 = *std::max_element(r1.monitors[0].thd_pct.begin(), r1.monitors[0].thd_pct.end());
    const double peak2 = *std::max_element(r2.monitors[0].thd_pct.begin(), r2.monitors[0].thd_pct.end());
    CHECK(peak2 > 2.0 * peak1);
    check_residuals(r1);
    check_residuals(r2);
}

TEST_CASE("EV charging window shapes the PCC distortion") {
    auto b = load_scenario(3);
    const NetworkModel model(b.feeder.network);
    QstsOptions opt;
    opt.monitors = {"pcc"};
    const auto r = run_qsts(model, b.feeder.devices, b.resources, opt);
    check_residuals(r);
    const auto& ev = r.evs.at(0);
    const auto& thd_pcc = r.monitors[0].thd_pct;
    REQUIRE(ev.soc.size() == 1440);

    const auto start = static_cast<std::size_t>(
        std::find_if(ev.power_w.begin(), ev.power_w.end(), [](double p) { return p > 0.0; }) - ev.power_w.begin());
    CHECK(start == 900);
    std::size_t stop = start;
    while (stop < ev.charging.size() && ev.charging[stop]) ++stop;
    REQUIRE(stop < 1440);
    CHECK(ev.soc[stop] >= 0.95);
    CHECK(ev.soc[stop - 1] < 0.95);

    auto mean = [&](std::size_t a, std::size_t z) {
        return std::accumulate(thd_pcc.begin() + static_cast<long>(a), thd_pcc.begin() + static_cast<long>(z), 0.0) /
               static_cast<double>(z - a);
    };
    const double before = mean(start - 60, start);
    const double during = mean(start, stop);
    const double after = mean(stop + 1, std::min<std::size_t>(stop + 61, 1440));
    CHECK(during > 2.0 * before);
    CHECK(after < 0.5 * during);
    for (std::size_t s = 0; s + 1 < ev.soc.size(); ++s) CHECK(ev.soc[s + 1] >= ev.soc[s]);
}

TEST_CASE("eddy series are non-negative and the harmonic part is below the total") {
    auto b = load_scenario(2);
    const NetworkModel model(b.feeder.network);
    QstsOptions opt;
    opt.steps = 120;
    opt.monitors = {"pcc"};
    const auto r = run_qsts(model, b.feeder.devices, b.resources, opt);
    REQUIRE(r.transformers.size() == 3);
    for (const auto& t : r.transformers) {
        REQUIRE(t.eddy_total.size() == 120);
        for (std::size_t s = 0; s < t.eddy_total.size(); ++s) {
            CHECK(t.eddy_harmonic[s] >= 0.0);
            CHECK(t.eddy_harmonic[s] <= t.eddy_total[s]);
        }
    }
}

TEST_CASE("failure inside a series reports its step") {
    const NetworkModel model(chain());
    auto devices = chain_loads();
    auto res = chain_resources(6);
    res.profiles["spike"] = {"spike", {1.0, 1.0, 1.0, 400.0, 1.0, 1.0}, 60.0};
    devices.loads[2].profile = "spike";
    QstsOptions opt;
    opt.steps = 6;
    try {
        (void)run_qsts(model, devices, res, opt);
        FAIL("expected StepError");
    } catch (const StepError& e) {
        CHECK(e.step() == 3);
        CHECK(e.cause() == ErrorKind::NonConvergence);
        CHECK_FALSE(e.trace().empty());
    }
}

TEST_CASE("device validation collects every problem") {
    const NetworkModel model(chain());
    auto devices = chain_loads();
    devices.loads[0].bus = "nowhere";
    devices.loads[1].spectrum = "missing_spectrum";
    devices.loads[2].profile = "missing_profile";
    PvModel pv;
    pv.name = "pv";
    pv.bus = "c";
    pv.s_rating = 1000.0;
    pv.power_factor = 0.9;
    pv.series_x = 0.1;
    devices.pvs.push_back(pv);
    QstsOptions opt;
    opt.steps = 10;
    try {
        validate_devices(model, devices, chain_resources(5), opt);
        FAIL("expected InvalidInput");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInput);
        const std::string msg = e.what();
        CHECK(msg.find("nowhere") != std::string::npos);
        CHECK(msg.find("missing_spectrum") != std::string::npos);
        CHECK(msg.find("missing_profile") != std::string::npos);
        CHECK(msg.find("unity power factor") != std::string::npos);
        CHECK(msg.find("flat") != std::string::npos);
    }
}

TEST_CASE("path to the slack on the bundled feeder") {
    auto b = load_scenario(1);
    const NetworkModel model(b.feeder.network);
    const auto path = path_to_slack(model, "pcc");
    REQUIRE(path.size() >= 4);
    CHECK(path.front() == "pcc");
    CHECK(path[1] == "822");
    CHECK(path[path.size() - 2] == "800");
    CHECK(path.back() == "sourcebus");
    CHECK(path_to_slack(model, "sourcebus") == std::vector<std::string>{"sourcebus"});
}

TEST_CASE("propagation with no placements is the linear baseline") {
    const NetworkModel model(chain());
    const NortonLoadModel tmpl{"nl", "", 0.05e6, 0.01e6, 0.5, "nl", "flat"};
    PropagationOptions opt;
    opt.qsts.steps = 4;
    const auto r = thd_propagation(model, chain_loads(), chain_resources(4), tmpl, {}, opt);
    REQUIRE(r.completed_stages == 1);
    for (double p : r.peak_thd[0]) CHECK(p == 0.0);
    CHECK_FALSE(r.first_stage_over_threshold.has_value());
    CHECK(r.substation_bus == "s");
}

TEST_CASE("propagation on a chain") {
    const NetworkModel model(chain());
    const NortonLoadModel tmpl{"nl", "", 0.05e6, 0.01e6, 0.5, "nl", "flat"};
    const std::vector<std::string> placements{"c", "b", "a"};
    PropagationOptions opt;
    opt.qsts.steps = 3;
    opt.substation_bus = "a";
    opt.threshold_pct = 3.0;
    const auto r = thd_propagation(model, chain_loads(), chain_resources(3), tmpl, placements, opt);
    REQUIRE(r.completed_stages == 4);
    CHECK_FALSE(r.failure.has_value());
    CHECK(r.max_residual < 1e-9);
    const auto at = [&](const std::string& bus) {
        return static_cast<std::size_t>(std::find(r.monitors.begin(), r.monitors.end(), bus) - r.monitors.begin());
    };
    for (int s = 1; s < 4; ++s) CHECK(r.peak_thd[s][at("a")] >= r.peak_thd[s - 1][at("a")]);
    const auto path = path_to_slack(model, "c");
    for (int s = 1; s < 4; ++s) {
        for (std::size_t i = 1; i < path.size(); ++i) CHECK(r.peak_thd[s][at(path[i])] <= r.peak_thd[s][at(path[i - 1])]);
    }
    if (r.first_stage_over_threshold) {
        const int first = *r.first_stage_over_threshold;
        CHECK(r.peak_thd[first][at("a")] > 3.0);
        for (int s = 0; s < first; ++s) CHECK(r.peak_thd[s][at("a")] <= 3.0);
    }
}

TEST_CASE("propagation stops at a failing stage") {
    const NetworkModel model(chain());
    const NortonLoadModel tmpl{"huge", "", 40.0e6, 10.0e6, 0.5, "nl", "flat"};
    const std::vector<std::string> placements{"c", "b"};
    PropagationOptions opt;
    opt.qsts.steps = 2;
    const auto r = thd_propagation(model, chain_loads(), chain_resources(2), tmpl, placements, opt);
    CHECK(r.completed_stages == 1);
    REQUIRE(r.failure.has_value());
    CHECK(r.failure->find("stage 1") != std::string::npos);
    CHECK(r.peak_thd.size() == 1);
}

TEST_CASE("propagation on the bundled feeder grows toward the substation threshold") {
    auto b = load_scenario(1);
    const NetworkModel model(b.feeder.network);
    add_spectrum(b.resources, kData, "aggregate_nonlinear", SpectrumKind::Current);
    add_profile(b.resources, kData, "residential_nonlinear");
    const NortonLoadModel tmpl{"nl", "", 80e3, 20e3, 0.5, "aggregate_nonlinear", "residential_nonlinear"};
    const std::vector<std::string> placements{"840", "836", "860", "834", "858", "832"};
    PropagationOptions opt;
    opt.qsts.steps = 120;
    opt.qsts.dt = 60.0;
    opt.substation_bus = "800";
    opt.qsts.monitors = {"800", "808", "816", "824", "828", "830", "854", "852", "832", "858", "834",
                         "860", "836", "840"};
    const auto r = thd_propagation(model, b.feeder.devices, b.resources, tmpl, placements, opt);
    REQUIRE(r.completed_stages == 7);
    const auto at = [&](const std::string& bus) {
        return static_cast<std::size_t>(std::find(r.monitors.begin(), r.monitors.end(), bus) - r.monitors.begin());
    };
    for (int s = 1; s < 7; ++s) CHECK(r.peak_thd[s][at("800")] >= r.peak_thd[s - 1][at("800")]);
    const auto path = path_to_slack(model, "840");
    for (int s = 0; s < 7; ++s) {
        double prev = INFINITY;
        for (const auto& bus : path) {
            const auto i = at(bus);
            if (i == r.monitors.size()) continue;
            CHECK(r.peak_thd[s][i] <= prev + 1e-12);
            prev = r.peak_thd[s][i];
        }
    }
    CHECK(r.max_residual < 1e-9);
}
