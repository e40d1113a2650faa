#include "hflow/qsts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <queue>
#include <set>
#include <sstream>
#include <thread>

namespace hflow {

namespace {

const HarmonicSpectrum* lookup_spectrum(const ResourceSet& res, const std::string& name,
                                        const std::string& owner) {
    if (name.empty()) return nullptr;
    const auto it = res.spectra.find(name);
    if (it == res.spectra.end()) {
        throw Error(ErrorKind::InvalidInput, owner + " references unknown spectrum '" + name + "'");
    }
    return &it->second;
}

const LoadProfile* lookup_profile(const ResourceSet& res, const std::string& name) {
    if (name.empty()) return nullptr;
    const auto it = res.profiles.find(name);
    return it == res.profiles.end() ? nullptr : &it->second;
}

double profile_value(const ResourceSet& res, const std::string& name, double t) {
    const auto* p = lookup_profile(res, name);
    return p == nullptr ? 1.0 : p->at(t);
}

std::vector<int> normalize_orders(std::vector<int> orders) {
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
    for (int k : orders) {
        if (k < 2) throw Error(ErrorKind::InvalidInput, "harmonic orders must be >= 2");
    }
    return orders;
}

Complex series_impedance_pu(const NetworkModel& model, std::size_t bus, double r, double x) {
    return Complex{r, x} / model.impedance_base(bus);
}

}  // namespace

double LoadProfile::at(double t) const {
    if (values.empty()) throw Error(ErrorKind::InvalidInput, "profile '" + name + "' is empty");
    const auto idx = static_cast<std::size_t>(std::floor(t / resolution_s + 1e-9));
    if (t < 0.0 || idx >= values.size()) {
        std::ostringstream msg;
        msg << "time " << t << " s lies outside profile '" << name << "' (" << coverage_s() << " s)";
        throw Error(ErrorKind::InvalidInput, msg.str());
    }
    return values[idx];
}

std::vector<int> default_harmonic_orders(const DeviceSet& devices, const ResourceSet& resources) {
    std::set<int> orders;
    for (int k = 3; k <= 49; k += 2) orders.insert(k);
    auto add = [&](const std::string& name) {
        const auto it = resources.spectra.find(name);
        if (it == resources.spectra.end()) return;
        for (const auto& e : it->second.entries()) {
            if (e.order >= 2) orders.insert(e.order);
        }
    };
    for (const auto& l : devices.loads) add(l.spectrum);
    for (const auto& p : devices.pvs) add(p.spectrum);
    for (const auto& e : devices.evs) add(e.spectrum);
    return {orders.begin(), orders.end()};
}

HarmonicPipeline::HarmonicPipeline(const NetworkModel& model, DeviceSet devices,
                                   const ResourceSet& resources, std::vector<int> orders,
                                   const QstsOptions& options)
    : model_(&model),
      devices_(std::move(devices)),
      options_(options),
      orders_(normalize_orders(std::move(orders))),
      fundamental_(model) {
    for (const auto& l : devices_.loads) {
        load_bus_.push_back(model.index_of(l.bus));
        load_spectra_.push_back(lookup_spectrum(resources, l.spectrum, "load " + l.name));
    }
    for (const auto& p : devices_.pvs) {
        pv_bus_.push_back(model.index_of(p.bus));
        pv_spectra_.push_back(lookup_spectrum(resources, p.spectrum, "pv " + p.name));
    }
    for (const auto& e : devices_.evs) {
        ev_bus_.push_back(model.index_of(e.bus));
        ev_spectra_.push_back(lookup_spectrum(resources, e.spectrum, "ev " + e.name));
    }
    systems_.reserve(orders_.size());
    for (int k : orders_) systems_.emplace_back(model, static_cast<double>(k));
}

OperatingPoint HarmonicPipeline::nominal_point() const {
    OperatingPoint op;
    op.load_scale.assign(devices_.loads.size(), 1.0);
    op.pv_output.assign(devices_.pvs.size(), 1.0);
    for (const auto& e : devices_.evs) op.ev_power.push_back(e.charge_power);
    return op;
}

std::vector<DeviceShunt> HarmonicPipeline::nominal_shunts() const {
    const double sb = model_->base_power();
    std::vector<DeviceShunt> out;
    for (std::size_t i = 0; i < devices_.loads.size(); ++i) {
        const auto& l = devices_.loads[i];
        if (l.p_rated == 0.0 && l.q_rated == 0.0) continue;
        out.push_back({load_bus_[i],
                       fit_load_admittance(l.p_rated / sb, l.q_rated / sb, 1.0, l.series_fraction)});
    }
    auto series = [&](std::size_t bus, double r, double x) {
        RlShunt s;
        s.series_z = series_impedance_pu(*model_, bus, r, x);
        s.has_series = true;
        return DeviceShunt{bus, s};
    };
    for (std::size_t i = 0; i < devices_.pvs.size(); ++i) {
        out.push_back(series(pv_bus_[i], devices_.pvs[i].series_r, devices_.pvs[i].series_x));
    }
    for (std::size_t i = 0; i < devices_.evs.size(); ++i) {
        if (devices_.evs[i].charge_power > 0.0) {
            out.push_back(series(ev_bus_[i], devices_.evs[i].series_r, devices_.evs[i].series_x));
        }
    }
    return out;
}

Snapshot HarmonicPipeline::solve(const OperatingPoint& op) {
    const auto& model = *model_;
    const double sb = model.base_power();
    const double theta = model.network().source.voltage_angle;
    const std::size_t n = model.bus_count();

    if (op.load_scale.size() != devices_.loads.size() || op.pv_output.size() != devices_.pvs.size() ||
        op.ev_power.size() != devices_.evs.size()) {
        throw Error(ErrorKind::InternalInvariant, "operating point does not match the device set");
    }

    // Consumption per bus in system per-unit.
    std::vector<Complex> demand(n);
    std::vector<Complex> load_s(devices_.loads.size());
    for (std::size_t i = 0; i < devices_.loads.size(); ++i) {
        const auto& l = devices_.loads[i];
        load_s[i] = Complex{l.p_rated, l.q_rated} * op.load_scale[i] / sb;
        demand[load_bus_[i]] += load_s[i];
    }
    std::vector<double> pv_p(devices_.pvs.size());
    for (std::size_t i = 0; i < devices_.pvs.size(); ++i) {
        pv_p[i] = pv_operating_point(devices_.pvs[i], op.pv_output[i]).p / sb;
        demand[pv_bus_[i]] -= pv_p[i];
    }
    for (std::size_t i = 0; i < devices_.evs.size(); ++i) demand[ev_bus_[i]] += op.ev_power[i] / sb;

    Snapshot snap;
    snap.fundamental = fundamental_.solve(demand, options_.power_flow);
    const auto& v = snap.fundamental.voltages;
    const double floor = options_.power_flow.voltage_floor;

    struct LoadState {
        bool active = false;
        RlShunt shunt;
        Complex i1;
    };
    std::vector<LoadState> loads(devices_.loads.size());
    for (std::size_t i = 0; i < devices_.loads.size(); ++i) {
        const Complex s = load_s[i];
        if (s == Complex{}) continue;
        loads[i].active = true;
        loads[i].shunt = fit_load_admittance(s.real(), s.imag(), 1.0, devices_.loads[i].series_fraction);
        loads[i].i1 = nodal_current(s.real(), s.imag(), v[load_bus_[i]], floor);
    }

    struct DerState {
        bool active = false;
        std::size_t bus = 0;
        Complex z1;
        DerTerminal terminal;
        const HarmonicSpectrum* spectrum = nullptr;
    };
    std::vector<DerState> ders;
    for (std::size_t i = 0; i < devices_.pvs.size(); ++i) {
        const auto& p = devices_.pvs[i];
        DerState d{true, pv_bus_[i], series_impedance_pu(model, pv_bus_[i], p.series_r, p.series_x),
                   {}, pv_spectra_[i]};
        d.terminal.voltage = v[d.bus];
        d.terminal.current_out = std::conj(Complex{pv_p[i], 0.0} / v[d.bus]);
        ders.push_back(d);
    }
    for (std::size_t i = 0; i < devices_.evs.size(); ++i) {
        if (op.ev_power[i] <= 0.0) continue;
        const auto& e = devices_.evs[i];
        DerState d{true, ev_bus_[i], series_impedance_pu(model, ev_bus_[i], e.series_r, e.series_x),
                   {}, ev_spectra_[i]};
        d.terminal.voltage = v[d.bus];
        d.terminal.current_out = -std::conj(Complex{op.ev_power[i] / sb, 0.0} / v[d.bus]);
        ders.push_back(d);
    }

    snap.harmonics.reserve(orders_.size());
    std::vector<NodalInjection> injections;
    std::vector<BusShunt> shunts;
    for (std::size_t oi = 0; oi < orders_.size(); ++oi) {
        const int k = orders_[oi];
        injections.clear();
        shunts.clear();
        for (std::size_t i = 0; i < loads.size(); ++i) {
            if (!loads[i].active) continue;
            shunts.push_back({load_bus_[i], loads[i].shunt.admittance(k)});
            const auto* spec = load_spectra_[i];
            if (spec != nullptr && spec->find(k) != nullptr) {
                injections.push_back({load_bus_[i], injection_from_spectrum(*spec, loads[i].i1, theta, k,
                                                                            options_.injection)});
            }
        }
        for (const auto& d : ders) {
            const Complex zk{d.z1.real(), k * d.z1.imag()};
            shunts.push_back({d.bus, 1.0 / zk});
            if (d.spectrum != nullptr && d.spectrum->find(k) != nullptr) {
                const auto src = der_harmonic_source(*d.spectrum, d.z1, d.terminal, k, theta);
                injections.push_back({d.bus, src.voltage / src.series_impedance});
            }
        }
        snap.harmonics.push_back(systems_[oi].solve(injections, shunts));
    }
    return snap;
}

HarmonicSet bus_voltage_set(const Snapshot& snapshot, std::size_t bus, std::span<const int> orders) {
    if (snapshot.harmonics.size() != orders.size()) {
        throw Error(ErrorKind::InternalInvariant, "snapshot does not match the order list");
    }
    HarmonicSet set{std::abs(snapshot.fundamental.voltages.at(bus)), {}};
    set.components.reserve(orders.size());
    for (std::size_t o = 0; o < orders.size(); ++o) {
        set.components.push_back({static_cast<double>(orders[o]), std::abs(snapshot.harmonics[o].voltages.at(bus))});
    }
    return set;
}

HarmonicSet transformer_current_set(const NetworkModel& model, std::size_t transformer,
                                    const Snapshot& snapshot, std::span<const int> orders) {
    if (snapshot.harmonics.size() != orders.size()) {
        throw Error(ErrorKind::InternalInvariant, "snapshot does not match the order list");
    }
    const auto f = model.transformer_from(transformer);
    const auto t = model.transformer_to(transformer);
    const double rated = model.transformer_rated_current(transformer);
    auto current = [&](double h, const std::vector<Complex>& v) {
        const auto s = model.transformer_stamp(transformer, h);
        return std::abs(s.ff * v[f] + s.ft * v[t]) / rated;
    };
    HarmonicSet set{current(1.0, snapshot.fundamental.voltages), {}};
    for (std::size_t o = 0; o < orders.size(); ++o) {
        const double h = orders[o];
        set.components.push_back({h, current(h, snapshot.harmonics[o].voltages)});
    }
    return set;
}

StepError::StepError(const Error& cause, int step, std::vector<double> trace)
    : Error(cause.kind(), "step " + std::to_string(step) + ": " + cause.what()),
      step_(step),
      trace_(std::move(trace)) {}

void validate_devices(const NetworkModel& model, const DeviceSet& devices,
                      const ResourceSet& resources, const QstsOptions& options) {
    std::vector<std::string> problems;
    const double horizon = options.steps * options.dt;
    if (options.steps < 1) problems.push_back("steps must be >= 1");
    if (!(options.dt > 0.0)) problems.push_back("dt must be > 0");

    auto bus_ok = [&](const std::string& owner, const std::string& bus) {
        if (!model.find_bus(bus)) problems.push_back(owner + ": unknown bus '" + bus + "'");
    };
    auto spectrum_ok = [&](const std::string& owner, const std::string& name) {
        if (!name.empty() && !resources.spectra.count(name)) {
            problems.push_back(owner + ": unknown spectrum '" + name + "'");
        }
    };
    auto profile_ok = [&](const std::string& owner, const std::string& name, bool unit_range) {
        if (name.empty()) return;
        const auto* p = lookup_profile(resources, name);
        if (p == nullptr) {
            problems.push_back(owner + ": unknown profile '" + name + "'");
            return;
        }
        if (p->coverage_s() + 1e-9 < horizon) {
            std::ostringstream msg;
            msg << owner << ": profile '" << name << "' covers " << p->coverage_s()
                << " s, horizon is " << horizon << " s";
            problems.push_back(msg.str());
        }
        for (double x : p->values) {
            if (!std::isfinite(x) || x < 0.0 || (unit_range && x > 1.0)) {
                problems.push_back(owner + ": profile '" + name + "' has values outside " +
                                   (unit_range ? "[0, 1]" : "[0, inf)"));
                break;
            }
        }
    };

    for (const auto& l : devices.loads) {
        const auto owner = "load " + l.name;
        bus_ok(owner, l.bus);
        if (!std::isfinite(l.p_rated) || !std::isfinite(l.q_rated) || l.p_rated < 0.0) {
            problems.push_back(owner + ": p_rated must be finite and >= 0");
        }
        if (!(l.series_fraction >= 0.0 && l.series_fraction <= 1.0)) {
            problems.push_back(owner + ": series_fraction must lie in [0, 1]");
        }
        spectrum_ok(owner, l.spectrum);
        profile_ok(owner, l.profile, false);
    }
    for (const auto& p : devices.pvs) {
        const auto owner = "pv " + p.name;
        bus_ok(owner, p.bus);
        if (!(p.s_rating > 0.0)) problems.push_back(owner + ": s_rating must be > 0");
        if (p.power_factor != 1.0) problems.push_back(owner + ": only unity power factor is supported");
        if (p.series_r < 0.0 || p.series_x < 0.0 || (p.series_r == 0.0 && p.series_x == 0.0)) {
            problems.push_back(owner + ": series impedance must be nonzero and non-negative");
        }
        spectrum_ok(owner, p.spectrum);
        profile_ok(owner, p.profile, true);
    }
    for (const auto& e : devices.evs) {
        const auto owner = "ev " + e.name;
        bus_ok(owner, e.bus);
        if (!(0.0 <= e.soc_min && e.soc_min <= e.soc_target && e.soc_target <= e.soc_max &&
              e.soc_max <= 1.0)) {
            problems.push_back(owner + ": require 0 <= soc_min <= soc_target <= soc_max <= 1");
        }
        if (!(e.eta_inv > 0.0 && e.eta_inv <= 1.0 && e.eta_ch > 0.0 && e.eta_ch <= 1.0)) {
            problems.push_back(owner + ": efficiencies must lie in (0, 1]");
        }
        if (!(e.capacity > 0.0)) problems.push_back(owner + ": capacity must be > 0");
        if (!(e.charge_power >= 0.0) || !(e.p_idle >= 0.0)) {
            problems.push_back(owner + ": charge_power and p_idle must be >= 0");
        }
        if (e.series_r < 0.0 || e.series_x < 0.0 || (e.series_r == 0.0 && e.series_x == 0.0)) {
            problems.push_back(owner + ": series impedance must be nonzero and non-negative");
        }
        spectrum_ok(owner, e.spectrum);
        profile_ok(owner, e.availability_profile, true);
    }
    for (const auto& m : options.monitors) bus_ok("monitor", m);
    for (int k : options.harmonic_orders) {
        if (k < 2) problems.push_back("harmonic orders must be >= 2");
    }
    if (!problems.empty()) {
        std::ostringstream msg;
        msg << problems.size() << " device/resource problem(s):";
        for (const auto& p : problems) msg << "\n  " << p;
        throw Error(ErrorKind::InvalidInput, msg.str());
    }
}

OperatingPoint profile_point(const DeviceSet& devices, const ResourceSet& resources, double t) {
    OperatingPoint op;
    for (const auto& l : devices.loads) op.load_scale.push_back(profile_value(resources, l.profile, t));
    for (const auto& p : devices.pvs) op.pv_output.push_back(profile_value(resources, p.profile, t));
    op.ev_power.assign(devices.evs.size(), 0.0);
    return op;
}

QstsResult run_qsts(const NetworkModel& model, const DeviceSet& devices,
                    const ResourceSet& resources, const QstsOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    validate_devices(model, devices, resources, options);
    auto orders = options.harmonic_orders.empty() ? default_harmonic_orders(devices, resources)
                                                  : options.harmonic_orders;
    HarmonicPipeline pipeline(model, devices, resources, std::move(orders), options);

    QstsResult result;
    result.orders = pipeline.orders();
    result.steps = options.steps;
    result.dt = options.dt;

    std::vector<std::size_t> monitor_idx;
    if (options.monitors.empty()) {
        for (std::size_t i = 0; i < model.bus_count(); ++i) monitor_idx.push_back(i);
    } else {
        for (const auto& m : options.monitors) monitor_idx.push_back(model.index_of(m));
    }
    for (auto idx : monitor_idx) {
        MonitorSeries ms;
        ms.bus = model.bus_id(idx);
        ms.voltages.reserve(static_cast<std::size_t>(options.steps));
        ms.thd_pct.reserve(static_cast<std::size_t>(options.steps));
        result.monitors.push_back(std::move(ms));
    }
    const auto& xfmrs = model.network().transformers;
    for (const auto& t : xfmrs) result.transformers.push_back({t.name, {}, {}});
    for (const auto& e : devices.evs) result.evs.push_back({e.name, {}, {}, {}});

    std::vector<EvState> ev_state;
    for (const auto& e : devices.evs) ev_state.push_back(initial_ev_state(e));

    const std::size_t n_orders = result.orders.size();
    for (int step = 0; step < options.steps; ++step) {
        const double t = step * options.dt;
        Snapshot snap;
        try {
            auto op = profile_point(devices, resources, t);
            for (std::size_t e = 0; e < devices.evs.size(); ++e) {
                const auto& ev = devices.evs[e];
                const double p_available =
                    profile_value(resources, ev.availability_profile, t) * ev.charge_power;
                op.ev_power[e] = ev_grid_demand(ev, ev_state[e], p_available);
                ev_state[e] = ev_step(ev, ev_state[e], p_available, options.dt);
                result.evs[e].soc.push_back(ev_state[e].soc);
                result.evs[e].charging.push_back(ev_state[e].charging);
                result.evs[e].power_w.push_back(op.ev_power[e]);
            }
            snap = pipeline.solve(op);
        } catch (const ConvergenceError& e) {
            throw StepError(e, step, e.trace());
        } catch (const StepError&) {
            throw;
        } catch (const Error& e) {
            throw StepError(e, step);
        }

        result.max_power_flow_iterations =
            std::max(result.max_power_flow_iterations, snap.fundamental.iterations);
        for (const auto& h : snap.harmonics) result.max_residual = std::max(result.max_residual, h.residual);

        for (std::size_t m = 0; m < monitor_idx.size(); ++m) {
            const auto b = monitor_idx[m];
            std::vector<Complex> volts(n_orders + 1);
            volts[0] = snap.fundamental.voltages[b];
            for (std::size_t o = 0; o < n_orders; ++o) volts[o + 1] = snap.harmonics[o].voltages[b];
            result.monitors[m].thd_pct.push_back(thd(bus_voltage_set(snap, b, result.orders)));
            result.monitors[m].voltages.push_back(std::move(volts));
        }
        for (std::size_t j = 0; j < xfmrs.size(); ++j) {
            const auto set = transformer_current_set(model, j, snap, result.orders);
            result.transformers[j].eddy_total.push_back(eddy_current_loss(set, options.eddy_factor));
            result.transformers[j].eddy_harmonic.push_back(eddy_harmonic_component(set, options.eddy_factor));
        }
    }
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::vector<std::string> path_to_slack(const NetworkModel& model, const std::string& bus) {
    const std::size_t n = model.bus_count();
    std::vector<std::vector<std::size_t>> adj(n);
    const auto& net = model.network();
    for (std::size_t j = 0; j < net.branches.size(); ++j) {
        adj[model.branch_from(j)].push_back(model.branch_to(j));
        adj[model.branch_to(j)].push_back(model.branch_from(j));
    }
    for (std::size_t j = 0; j < net.transformers.size(); ++j) {
        adj[model.transformer_from(j)].push_back(model.transformer_to(j));
        adj[model.transformer_to(j)].push_back(model.transformer_from(j));
    }
    constexpr auto none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent(n, none);
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(NetworkModel::slack_index());
    seen[NetworkModel::slack_index()] = true;
    while (!q.empty()) {
        const auto cur = q.front();
        q.pop();
        for (auto nb : adj[cur]) {
            if (!seen[nb]) {
                seen[nb] = true;
                parent[nb] = cur;
                q.push(nb);
            }
        }
    }
    std::vector<std::string> path;
    for (auto cur = model.index_of(bus); cur != none; cur = parent[cur]) path.push_back(model.bus_id(cur));
    return path;
}

PropagationResult thd_propagation(const NetworkModel& model, const DeviceSet& base_devices,
                                  const ResourceSet& resources,
                                  const NortonLoadModel& nonlinear_template,
                                  std::span<const std::string> placement_buses,
                                  const PropagationOptions& options) {
    PropagationResult out;
    out.placements.assign(placement_buses.begin(), placement_buses.end());
    out.threshold_pct = options.threshold_pct;
    out.substation_bus = options.substation_bus.empty() ? model.bus_id(NetworkModel::slack_index())
                                                        : model.bus_id(model.index_of(options.substation_bus));
    for (const auto& b : out.placements) model.index_of(b);

    out.monitors = options.qsts.monitors;
    if (out.monitors.empty()) out.monitors = model.bus_order();
    if (std::find(out.monitors.begin(), out.monitors.end(), out.substation_bus) == out.monitors.end()) {
        out.monitors.insert(out.monitors.begin(), out.substation_bus);
    }

    DeviceSet base = base_devices;
    if (options.linear_base) {
        for (auto& l : base.loads) l.spectrum.clear();
        for (auto& p : base.pvs) p.spectrum.clear();
        for (auto& e : base.evs) e.spectrum.clear();
    }

    QstsOptions qopt = options.qsts;
    qopt.monitors = out.monitors;
    if (qopt.harmonic_orders.empty()) {
        DeviceSet probe = base;
        probe.loads.push_back(nonlinear_template);
        qopt.harmonic_orders = default_harmonic_orders(probe, resources);
    }

    const std::size_t stages = out.placements.size() + 1;
    auto run_stage = [&](std::size_t s) {
        DeviceSet devs = base;
        for (std::size_t i = 0; i < s; ++i) {
            NortonLoadModel l = nonlinear_template;
            l.bus = out.placements[i];
            l.name = "nonlinear-" + std::to_string(i + 1) + "@" + l.bus;
            devs.loads.push_back(std::move(l));
        }
        return run_qsts(model, devs, resources, qopt);
    };

    std::vector<std::optional<QstsResult>> results(stages);
    std::vector<std::string> errors(stages);
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    bool failed = false;
    for (std::size_t begin = 0; begin < stages && !failed; begin += workers) {
        const std::size_t end = std::min(stages, begin + workers);
        if (workers == 1) {
            try {
                results[begin] = run_stage(begin);
            } catch (const Error& e) {
                errors[begin] = e.what();
                failed = true;
            }
            continue;
        }
        std::vector<std::future<QstsResult>> batch;
        for (std::size_t s = begin; s < end; ++s) batch.push_back(std::async(std::launch::async, run_stage, s));
        for (std::size_t s = begin; s < end; ++s) {
            try {
                results[s] = batch[s - begin].get();
            } catch (const Error& e) {
                errors[s] = e.what();
                failed = true;
            }
        }
    }

    for (std::size_t s = 0; s < stages; ++s) {
        if (!results[s]) {
            out.failure = "stage " + std::to_string(s) + ": " + errors[s];
            break;
        }
        std::vector<double> peaks;
        for (const auto& m : results[s]->monitors) {
            peaks.push_back(*std::max_element(m.thd_pct.begin(), m.thd_pct.end()));
        }
        out.max_residual = std::max(out.max_residual, results[s]->max_residual);
        const auto sub = static_cast<std::size_t>(
            std::find(out.monitors.begin(), out.monitors.end(), out.substation_bus) - out.monitors.begin());
        if (!out.first_stage_over_threshold && peaks[sub] > options.threshold_pct) {
            out.first_stage_over_threshold = static_cast<int>(s);
        }
        out.peak_thd.push_back(std::move(peaks));
        out.completed_stages = static_cast<int>(s) + 1;
    }
    return out;
}

}  // namespace hflow
