#include "hflow/cli.hpp"

#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "hflow/csv.hpp"
#include "hflow/errors.hpp"
#include "hflow/feeder_io.hpp"
#include "hflow/harmonics.hpp"
#include "hflow/metrics.hpp"
#include "hflow/qsts.hpp"

namespace hflow::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct CommonOptions {
    std::string feeder;
    std::string resources;
    std::string out = ".";
};

struct Session {
    Feeder feeder;
    std::unique_ptr<NetworkModel> model;
    ResourceSet resources;
    std::string feeder_hash;
};

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::InternalInvariant, "SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

// Numbers pass through the same 9-digit formatting as the CSV files.
Json num(double x) { return Json(std::stod(format_number(x))); }

Json summary_json(const SeriesSummary& s) {
    return Json{{"min", num(s.min)},       {"q1", num(s.q1)},   {"median", num(s.median)},
                {"q3", num(s.q3)},         {"max", num(s.max)}, {"mean", num(s.mean)}};
}

std::string summary_row(const std::string& metric, const SeriesSummary& s) {
    return metric + "," + format_number(s.min) + "," + format_number(s.q1) + "," + format_number(s.median) + "," +
           format_number(s.q3) + "," + format_number(s.max) + "," + format_number(s.mean) + "\n";
}

std::string safe_name(const std::string& id) {
    std::string out = id;
    for (auto& c : out) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const auto a = item.find_first_not_of(' ');
        const auto b = item.find_last_not_of(' ');
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

std::vector<int> parse_orders(const std::string& text) {
    std::vector<int> orders;
    for (const auto& s : split_list(text)) {
        std::size_t used = 0;
        int k = 0;
        try {
            k = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || k < 2) {
            throw Error(ErrorKind::InvalidInput, "--orders: '" + s + "' is not an integer order >= 2");
        }
        orders.push_back(k);
    }
    if (orders.empty()) throw Error(ErrorKind::InvalidInput, "--orders is empty");
    return orders;
}

Session open_session(const CommonOptions& opts, bool with_resources) {
    if (opts.feeder.empty()) throw Error(ErrorKind::InvalidInput, "--feeder is required");
    Session s;
    const fs::path feeder_path(opts.feeder);
    const auto text = read_text_file(feeder_path);
    s.feeder_hash = sha256_hex(text);
    s.feeder = parse_feeder(text, feeder_path.string());
    s.model = std::make_unique<NetworkModel>(s.feeder.network);
    if (with_resources) {
        const fs::path dir = opts.resources.empty() ? feeder_path.parent_path() : fs::path(opts.resources);
        s.resources = load_resources(s.feeder.devices, dir);
    }
    return s;
}

fs::path prepare_out(const CommonOptions& opts) {
    const fs::path out(opts.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw Error(ErrorKind::InvalidInput, "cannot create output directory " + opts.out);
    return out;
}

Json base_summary(const std::string& command, const Session& s, const CommonOptions& opts) {
    return Json{{"command", command},
                {"feeder", fs::path(opts.feeder).filename().string()},
                {"feeder_sha256", s.feeder_hash},
                {"base_frequency_hz", num(s.model->base_frequency())},
                {"base_mva", num(s.model->base_power() / 1e6)}};
}

DeviceSet strip_spectra(DeviceSet d) {
    for (auto& l : d.loads) l.spectrum.clear();
    for (auto& p : d.pvs) p.spectrum.clear();
    for (auto& e : d.evs) e.spectrum.clear();
    return d;
}

// ---------------------------------------------------------------- scan

struct ScanOptions {
    std::string bus;
    double fmin = 60.0;
    double fmax = 3000.0;
    double step = 10.0;
    bool with_devices = false;
};

int cmd_scan(const CommonOptions& common, const ScanOptions& o, std::ostream& out, std::ostream& err) {
    auto s = open_session(common, false);
    s.model->index_of(o.bus);
    std::vector<DeviceShunt> shunts;
    if (o.with_devices) {
        HarmonicPipeline pipe(*s.model, strip_spectra(s.feeder.devices), {}, {});
        shunts = pipe.nominal_shunts();
    }
    const auto curve = frequency_scan(*s.model, o.bus, o.fmin, o.fmax, o.step, shunts);
    const auto dir = prepare_out(common);

    std::string csv = "frequency_hz,z_real_ohm,z_imag_ohm,z_mag_ohm\n";
    for (const auto& p : curve.points) {
        csv += format_number(p.frequency_hz) + "," + format_number(p.impedance_ohm.real()) + "," +
               format_number(p.impedance_ohm.imag()) + "," + format_number(std::abs(p.impedance_ohm)) + "\n";
    }
    const auto file = dir / ("scan_" + safe_name(o.bus) + ".csv");
    write_text_file(file, csv);

    if (const auto peak = peak_frequency(curve)) {
        out << "scan " << o.bus << ": " << curve.points.size() << " points, peak at " << format_number(*peak)
            << " Hz (order " << format_number(*peak / s.model->base_frequency()) << ")\n";
    }
    if (!curve.failures.empty()) {
        for (const auto& f : curve.failures) {
            err << "scan point " << format_number(f.frequency_hz) << " Hz failed: " << f.message << "\n";
        }
        return kNumericalError;
    }
    return kOk;
}

// ---------------------------------------------------------------- solve

int cmd_solve(const CommonOptions& common, const std::string& orders_text, std::ostream& out) {
    auto s = open_session(common, true);
    QstsOptions qopt;
    qopt.steps = 1;
    validate_devices(*s.model, s.feeder.devices, s.resources, qopt);
    const auto orders = orders_text.empty() ? default_harmonic_orders(s.feeder.devices, s.resources)
                                            : parse_orders(orders_text);
    HarmonicPipeline pipe(*s.model, s.feeder.devices, s.resources, orders, qopt);
    const auto snap = pipe.solve(pipe.nominal_point());
    const auto& model = *s.model;
    const auto dir = prepare_out(common);

    std::string csv = "bus,order,v_real_pu,v_imag_pu,v_mag_pu\n";
    auto row = [&](std::size_t b, int k, Complex v) {
        csv += model.bus_id(b) + "," + std::to_string(k) + "," + format_number(v.real()) + "," +
               format_number(v.imag()) + "," + format_number(std::abs(v)) + "\n";
    };
    for (std::size_t b = 0; b < model.bus_count(); ++b) {
        row(b, 1, snap.fundamental.voltages[b]);
        for (std::size_t o = 0; o < pipe.orders().size(); ++o) row(b, pipe.orders()[o], snap.harmonics[o].voltages[b]);
    }
    write_text_file(dir / "harmonic_voltages.csv", csv);

    auto summary = base_summary("solve", s, common);
    summary["orders"] = pipe.orders();
    summary["power_flow"] = {{"iterations", snap.fundamental.iterations},
                             {"max_mismatch_pu", num(snap.fundamental.max_mismatch)}};
    double max_residual = 0.0;
    for (const auto& h : snap.harmonics) max_residual = std::max(max_residual, h.residual);
    summary["max_residual_pu"] = num(max_residual);
    Json buses = Json::array();
    for (std::size_t b = 0; b < model.bus_count(); ++b) {
        buses.push_back({{"bus", model.bus_id(b)},
                         {"v1_pu", num(std::abs(snap.fundamental.voltages[b]))},
                         {"thd_pct", num(thd(bus_voltage_set(snap, b, pipe.orders())))}});
    }
    summary["buses"] = buses;
    Json xfmrs = Json::array();
    for (std::size_t j = 0; j < model.network().transformers.size(); ++j) {
        const auto set = transformer_current_set(model, j, snap, pipe.orders());
        xfmrs.push_back({{"name", model.network().transformers[j].name},
                         {"i1_pu", num(set.fundamental)},
                         {"eddy_total_pu", num(eddy_current_loss(set))},
                         {"eddy_harmonic_pu", num(eddy_harmonic_component(set))}});
    }
    summary["transformers"] = xfmrs;
    write_text_file(dir / "solve_summary.json", summary.dump(2) + "\n");

    double worst = 0.0;
    std::string worst_bus;
    for (std::size_t b = 0; b < model.bus_count(); ++b) {
        const double t = thd(bus_voltage_set(snap, b, pipe.orders()));
        if (t >= worst) {
            worst = t;
            worst_bus = model.bus_id(b);
        }
    }
    out << "solve: " << pipe.orders().size() << " orders, max THD " << format_number(worst) << " % at "
        << worst_bus << "\n";
    return kOk;
}

// ---------------------------------------------------------------- qsts

struct QstsCliOptions {
    int steps = 1440;
    double dt = 60.0;
    std::string orders;
    std::string monitors;
};

QstsOptions make_qsts_options(const QstsCliOptions& o) {
    QstsOptions q;
    q.steps = o.steps;
    q.dt = o.dt;
    if (!o.orders.empty()) q.harmonic_orders = parse_orders(o.orders);
    q.monitors = split_list(o.monitors);
    return q;
}

Json qsts_options_json(const QstsOptions& q, const std::vector<int>& orders) {
    return Json{{"steps", q.steps},
                {"dt_s", num(q.dt)},
                {"orders", orders},
                {"tolerance", num(q.power_flow.tolerance)},
                {"max_iterations", q.power_flow.max_iterations},
                {"voltage_floor_pu", num(q.power_flow.voltage_floor)},
                {"eddy_factor", num(q.eddy_factor)}};
}

int cmd_qsts(const CommonOptions& common, const QstsCliOptions& o, std::ostream& out) {
    auto s = open_session(common, true);
    const auto qopt = make_qsts_options(o);
    const auto result = run_qsts(*s.model, s.feeder.devices, s.resources, qopt);
    const auto dir = prepare_out(common);

    auto time_of = [&](int step) { return format_number(step * result.dt); };
    for (const auto& m : result.monitors) {
        std::string csv = "step,time_s,v1_pu,thd_pct";
        for (int k : result.orders) csv += ",h" + std::to_string(k) + "_pu";
        csv += "\n";
        for (int step = 0; step < result.steps; ++step) {
            const auto& v = m.voltages[static_cast<std::size_t>(step)];
            csv += std::to_string(step) + "," + time_of(step) + "," + format_number(std::abs(v[0])) + "," +
                   format_number(m.thd_pct[static_cast<std::size_t>(step)]);
            for (std::size_t i = 1; i < v.size(); ++i) csv += "," + format_number(std::abs(v[i]));
            csv += "\n";
        }
        write_text_file(dir / ("monitor_" + safe_name(m.bus) + ".csv"), csv);
    }
    if (!result.transformers.empty()) {
        std::string csv = "step,time_s";
        for (const auto& t : result.transformers) csv += "," + t.name + "_eddy_total_pu," + t.name + "_eddy_harmonic_pu";
        csv += "\n";
        for (int step = 0; step < result.steps; ++step) {
            const auto i = static_cast<std::size_t>(step);
            csv += std::to_string(step) + "," + time_of(step);
            for (const auto& t : result.transformers) {
                csv += "," + format_number(t.eddy_total[i]) + "," + format_number(t.eddy_harmonic[i]);
            }
            csv += "\n";
        }
        write_text_file(dir / "transformer_eddy.csv", csv);
    }
    if (!result.evs.empty()) {
        std::string csv = "step,time_s";
        for (const auto& e : result.evs) csv += "," + e.name + "_soc," + e.name + "_charging," + e.name + "_power_w";
        csv += "\n";
        for (int step = 0; step < result.steps; ++step) {
            const auto i = static_cast<std::size_t>(step);
            csv += std::to_string(step) + "," + time_of(step);
            for (const auto& e : result.evs) {
                csv += "," + format_number(e.soc[i]) + "," + (e.charging[i] ? "1" : "0") + "," +
                       format_number(e.power_w[i]);
            }
            csv += "\n";
        }
        write_text_file(dir / "ev_soc.csv", csv);
    }

    std::string box = "metric,min,q1,median,q3,max,mean\n";
    auto summary = base_summary("qsts", s, common);
    summary["options"] = qsts_options_json(qopt, result.orders);
    Json monitors = Json::object();
    Json over = Json::object();
    for (const auto& m : result.monitors) {
        const auto st = summarize(m.thd_pct);
        box += summary_row("thd_pct@" + m.bus, st);
        monitors[m.bus] = {{"thd_pct", summary_json(st)}};
        over[m.bus] = st.max > 5.0;
    }
    Json xfmrs = Json::object();
    for (const auto& t : result.transformers) {
        const auto total = summarize(t.eddy_total);
        const auto harm = summarize(t.eddy_harmonic);
        box += summary_row("eddy_total_pu@" + t.name, total);
        box += summary_row("eddy_harmonic_pu@" + t.name, harm);
        xfmrs[t.name] = {{"eddy_total_pu", summary_json(total)}, {"eddy_harmonic_pu", summary_json(harm)}};
    }
    Json evs = Json::object();
    for (const auto& e : result.evs) {
        const auto st = summarize(e.soc);
        box += summary_row("soc@" + e.name, st);
        int stop = -1;
        for (std::size_t i = 1; i < e.charging.size(); ++i) {
            if (e.charging[i - 1] && !e.charging[i]) {
                stop = static_cast<int>(i);
                break;
            }
        }
        evs[e.name] = {{"soc", summary_json(st)}, {"charging_stopped_step", stop < 0 ? Json() : Json(stop)}};
    }
    write_text_file(dir / "boxplot.csv", box);
    summary["monitors"] = monitors;
    summary["transformers"] = xfmrs;
    summary["evs"] = evs;
    summary["flags"] = {{"thd_above_5pct", over},
                        {"max_power_flow_iterations", result.max_power_flow_iterations},
                        {"max_residual_pu", num(result.max_residual)}};
    write_text_file(dir / "qsts_summary.json", summary.dump(2) + "\n");

    out << "qsts: " << result.steps << " steps x " << result.orders.size() << " orders, "
        << result.monitors.size() << " monitors\n";
    return kOk;
}

// ---------------------------------------------------------------- propagate

struct PropagateCliOptions {
    QstsCliOptions qsts;
    std::string placements;
    double template_kw = 10.0;
    double template_kvar = 2.0;
    double template_mix = 0.5;
    std::string template_spectrum;
    std::string template_profile;
    double threshold = 5.0;
    std::string substation;
};

int cmd_propagate(const CommonOptions& common, const PropagateCliOptions& o, std::ostream& out,
                  std::ostream& err) {
    auto s = open_session(common, true);
    const auto placements = split_list(o.placements);
    if (placements.empty()) throw Error(ErrorKind::InvalidInput, "--placements is empty");
    for (const auto& b : placements) s.model->index_of(b);
    if (o.template_spectrum.empty()) throw Error(ErrorKind::InvalidInput, "--template-spectrum is required");
    const fs::path res_dir = common.resources.empty() ? fs::path(common.feeder).parent_path() : fs::path(common.resources);
    add_spectrum(s.resources, res_dir, o.template_spectrum, SpectrumKind::Current);
    add_profile(s.resources, res_dir, o.template_profile);

    NortonLoadModel tmpl;
    tmpl.name = "nonlinear";
    tmpl.bus = placements.front();
    tmpl.p_rated = o.template_kw * 1e3;
    tmpl.q_rated = o.template_kvar * 1e3;
    tmpl.series_fraction = o.template_mix;
    tmpl.spectrum = o.template_spectrum;
    tmpl.profile = o.template_profile;

    PropagationOptions popt;
    popt.qsts = make_qsts_options(o.qsts);
    popt.threshold_pct = o.threshold;
    popt.substation_bus = o.substation;
    const auto result = thd_propagation(*s.model, s.feeder.devices, s.resources, tmpl, placements, popt);
    const auto dir = prepare_out(common);

    std::string csv = "stage,bus,peak_thd_pct\n";
    for (std::size_t st = 0; st < result.peak_thd.size(); ++st) {
        for (std::size_t m = 0; m < result.monitors.size(); ++m) {
            csv += std::to_string(st) + "," + result.monitors[m] + "," + format_number(result.peak_thd[st][m]) + "\n";
        }
    }
    write_text_file(dir / "propagation.csv", csv);

    auto summary = base_summary("propagate", s, common);
    Json orders = popt.qsts.harmonic_orders;
    if (popt.qsts.harmonic_orders.empty()) {
        DeviceSet probe = s.feeder.devices;
        probe.loads.push_back(tmpl);
        orders = default_harmonic_orders(probe, s.resources);
    }
    summary["options"] = qsts_options_json(popt.qsts, orders.get<std::vector<int>>());
    summary["template"] = {{"kw", num(o.template_kw)},
                           {"kvar", num(o.template_kvar)},
                           {"series_parallel_mix", num(o.template_mix)},
                           {"spectrum", o.template_spectrum},
                           {"profile", o.template_profile}};
    summary["placements"] = result.placements;
    summary["substation_bus"] = result.substation_bus;
    const auto sub = static_cast<std::size_t>(
        std::find(result.monitors.begin(), result.monitors.end(), result.substation_bus) - result.monitors.begin());
    Json sub_peaks = Json::array();
    for (const auto& row : result.peak_thd) sub_peaks.push_back(num(row[sub]));
    summary["substation_peak_thd_pct"] = sub_peaks;
    summary["threshold_pct"] = num(result.threshold_pct);
    summary["first_stage_over_threshold"] =
        result.first_stage_over_threshold ? Json(*result.first_stage_over_threshold) : Json();
    summary["completed_stages"] = result.completed_stages;
    summary["failure"] = result.failure ? Json(*result.failure) : Json();
    summary["max_residual_pu"] = num(result.max_residual);
    write_text_file(dir / "propagation_summary.json", summary.dump(2) + "\n");

    out << "propagate: " << result.completed_stages << " of " << placements.size() + 1 << " stages, ";
    if (result.first_stage_over_threshold) {
        out << "substation peak THD first exceeds " << format_number(result.threshold_pct) << " % at stage "
            << *result.first_stage_over_threshold << "\n";
    } else {
        out << "substation peak THD stays at or below " << format_number(result.threshold_pct) << " %\n";
    }
    if (result.failure) {
        err << *result.failure << "\n";
        return kNumericalError;
    }
    return kOk;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumCliOptions {
    std::string waveform;
    double f0 = 60.0;
    int cycles = 12;
    int max_order = 50;
    std::string quantity = "current";
};

int cmd_spectrum(const CommonOptions& common, const SpectrumCliOptions& o, std::ostream& out) {
    if (o.waveform.empty()) throw Error(ErrorKind::InvalidInput, "--waveform is required");
    const auto q = o.quantity == "voltage" ? Quantity::Voltage : Quantity::Current;
    const auto record = load_waveform_csv(o.waveform, q);
    ExtractionOptions eo;
    eo.f0 = o.f0;
    eo.n_cycles = o.cycles;
    eo.max_order = o.max_order;
    const auto spec = extract_spectrum(record, eo);
    const auto dir = prepare_out(common);
    const auto stem = fs::path(o.waveform).stem().string();
    write_text_file(dir / (safe_name(stem) + "_spectrum.csv"), spectrum_csv(spec));
    out << "spectrum: " << spec.entries().size() << " orders from " << record.samples.size() << " samples, "
        << "bin frequency error " << format_number(frequency_error_ppm(record.sample_rate, o.f0, o.cycles))
        << " ppm\n";
    return kOk;
}

int exit_code_for(const Error& e) {
    switch (classify(e.kind())) {
        case FailureClass::Input: return kInputError;
        case FailureClass::Numerical: return kNumericalError;
        case FailureClass::Internal: return kInternalError;
    }
    return kInternalError;
}

void print_trace(std::ostream& err, const std::vector<double>& trace) {
    if (trace.empty()) return;
    err << "iteration trace (max voltage update, pu):\n";
    for (std::size_t i = 0; i < trace.size(); ++i) err << "  " << i + 1 << ": " << format_number(trace[i]) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quasi-static time-series harmonic power flow", "hflow"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub, bool feeder_required) {
        auto* f = sub->add_option("--feeder", common.feeder, "Feeder JSON file");
        if (feeder_required) f->required();
        sub->add_option("--resources", common.resources, "Resource directory (default: feeder directory)");
        sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    };

    ScanOptions scan;
    auto* scan_cmd = app.add_subcommand("scan", "Driving-point impedance scan at one bus");
    add_common(scan_cmd, true);
    scan_cmd->add_option("--bus", scan.bus, "Bus to scan")->required();
    scan_cmd->add_option("--fmin", scan.fmin, "Start frequency, Hz")->capture_default_str();
    scan_cmd->add_option("--fmax", scan.fmax, "Stop frequency, Hz")->capture_default_str();
    scan_cmd->add_option("--step", scan.step, "Frequency step, Hz")->capture_default_str();
    scan_cmd->add_flag("--with-devices", scan.with_devices, "Include nominal load and DER admittances");

    std::string solve_orders;
    auto* solve_cmd = app.add_subcommand("solve", "Static harmonic solution at the nominal operating point");
    add_common(solve_cmd, true);
    solve_cmd->add_option("--orders", solve_orders, "Comma-separated harmonic orders");

    QstsCliOptions qsts;
    auto* qsts_cmd = app.add_subcommand("qsts", "Time-series harmonic simulation");
    add_common(qsts_cmd, true);
    qsts_cmd->add_option("--steps", qsts.steps, "Number of steps")->capture_default_str();
    qsts_cmd->add_option("--dt", qsts.dt, "Step length, s")->capture_default_str();
    qsts_cmd->add_option("--orders", qsts.orders, "Comma-separated harmonic orders");
    qsts_cmd->add_option("--monitors", qsts.monitors, "Comma-separated monitor buses (default: all)");

    PropagateCliOptions prop;
    auto* prop_cmd = app.add_subcommand("propagate", "Sequential nonlinear-load placement experiment");
    add_common(prop_cmd, true);
    prop_cmd->add_option("--placements", prop.placements, "Comma-separated placement buses")->required();
    prop_cmd->add_option("--steps", prop.qsts.steps, "Number of steps")->capture_default_str();
    prop_cmd->add_option("--dt", prop.qsts.dt, "Step length, s")->capture_default_str();
    prop_cmd->add_option("--orders", prop.qsts.orders, "Comma-separated harmonic orders");
    prop_cmd->add_option("--monitors", prop.qsts.monitors, "Comma-separated monitor buses (default: all)");
    prop_cmd->add_option("--template-kw", prop.template_kw, "Nonlinear load real power, kW")->capture_default_str();
    prop_cmd->add_option("--template-kvar", prop.template_kvar, "Nonlinear load reactive power, kvar")
        ->capture_default_str();
    prop_cmd->add_option("--template-mix", prop.template_mix, "Series fraction of the load model")
        ->capture_default_str();
    prop_cmd->add_option("--template-spectrum", prop.template_spectrum, "Current spectrum name")->required();
    prop_cmd->add_option("--template-profile", prop.template_profile, "Load profile name");
    prop_cmd->add_option("--threshold", prop.threshold, "Substation THD threshold, %")->capture_default_str();
    prop_cmd->add_option("--substation", prop.substation, "Bus compared with the threshold (default: slack)");

    SpectrumCliOptions spec;
    auto* spec_cmd = app.add_subcommand("spectrum", "Harmonic spectrum of a sampled waveform");
    add_common(spec_cmd, false);
    spec_cmd->add_option("--waveform", spec.waveform, "Waveform CSV (time_s,value)")->required();
    spec_cmd->add_option("--f0", spec.f0, "Fundamental frequency, Hz")->capture_default_str();
    spec_cmd->add_option("--cycles", spec.cycles, "Whole cycles analysed")->capture_default_str();
    spec_cmd->add_option("--max-order", spec.max_order, "Highest order reported")->capture_default_str();
    spec_cmd->add_option("--quantity", spec.quantity, "current or voltage")
        ->check(CLI::IsMember({"current", "voltage"}))
        ->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (scan_cmd->parsed()) return cmd_scan(common, scan, out, err);
        if (solve_cmd->parsed()) return cmd_solve(common, solve_orders, out);
        if (qsts_cmd->parsed()) return cmd_qsts(common, qsts, out);
        if (prop_cmd->parsed()) return cmd_propagate(common, prop, out, err);
        if (spec_cmd->parsed()) return cmd_spectrum(common, spec, out);
    } catch (const StepError& e) {
        err << "error: " << e.what() << "\n";
        print_trace(err, e.trace());
        return exit_code_for(e);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        print_trace(err, e.trace());
        return exit_code_for(e);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace hflow::cli
