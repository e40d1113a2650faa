#include "hflow/feeder_io.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "hflow/csv.hpp"
#include "hflow/errors.hpp"

namespace hflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::InvalidInput, where + ": " + what);
}

// Field accessor that also enforces the closed key set of an object.
class Fields {
public:
    Fields(const json& obj, std::string where, std::set<std::string> allowed)
        : obj_(obj), where_(std::move(where)) {
        if (!obj.is_object()) fail(where_, "expected an object");
        for (const auto& [key, value] : obj.items()) {
            (void)value;
            if (!allowed.count(key)) fail(where_ + "." + key, "unknown key");
        }
    }

    bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

    double number(const std::string& key) const {
        if (!has(key)) fail(path(key), "missing required number");
        return number_at(key);
    }
    double number(const std::string& key, double fallback) const {
        return has(key) ? number_at(key) : fallback;
    }
    std::string text(const std::string& key) const {
        if (!has(key)) fail(path(key), "missing required string");
        return text_at(key);
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? text_at(key) : fallback;
    }
    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_boolean()) fail(path(key), "expected true or false");
        return v.get<bool>();
    }

private:
    std::string path(const std::string& key) const { return where_ + "." + key; }
    double number_at(const std::string& key) const {
        const auto& v = obj_.at(key);
        if (!v.is_number()) fail(path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(path(key), "must be finite");
        return d;
    }
    std::string text_at(const std::string& key) const {
        const auto& v = obj_.at(key);
        if (!v.is_string()) fail(path(key), "expected a string");
        return v.get<std::string>();
    }

    const json& obj_;
    std::string where_;
};

const json& array_at(const json& root, const std::string& key, bool required) {
    static const json empty = json::array();
    if (!root.contains(key)) {
        if (required) fail(key, "missing required array");
        return empty;
    }
    const auto& v = root.at(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
}

std::string item(const std::string& section, std::size_t i) {
    return section + "[" + std::to_string(i) + "]";
}

NortonLoadModel parse_norton_device(const Fields& f) {
    NortonLoadModel l;
    l.name = f.text("name");
    l.bus = f.text("bus");
    l.p_rated = f.number("p_rated");
    l.q_rated = f.number("q_rated", 0.0);
    l.series_fraction = f.number("series_fraction", 0.5);
    l.spectrum = f.text("spectrum", "");
    l.profile = f.text("profile", "");
    return l;
}

PvModel parse_pv(const Fields& f) {
    PvModel p;
    p.name = f.text("name");
    p.bus = f.text("bus");
    p.s_rating = f.number("s_rating");
    p.power_factor = f.number("power_factor", 1.0);
    p.profile = f.text("profile", "");
    p.spectrum = f.text("spectrum", "");
    p.series_r = f.number("series_r");
    p.series_x = f.number("series_x");
    return p;
}

EvModel parse_ev(const Fields& f) {
    EvModel e;
    e.name = f.text("name");
    e.bus = f.text("bus");
    e.capacity = f.number("capacity");
    e.soc_min = f.number("soc_min", e.soc_min);
    e.soc_max = f.number("soc_max", e.soc_max);
    e.soc_target = f.number("soc_target", e.soc_target);
    e.eta_inv = f.number("eta_inv", e.eta_inv);
    e.eta_ch = f.number("eta_ch", e.eta_ch);
    e.p_idle = f.number("p_idle", e.p_idle);
    e.charge_power = f.number("charge_power");
    e.initial_soc = f.number("initial_soc", e.initial_soc);
    e.availability_profile = f.text("availability_profile", "");
    e.spectrum = f.text("spectrum", "");
    e.series_r = f.number("series_r");
    e.series_x = f.number("series_x");
    return e;
}

}  // namespace

Feeder parse_feeder(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(origin, std::string("malformed JSON: ") + e.what());
    }
    Fields top(root, origin,
               {"buses", "branches", "transformers", "capacitors", "source", "loads", "devices"});
    (void)top;

    Feeder feeder;
    Network& net = feeder.network;

    const auto& buses = array_at(root, "buses", true);
    for (std::size_t i = 0; i < buses.size(); ++i) {
        Fields f(buses[i], item("buses", i), {"id", "nominal_voltage", "is_slack"});
        net.buses.push_back({f.text("id"), f.number("nominal_voltage"), f.flag("is_slack", false)});
    }

    const auto& branches = array_at(root, "branches", false);
    for (std::size_t i = 0; i < branches.size(); ++i) {
        Fields f(branches[i], item("branches", i),
                 {"name", "from", "to", "resistance", "reactance", "shunt_susceptance", "length_scaled"});
        Branch b;
        b.name = f.text("name", item("branches", i));
        b.from = f.text("from");
        b.to = f.text("to");
        b.resistance = f.number("resistance");
        b.reactance = f.number("reactance");
        b.shunt_susceptance = f.number("shunt_susceptance", 0.0);
        b.length_scaled = f.flag("length_scaled", true);
        net.branches.push_back(b);
    }

    const auto& xfmrs = array_at(root, "transformers", false);
    for (std::size_t i = 0; i < xfmrs.size(); ++i) {
        Fields f(xfmrs[i], item("transformers", i),
                 {"name", "from", "to", "rated_kva", "leakage_r", "leakage_x", "turns_ratio", "constant_xr",
                  "blocks_triplen"});
        TransformerBranch t;
        t.name = f.text("name", item("transformers", i));
        t.from = f.text("from");
        t.to = f.text("to");
        t.rated_kva = f.number("rated_kva");
        t.leakage_r = f.number("leakage_r");
        t.leakage_x = f.number("leakage_x");
        t.turns_ratio = f.number("turns_ratio", 1.0);
        t.constant_xr = f.flag("constant_xr", false);
        t.blocks_triplen = f.flag("blocks_triplen", false);
        net.transformers.push_back(t);
    }

    const auto& caps = array_at(root, "capacitors", false);
    for (std::size_t i = 0; i < caps.size(); ++i) {
        Fields f(caps[i], item("capacitors", i), {"name", "bus", "susceptance"});
        net.capacitor_banks.push_back(
            {f.text("name", item("capacitors", i)), f.text("bus"), f.number("susceptance")});
    }

    if (!root.contains("source")) fail("source", "missing required object");
    {
        Fields f(root.at("source"), "source",
                 {"bus", "voltage_mag", "voltage_angle", "thevenin_r", "thevenin_x", "base_frequency_hz",
                  "base_mva"});
        net.source.bus = f.text("bus");
        net.source.voltage_mag = f.number("voltage_mag", 1.0);
        net.source.voltage_angle = f.number("voltage_angle", 0.0);
        net.source.thevenin_r = f.number("thevenin_r", 0.0);
        net.source.thevenin_x = f.number("thevenin_x", 0.0);
        net.base_frequency = f.number("base_frequency_hz", 60.0);
        net.per_unit_base_mva = f.number("base_mva", 1.0);
    }

    const auto& loads = array_at(root, "loads", false);
    for (std::size_t i = 0; i < loads.size(); ++i) {
        Fields f(loads[i], item("loads", i),
                 {"name", "bus", "kw", "kvar", "profile", "series_parallel_mix", "spectrum"});
        NortonLoadModel l;
        l.name = f.text("name", item("loads", i));
        l.bus = f.text("bus");
        l.p_rated = f.number("kw") * 1e3;
        l.q_rated = f.number("kvar", 0.0) * 1e3;
        l.profile = f.text("profile", "");
        l.series_fraction = f.number("series_parallel_mix", 0.5);
        l.spectrum = f.text("spectrum", "");
        feeder.devices.loads.push_back(l);
    }

    const auto& devices = array_at(root, "devices", false);
    for (std::size_t i = 0; i < devices.size(); ++i) {
        const auto where = item("devices", i);
        if (!devices[i].is_object() || !devices[i].contains("type") || !devices[i].at("type").is_string()) {
            fail(where + ".type", "missing device type (norton_load | pv | ev)");
        }
        const auto type = devices[i].at("type").get<std::string>();
        if (type == "norton_load") {
            Fields f(devices[i], where,
                     {"type", "name", "bus", "p_rated", "q_rated", "series_fraction", "spectrum", "profile"});
            feeder.devices.loads.push_back(parse_norton_device(f));
        } else if (type == "pv") {
            Fields f(devices[i], where,
                     {"type", "name", "bus", "s_rating", "power_factor", "profile", "spectrum", "series_r",
                      "series_x"});
            feeder.devices.pvs.push_back(parse_pv(f));
        } else if (type == "ev") {
            Fields f(devices[i], where,
                     {"type", "name", "bus", "capacity", "soc_min", "soc_max", "soc_target", "eta_inv", "eta_ch",
                      "p_idle", "charge_power", "initial_soc", "availability_profile", "spectrum", "series_r",
                      "series_x"});
            feeder.devices.evs.push_back(parse_ev(f));
        } else {
            fail(where + ".type", "unknown device type '" + type + "'");
        }
    }
    return feeder;
}

Feeder load_feeder(const std::filesystem::path& path) {
    return parse_feeder(read_text_file(path), path.string());
}

HarmonicSpectrum load_spectrum_csv(const std::filesystem::path& path, const std::string& name,
                                   SpectrumKind kind) {
    const auto table = read_csv(path);
    require_header(table, {"order", "percent", "angle_deg"}, path);
    std::vector<SpectrumEntry> entries;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double order = parse_number(table.rows[r][0], path, r + 1);
        if (order != std::floor(order) || order < 1.0) {
            throw Error(ErrorKind::InvalidInput,
                        path.string() + ": row " + std::to_string(r + 1) + ": order must be an integer >= 1");
        }
        entries.push_back({static_cast<int>(order), parse_number(table.rows[r][1], path, r + 1) / 100.0,
                           parse_number(table.rows[r][2], path, r + 1)});
    }
    const auto* fund = [&]() -> const SpectrumEntry* {
        for (const auto& e : entries) {
            if (e.order == 1) return &e;
        }
        return nullptr;
    }();
    if (fund == nullptr || std::abs(fund->multiplier - 1.0) > 1e-12) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": order 1 row with percent = 100 is required");
    }
    try {
        return HarmonicSpectrum(name, std::move(entries), kind);
    } catch (const Error& e) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
    }
}

std::string spectrum_csv(const HarmonicSpectrum& spectrum) {
    std::string out = "order,percent,angle_deg\n";
    for (const auto& e : spectrum.entries()) {
        out += std::to_string(e.order) + "," + format_number(e.multiplier * 100.0) + "," +
               format_number(e.angle_deg) + "\n";
    }
    return out;
}

LoadProfile load_profile_csv(const std::filesystem::path& path, const std::string& name) {
    const auto table = read_csv(path);
    require_header(table, {"minute", "multiplier"}, path);
    if (table.rows.empty()) throw Error(ErrorKind::InvalidInput, path.string() + ": no rows");
    LoadProfile p;
    p.name = name;
    std::vector<double> minutes;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        minutes.push_back(parse_number(table.rows[r][0], path, r + 1));
        const double v = parse_number(table.rows[r][1], path, r + 1);
        if (v < 0.0) {
            throw Error(ErrorKind::InvalidInput,
                        path.string() + ": row " + std::to_string(r + 1) + ": multiplier must be >= 0");
        }
        p.values.push_back(v);
    }
    double step = 1.0;
    if (minutes.size() > 1) step = minutes[1] - minutes[0];
    if (!(step > 0.0)) throw Error(ErrorKind::InvalidInput, path.string() + ": minutes must increase");
    for (std::size_t r = 0; r < minutes.size(); ++r) {
        if (std::abs(minutes[r] - (minutes[0] + step * static_cast<double>(r))) > 1e-9) {
            throw Error(ErrorKind::InvalidInput,
                        path.string() + ": row " + std::to_string(r + 1) + ": minutes must be evenly spaced");
        }
    }
    if (minutes[0] != 0.0) throw Error(ErrorKind::InvalidInput, path.string() + ": first minute must be 0");
    p.resolution_s = step * 60.0;
    return p;
}

WaveformRecord load_waveform_csv(const std::filesystem::path& path, Quantity quantity) {
    const auto table = read_csv(path);
    require_header(table, {"time_s", "value"}, path);
    if (table.rows.size() < 2) throw Error(ErrorKind::InsufficientSamples, path.string() + ": too few samples");
    WaveformRecord w;
    w.quantity = quantity;
    std::vector<double> times;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        times.push_back(parse_number(table.rows[r][0], path, r + 1));
        w.samples.push_back(parse_number(table.rows[r][1], path, r + 1));
    }
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidInput, path.string() + ": time_s must increase");
    // Printed time columns carry rounding noise; only real jitter is rejected.
    for (std::size_t r = 0; r < times.size(); ++r) {
        if (std::abs(times[r] - (times.front() + dt * static_cast<double>(r))) > 1e-3 * dt) {
            throw Error(ErrorKind::InvalidInput,
                        path.string() + ": row " + std::to_string(r + 1) + ": samples must be uniformly spaced");
        }
    }
    w.sample_rate = 1.0 / dt;
    // Undo the rounding of a printed time column, e.g. 5.00500501e-05 s.
    const double rounded = std::round(w.sample_rate);
    if (std::abs(w.sample_rate - rounded) < 1e-6 * rounded) w.sample_rate = rounded;
    return w;
}

void add_spectrum(ResourceSet& resources, const std::filesystem::path& dir, const std::string& name,
                  SpectrumKind kind) {
    if (name.empty() || resources.spectra.count(name)) return;
    const auto path = dir / "spectra" / (name + ".csv");
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::InvalidInput, "spectrum '" + name + "' not found at " + path.string());
    }
    resources.spectra.emplace(name, load_spectrum_csv(path, name, kind));
}

void add_profile(ResourceSet& resources, const std::filesystem::path& dir, const std::string& name) {
    if (name.empty() || resources.profiles.count(name)) return;
    const auto path = dir / "profiles" / (name + ".csv");
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::InvalidInput, "profile '" + name + "' not found at " + path.string());
    }
    resources.profiles.emplace(name, load_profile_csv(path, name));
}

ResourceSet load_resources(const DeviceSet& devices, const std::filesystem::path& dir) {
    ResourceSet res;
    for (const auto& l : devices.loads) {
        add_spectrum(res, dir, l.spectrum, SpectrumKind::Current);
        add_profile(res, dir, l.profile);
    }
    for (const auto& p : devices.pvs) {
        add_spectrum(res, dir, p.spectrum, SpectrumKind::Voltage);
        add_profile(res, dir, p.profile);
    }
    for (const auto& e : devices.evs) {
        add_spectrum(res, dir, e.spectrum, SpectrumKind::Voltage);
        add_profile(res, dir, e.availability_profile);
    }
    return res;
}

}  // namespace hflow
