#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <tuple>

#include "hflow/cli.hpp"
#include "hflow/errors.hpp"
#include "hflow/feeder_io.hpp"
#include "hflow/harmonics.hpp"
#include "hflow/metrics.hpp"
#include "hflow/qsts.hpp"
#include "hflow/spectrum.hpp"

namespace py = pybind11;
using namespace hflow;

namespace {

using Component = std::pair<double, double>;
using Entry = std::tuple<int, double, double>;

HarmonicSet make_set(double fundamental, const std::vector<Component>& components) {
    HarmonicSet set{fundamental, {}};
    for (const auto& [order, mag] : components) set.components.push_back({order, mag});
    return set;
}

HarmonicSpectrum make_spectrum(const std::vector<Entry>& entries) {
    std::vector<SpectrumEntry> e;
    for (const auto& [order, mult, angle] : entries) e.push_back({order, mult, angle});
    return HarmonicSpectrum("py", e);
}

std::vector<Entry> spectrum_entries(const HarmonicSpectrum& s) {
    std::vector<Entry> out;
    for (const auto& e : s.entries()) out.emplace_back(e.order, e.multiplier, e.angle_deg);
    return out;
}

std::vector<std::pair<double, Complex>> scan(const std::string& feeder_path, const std::string& bus, double f_min,
                                             double f_max, double step, bool with_devices) {
    const auto feeder = load_feeder(feeder_path);
    const NetworkModel model(feeder.network);
    std::vector<DeviceShunt> shunts;
    if (with_devices) {
        const auto resources = load_resources(feeder.devices, std::filesystem::path(feeder_path).parent_path());
        HarmonicPipeline pipe(model, feeder.devices, resources, {3});
        shunts = pipe.nominal_shunts();
    }
    const auto curve = frequency_scan(model, bus, f_min, f_max, step, shunts);
    std::vector<std::pair<double, Complex>> out;
    for (const auto& p : curve.points) out.emplace_back(p.frequency_hz, p.impedance_ohm);
    return out;
}

std::tuple<int, std::string, std::string> run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "hflow");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

PYBIND11_MODULE(_hflow, m) {
    m.doc() = "Harmonic power flow and quasi-static time-series engine";

    py::register_exception<Error>(m, "HflowError", PyExc_RuntimeError);

    m.def(
        "thd",
        [](double fundamental, const std::vector<Component>& components) {
            return thd(make_set(fundamental, components));
        },
        py::arg("fundamental"), py::arg("components"), "THD in percent of (order, magnitude) components.");
    m.def(
        "eddy_current_loss",
        [](double fundamental, const std::vector<Component>& components, double p_ec_r) {
            return eddy_current_loss(make_set(fundamental, components), p_ec_r);
        },
        py::arg("fundamental"), py::arg("components"), py::arg("p_ec_r") = kDefaultEddyLossFactor,
        "Per-unit eddy-current loss including the fundamental term.");
    m.def("resonant_frequency", &resonant_frequency, py::arg("l_sys"), py::arg("c"),
          "Parallel resonant frequency in Hz.");
    m.def(
        "extract_spectrum",
        [](const std::vector<double>& samples, double sample_rate, double f0, int cycles, int max_order) {
            ExtractionOptions opt;
            opt.f0 = f0;
            opt.n_cycles = cycles;
            opt.max_order = max_order;
            return spectrum_entries(extract_spectrum({sample_rate, samples, Quantity::Current}, opt));
        },
        py::arg("samples"), py::arg("sample_rate"), py::arg("f0") = 60.0, py::arg("cycles") = 12,
        py::arg("max_order") = 50, "List of (order, multiplier, angle_deg) relative to the fundamental.");
    m.def(
        "synthesize_waveform",
        [](const std::vector<Entry>& entries, double amplitude, double f0, double sample_rate, double duration) {
            return synthesize_waveform(make_spectrum(entries), amplitude, f0, sample_rate, duration).samples;
        },
        py::arg("entries"), py::arg("amplitude"), py::arg("f0"), py::arg("sample_rate"), py::arg("duration"),
        "Samples of the waveform described by (order, multiplier, angle_deg) entries.");
    m.def("frequency_scan", &scan, py::arg("feeder"), py::arg("bus"), py::arg("f_min") = 60.0,
          py::arg("f_max") = 3000.0, py::arg("step") = 10.0, py::arg("with_devices") = false,
          "Driving-point impedance (frequency_hz, ohms) at a bus of a feeder file.");
    m.def("run_cli", &run_cli, py::arg("args"), "Run the command line and return (exit_code, stdout, stderr).");
}
