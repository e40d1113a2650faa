#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hflow/devices.hpp"
#include "hflow/errors.hpp"
#include "hflow/harmonics.hpp"
#include "hflow/metrics.hpp"
#include "hflow/network.hpp"
#include "hflow/powerflow.hpp"
#include "hflow/spectrum.hpp"

namespace hflow {

struct LoadProfile {
    std::string name;
    std::vector<double> values;
    double resolution_s = 60.0;

    double coverage_s() const { return resolution_s * static_cast<double>(values.size()); }
    /// Value in effect at time t (seconds from the start of the profile).
    double at(double t) const;
};

struct DeviceSet {
    std::vector<NortonLoadModel> loads;
    std::vector<PvModel> pvs;
    std::vector<EvModel> evs;
};

struct ResourceSet {
    std::map<std::string, LoadProfile> profiles;
    std::map<std::string, HarmonicSpectrum> spectra;
};

struct QstsOptions {
    int steps = 1440;
    double dt = 60.0;
    std::vector<int> harmonic_orders;    // empty: default_harmonic_orders()
    std::vector<std::string> monitors;   // empty: every bus
    PowerFlowOptions power_flow;
    InjectionOptions injection;
    double eddy_factor = kDefaultEddyLossFactor;
};

/// Odd orders 3..49 plus every order >= 2 present in a spectrum used by a device.
std::vector<int> default_harmonic_orders(const DeviceSet& devices, const ResourceSet& resources);

/// Device state for a single snapshot.
struct OperatingPoint {
    std::vector<double> load_scale;  // per load
    std::vector<double> pv_output;   // per PV, profile value in [0, 1]
    std::vector<double> ev_power;    // per EV, watts drawn; 0 disconnects it
};

struct Snapshot {
    FundamentalSolution fundamental;
    std::vector<HarmonicSolution> harmonics;  // aligned with the pipeline orders
};

/// Fundamental solve followed by one direct solve per harmonic order, with
/// factorization structure cached across calls.
class HarmonicPipeline {
public:
    HarmonicPipeline(const NetworkModel& model, DeviceSet devices, const ResourceSet& resources,
                     std::vector<int> orders, const QstsOptions& options = {});

    const std::vector<int>& orders() const noexcept { return orders_; }
    const DeviceSet& devices() const noexcept { return devices_; }
    const NetworkModel& model() const noexcept { return *model_; }

    Snapshot solve(const OperatingPoint& op);

    /// Nominal operating point: loads at rating, PV at full output, EVs at
    /// charge power.
    OperatingPoint nominal_point() const;

    /// Admittances of every connected device at the nominal point, for scans.
    std::vector<DeviceShunt> nominal_shunts() const;

private:
    const NetworkModel* model_;
    DeviceSet devices_;
    QstsOptions options_;
    std::vector<int> orders_;
    std::vector<const HarmonicSpectrum*> load_spectra_;
    std::vector<const HarmonicSpectrum*> pv_spectra_;
    std::vector<const HarmonicSpectrum*> ev_spectra_;
    std::vector<std::size_t> load_bus_;
    std::vector<std::size_t> pv_bus_;
    std::vector<std::size_t> ev_bus_;
    FundamentalSolver fundamental_;
    std::vector<HarmonicSystem> systems_;
};

struct MonitorSeries {
    std::string bus;
    /// [step][i]: i = 0 is the fundamental, i >= 1 follows QstsResult::orders.
    std::vector<std::vector<Complex>> voltages;
    std::vector<double> thd_pct;
};

struct TransformerSeries {
    std::string name;
    std::vector<double> eddy_total;     // per-unit
    std::vector<double> eddy_harmonic;  // total minus the fundamental term
};

struct EvSeries {
    std::string name;
    std::vector<double> soc;
    std::vector<bool> charging;
    std::vector<double> power_w;
};

struct QstsResult {
    std::vector<int> orders;
    int steps = 0;
    double dt = 0.0;
    std::vector<MonitorSeries> monitors;
    std::vector<TransformerSeries> transformers;
    std::vector<EvSeries> evs;
    double max_residual = 0.0;
    int max_power_flow_iterations = 0;
    double wall_time_s = 0.0;
};

/// Voltage magnitudes at one bus: fundamental plus each solved order.
HarmonicSet bus_voltage_set(const Snapshot& snapshot, std::size_t bus, std::span<const int> orders);

/// Transformer current magnitudes on the from side, per-unit of rated current.
HarmonicSet transformer_current_set(const NetworkModel& model, std::size_t transformer,
                                    const Snapshot& snapshot, std::span<const int> orders);

/// Failure inside a time series, tagged with the failing step.
class StepError : public Error {
public:
    StepError(const Error& cause, int step, std::vector<double> trace = {});

    int step() const noexcept { return step_; }
    ErrorKind cause() const noexcept { return kind(); }
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    int step_;
    std::vector<double> trace_;
};

/// Checks that every device references resolvable buses, spectra and
/// profiles and that the profiles cover steps * dt. Throws InvalidInput.
void validate_devices(const NetworkModel& model, const DeviceSet& devices,
                      const ResourceSet& resources, const QstsOptions& options);

QstsResult run_qsts(const NetworkModel& model, const DeviceSet& devices,
                    const ResourceSet& resources, const QstsOptions& options);

/// Operating point at time t taken from the device profiles; EV power is
/// left at zero (EV state is owned by the time-series driver).
OperatingPoint profile_point(const DeviceSet& devices, const ResourceSet& resources, double t);

struct PropagationOptions {
    QstsOptions qsts;
    double threshold_pct = 5.0;
    /// Bus whose peak THD is compared with the threshold; empty means the slack.
    std::string substation_bus;
    /// Strip spectra from the base devices so stage 0 is the linear baseline.
    bool linear_base = true;
};

struct PropagationResult {
    std::vector<std::string> placements;
    std::vector<std::string> monitors;
    std::string substation_bus;
    std::vector<std::vector<double>> peak_thd;  // [stage][monitor], stage 0 = baseline
    double threshold_pct = 5.0;
    std::optional<int> first_stage_over_threshold;
    int completed_stages = 0;
    std::optional<std::string> failure;
    double max_residual = 0.0;
};

PropagationResult thd_propagation(const NetworkModel& model, const DeviceSet& base_devices,
                                  const ResourceSet& resources,
                                  const NortonLoadModel& nonlinear_template,
                                  std::span<const std::string> placement_buses,
                                  const PropagationOptions& options);

/// Buses from `bus` up to the slack along the radial tree (inclusive).
std::vector<std::string> path_to_slack(const NetworkModel& model, const std::string& bus);

}  // namespace hflow
