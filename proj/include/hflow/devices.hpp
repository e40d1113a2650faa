#pragma once

#include <string>

#include "hflow/harmonics.hpp"
#include "hflow/network.hpp"
#include "hflow/shunt.hpp"
#include "hflow/spectrum.hpp"

namespace hflow {

/// Load represented as a Norton equivalent at harmonic orders. Powers are in
/// watts and vars. An empty `spectrum` makes the load linear: it still damps
/// harmonics through its admittance but injects nothing.
struct NortonLoadModel {
    std::string name;
    std::string bus;
    double p_rated = 0.0;
    double q_rated = 0.0;
    double series_fraction = 0.5;
    std::string spectrum;
    std::string profile;
};

struct PvModel {
    std::string name;
    std::string bus;
    double s_rating = 0.0;  // VA
    double power_factor = 1.0;
    std::string profile;
    std::string spectrum;  // voltage spectrum
    double series_r = 0.0;  // ohms
    double series_x = 0.0;
};

struct EvModel {
    std::string name;
    std::string bus;
    double capacity = 0.0;  // Wh
    double soc_min = 0.1;
    double soc_max = 1.0;
    double soc_target = 0.95;
    double eta_inv = 0.96;
    double eta_ch = 0.95;
    double p_idle = 100.0;       // W
    double charge_power = 0.0;   // W
    double initial_soc = 0.2;
    std::string availability_profile;
    std::string spectrum;  // voltage spectrum
    double series_r = 0.0;
    double series_x = 0.0;
};

struct EvState {
    double energy = 0.0;  // Wh
    double soc = 0.0;
    bool charging = false;
};

struct PvOperatingPoint {
    double p = 0.0;
    double q = 0.0;
};

struct NortonEquivalent {
    Complex current;  // injected into the network
    Complex admittance;
};

/// Fits the series / parallel R-L split of a load that consumes (p, q) at
/// `v_rated`, in any consistent unit system. Throws ZeroPower if p = q = 0.
RlShunt fit_load_admittance(double p, double q, double v_rated, double series_fraction);

/// Norton source and admittance at order h. At h = 1 the source is the
/// negated fundamental load current; at h >= 2 it follows the spectrum (zero
/// for a linear load, or an order missing from the spectrum).
NortonEquivalent norton_equivalent(const NortonLoadModel& load, double v_rated, int h,
                                   Complex fundamental_current, const HarmonicSpectrum* spectrum,
                                   double slack_angle_deg, const InjectionOptions& options = {});

PvOperatingPoint pv_operating_point(const PvModel& pv, double profile_value);

EvState initial_ev_state(const EvModel& ev);

/// Grid power drawn over the next step, zero when the EV will not charge.
double ev_grid_demand(const EvModel& ev, const EvState& state, double p_available);

/// Advances the battery by one step of `dt` seconds (grid-to-vehicle only).
EvState ev_step(const EvModel& ev, const EvState& state, double p_available, double dt);

struct DerTerminal {
    Complex voltage;
    Complex current_out;  // flowing from the device into the bus
};

struct DerHarmonicSource {
    Complex voltage;
    Complex series_impedance;
};

/// Voltage source behind R + jkX, initialised at the fundamental from the
/// terminal current. Throws MissingOrder if k is absent from the spectrum.
DerHarmonicSource der_harmonic_source(const HarmonicSpectrum& spectrum, Complex series_z,
                                      const DerTerminal& terminal, int k, double slack_angle_deg);

}  // namespace hflow
