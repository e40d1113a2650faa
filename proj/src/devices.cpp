#include "hflow/devices.hpp"

#include <algorithm>
#include <cmath>

#include "hflow/errors.hpp"

namespace hflow {

RlShunt fit_load_admittance(double p, double q, double v_rated, double series_fraction) {
    if (!(std::abs(v_rated) > 0.0)) throw Error(ErrorKind::InvalidInput, "rated voltage must be nonzero");
    if (!(series_fraction >= 0.0 && series_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidInput, "series_fraction must lie in [0, 1]");
    }
    if (p == 0.0 && q == 0.0) throw Error(ErrorKind::ZeroPower, "load has P = Q = 0");

    const double v2 = v_rated * v_rated;
    const double parallel = 1.0 - series_fraction;
    RlShunt shunt;
    if (parallel > 0.0) {
        shunt.parallel_g = parallel * p / v2;
        shunt.parallel_b = -parallel * q / v2;
    }
    if (series_fraction > 0.0) {
        const Complex y_series = series_fraction * Complex{p, -q} / v2;
        shunt.series_z = 1.0 / y_series;
        shunt.has_series = true;
    }
    return shunt;
}

NortonEquivalent norton_equivalent(const NortonLoadModel& load, double v_rated, int h,
                                   Complex fundamental_current, const HarmonicSpectrum* spectrum,
                                   double slack_angle_deg, const InjectionOptions& options) {
    NortonEquivalent eq;
    eq.admittance =
        fit_load_admittance(load.p_rated, load.q_rated, v_rated, load.series_fraction).admittance(h);
    if (h == 1) {
        eq.current = -fundamental_current;
    } else if (spectrum != nullptr && spectrum->find(h) != nullptr) {
        eq.current = injection_from_spectrum(*spectrum, fundamental_current, slack_angle_deg, h, options);
    }
    return eq;
}

PvOperatingPoint pv_operating_point(const PvModel& pv, double profile_value) {
    if (!(profile_value >= 0.0 && profile_value <= 1.0)) {
        throw Error(ErrorKind::InvalidInput, "PV profile value must lie in [0, 1]");
    }
    // Unity power factor: the whole feasible output is real power.
    return {profile_value * pv.s_rating, 0.0};
}

EvState initial_ev_state(const EvModel& ev) {
    const double soc = std::clamp(ev.initial_soc, ev.soc_min, std::min(ev.soc_max, ev.soc_target));
    return {soc * ev.capacity, soc, false};
}

double ev_grid_demand(const EvModel& ev, const EvState& state, double p_available) {
    if (state.soc >= ev.soc_target) return 0.0;
    return std::clamp(p_available, 0.0, ev.charge_power);
}

EvState ev_step(const EvModel& ev, const EvState& state, double p_available, double dt) {
    EvState next = state;
    const double p_in = ev_grid_demand(ev, state, p_available);
    if (p_in <= 0.0) {
        next.charging = false;
        return next;
    }
    const double ceiling_soc = std::min(ev.soc_max, ev.soc_target);
    const double upper = ceiling_soc * ev.capacity;
    const double lower = ev.soc_min * ev.capacity;
    const double delta = (ev.eta_inv * p_in - ev.p_idle) * ev.eta_ch * dt / 3600.0;
    next.energy = state.energy + delta;
    if (next.energy >= upper) {
        next.energy = upper;
        next.soc = ceiling_soc;
    } else if (next.energy <= lower) {
        next.energy = lower;
        next.soc = ev.soc_min;
    } else {
        next.soc = next.energy / ev.capacity;
    }
    next.charging = next.soc < ev.soc_target;
    return next;
}

DerHarmonicSource der_harmonic_source(const HarmonicSpectrum& spectrum, Complex series_z,
                                      const DerTerminal& terminal, int k, double slack_angle_deg) {
    const SpectrumEntry* entry = spectrum.find(k);
    if (entry == nullptr) {
        throw Error(ErrorKind::MissingOrder, "spectrum '" + spectrum.name() + "' has no order " +
                                                 std::to_string(k));
    }
    const Complex internal = terminal.voltage + series_z * terminal.current_out;
    const double phi1 = std::arg(internal) * 180.0 / kPi;
    const double angle = normalize_angle(entry->angle_deg + k * (phi1 - slack_angle_deg));
    DerHarmonicSource src;
    src.voltage = std::polar(entry->multiplier * std::abs(internal), angle * kPi / 180.0);
    src.series_impedance = Complex{series_z.real(), k * series_z.imag()};
    return src;
}

}  // namespace hflow
