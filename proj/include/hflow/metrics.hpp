#pragma once

#include <span>
#include <vector>

namespace hflow {

/// Winding eddy-current loss factor P_EC-R.
inline constexpr double kDefaultEddyLossFactor = 0.05;

struct HarmonicComponent {
    double order = 0.0;
    double magnitude = 0.0;
};

struct HarmonicSet {
    double fundamental = 0.0;
    std::vector<HarmonicComponent> components;  // orders >= 2
};

struct SeriesSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

/// 100 * sqrt(sum M_h^2) / M_1, in percent.
double thd(const HarmonicSet& set);

/// p_ec_r * sum_{h>=1} I_h^2 h^2 with currents in per-unit of rated current.
double eddy_current_loss(const HarmonicSet& set, double p_ec_r = kDefaultEddyLossFactor);

/// Harmonic-driven part: total loss minus the fundamental-only term.
double eddy_harmonic_component(const HarmonicSet& set, double p_ec_r = kDefaultEddyLossFactor);

/// Five-number summary plus mean; quartiles interpolate linearly between
/// closest ranks.
SeriesSummary summarize(std::span<const double> series);

}  // namespace hflow
