#pragma once

#include <filesystem>
#include <string>

#include "hflow/network.hpp"
#include "hflow/qsts.hpp"
#include "hflow/spectrum.hpp"

namespace hflow {

struct Feeder {
    Network network;
    DeviceSet devices;
};

/// Parses a feeder document. Unknown keys are rejected at every level.
/// Throws InvalidInput naming the offending path, e.g. "loads[2].kw".
Feeder parse_feeder(const std::string& text, const std::string& origin = "feeder");
Feeder load_feeder(const std::filesystem::path& path);

/// order,percent,angle_deg
HarmonicSpectrum load_spectrum_csv(const std::filesystem::path& path, const std::string& name,
                                   SpectrumKind kind = SpectrumKind::Current);
std::string spectrum_csv(const HarmonicSpectrum& spectrum);

/// minute,multiplier at a fixed resolution taken from the minute column.
LoadProfile load_profile_csv(const std::filesystem::path& path, const std::string& name);

/// time_s,value with uniform spacing.
WaveformRecord load_waveform_csv(const std::filesystem::path& path, Quantity quantity = Quantity::Current);

/// Loads every spectrum and profile the devices reference from
/// `dir/spectra/<name>.csv` and `dir/profiles/<name>.csv`.
ResourceSet load_resources(const DeviceSet& devices, const std::filesystem::path& dir);

/// Adds one more spectrum or profile by name to an existing set.
void add_spectrum(ResourceSet& resources, const std::filesystem::path& dir, const std::string& name,
                  SpectrumKind kind);
void add_profile(ResourceSet& resources, const std::filesystem::path& dir, const std::string& name);

}  // namespace hflow
