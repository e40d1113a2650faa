#pragma once

#include <string>
#include <vector>

namespace hflow {

enum class SpectrumKind { Current, Voltage };
enum class Quantity { Current, Voltage };

struct SpectrumEntry {
    int order = 1;
    double multiplier = 0.0;  // fraction of the fundamental magnitude
    double angle_deg = 0.0;
};

/// Fundamental-relative harmonic signature. Order 1 is always present with
/// multiplier 1; orders are strictly increasing.
class HarmonicSpectrum {
public:
    HarmonicSpectrum() : entries_{{1, 1.0, 0.0}} {}

    /// Validates and sorts; throws InvalidInput on a broken invariant.
    HarmonicSpectrum(std::string name, std::vector<SpectrumEntry> entries,
                     SpectrumKind kind = SpectrumKind::Current);

    const std::string& name() const noexcept { return name_; }
    SpectrumKind kind() const noexcept { return kind_; }
    const std::vector<SpectrumEntry>& entries() const noexcept { return entries_; }
    const SpectrumEntry* find(int order) const noexcept;
    int max_order() const noexcept { return entries_.back().order; }

private:
    std::string name_;
    std::vector<SpectrumEntry> entries_;
    SpectrumKind kind_ = SpectrumKind::Current;
};

struct WaveformRecord {
    double sample_rate = 0.0;  // hertz
    std::vector<double> samples;
    Quantity quantity = Quantity::Current;
};

struct ExtractionOptions {
    double f0 = 60.0;
    int n_cycles = 12;
    int max_order = 50;
    /// Orders whose relative magnitude falls below this are omitted.
    double min_multiplier = 1e-6;
};

/// Rectangular-window projection over exactly `n_cycles` fundamental cycles.
/// When sample_rate / f0 is not an integer the record is truncated to the
/// nearest whole-cycle sample count; see frequency_error_ppm().
HarmonicSpectrum extract_spectrum(const WaveformRecord& waveform,
                                  const ExtractionOptions& options = {});

/// Samples used for `n_cycles` cycles at `f0`.
std::size_t cycle_sample_count(double sample_rate, double f0, int n_cycles);

/// Relative error (ppm) between f0 and the bin frequency actually analysed.
double frequency_error_ppm(double sample_rate, double f0, int n_cycles);

/// Sum of sinusoids A * m_k * sin(2 pi k f0 t + angle_k).
WaveformRecord synthesize_waveform(const HarmonicSpectrum& spectrum, double fundamental_amplitude,
                                   double f0, double sample_rate, double duration_s);

/// Wraps an angle into (-180, 180].
double normalize_angle(double deg);

}  // namespace hflow
