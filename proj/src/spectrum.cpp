#include "hflow/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "hflow/errors.hpp"
#include "hflow/network.hpp"

namespace hflow {

double normalize_angle(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a <= -180.0) a += 360.0;
    if (a > 180.0) a -= 360.0;
    return a;
}

HarmonicSpectrum::HarmonicSpectrum(std::string name, std::vector<SpectrumEntry> entries,
                                   SpectrumKind kind)
    : name_(std::move(name)), entries_(std::move(entries)), kind_(kind) {
    std::sort(entries_.begin(), entries_.end(),
              [](const SpectrumEntry& a, const SpectrumEntry& b) { return a.order < b.order; });
    const std::string where = "spectrum '" + name_ + "': ";
    if (entries_.empty() || entries_.front().order != 1) {
        throw Error(ErrorKind::InvalidInput, where + "order 1 entry is mandatory");
    }
    if (std::abs(entries_.front().multiplier - 1.0) > 1e-9) {
        throw Error(ErrorKind::InvalidInput, where + "order 1 multiplier must be 1.0");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.order < 1) throw Error(ErrorKind::InvalidInput, where + "orders must be >= 1");
        if (i > 0 && e.order == entries_[i - 1].order) {
            throw Error(ErrorKind::InvalidInput,
                        where + "duplicate order " + std::to_string(e.order));
        }
        if (!std::isfinite(e.multiplier) || e.multiplier < 0.0 || !std::isfinite(e.angle_deg)) {
            throw Error(ErrorKind::InvalidInput, where + "multipliers must be finite and >= 0");
        }
    }
}

const SpectrumEntry* HarmonicSpectrum::find(int order) const noexcept {
    const auto it = std::lower_bound(
        entries_.begin(), entries_.end(), order,
        [](const SpectrumEntry& e, int o) { return e.order < o; });
    if (it == entries_.end() || it->order != order) return nullptr;
    return &*it;
}

std::size_t cycle_sample_count(double sample_rate, double f0, int n_cycles) {
    return static_cast<std::size_t>(std::llround(n_cycles * sample_rate / f0));
}

double frequency_error_ppm(double sample_rate, double f0, int n_cycles) {
    const auto n = cycle_sample_count(sample_rate, f0, n_cycles);
    const double analysed = n_cycles * sample_rate / static_cast<double>(n);
    return (analysed - f0) / f0 * 1e6;
}

HarmonicSpectrum extract_spectrum(const WaveformRecord& waveform, const ExtractionOptions& opt) {
    if (!(waveform.sample_rate > 0.0) || !(opt.f0 > 0.0) || opt.n_cycles < 1 || opt.max_order < 1) {
        throw Error(ErrorKind::InvalidInput, "sample_rate, f0, n_cycles and max_order must be positive");
    }
    if (opt.max_order * opt.f0 >= waveform.sample_rate / 2.0) {
        std::ostringstream msg;
        msg << "max_order " << opt.max_order << " at " << opt.f0
            << " Hz is not below half the sample rate " << waveform.sample_rate << " Hz";
        throw Error(ErrorKind::NyquistViolation, msg.str());
    }
    const std::size_t n = cycle_sample_count(waveform.sample_rate, opt.f0, opt.n_cycles);
    if (n == 0 || waveform.samples.size() < n) {
        throw Error(ErrorKind::InsufficientSamples,
                    "need " + std::to_string(n) + " samples for " + std::to_string(opt.n_cycles) +
                        " cycles, have " + std::to_string(waveform.samples.size()));
    }

    double mean_square = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_square += waveform.samples[i] * waveform.samples[i];
    mean_square /= static_cast<double>(n);
    const double rms = std::sqrt(mean_square);

    // Bin for order k sits at k * n_cycles over the analysed record.
    auto project = [&](int k) {
        const double w = 2.0 * kPi * static_cast<double>(k) * opt.n_cycles / static_cast<double>(n);
        std::complex<double> acc{};
        for (std::size_t i = 0; i < n; ++i) {
            acc += waveform.samples[i] * std::polar(1.0, -w * static_cast<double>(i));
        }
        return acc * (2.0 / static_cast<double>(n));
    };

    const auto fundamental = project(1);
    const double a1 = std::abs(fundamental);
    if (rms == 0.0 || a1 < 1e-9 * rms) {
        throw Error(ErrorKind::FundamentalAbsent, "order-1 magnitude is negligible");
    }
    // Bin phase is cosine-referenced; shift by +90 deg for sine phase.
    const double phi1 = std::arg(fundamental) * 180.0 / kPi + 90.0;

    std::vector<SpectrumEntry> entries{{1, 1.0, 0.0}};
    for (int k = 2; k <= opt.max_order; ++k) {
        const auto xk = project(k);
        const double m = std::abs(xk) / a1;
        if (m < opt.min_multiplier) continue;
        const double phik = std::arg(xk) * 180.0 / kPi + 90.0;
        entries.push_back({k, m, normalize_angle(phik - k * phi1)});
    }
    const SpectrumKind kind =
        waveform.quantity == Quantity::Voltage ? SpectrumKind::Voltage : SpectrumKind::Current;
    return HarmonicSpectrum("extracted", std::move(entries), kind);
}

WaveformRecord synthesize_waveform(const HarmonicSpectrum& spectrum, double fundamental_amplitude,
                                   double f0, double sample_rate, double duration_s) {
    if (!(sample_rate > 0.0) || !(f0 > 0.0) || !(duration_s > 0.0)) {
        throw Error(ErrorKind::InvalidInput, "sample_rate, f0 and duration must be positive");
    }
    if (spectrum.max_order() * f0 >= sample_rate / 2.0) {
        std::ostringstream msg;
        msg << "order " << spectrum.max_order() << " at " << f0 << " Hz violates Nyquist for "
            << sample_rate << " Hz sampling";
        throw Error(ErrorKind::NyquistViolation, msg.str());
    }
    WaveformRecord rec;
    rec.sample_rate = sample_rate;
    rec.quantity = spectrum.kind() == SpectrumKind::Voltage ? Quantity::Voltage : Quantity::Current;
    const auto count = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    rec.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        double x = 0.0;
        for (const auto& e : spectrum.entries()) {
            x += e.multiplier *
                 std::sin(2.0 * kPi * e.order * f0 * t + e.angle_deg * kPi / 180.0);
        }
        rec.samples[i] = fundamental_amplitude * x;
    }
    return rec;
}

}  // namespace hflow
