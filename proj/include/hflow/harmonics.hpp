#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hflow/network.hpp"
#include "hflow/shunt.hpp"
#include "hflow/spectrum.hpp"

namespace hflow {

inline constexpr double kResidualBound = 1e-9;

/// Harmonic current injected into the network at a bus (system per-unit).
struct HarmonicInjection {
    std::string bus;
    int order = 0;
    Complex current;
};

/// Same, addressed by canonical bus index.
struct NodalInjection {
    std::size_t bus = 0;
    Complex current;
};

struct HarmonicSolution {
    double order = 0.0;
    std::vector<Complex> voltages;  // per-unit, canonical bus order
    double residual = 0.0;          // max-norm of Y V - I over solved rows
};

struct ImpedancePoint {
    double frequency_hz = 0.0;
    Complex impedance_ohm;
};

struct ScanFailure {
    double frequency_hz = 0.0;
    std::string message;
};

struct ImpedanceCurve {
    std::string bus;
    std::vector<ImpedancePoint> points;
    std::vector<ScanFailure> failures;
};

struct InjectionOptions {
    /// Adds 180 deg so that a load's drawn current becomes a network injection.
    bool reverse_direction = true;
};

/// |I_k| = |I_1| K_k; angle = phi_k + k (phi_1 - theta) (+ 180), wrapped to (-180, 180].
Complex injection_from_spectrum(const HarmonicSpectrum& spectrum, Complex fundamental_current,
                                double slack_angle_deg, int k, const InjectionOptions& options = {});

/// Admittance system at one order with the source shorted behind its
/// Thevenin impedance. The sparsity pattern is analysed once; repeated
/// solves with different device shunts only refactorize.
class HarmonicSystem {
public:
    HarmonicSystem(const NetworkModel& model, double h);
    ~HarmonicSystem();
    HarmonicSystem(HarmonicSystem&&) noexcept;
    HarmonicSystem& operator=(HarmonicSystem&&) noexcept;

    double order() const noexcept { return h_; }

    HarmonicSolution solve(std::span<const NodalInjection> injections,
                           std::span<const BusShunt> shunts);

private:
    struct Impl;
    const NetworkModel* model_;
    double h_;
    std::unique_ptr<Impl> impl_;
};

std::vector<BusShunt> evaluate_shunts(std::span<const DeviceShunt> shunts, double h);

HarmonicSolution solve_harmonic(const NetworkModel& model, int order,
                                std::span<const HarmonicInjection> injections,
                                std::span<const DeviceShunt> device_shunts = {});

/// Driving-point impedance by 1 A injection at each frequency in
/// [f_min, f_max] spaced by `step`. Singular points are recorded and skipped.
ImpedanceCurve frequency_scan(const NetworkModel& model, const std::string& bus, double f_min,
                              double f_max, double step,
                              std::span<const DeviceShunt> device_shunts = {});

/// Frequency of the largest |Z| in a curve.
std::optional<double> peak_frequency(const ImpedanceCurve& curve);

/// jwL / (1 - w^2 L C). Throws ResonancePole when the denominator vanishes.
Complex parallel_resonance_impedance(double l_sys, double c, double f);

double resonant_frequency(double l_sys, double c);

}  // namespace hflow
