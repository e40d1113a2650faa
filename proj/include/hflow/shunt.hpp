#pragma once

#include <complex>
#include <cstddef>

namespace hflow {

/// R-L shunt admittance fitted at the fundamental. The parallel branch keeps
/// its conductance and scales susceptance as B/h; the series branch scales
/// as R + jhX.
struct RlShunt {
    double parallel_g = 0.0;
    double parallel_b = 0.0;
    std::complex<double> series_z{};
    bool has_series = false;

    std::complex<double> admittance(double h) const {
        std::complex<double> y{parallel_g, parallel_b / h};
        if (has_series) y += 1.0 / std::complex<double>{series_z.real(), h * series_z.imag()};
        return y;
    }
};

/// Device admittance attached to a bus (system per-unit, canonical index).
struct DeviceShunt {
    std::size_t bus = 0;
    RlShunt model;
};

}  // namespace hflow
