#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hflow/network.hpp"

namespace hflow {

/// Specified consumption at a bus (load positive), in watts and vars.
struct PowerInjection {
    std::string bus;
    double p_spec = 0.0;
    double q_spec = 0.0;
};

struct PowerFlowOptions {
    double tolerance = 1e-6;  // per-unit
    int max_iterations = 100;
    double voltage_floor = 0.1;  // per-unit
};

struct FundamentalSolution {
    std::vector<Complex> voltages;            // per-unit, canonical bus order
    std::vector<Complex> injection_currents;  // per-unit, into the network
    int iterations = 0;
    double max_mismatch = 0.0;  // per-unit power mismatch at non-slack buses
    std::vector<double> trace;  // max voltage update per iteration
};

/// Current drawn by a constant-power load: (P - jQ) / conj(V). The injection
/// into the network is the negation. Throws CollapsedVoltage below `floor`.
Complex nodal_current(double p_spec, double q_spec, Complex v, double floor = 0.1);

/// Fixed-point current-injection solver for the fundamental. The non-slack
/// block of Y(1) is factorized once at construction and reused by every
/// solve, so one instance serves a whole time series.
class FundamentalSolver {
public:
    explicit FundamentalSolver(const NetworkModel& model);
    ~FundamentalSolver();
    FundamentalSolver(FundamentalSolver&&) noexcept;
    FundamentalSolver& operator=(FundamentalSolver&&) noexcept;

    /// `demand` holds per-bus consumption in system per-unit (P + jQ).
    FundamentalSolution solve(std::span<const Complex> demand,
                              const PowerFlowOptions& options = {}) const;

    const NetworkModel& model() const noexcept { return *model_; }

private:
    struct Impl;
    const NetworkModel* model_;
    std::unique_ptr<Impl> impl_;
};

FundamentalSolution solve_fundamental(const NetworkModel& model,
                                      std::span<const PowerInjection> injections,
                                      const PowerFlowOptions& options = {});

}  // namespace hflow
