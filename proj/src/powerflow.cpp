#include "hflow/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "hflow/errors.hpp"

namespace hflow {

Complex nodal_current(double p_spec, double q_spec, Complex v, double floor) {
    if (std::abs(v) < floor) {
        std::ostringstream msg;
        msg << "|V| = " << std::abs(v) << " pu is below the " << floor << " pu floor";
        throw Error(ErrorKind::CollapsedVoltage, msg.str());
    }
    return Complex{p_spec, -q_spec} / std::conj(v);
}

struct FundamentalSolver::Impl {
    SparseMatrix y_full;
    Eigen::SparseLU<SparseMatrix> lu;
    Eigen::VectorXcd y_ns_s;  // coupling of non-slack rows to the slack column
};

FundamentalSolver::FundamentalSolver(const NetworkModel& model)
    : model_(&model), impl_(std::make_unique<Impl>()) {
    impl_->y_full = model.assemble(1.0);
    const auto n = impl_->y_full.rows();
    const auto m = n - 1;
    impl_->y_ns_s = Eigen::VectorXcd::Zero(m);
    if (m == 0) return;

    std::vector<Eigen::Triplet<Complex>> triplets;
    for (Eigen::Index col = 0; col < n; ++col) {
        for (SparseMatrix::InnerIterator it(impl_->y_full, col); it; ++it) {
            if (it.row() == 0) continue;
            if (col == 0) {
                impl_->y_ns_s(it.row() - 1) = it.value();
            } else {
                triplets.emplace_back(it.row() - 1, col - 1, it.value());
            }
        }
    }
    SparseMatrix y_nn(m, m);
    y_nn.setFromTriplets(triplets.begin(), triplets.end());
    y_nn.makeCompressed();
    impl_->lu.compute(y_nn);
    if (impl_->lu.info() != Eigen::Success) {
        throw Error(ErrorKind::SingularNetwork, "factorization of the non-slack block of Y(1) failed");
    }
}

FundamentalSolver::~FundamentalSolver() = default;
FundamentalSolver::FundamentalSolver(FundamentalSolver&&) noexcept = default;
FundamentalSolver& FundamentalSolver::operator=(FundamentalSolver&&) noexcept = default;

FundamentalSolution FundamentalSolver::solve(std::span<const Complex> demand,
                                             const PowerFlowOptions& options) const {
    const auto n = static_cast<Eigen::Index>(model_->bus_count());
    if (static_cast<Eigen::Index>(demand.size()) != n) {
        throw Error(ErrorKind::InternalInvariant, "demand vector does not match bus count");
    }
    const auto m = n - 1;
    const Complex vs = model_->slack_voltage();

    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
    v(0) = vs;

    FundamentalSolution sol;
    auto mismatch = [&](const Eigen::VectorXcd& volts) {
        const Eigen::VectorXcd i_net = impl_->y_full * volts;
        double worst = 0.0;
        for (Eigen::Index i = 1; i < n; ++i) {
            const Complex s_inj = volts(i) * std::conj(i_net(i));
            const Complex s_spec = -demand[static_cast<std::size_t>(i)];
            worst = std::max(worst, std::abs(s_inj - s_spec));
        }
        return worst;
    };

    const Eigen::VectorXcd slack_term = impl_->y_ns_s * vs;
    Eigen::VectorXcd rhs(m);
    bool converged = (m == 0);
    int iter = 0;
    while (!converged && iter < options.max_iterations) {
        ++iter;
        try {
            for (Eigen::Index i = 1; i < n; ++i) {
                const Complex s = demand[static_cast<std::size_t>(i)];
                rhs(i - 1) = -nodal_current(s.real(), s.imag(), v(i), options.voltage_floor);
            }
        } catch (const Error& e) {
            throw ConvergenceError("fixed-point iterate collapsed at iteration " +
                                       std::to_string(iter) + " (" + e.what() + ")",
                                   sol.trace);
        }
        rhs -= slack_term;
        const Eigen::VectorXcd next = impl_->lu.solve(rhs);
        double step = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            step = std::max(step, std::abs(next(i) - v(i + 1)));
        }
        if (!std::isfinite(step)) {
            throw ConvergenceError("fixed-point iterate became non-finite", sol.trace);
        }
        v.tail(m) = next;
        sol.trace.push_back(step);
        if (step < options.tolerance && mismatch(v) < options.tolerance) converged = true;
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "no convergence after " << iter << " iterations (last update "
            << (sol.trace.empty() ? 0.0 : sol.trace.back()) << " pu)";
        throw ConvergenceError(msg.str(), sol.trace);
    }

    const Eigen::VectorXcd i_net = impl_->y_full * v;
    sol.voltages.assign(v.data(), v.data() + n);
    sol.injection_currents.assign(i_net.data(), i_net.data() + n);
    sol.iterations = iter;
    sol.max_mismatch = mismatch(v);
    return sol;
}

FundamentalSolution solve_fundamental(const NetworkModel& model,
                                      std::span<const PowerInjection> injections,
                                      const PowerFlowOptions& options) {
    std::vector<Complex> demand(model.bus_count());
    for (const auto& inj : injections) {
        if (!std::isfinite(inj.p_spec) || !std::isfinite(inj.q_spec)) {
            throw Error(ErrorKind::InvalidInput, "non-finite injection at bus " + inj.bus);
        }
        demand[model.index_of(inj.bus)] += Complex{inj.p_spec, inj.q_spec} / model.base_power();
    }
    return FundamentalSolver(model).solve(demand, options);
}

}  // namespace hflow
