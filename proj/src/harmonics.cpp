#include "hflow/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "hflow/errors.hpp"

namespace hflow {

Complex injection_from_spectrum(const HarmonicSpectrum& spectrum, Complex fundamental_current,
                                double slack_angle_deg, int k, const InjectionOptions& options) {
    const SpectrumEntry* entry = spectrum.find(k);
    if (entry == nullptr) {
        throw Error(ErrorKind::MissingOrder, "spectrum '" + spectrum.name() + "' has no order " +
                                                 std::to_string(k));
    }
    const double phi1 = std::arg(fundamental_current) * 180.0 / kPi;
    double angle = entry->angle_deg + k * (phi1 - slack_angle_deg);
    if (options.reverse_direction) angle += 180.0;
    angle = normalize_angle(angle);
    return std::polar(std::abs(fundamental_current) * entry->multiplier, angle * kPi / 180.0);
}

struct HarmonicSystem::Impl {
    std::size_t offset = 0;  // 1 when the slack is held at zero (stiff source)
    SparseMatrix base;
    SparseMatrix work;
    std::vector<Eigen::Index> diag_pos;
    Eigen::SparseLU<SparseMatrix> lu;
    bool analysed = false;
};

HarmonicSystem::HarmonicSystem(const NetworkModel& model, double h)
    : model_(&model), h_(h), impl_(std::make_unique<Impl>()) {
    const std::size_t n = model.bus_count();
    const Complex z_th = model.thevenin_impedance(h);
    impl_->offset = (z_th == Complex{}) ? 1 : 0;
    const std::size_t off = impl_->offset;
    const auto m = static_cast<Eigen::Index>(n - off);

    std::vector<Eigen::Triplet<Complex>> triplets;
    auto put = [&](std::size_t r, std::size_t c, Complex v) {
        if (r < off || c < off) return;
        triplets.emplace_back(static_cast<Eigen::Index>(r - off), static_cast<Eigen::Index>(c - off), v);
    };
    auto stamp = [&](std::size_t f, std::size_t t, const AdmittanceStamp& s) {
        put(f, f, s.ff);
        put(f, t, s.ft);
        put(t, f, s.tf);
        put(t, t, s.tt);
    };
    const auto& net = model.network();
    for (std::size_t j = 0; j < net.branches.size(); ++j) {
        stamp(model.branch_from(j), model.branch_to(j), model.branch_stamp(j, h));
    }
    for (std::size_t j = 0; j < net.transformers.size(); ++j) {
        stamp(model.transformer_from(j), model.transformer_to(j), model.transformer_stamp(j, h));
    }
    for (std::size_t j = 0; j < net.capacitor_banks.size(); ++j) {
        put(model.capacitor_bus(j), model.capacitor_bus(j), model.capacitor_shunt(j, h));
    }
    if (off == 0) put(0, 0, 1.0 / z_th);
    for (std::size_t i = off; i < n; ++i) put(i, i, Complex{});

    impl_->base.resize(m, m);
    impl_->base.setFromTriplets(triplets.begin(), triplets.end());
    impl_->base.makeCompressed();
    impl_->diag_pos.assign(static_cast<std::size_t>(m), -1);
    for (Eigen::Index col = 0; col < m; ++col) {
        const auto start = impl_->base.outerIndexPtr()[col];
        const auto end = impl_->base.outerIndexPtr()[col + 1];
        for (auto p = start; p < end; ++p) {
            if (impl_->base.innerIndexPtr()[p] == col) impl_->diag_pos[static_cast<std::size_t>(col)] = p;
        }
    }
    impl_->work = impl_->base;
}

HarmonicSystem::~HarmonicSystem() = default;
HarmonicSystem::HarmonicSystem(HarmonicSystem&&) noexcept = default;
HarmonicSystem& HarmonicSystem::operator=(HarmonicSystem&&) noexcept = default;

HarmonicSolution HarmonicSystem::solve(std::span<const NodalInjection> injections,
                                       std::span<const BusShunt> shunts) {
    auto& im = *impl_;
    const std::size_t n = model_->bus_count();
    const std::size_t off = im.offset;
    const auto m = static_cast<Eigen::Index>(n - off);

    std::copy(im.base.valuePtr(), im.base.valuePtr() + im.base.nonZeros(), im.work.valuePtr());
    for (const auto& s : shunts) {
        if (s.bus >= n) throw Error(ErrorKind::InternalInvariant, "shunt bus index out of range");
        if (s.bus < off) continue;
        im.work.valuePtr()[im.diag_pos[s.bus - off]] += s.admittance;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (im.work.valuePtr()[im.diag_pos[static_cast<std::size_t>(i)]] == Complex{}) {
            throw Error(ErrorKind::SingularNetwork,
                        "bus " + model_->bus_id(static_cast<std::size_t>(i) + off) +
                            " has a zero diagonal admittance at h=" + std::to_string(h_));
        }
    }

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m);
    for (const auto& inj : injections) {
        if (inj.bus >= n) throw Error(ErrorKind::InternalInvariant, "injection bus index out of range");
        if (inj.bus < off) continue;
        rhs(static_cast<Eigen::Index>(inj.bus - off)) += inj.current;
    }

    HarmonicSolution sol;
    sol.order = h_;
    sol.voltages.assign(n, Complex{});
    if (m == 0) return sol;

    if (!im.analysed) {
        im.lu.analyzePattern(im.work);
        im.analysed = true;
    }
    im.lu.factorize(im.work);
    if (im.lu.info() != Eigen::Success) {
        throw Error(ErrorKind::SingularNetwork,
                    "factorization failed at h=" + std::to_string(h_) + ": " + im.lu.lastErrorMessage());
    }
    const Eigen::VectorXcd x = im.lu.solve(rhs);
    const double residual = (im.work * x - rhs).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual) || residual >= kResidualBound) {
        std::ostringstream msg;
        msg << "solution residual " << residual << " at h=" << h_ << " exceeds " << kResidualBound;
        throw Error(ErrorKind::SingularNetwork, msg.str());
    }
    for (Eigen::Index i = 0; i < m; ++i) sol.voltages[static_cast<std::size_t>(i) + off] = x(i);
    sol.residual = residual;
    return sol;
}

std::vector<BusShunt> evaluate_shunts(std::span<const DeviceShunt> shunts, double h) {
    std::vector<BusShunt> out;
    out.reserve(shunts.size());
    for (const auto& s : shunts) out.push_back({s.bus, s.model.admittance(h)});
    return out;
}

HarmonicSolution solve_harmonic(const NetworkModel& model, int order,
                                std::span<const HarmonicInjection> injections,
                                std::span<const DeviceShunt> device_shunts) {
    if (order < 2) throw Error(ErrorKind::InvalidInput, "harmonic order must be >= 2");
    std::vector<NodalInjection> nodal;
    nodal.reserve(injections.size());
    for (const auto& inj : injections) {
        if (inj.order != order) {
            throw Error(ErrorKind::InvalidInput, "injection at bus " + inj.bus + " is for order " +
                                                     std::to_string(inj.order));
        }
        if (!std::isfinite(inj.current.real()) || !std::isfinite(inj.current.imag())) {
            throw Error(ErrorKind::InvalidInput, "non-finite injection at bus " + inj.bus);
        }
        nodal.push_back({model.index_of(inj.bus), inj.current});
    }
    const auto shunts = evaluate_shunts(device_shunts, order);
    HarmonicSystem system(model, order);
    return system.solve(nodal, shunts);
}

ImpedanceCurve frequency_scan(const NetworkModel& model, const std::string& bus, double f_min,
                              double f_max, double step,
                              std::span<const DeviceShunt> device_shunts) {
    if (!(f_min > 0.0) || !(f_max > f_min) || !(step > 0.0)) {
        throw Error(ErrorKind::InvalidInput, "scan requires 0 < f_min < f_max and step > 0");
    }
    const std::size_t target = model.index_of(bus);
    ImpedanceCurve curve;
    curve.bus = bus;
    const auto count = static_cast<std::size_t>(std::floor((f_max - f_min) / step + 1e-9)) + 1;
    curve.points.reserve(count);
    // 1 A expressed in the per-unit current base of the scanned bus.
    const NodalInjection unit{target, Complex{1.0 / model.current_base(target), 0.0}};
    for (std::size_t i = 0; i < count; ++i) {
        const double f = f_min + static_cast<double>(i) * step;
        const double h = f / model.base_frequency();
        try {
            HarmonicSystem system(model, h);
            const auto shunts = evaluate_shunts(device_shunts, h);
            const auto sol = system.solve(std::span(&unit, 1), shunts);
            const Complex volts = sol.voltages[target] * model.voltage_base(target);
            curve.points.push_back({f, volts / 1.0});
        } catch (const Error& e) {
            if (classify(e.kind()) != FailureClass::Numerical) throw;
            curve.failures.push_back({f, e.what()});
        }
    }
    return curve;
}

std::optional<double> peak_frequency(const ImpedanceCurve& curve) {
    if (curve.points.empty()) return std::nullopt;
    const auto it = std::max_element(curve.points.begin(), curve.points.end(),
                                     [](const ImpedancePoint& a, const ImpedancePoint& b) {
                                         return std::abs(a.impedance_ohm) < std::abs(b.impedance_ohm);
                                     });
    return it->frequency_hz;
}

Complex parallel_resonance_impedance(double l_sys, double c, double f) {
    if (!(l_sys > 0.0) || !(c > 0.0) || !(f > 0.0)) {
        throw Error(ErrorKind::InvalidInput, "L, C and f must be positive");
    }
    const double w = 2.0 * kPi * f;
    const double denom = 1.0 - w * w * l_sys * c;
    if (std::abs(denom) < 1e-12) {
        throw Error(ErrorKind::ResonancePole, "undamped pole at f=" + std::to_string(f) + " Hz");
    }
    return Complex{0.0, w * l_sys} / denom;
}

double resonant_frequency(double l_sys, double c) {
    if (!(l_sys > 0.0) || !(c > 0.0)) throw Error(ErrorKind::InvalidInput, "L and C must be positive");
    return 1.0 / (2.0 * kPi * std::sqrt(l_sys * c));
}

}  // namespace hflow
