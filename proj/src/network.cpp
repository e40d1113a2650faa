#include "hflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "hflow/errors.hpp"

namespace hflow {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::string branch_label(const Branch& b) {
    return "branch " + (b.name.empty() ? b.from + "->" + b.to : b.name);
}

std::string xfmr_label(const TransformerBranch& t) {
    return "transformer " + (t.name.empty() ? t.from + "->" + t.to : t.name);
}

std::string cap_label(const CapacitorBank& c) {
    return "capacitor " + (c.name.empty() ? "@" + c.bus : c.name);
}

void add_stamp(std::vector<Eigen::Triplet<Complex>>& triplets, std::size_t f, std::size_t t,
               const AdmittanceStamp& s) {
    const auto fi = static_cast<Eigen::Index>(f);
    const auto ti = static_cast<Eigen::Index>(t);
    triplets.emplace_back(fi, fi, s.ff);
    triplets.emplace_back(fi, ti, s.ft);
    triplets.emplace_back(ti, fi, s.tf);
    triplets.emplace_back(ti, ti, s.tt);
}

}  // namespace

Complex branch_series_impedance(const Branch& branch, double h) {
    return {branch.resistance, h * branch.reactance};
}

AdmittanceStamp branch_admittance(const Branch& branch, double h) {
    const Complex y = 1.0 / branch_series_impedance(branch, h);
    const Complex half_shunt{0.0, 0.5 * h * branch.shunt_susceptance};
    return {y + half_shunt, -y, -y, y + half_shunt};
}

Complex transformer_impedance(const TransformerBranch& xfmr, double h) {
    const double r = xfmr.constant_xr ? h * xfmr.leakage_r : xfmr.leakage_r;
    return {r, h * xfmr.leakage_x};
}

AdmittanceStamp transformer_admittance(const TransformerBranch& xfmr, double h,
                                       double off_nominal_tap) {
    const Complex y = 1.0 / transformer_impedance(xfmr, h);
    const double a = off_nominal_tap;
    return {y / (a * a), -y / a, -y / a, y};
}

Complex capacitor_admittance(const CapacitorBank& bank, double h) {
    return {0.0, h * bank.susceptance};
}

bool is_triplen(double h) {
    const double rounded = std::round(h);
    if (std::abs(h - rounded) > 1e-9) return false;
    return static_cast<long long>(rounded) % 3 == 0;
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::MissingSlack: return "MissingSlack";
        case ViolationKind::DuplicateSlack: return "DuplicateSlack";
        case ViolationKind::DuplicateBusId: return "DuplicateBusId";
        case ViolationKind::NonPositiveVoltage: return "NonPositiveVoltage";
        case ViolationKind::DanglingReference: return "DanglingReference";
        case ViolationKind::SelfLoop: return "SelfLoop";
        case ViolationKind::NegativeImpedance: return "NegativeImpedance";
        case ViolationKind::NonPositiveRating: return "NonPositiveRating";
        case ViolationKind::NonPositiveReactance: return "NonPositiveReactance";
        case ViolationKind::NonPositiveTurnsRatio: return "NonPositiveTurnsRatio";
        case ViolationKind::NonPositiveSusceptance: return "NonPositiveSusceptance";
        case ViolationKind::NonPositiveSourceVoltage: return "NonPositiveSourceVoltage";
        case ViolationKind::SourceNotAtSlack: return "SourceNotAtSlack";
        case ViolationKind::NominalVoltageMismatch: return "NominalVoltageMismatch";
        case ViolationKind::NonFiniteValue: return "NonFiniteValue";
        case ViolationKind::InvalidBase: return "InvalidBase";
        case ViolationKind::Disconnected: return "Disconnected";
    }
    return "Unknown";
}

std::vector<Violation> validate_network(const Network& net) {
    std::vector<Violation> out;
    auto violate = [&](ViolationKind k, std::string element, std::string rule) {
        out.push_back({k, std::move(element), std::move(rule)});
    };

    std::unordered_map<std::string, const Bus*> buses;
    std::size_t slack_count = 0;
    for (const auto& bus : net.buses) {
        const std::string label = "bus " + bus.id;
        if (!buses.emplace(bus.id, &bus).second) {
            violate(ViolationKind::DuplicateBusId, label, "bus ids must be unique");
        }
        if (!finite(bus.nominal_voltage)) {
            violate(ViolationKind::NonFiniteValue, label, "nominal_voltage must be finite");
        } else if (bus.nominal_voltage <= 0.0) {
            violate(ViolationKind::NonPositiveVoltage, label, "nominal_voltage must be > 0");
        }
        if (bus.is_slack) ++slack_count;
    }
    if (slack_count == 0) {
        violate(ViolationKind::MissingSlack, "network", "exactly one slack bus is required");
    } else if (slack_count > 1) {
        violate(ViolationKind::DuplicateSlack, "network",
                "exactly one slack bus is required, found " + std::to_string(slack_count));
    }
    if (!finite(net.base_frequency) || net.base_frequency <= 0.0 ||
        !finite(net.per_unit_base_mva) || net.per_unit_base_mva <= 0.0) {
        violate(ViolationKind::InvalidBase, "network",
                "base_frequency and per_unit_base_mva must be > 0");
    }

    auto known = [&](const std::string& id) { return buses.count(id) > 0; };
    auto check_ref = [&](const std::string& label, const std::string& id) {
        if (!known(id)) {
            violate(ViolationKind::DanglingReference, label, "unknown bus id '" + id + "'");
            return false;
        }
        return true;
    };

    for (const auto& b : net.branches) {
        const auto label = branch_label(b);
        const bool ends = check_ref(label, b.from) & check_ref(label, b.to);
        if (b.from == b.to) violate(ViolationKind::SelfLoop, label, "from must differ from to");
        if (!finite(b.resistance) || !finite(b.reactance) || !finite(b.shunt_susceptance)) {
            violate(ViolationKind::NonFiniteValue, label, "impedance values must be finite");
        } else {
            if (b.resistance < 0.0 || b.reactance < 0.0) {
                violate(ViolationKind::NegativeImpedance, label,
                        "resistance and reactance must be >= 0");
            } else if (b.resistance == 0.0 && b.reactance == 0.0) {
                violate(ViolationKind::NegativeImpedance, label,
                        "series impedance must be nonzero");
            }
        }
        if (ends && buses[b.from]->nominal_voltage != buses[b.to]->nominal_voltage) {
            violate(ViolationKind::NominalVoltageMismatch, label,
                    "line ends must share a nominal voltage; use a transformer");
        }
    }

    for (const auto& t : net.transformers) {
        const auto label = xfmr_label(t);
        check_ref(label, t.from);
        check_ref(label, t.to);
        if (t.from == t.to) violate(ViolationKind::SelfLoop, label, "from must differ from to");
        if (!finite(t.rated_kva) || !finite(t.leakage_r) || !finite(t.leakage_x) ||
            !finite(t.turns_ratio)) {
            violate(ViolationKind::NonFiniteValue, label, "parameters must be finite");
            continue;
        }
        if (t.rated_kva <= 0.0) violate(ViolationKind::NonPositiveRating, label, "rated_kva must be > 0");
        if (t.leakage_x <= 0.0) violate(ViolationKind::NonPositiveReactance, label, "leakage_x must be > 0");
        if (t.leakage_r < 0.0) violate(ViolationKind::NegativeImpedance, label, "leakage_r must be >= 0");
        if (t.turns_ratio <= 0.0) violate(ViolationKind::NonPositiveTurnsRatio, label, "turns_ratio must be > 0");
    }

    for (const auto& c : net.capacitor_banks) {
        const auto label = cap_label(c);
        check_ref(label, c.bus);
        if (!finite(c.susceptance) || c.susceptance <= 0.0) {
            violate(ViolationKind::NonPositiveSusceptance, label, "susceptance must be > 0");
        }
    }

    const auto& src = net.source;
    if (!finite(src.voltage_mag) || src.voltage_mag <= 0.0) {
        violate(ViolationKind::NonPositiveSourceVoltage, "source", "voltage_mag must be > 0");
    }
    if (!finite(src.voltage_angle) || !finite(src.thevenin_r) || !finite(src.thevenin_x)) {
        violate(ViolationKind::NonFiniteValue, "source", "source parameters must be finite");
    } else if (src.thevenin_r < 0.0 || src.thevenin_x < 0.0) {
        violate(ViolationKind::NegativeImpedance, "source", "Thevenin impedance must be >= 0");
    }
    if (!known(src.bus)) {
        violate(ViolationKind::DanglingReference, "source", "unknown bus id '" + src.bus + "'");
    } else if (!buses[src.bus]->is_slack) {
        violate(ViolationKind::SourceNotAtSlack, "source", "source must attach to the slack bus");
    }

    // Connectivity over all two-terminal elements with resolvable ends.
    if (!net.buses.empty()) {
        std::unordered_map<std::string, std::vector<std::string>> adj;
        auto link = [&](const std::string& a, const std::string& b) {
            if (known(a) && known(b)) {
                adj[a].push_back(b);
                adj[b].push_back(a);
            }
        };
        for (const auto& b : net.branches) link(b.from, b.to);
        for (const auto& t : net.transformers) link(t.from, t.to);
        std::set<std::string> seen{net.buses.front().id};
        std::queue<std::string> q;
        q.push(net.buses.front().id);
        while (!q.empty()) {
            const auto cur = q.front();
            q.pop();
            for (const auto& n : adj[cur]) {
                if (seen.insert(n).second) q.push(n);
            }
        }
        for (const auto& bus : net.buses) {
            if (!seen.count(bus.id)) {
                violate(ViolationKind::Disconnected, "bus " + bus.id,
                        "bus is not connected to the rest of the network");
            }
        }
    }
    return out;
}

NetworkModel::NetworkModel(Network network) : network_(std::move(network)) {
    const auto violations = validate_network(network_);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << violations.size() << " network violation(s):";
        for (const auto& v : violations) {
            msg << "\n  " << to_string(v.kind) << " [" << v.element << "] " << v.rule;
        }
        throw Error(ErrorKind::InvalidInput, msg.str());
    }

    std::string slack;
    std::vector<std::string> others;
    for (const auto& bus : network_.buses) {
        if (bus.is_slack) {
            slack = bus.id;
        } else {
            others.push_back(bus.id);
        }
    }
    std::sort(others.begin(), others.end());
    order_.push_back(slack);
    order_.insert(order_.end(), others.begin(), others.end());
    for (std::size_t i = 0; i < order_.size(); ++i) index_.emplace(order_[i], i);

    voltage_base_.assign(order_.size(), 0.0);
    for (const auto& bus : network_.buses) voltage_base_[index_.at(bus.id)] = bus.nominal_voltage;
    base_power_ = network_.per_unit_base_mva * 1e6;

    for (const auto& b : network_.branches) {
        branch_ends_.emplace_back(index_.at(b.from), index_.at(b.to));
    }
    for (const auto& t : network_.transformers) {
        const auto f = index_.at(t.from);
        const auto to = index_.at(t.to);
        xfmr_ends_.emplace_back(f, to);
        xfmr_tap_.push_back(t.turns_ratio * voltage_base_[to] / voltage_base_[f]);
    }
    for (const auto& c : network_.capacitor_banks) cap_bus_.push_back(index_.at(c.bus));
}

std::optional<std::size_t> NetworkModel::find_bus(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t NetworkModel::index_of(std::string_view id) const {
    const auto idx = find_bus(id);
    if (!idx) throw Error(ErrorKind::InvalidInput, "unknown bus id '" + std::string(id) + "'");
    return *idx;
}

double NetworkModel::impedance_base(std::size_t bus) const {
    const double v = voltage_base_.at(bus);
    return v * v / base_power_;
}

Complex NetworkModel::slack_voltage() const {
    const auto& s = network_.source;
    return std::polar(s.voltage_mag, s.voltage_angle * kPi / 180.0);
}

Complex NetworkModel::thevenin_impedance(double h) const {
    const auto& s = network_.source;
    return Complex{s.thevenin_r, h * s.thevenin_x} / impedance_base(slack_index());
}

double NetworkModel::transformer_rated_current(std::size_t j) const {
    return network_.transformers.at(j).rated_kva * 1e3 / base_power_;
}

AdmittanceStamp NetworkModel::branch_stamp(std::size_t j, double h) const {
    const double zb = impedance_base(branch_ends_.at(j).first);
    auto s = branch_admittance(network_.branches.at(j), h);
    s.ff *= zb;
    s.ft *= zb;
    s.tf *= zb;
    s.tt *= zb;
    return s;
}

AdmittanceStamp NetworkModel::transformer_stamp(std::size_t j, double h) const {
    const auto& t = network_.transformers.at(j);
    if (t.blocks_triplen && is_triplen(h)) return {};
    // Own-rating per-unit to system per-unit: y_sys = y_own * S_rated / S_base.
    const double scale = t.rated_kva * 1e3 / base_power_;
    auto s = transformer_admittance(t, h, xfmr_tap_.at(j));
    s.ff *= scale;
    s.ft *= scale;
    s.tf *= scale;
    s.tt *= scale;
    return s;
}

Complex NetworkModel::capacitor_shunt(std::size_t j, double h) const {
    return capacitor_admittance(network_.capacitor_banks.at(j), h) * impedance_base(cap_bus_.at(j));
}

SparseMatrix NetworkModel::assemble(double h, std::span<const BusShunt> extra) const {
    const auto n = static_cast<Eigen::Index>(bus_count());
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(4 * (branch_ends_.size() + xfmr_ends_.size()) + cap_bus_.size() +
                     extra.size() + bus_count());
    for (std::size_t j = 0; j < branch_ends_.size(); ++j) {
        add_stamp(triplets, branch_ends_[j].first, branch_ends_[j].second, branch_stamp(j, h));
    }
    for (std::size_t j = 0; j < xfmr_ends_.size(); ++j) {
        add_stamp(triplets, xfmr_ends_[j].first, xfmr_ends_[j].second, transformer_stamp(j, h));
    }
    for (std::size_t j = 0; j < cap_bus_.size(); ++j) {
        const auto b = static_cast<Eigen::Index>(cap_bus_[j]);
        triplets.emplace_back(b, b, capacitor_shunt(j, h));
    }
    for (const auto& s : extra) {
        const auto b = static_cast<Eigen::Index>(s.bus);
        triplets.emplace_back(b, b, s.admittance);
    }
    SparseMatrix y(n, n);
    y.setFromTriplets(triplets.begin(), triplets.end());
    y.makeCompressed();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y.coeff(i, i) == Complex{}) {
            throw Error(ErrorKind::SingularNetwork,
                        "bus " + order_[static_cast<std::size_t>(i)] +
                            " has a zero diagonal admittance at h=" + std::to_string(h));
        }
    }
    return y;
}

SparseMatrix build_admittance(const NetworkModel& model, double h) { return model.assemble(h); }

}  // namespace hflow
