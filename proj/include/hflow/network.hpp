#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

namespace hflow {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultBaseFrequency = 60.0;

struct Bus {
    std::string id;
    double nominal_voltage = 0.0;  // volts, line-to-ground
    bool is_slack = false;
};

/// Line segment. Values are totals for the segment at the base frequency.
struct Branch {
    std::string name;
    std::string from;
    std::string to;
    double resistance = 0.0;         // ohms
    double reactance = 0.0;          // ohms, inductive
    double shunt_susceptance = 0.0;  // siemens, total, split half per end
    bool length_scaled = true;
};

struct CapacitorBank {
    std::string name;
    std::string bus;
    double susceptance = 0.0;  // siemens at the base frequency
};

/// Two-winding transformer; leakage impedance in per-unit on its own rating.
struct TransformerBranch {
    std::string name;
    std::string from;
    std::string to;
    double rated_kva = 0.0;
    double leakage_r = 0.0;
    double leakage_x = 0.0;
    double turns_ratio = 1.0;
    bool constant_xr = false;
    bool blocks_triplen = false;
};

struct SourceEquivalent {
    std::string bus;
    double voltage_mag = 1.0;    // per-unit
    double voltage_angle = 0.0;  // degrees
    double thevenin_r = 0.0;     // ohms at the base frequency
    double thevenin_x = 0.0;
};

struct Network {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<TransformerBranch> transformers;
    std::vector<CapacitorBank> capacitor_banks;
    SourceEquivalent source;
    double base_frequency = kDefaultBaseFrequency;
    double per_unit_base_mva = 1.0;  // per-phase power base
};

/// Two-port admittance stamp: [[ff, ft], [tf, tt]].
struct AdmittanceStamp {
    Complex ff;
    Complex ft;
    Complex tf;
    Complex tt;
};

Complex branch_series_impedance(const Branch& branch, double h);
AdmittanceStamp branch_admittance(const Branch& branch, double h);

/// Leakage impedance at order h, per-unit on the transformer rating.
Complex transformer_impedance(const TransformerBranch& xfmr, double h);

/// Stamp in per-unit on the transformer rating. `off_nominal_tap` is the
/// from-side tap relative to the bus voltage bases.
AdmittanceStamp transformer_admittance(const TransformerBranch& xfmr, double h,
                                       double off_nominal_tap = 1.0);

Complex capacitor_admittance(const CapacitorBank& bank, double h);

bool is_triplen(double h);

enum class ViolationKind {
    MissingSlack,
    DuplicateSlack,
    DuplicateBusId,
    NonPositiveVoltage,
    DanglingReference,
    SelfLoop,
    NegativeImpedance,
    NonPositiveRating,
    NonPositiveReactance,
    NonPositiveTurnsRatio,
    NonPositiveSusceptance,
    NonPositiveSourceVoltage,
    SourceNotAtSlack,
    NominalVoltageMismatch,
    NonFiniteValue,
    InvalidBase,
    Disconnected,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string element;
    std::string rule;
};

std::vector<Violation> validate_network(const Network& network);

/// Shunt admittance added to a bus diagonal, in system per-unit.
struct BusShunt {
    std::size_t bus = 0;
    Complex admittance;
};

/// Validated, immutable view of a Network with canonical bus ordering
/// (slack first, then lexicographic by id) and per-unit bases.
class NetworkModel {
public:
    explicit NetworkModel(Network network);

    const Network& network() const noexcept { return network_; }

    std::size_t bus_count() const noexcept { return order_.size(); }
    const std::string& bus_id(std::size_t index) const { return order_.at(index); }
    const std::vector<std::string>& bus_order() const noexcept { return order_; }
    std::optional<std::size_t> find_bus(std::string_view id) const;
    std::size_t index_of(std::string_view id) const;
    static constexpr std::size_t slack_index() noexcept { return 0; }

    double base_power() const noexcept { return base_power_; }
    double base_frequency() const noexcept { return network_.base_frequency; }
    double voltage_base(std::size_t bus) const { return voltage_base_.at(bus); }
    double current_base(std::size_t bus) const { return base_power_ / voltage_base_.at(bus); }
    double impedance_base(std::size_t bus) const;

    Complex slack_voltage() const;  // per-unit
    /// Source Thevenin impedance at order h, per-unit. Zero means a stiff source.
    Complex thevenin_impedance(double h) const;

    std::size_t branch_from(std::size_t j) const { return branch_ends_.at(j).first; }
    std::size_t branch_to(std::size_t j) const { return branch_ends_.at(j).second; }
    std::size_t transformer_from(std::size_t j) const { return xfmr_ends_.at(j).first; }
    std::size_t transformer_to(std::size_t j) const { return xfmr_ends_.at(j).second; }
    std::size_t capacitor_bus(std::size_t j) const { return cap_bus_.at(j); }
    double transformer_tap(std::size_t j) const { return xfmr_tap_.at(j); }
    /// Transformer rated current in system per-unit (at 1 pu voltage).
    double transformer_rated_current(std::size_t j) const;

    // Element stamps in system per-unit.
    AdmittanceStamp branch_stamp(std::size_t j, double h) const;
    /// Zero stamp when the transformer blocks triplens and h is triplen.
    AdmittanceStamp transformer_stamp(std::size_t j, double h) const;
    Complex capacitor_shunt(std::size_t j, double h) const;

    /// Sum of element stamps plus `extra` shunts, canonical order. Throws
    /// SingularNetwork if a diagonal ends up exactly zero.
    SparseMatrix assemble(double h, std::span<const BusShunt> extra = {}) const;

private:
    Network network_;
    std::vector<std::string> order_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<double> voltage_base_;
    double base_power_ = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> branch_ends_;
    std::vector<std::pair<std::size_t, std::size_t>> xfmr_ends_;
    std::vector<double> xfmr_tap_;
    std::vector<std::size_t> cap_bus_;
};

SparseMatrix build_admittance(const NetworkModel& model, double h);

}  // namespace hflow
