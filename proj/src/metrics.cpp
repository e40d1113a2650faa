#include "hflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hflow/errors.hpp"

namespace hflow {

double thd(const HarmonicSet& set) {
    if (!(set.fundamental > 0.0)) throw Error(ErrorKind::ZeroFundamental, "fundamental magnitude must be > 0");
    double sum = 0.0;
    for (const auto& c : set.components) sum += c.magnitude * c.magnitude;
    return 100.0 * std::sqrt(sum) / set.fundamental;
}

double eddy_current_loss(const HarmonicSet& set, double p_ec_r) {
    double sum = set.fundamental * set.fundamental;
    for (const auto& c : set.components) sum += c.magnitude * c.magnitude * c.order * c.order;
    return p_ec_r * sum;
}

double eddy_harmonic_component(const HarmonicSet& set, double p_ec_r) {
    double sum = 0.0;
    for (const auto& c : set.components) sum += c.magnitude * c.magnitude * c.order * c.order;
    return p_ec_r * sum;
}

SeriesSummary summarize(std::span<const double> series) {
    if (series.empty()) throw Error(ErrorKind::EmptySeries, "cannot summarize an empty series");
    std::vector<double> s(series.begin(), series.end());
    std::sort(s.begin(), s.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(s.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, s.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return s[lo] + frac * (s[hi] - s[lo]);
    };
    SeriesSummary out;
    out.min = s.front();
    out.max = s.back();
    out.q1 = quantile(0.25);
    out.median = quantile(0.5);
    out.q3 = quantile(0.75);
    out.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    return out;
}

}  // namespace hflow
