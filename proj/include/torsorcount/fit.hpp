#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rational.hpp"

namespace torsorcount {

struct FitSample {
    double bound;  // B
    double count;  // N(B)
};

struct FitReport {
    double slope = 0;            // log-log slope of N against B
    double slope_corrected = 0;  // after removing the known log(B)^(b-1) drift
    double last_decade_mean = 0;
    double last_decade_spread = 0;  // (max - min) / mean over the last decade
    std::vector<double> ratios;     // N(B) / (B^a log(B)^(b-1)) per sample
};

// Reports the normalized counting sequence and a least-squares slope.  At
// least 10 samples spanning two decades are required.
inline FitReport empirical_fit(const std::vector<FitSample>& samples, const Rational& a,
                               long long b) {
    if (samples.size() < 10) throw std::invalid_argument("empirical_fit needs at least 10 samples");
    double bmin = samples.front().bound, bmax = samples.front().bound;
    for (const auto& s : samples) {
        bmin = std::min(bmin, s.bound);
        bmax = std::max(bmax, s.bound);
        if (s.bound <= 1.0 || s.count <= 0.0)
            throw std::invalid_argument("samples must have B > 1 and N > 0");
    }
    if (bmax < 100.0 * bmin) throw std::invalid_argument("samples must span at least two decades");

    FitReport rep;
    double av = a.to_double();
    for (const auto& s : samples)
        rep.ratios.push_back(s.count /
                             (std::pow(s.bound, av) * std::pow(std::log(s.bound), double(b - 1))));

    auto slope_of = [&](bool corrected) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& s : samples) {
            double x = std::log(s.bound);
            double y = std::log(s.count);
            if (corrected) y -= double(b - 1) * std::log(std::log(s.bound));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        double n = static_cast<double>(samples.size());
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    rep.slope = slope_of(false);
    rep.slope_corrected = slope_of(true);

    double lo = 1e300, hi = -1e300, sum = 0;
    int k = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].bound < bmax / 10.0) continue;
        lo = std::min(lo, rep.ratios[i]);
        hi = std::max(hi, rep.ratios[i]);
        sum += rep.ratios[i];
        ++k;
    }
    rep.last_decade_mean = sum / k;
    rep.last_decade_spread = (hi - lo) / rep.last_decade_mean;
    return rep;
}

} // namespace torsorcount
