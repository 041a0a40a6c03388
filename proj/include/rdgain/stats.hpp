#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rdgain/errors.hpp"

namespace rdgain {

/// Inter-execution statistics of an event sequence.
struct EventStats {
    std::size_t count = 0;  // events, including the first
    bool defined = false;   // needs at least two events
    double mean_inter_execution = std::numeric_limits<double>::quiet_NaN();
    double std_dev = std::numeric_limits<double>::quiet_NaN();  // population (divide by N)
    double coefficient_of_variation = std::numeric_limits<double>::quiet_NaN();
    double sample_coefficient_of_variation = std::numeric_limits<double>::quiet_NaN();  // divide by N - 1
};

/// Statistics of a set of inter-execution times gathered from `event_count` events.
inline EventStats interval_statistics(std::span<const double> intervals, std::size_t event_count) {
    EventStats s;
    s.count = event_count;
    if (intervals.empty()) return s;
    s.defined = true;
    double sum = 0.0;
    for (double d : intervals) sum += d;
    const auto n = static_cast<double>(intervals.size());
    s.mean_inter_execution = sum / n;
    double ss = 0.0;
    for (double d : intervals) ss += (d - s.mean_inter_execution) * (d - s.mean_inter_execution);
    s.std_dev = std::sqrt(ss / n);
    s.coefficient_of_variation = s.std_dev / s.mean_inter_execution;
    s.sample_coefficient_of_variation =
        intervals.size() > 1 ? std::sqrt(ss / (n - 1.0)) / s.mean_inter_execution : 0.0;
    return s;
}

inline std::vector<double> inter_execution_times(std::span<const double> event_times) {
    std::vector<double> out;
    for (std::size_t a = 1; a < event_times.size(); ++a) {
        const double d = event_times[a] - event_times[a - 1];
        if (!(d > 0.0)) throw ValidationError("event_statistics: event times must be strictly increasing");
        out.push_back(d);
    }
    return out;
}

/// Count, mean of consecutive differences, and their standard deviation over
/// the mean. Undefined (flagged) with fewer than two events.
inline EventStats event_statistics(std::span<const double> event_times) {
    const auto d = inter_execution_times(event_times);
    return interval_statistics(d, event_times.size());
}

}  // namespace rdgain
