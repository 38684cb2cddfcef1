#pragma once

#include <cmath>
#include <limits>

namespace pinlab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp accumulator with a running maximum. Rescales the
// partial sum whenever a new maximum arrives, so no n-length temporaries
// are materialized.
class LogSumExp {
public:
    void add(double x) {
        if (x == kNegInf) return;
        if (x <= max_) {
            sum_ += std::exp(x - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
    }

    [[nodiscard]] double value() const {
        if (max_ == kNegInf) return kNegInf;
        return max_ + std::log(sum_);
    }

    [[nodiscard]] bool empty() const { return max_ == kNegInf; }

private:
    double max_ = kNegInf;
    double sum_ = 0.0;
};

inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

// Kahan compensated accumulator for long sums of small positive terms.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    [[nodiscard]] double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace pinlab
