#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pinlab {

// Welford-style (count, mean, M2) accumulator; merges are associative.
class MeanVar {
public:
    void add(double x);
    void merge(const MeanVar& other);
    [[nodiscard]] std::int64_t count() const { return n_; }
    [[nodiscard]] double mean() const { return mean_; }
    [[nodiscard]] double variance() const;      // unbiased, 0 if n < 2
    [[nodiscard]] double std_dev() const;
    [[nodiscard]] double std_error() const;     // std_dev / sqrt(n)

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

MeanVar accumulate(std::span<const double> xs);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> xs);   // by value, partial-sorts a copy

// Standard normal CDF.
double normal_cdf(double x);

// One-sample Kolmogorov-Smirnov distance against the standard normal.
double ks_distance_normal(std::vector<double> sample);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace pinlab
