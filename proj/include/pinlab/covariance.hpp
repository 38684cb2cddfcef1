#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pinlab {

struct SpectralBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

// Stationary covariance sequence gamma_k with summable absolute values.
// Construction certifies positive semidefiniteness through the Toeplitz
// symbol g(theta) = gamma_0 + 2 sum_{k>=1} gamma_k cos(k theta) evaluated on
// a 4096-point grid (plus a closed-form tail slack for infinite families).
class CovarianceSpec {
public:
    enum class Family { Iid, FiniteRange, ExpDecay, PowerLaw };

    static CovarianceSpec iid(double sigma2, std::string label = "iid");
    static CovarianceSpec finite_range(std::vector<double> gammas,
                                       std::string label = "finite-range");
    static CovarianceSpec exp_decay(double gamma0, double rho, std::string label = "exp-decay");
    // gamma_0 free, gamma_k = C k^{-1-a} for k >= 1.
    static CovarianceSpec power_law(double gamma0, double c, double a,
                                    std::string label = "power-law");

    [[nodiscard]] Family family() const { return family_; }
    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] const std::vector<double>& params() const { return params_; }

    [[nodiscard]] double gamma(std::int64_t k) const;
    [[nodiscard]] double gamma_bar() const { return gamma_bar_; }            // closed form
    [[nodiscard]] double gamma_bar_n(std::int64_t n) const;                  // partial sum
    [[nodiscard]] double tail_abs_sum(std::int64_t r) const;                 // sum_{k>r} |gamma_k|

    // FiniteRange spec with gamma_r(0) = gamma_0 + 2 sum_{k>r} |gamma_k|,
    // gamma_r(k) = gamma_k for 1 <= k <= r, zero beyond. Identity on Iid and
    // on FiniteRange inputs whose range is already <= r.
    [[nodiscard]] CovarianceSpec truncate(std::int64_t r) const;

    [[nodiscard]] SpectralBounds spectral_bounds(std::int64_t n) const;

    // Grid lower/upper bounds for the symbol (tail slack already applied).
    [[nodiscard]] double symbol_min() const { return symbol_min_; }
    [[nodiscard]] double symbol_max() const { return symbol_max_; }
    [[nodiscard]] bool invertible_certificate() const { return symbol_min_ > 0.0; }

    bool operator==(const CovarianceSpec& other) const;

private:
    CovarianceSpec() = default;
    void certify();

    Family family_ = Family::Iid;
    std::vector<double> params_;        // family-dependent layout
    std::vector<double> range_gammas_;  // FiniteRange storage
    std::string label_;
    double gamma_bar_ = 0.0;
    double symbol_min_ = 0.0;
    double symbol_max_ = 0.0;
};

}  // namespace pinlab
