#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rankwatch::fisher {

/// A density supported on [0, 1], with what the information study needs.
struct ToyDensity {
    std::string name;
    std::function<double(double)> pdf;
    std::function<double(double)> pdf_derivative;
    std::function<double(double)> cdf;
    std::function<double(double)> survival;  // 1 - cdf, accurate near 1
    double mean = 0.0;
    double variance = 0.0;
};

/// p(x) = 30 x^2 (1 - x)^2. Checked numerically on first use.
const ToyDensity& beta33();

/// Looks up a built-in density by name ("beta33").
std::optional<std::reference_wrapper<const ToyDensity>> builtin_density(std::string_view name);

/// Integral of p over [0, 1] and E[(p'/p)(X)^2], by adaptive quadrature.
double total_mass(const ToyDensity& d);
double score_second_moment(const ToyDensity& d);

/// Integral of q(t) = -t p'(t) over [0, 1]; equals 1 for a density vanishing at 1.
double tilted_kernel_mass(const ToyDensity& d);

/// Adaptive Gauss-Kronrod on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-11);

enum class Method { max_analytic, sum_fft };

struct FisherEstimate {
    int dim = 0;
    double theta = 0.0;
    double value = 0.0;
    double target = 0.0;
    Method method = Method::max_analytic;
};

/// Var((theta v X) (p'/p)(theta v X)) / theta^2 with X ~ p.
double limit_info_max(const ToyDensity& d, double theta);

/// D^-1 mu^2 / (theta^4 sigma^2).
double info_sum_target(const ToyDensity& d, double theta, int dim);

/// Score d/dtheta log f_{D,theta}(y) of the maximum of D - 1 draws from p and
/// one draw from theta p(theta .).
double max_score(const ToyDensity& d, double theta, int dim, double y);

/// Inverse of the survival function by bisection.
double quantile_from_survival(const ToyDensity& d, double tail);

/// Monte Carlo variance of max_score over n_mc draws of the maximum.
FisherEstimate estimate_info_max(const ToyDensity& d, double theta, int dim, int n_mc,
                                 std::uint64_t seed);

class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Density of the sum of D - 1 draws from p and one from theta p(theta .),
/// sampled at spacing * k for k < grid_n, before any clipping.
struct SumDensity {
    double spacing = 0.0;
    std::vector<double> values;

    double mass() const;
    double min_value() const;
    double negative_mass() const;
};

/// Grid over [0, extent] with extent >= D - 1 + 1/theta.
SumDensity sum_density(const ToyDensity& d, double theta, int dim, int grid_n, double extent);

/// Smallest power of two >= 2^14 giving at least 512 grid points per unit
/// of the sum's support.
int default_grid_size(int dim, double theta);

/// Central finite difference in theta of log g on a shared spectral grid.
/// dtheta <= 0 selects 1e-4 * theta.
FisherEstimate estimate_info_sum(const ToyDensity& d, double theta, int dim,
                                 int grid_n = 1 << 16, double dtheta = 0.0);

}  // namespace rankwatch::fisher
