#include "rankwatch/fisher.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>

#include "rankwatch/random.hpp"

namespace rankwatch::fisher {

namespace {

void check_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
}

ToyDensity make_beta33() {
    ToyDensity d;
    d.name = "beta33";
    d.pdf = [](double x) {
        if (x < 0.0 || x > 1.0) return 0.0;
        const double y = x * (1.0 - x);
        return 30.0 * y * y;
    };
    d.pdf_derivative = [](double x) {
        if (x < 0.0 || x > 1.0) return 0.0;
        return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    };
    d.cdf = [](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    };
    // symmetric about 1/2
    d.survival = [cdf = d.cdf](double x) { return cdf(1.0 - x); };
    d.mean = 0.5;
    d.variance = 1.0 / 28.0;
    return d;
}

// fftw planning is not thread-safe
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (p == nullptr) throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

/// Real-to-complex and back over a fixed length, owning its buffers.
class Spectral {
public:
    explicit Spectral(std::size_t n)
        : n_(n), real_(fftw_buffer<double>(n)), freq_(fftw_buffer<fftw_complex>(n / 2 + 1)) {
        std::lock_guard lock(planner_mutex());
        forward_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.get(), freq_.get(), FFTW_ESTIMATE));
        backward_.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), freq_.get(), real_.get(), FFTW_ESTIMATE));
    }

    std::size_t size() const { return n_; }
    std::size_t bins() const { return n_ / 2 + 1; }

    std::vector<std::complex<double>> forward(const std::vector<double>& x) {
        std::copy(x.begin(), x.end(), real_.get());
        std::fill(real_.get() + x.size(), real_.get() + n_, 0.0);
        fftw_execute(forward_.get());
        const auto* f = reinterpret_cast<const std::complex<double>*>(freq_.get());
        return {f, f + bins()};
    }

    std::vector<double> backward(const std::vector<std::complex<double>>& spec) {
        auto* f = reinterpret_cast<std::complex<double>*>(freq_.get());
        std::copy(spec.begin(), spec.end(), f);
        fftw_execute(backward_.get());
        std::vector<double> out(real_.get(), real_.get() + n_);
        for (auto& v : out) v /= static_cast<double>(n_);
        return out;
    }

private:
    std::size_t n_;
    FftwBuffer<double> real_;
    FftwBuffer<fftw_complex> freq_;
    Plan forward_;
    Plan backward_;
};

std::complex<double> ipow(std::complex<double> z, int e) {
    std::complex<double> acc(1.0, 0.0);
    while (e > 0) {
        if (e & 1) acc *= z;
        z *= z;
        e >>= 1;
    }
    return acc;
}

/// Cell masses of the density x -> scale p(scale x) on the grid.
std::vector<double> discretize(const ToyDensity& d, double scale, double spacing, int grid_n) {
    std::vector<double> w(grid_n, 0.0);
    for (int k = 0; k < grid_n; ++k) {
        const double x = scale * k * spacing;
        if (x > 1.0) break;
        w[k] = scale * d.pdf(x) * spacing;
    }
    return w;
}

class SumDensityEngine {
public:
    SumDensityEngine(const ToyDensity& d, int dim, int grid_n, double extent)
        : d_(d), grid_n_(grid_n), spacing_(extent / (grid_n - 1)), fft_(2 * static_cast<std::size_t>(grid_n)) {
        const auto base = fft_.forward(discretize(d, 1.0, spacing_, grid_n));
        base_power_.resize(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) base_power_[i] = ipow(base[i], dim - 1);
    }

    double spacing() const { return spacing_; }

    SumDensity density(double theta) {
        auto spec = fft_.forward(discretize(d_, theta, spacing_, grid_n_));
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= base_power_[i];
        auto full = fft_.backward(spec);
        SumDensity out;
        out.spacing = spacing_;
        out.values.assign(full.begin(), full.begin() + grid_n_);
        for (auto& v : out.values) v /= spacing_;
        return out;
    }

private:
    const ToyDensity& d_;
    int grid_n_;
    double spacing_;
    Spectral fft_;
    std::vector<std::complex<double>> base_power_;
};

void check_grid(int grid_n) {
    if (grid_n < (1 << 14) || (grid_n & (grid_n - 1)) != 0) {
        throw std::invalid_argument("grid_n must be a power of two >= 2^14");
    }
}

}  // namespace

const ToyDensity& beta33() {
    static const ToyDensity d = [] {
        auto built = make_beta33();
        if (std::abs(total_mass(built) - 1.0) > 1e-9 || !std::isfinite(score_second_moment(built))) {
            throw std::logic_error("beta33 failed its numerical self-check");
        }
        return built;
    }();
    return d;
}

std::optional<std::reference_wrapper<const ToyDensity>> builtin_density(std::string_view name) {
    if (name == "beta33") return std::cref(beta33());
    return std::nullopt;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

double total_mass(const ToyDensity& d) { return integrate(d.pdf, 0.0, 1.0); }

double score_second_moment(const ToyDensity& d) {
    return integrate(
        [&](double x) {
            const double p = d.pdf(x);
            if (p <= 0.0) return 0.0;
            const double dp = d.pdf_derivative(x);
            return dp * dp / p;
        },
        0.0, 1.0);
}

double tilted_kernel_mass(const ToyDensity& d) {
    return integrate([&](double t) { return -t * d.pdf_derivative(t); }, 0.0, 1.0);
}

double limit_info_max(const ToyDensity& d, double theta) {
    check_theta(theta);
    // h(y) = y p'(y) / p(y); X ~ p; the atom {X <= theta} carries h(theta).
    const double p_theta = d.pdf(theta);
    const double h_theta = p_theta > 0.0 ? theta * d.pdf_derivative(theta) / p_theta : 0.0;
    const double f_theta = d.cdf(theta);
    const double m1 = h_theta * f_theta + integrate([&](double x) { return x * d.pdf_derivative(x); }, theta, 1.0);
    const double m2 = h_theta * h_theta * f_theta + integrate(
                                                        [&](double x) {
                                                            const double p = d.pdf(x);
                                                            if (p <= 0.0) return 0.0;
                                                            const double xdp = x * d.pdf_derivative(x);
                                                            return xdp * xdp / p;
                                                        },
                                                        theta, 1.0);
    return (m2 - m1 * m1) / (theta * theta);
}

double info_sum_target(const ToyDensity& d, double theta, int dim) {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
    if (dim < 2) throw std::invalid_argument("dim must be at least 2");
    const double t2 = theta * theta;
    return d.mean * d.mean / (t2 * t2 * d.variance) / dim;
}

double max_score(const ToyDensity& d, double theta, int dim, double y) {
    const double ty = theta * y;
    const double p_scaled = d.pdf(ty);
    const double dp_scaled = d.pdf_derivative(ty);
    if (y >= 1.0) {
        // only the scaled draw can exceed 1
        return (p_scaled + ty * dp_scaled) / (theta * p_scaled);
    }
    // f = d/dy [F(y)^(D-1) F(theta y)], with F(y)^(D-2) divided out
    const double lead = (dim - 1.0) * d.pdf(y);
    const double fy = d.cdf(y);
    const double num = lead * y * p_scaled + fy * (p_scaled + ty * dp_scaled);
    const double den = lead * d.cdf(ty) + fy * theta * p_scaled;
    return num / den;
}

double quantile_from_survival(const ToyDensity& d, double tail) {
    if (tail <= 0.0) return 1.0;
    if (tail >= 1.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (d.survival(mid) > tail) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

FisherEstimate estimate_info_max(const ToyDensity& d, double theta, int dim, int n_mc,
                                 std::uint64_t seed) {
    check_theta(theta);
    if (dim < 2) throw std::invalid_argument("dim must be at least 2");
    if (n_mc < 2) throw std::invalid_argument("n_mc must be at least 2");
    Rng rng(seed);
    // Welford running variance
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n_mc; ++i) {
        const double scaled = quantile_from_survival(d, rng.uniform_open()) / theta;
        // max of D - 1 draws: P(M > x) = 1 - F(x)^(D-1)
        const double tail = -std::expm1(std::log(rng.uniform_open()) / (dim - 1.0));
        const double plain = quantile_from_survival(d, tail);
        const double s = max_score(d, theta, dim, std::max(scaled, plain));
        const double delta = s - mean;
        mean += delta / (i + 1);
        m2 += delta * (s - mean);
    }
    return {dim, theta, m2 / (n_mc - 1), limit_info_max(d, theta), Method::max_analytic};
}

double SumDensity::mass() const {
    double total = 0.0;
    for (const double v : values) total += std::max(v, 0.0);
    return total * spacing;
}

double SumDensity::min_value() const {
    return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

double SumDensity::negative_mass() const {
    double total = 0.0;
    for (const double v : values) total += std::min(v, 0.0);
    return -total * spacing;
}

SumDensity sum_density(const ToyDensity& d, double theta, int dim, int grid_n, double extent) {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
    if (dim < 2) throw std::invalid_argument("dim must be at least 2");
    check_grid(grid_n);
    if (extent < dim - 1.0 + 1.0 / theta) throw std::invalid_argument("grid extent too short");
    SumDensityEngine engine(d, dim, grid_n, extent);
    return engine.density(theta);
}

int default_grid_size(int dim, double theta) {
    const double extent = dim - 1.0 + 1.0 / theta;
    int n = 1 << 14;
    while (n < 512.0 * extent && n < (1 << 24)) n <<= 1;
    return n;
}

FisherEstimate estimate_info_sum(const ToyDensity& d, double theta, int dim, int grid_n,
                                 double dtheta) {
    check_theta(theta);
    if (dim < 2) throw std::invalid_argument("dim must be at least 2");
    check_grid(grid_n);
    if (dtheta <= 0.0) dtheta = 1e-4 * theta;
    if (dtheta >= 0.1 * theta) throw std::invalid_argument("dtheta must be much smaller than theta");

    // One grid for all three theta values so the finite difference is pointwise.
    const double extent = dim - 1.0 + 1.0 / (theta - dtheta);
    SumDensityEngine engine(d, dim, grid_n, extent);
    const auto g0 = engine.density(theta);
    const auto gp = engine.density(theta + dtheta);
    const auto gm = engine.density(theta - dtheta);
    for (const auto* g : {&g0, &gp, &gm}) {
        if (g->negative_mass() > 1e-6) {
            throw ResolutionError("spectral density has negative mass beyond 1e-6; grid too coarse");
        }
    }

    double peak = 0.0;
    for (const double v : g0.values) peak = std::max(peak, v);
    const double floor = 1e-13 * peak;
    double info = 0.0;
    for (std::size_t k = 0; k < g0.values.size(); ++k) {
        const double c = g0.values[k], hi = gp.values[k], lo = gm.values[k];
        if (c <= floor || hi <= 0.0 || lo <= 0.0) continue;
        const double score = (std::log(hi) - std::log(lo)) / (2.0 * dtheta);
        info += score * score * c;
    }
    info *= g0.spacing;
    return {dim, theta, info, info_sum_target(d, theta, dim), Method::sum_fft};
}

}  // namespace rankwatch::fisher
