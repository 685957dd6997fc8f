#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace aggecon::stats {

struct Histogram {
    std::vector<double> edges;          // strictly increasing, counts.size() + 1
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
};

// Fixed-width histogram from 0; values must be >= 0.
Histogram fixed_width_histogram(std::span<const double> values, double bin_width);

// Natural-log Shannon entropy of a probability vector. Entries must be >= 0
// and sum to 1 within 1e-9 (zero entries contribute nothing); otherwise
// throws std::domain_error.
double shannon_entropy(std::span<const double> probs);

// Wealth entropy S_m: histogram the per-aggregate wealths with fixed
// bin_width from 0, normalize by the number of aggregates, and take the
// Shannon entropy.
double entropy_money(std::span<const double> aggregate_wealths, double bin_width);

// Size entropy S_d: exact categorical entropy over the observed size values
// (sizes are already discrete, no binning).
double entropy_size(std::span<const std::int64_t> sizes);

// The double-log tail transform: for strictly positive samples, emits
// (ln x, ln(-ln CCDF(x))) at each distinct sample value, with the empirical
// CCDF taken at rank/(n+1) plotting positions so both transforms stay finite.
// Requires >= 10 samples and at least two distinct values.
std::vector<std::pair<double, double>> loglog_ccdf(std::span<const double> samples);

// Straight-line fit of the transformed pairs inside [x_lo, x_hi].
struct SlopeFit {
    double beta = 0.0;       // slope = tail exponent
    double intercept = 0.0;  // = -beta * ln x0
    double r2 = 0.0;
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::int64_t n_points = 0;
};

// Ordinary least squares over pairs with x in [x_lo, x_hi]; requires >= 5
// points inside the range.
SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs, double x_lo, double x_hi);

// Same, over the default range: the central 80% of the x span (the transform
// is noise-dominated at both ends).
SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs);

// Saturation fit S(t) = a (1 - exp(-(t/tau)^xi)).
struct StretchedExpFit {
    double a = 0.0;
    double tau = 0.0;
    double xi = 0.0;
    double rss = 0.0;
    bool converged = false;  // refinement reached the 1e-4 relative tolerance
};

// Residual sum of squares of the model at given parameters.
double stretched_exp_rss(std::span<const double> times, std::span<const double> values, double a,
                         double tau, double xi);

// The coarse (tau, xi) search grid used by the fitter, derived from the time
// span of the data. Exposed so tests can verify the fit never regresses below
// a grid point.
std::vector<std::pair<double, double>> stretched_exp_grid(std::span<const double> times);

// Fits by scanning the coarse grid with the conditionally-linear amplitude
// solved per grid point, then refining (tau, xi) in log space by Nelder-Mead
// to relative tolerance 1e-4. A fit that exhausts its iteration budget is
// returned with converged = false.
StretchedExpFit fit_stretched_exponential(std::span<const double> times,
                                          std::span<const double> values);

// Goodness-of-fit statistics. A reference is either discrete (pmf over an
// integer support) or continuous (cdf); the kinds requiring the other flavour
// throw std::invalid_argument.
struct ReferenceDistribution {
    bool discrete = false;
    std::function<double(std::int64_t)> pmf;  // discrete
    std::int64_t support_lo = 0;
    std::int64_t support_hi = 0;
    std::function<double(double)> cdf;        // continuous
};

enum class GofKind { ks, total_variation, chi_square };

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
double ks_statistic_discrete(std::span<const std::int64_t> samples,
                             const std::function<double(std::int64_t)>& pmf, std::int64_t lo,
                             std::int64_t hi);
double total_variation_discrete(std::span<const std::int64_t> samples,
                                const std::function<double(std::int64_t)>& pmf, std::int64_t lo,
                                std::int64_t hi);
double chi_square_discrete(std::span<const std::int64_t> samples,
                           const std::function<double(std::int64_t)>& pmf, std::int64_t lo,
                           std::int64_t hi);

double gof_distance(std::span<const double> continuous_samples,
                    std::span<const std::int64_t> discrete_samples,
                    const ReferenceDistribution& ref, GofKind kind);

}  // namespace aggecon::stats
