#include "aggecon/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace aggecon::stats {

Histogram fixed_width_histogram(std::span<const double> values, double bin_width) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin_width must be > 0");
    if (values.empty()) throw std::invalid_argument("histogram of empty sample");

    std::int64_t max_bin = 0;
    std::vector<std::int64_t> bins(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0.0) throw std::invalid_argument("histogram values must be >= 0");
        bins[i] = static_cast<std::int64_t>(std::floor(values[i] / bin_width));
        max_bin = std::max(max_bin, bins[i]);
    }

    Histogram h;
    h.counts.assign(static_cast<std::size_t>(max_bin) + 1, 0);
    for (auto b : bins) ++h.counts[static_cast<std::size_t>(b)];
    h.total = static_cast<std::int64_t>(values.size());
    h.edges.resize(h.counts.size() + 1);
    for (std::size_t i = 0; i < h.edges.size(); ++i)
        h.edges[i] = static_cast<double>(i) * bin_width;
    return h;
}

double shannon_entropy(std::span<const double> probs) {
    double sum = 0.0;
    double s = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::domain_error("shannon_entropy: negative probability");
        sum += p;
        if (p > 0.0) s -= p * std::log(p);
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::domain_error("shannon_entropy: probabilities do not sum to 1");
    return s;
}

double entropy_money(std::span<const double> aggregate_wealths, double bin_width) {
    const auto h = fixed_width_histogram(aggregate_wealths, bin_width);
    std::vector<double> probs;
    probs.reserve(h.counts.size());
    for (auto c : h.counts)
        probs.push_back(static_cast<double>(c) / static_cast<double>(h.total));
    return shannon_entropy(probs);
}

double entropy_size(std::span<const std::int64_t> sizes) {
    if (sizes.empty()) throw std::invalid_argument("entropy_size of empty sample");
    std::vector<std::int64_t> sorted(sizes.begin(), sizes.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double s = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double p = static_cast<double>(j - i) / n;
        s -= p * std::log(p);
        i = j;
    }
    return s;
}

std::vector<std::pair<double, double>> loglog_ccdf(std::span<const double> samples) {
    if (samples.size() < 10) throw std::invalid_argument("loglog_ccdf needs at least 10 samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    if (!(sorted.front() > 0.0))
        throw std::invalid_argument("loglog_ccdf needs strictly positive samples");
    if (sorted.front() == sorted.back())
        throw std::invalid_argument("loglog_ccdf: all samples equal (degenerate CCDF)");

    const double n_plus_1 = static_cast<double>(sorted.size()) + 1.0;
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        // plotting position at the last tied rank keeps the CCDF in (0, 1)
        const double ccdf = 1.0 - static_cast<double>(j) / n_plus_1;
        pairs.emplace_back(std::log(sorted[i]), std::log(-std::log(ccdf)));
        i = j;
    }
    return pairs;
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs, double x_lo, double x_hi) {
    double sx = 0.0, sy = 0.0;
    std::int64_t n = 0;
    for (const auto& [x, y] : pairs) {
        if (x < x_lo || x > x_hi) continue;
        sx += x;
        sy += y;
        ++n;
    }
    if (n < 5) throw std::invalid_argument("fit_slope needs >= 5 points inside the range");
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : pairs) {
        if (x < x_lo || x > x_hi) continue;
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: degenerate x values");

    SlopeFit fit;
    fit.beta = sxy / sxx;
    fit.intercept = my - fit.beta * mx;
    const double rss = syy - fit.beta * sxy;
    fit.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    fit.x_lo = x_lo;
    fit.x_hi = x_hi;
    fit.n_points = n;
    return fit;
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty()) throw std::invalid_argument("fit_slope: no pairs");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : pairs) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    const double span = hi - lo;
    return fit_slope(pairs, lo + 0.1 * span, lo + 0.9 * span);
}

namespace {

struct CondFit {
    double a = 0.0;
    double rss = 0.0;
};

// Best amplitude for fixed (tau, xi): the model is linear in a.
CondFit conditional_amplitude(std::span<const double> t, std::span<const double> v, double tau,
                              double xi) {
    double sg2 = 0.0, svg = 0.0, svv = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double g = 0.0;
        if (t[i] > 0.0) g = -std::expm1(-std::pow(t[i] / tau, xi));
        sg2 += g * g;
        svg += v[i] * g;
        svv += v[i] * v[i];
    }
    CondFit c;
    c.a = sg2 > 0.0 ? svg / sg2 : 0.0;
    c.rss = svv - 2.0 * c.a * svg + c.a * c.a * sg2;
    return c;
}

}  // namespace

double stretched_exp_rss(std::span<const double> times, std::span<const double> values, double a,
                         double tau, double xi) {
    double rss = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        double g = 0.0;
        if (times[i] > 0.0) g = -std::expm1(-std::pow(times[i] / tau, xi));
        const double r = values[i] - a * g;
        rss += r * r;
    }
    return rss;
}

std::vector<std::pair<double, double>> stretched_exp_grid(std::span<const double> times) {
    double t_max = 0.0;
    double t_min_pos = std::numeric_limits<double>::infinity();
    for (double t : times) {
        t_max = std::max(t_max, t);
        if (t > 0.0) t_min_pos = std::min(t_min_pos, t);
    }
    if (!(t_max > 0.0)) throw std::invalid_argument("stretched_exp_grid: no positive times");

    const double tau_lo = std::max(0.5 * t_min_pos, 1e-3 * t_max);
    const double tau_hi = 10.0 * t_max;
    constexpr int n_tau = 40;
    constexpr int n_xi = 24;
    constexpr double xi_lo = 0.2;
    constexpr double xi_hi = 5.0;

    std::vector<std::pair<double, double>> grid;
    grid.reserve(n_tau * n_xi);
    for (int i = 0; i < n_tau; ++i) {
        const double tau = tau_lo * std::pow(tau_hi / tau_lo,
                                             static_cast<double>(i) / (n_tau - 1));
        for (int j = 0; j < n_xi; ++j) {
            const double xi = xi_lo * std::pow(xi_hi / xi_lo,
                                               static_cast<double>(j) / (n_xi - 1));
            grid.emplace_back(tau, xi);
        }
    }
    return grid;
}

StretchedExpFit fit_stretched_exponential(std::span<const double> times,
                                          std::span<const double> values) {
    if (times.size() != values.size())
        throw std::invalid_argument("fit_stretched_exponential: size mismatch");
    if (times.size() < 10)
        throw std::invalid_argument("fit_stretched_exponential needs >= 10 points");

    const auto grid = stretched_exp_grid(times);
    double best_rss = std::numeric_limits<double>::infinity();
    double best_tau = grid.front().first;
    double best_xi = grid.front().second;
    for (const auto& [tau, xi] : grid) {
        const auto c = conditional_amplitude(times, values, tau, xi);
        if (c.rss < best_rss) {
            best_rss = c.rss;
            best_tau = tau;
            best_xi = xi;
        }
    }

    // Nelder-Mead on (ln tau, ln xi), amplitude always conditionally optimal.
    // The refinement is confined to a margin around the grid's span; outside
    // of it the model is degenerate (a flat curve fitted by runaway tau).
    const double lt_lo = std::log(grid.front().first) - 3.0;
    const double lt_hi = std::log(grid.back().first) + 3.0;
    const double lx_lo = std::log(0.2) - 2.0;
    const double lx_hi = std::log(5.0) + 2.0;
    const auto eval = [&](const std::array<double, 2>& p) {
        if (p[0] < lt_lo || p[0] > lt_hi || p[1] < lx_lo || p[1] > lx_hi)
            return std::numeric_limits<double>::infinity();
        return conditional_amplitude(times, values, std::exp(p[0]), std::exp(p[1])).rss;
    };
    std::array<std::array<double, 2>, 3> simplex{};
    simplex[0] = {std::log(best_tau), std::log(best_xi)};
    simplex[1] = {std::log(best_tau) + 0.15, std::log(best_xi)};
    simplex[2] = {std::log(best_tau), std::log(best_xi) + 0.15};
    std::array<double, 3> f{eval(simplex[0]), eval(simplex[1]), eval(simplex[2])};

    constexpr double rel_tol = 1e-4;
    constexpr int max_iter = 600;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
        const auto& lo = simplex[order[0]];
        auto& hi = simplex[order[2]];

        double spread = 0.0;
        for (int k = 0; k < 2; ++k)
            for (int v = 1; v < 3; ++v)
                spread = std::max(spread, std::abs(simplex[order[v]][k] - lo[k]) /
                                              (1.0 + std::abs(lo[k])));
        if (spread < rel_tol) {
            converged = true;
            break;
        }

        const std::array<double, 2> centroid{
            0.5 * (simplex[order[0]][0] + simplex[order[1]][0]),
            0.5 * (simplex[order[0]][1] + simplex[order[1]][1])};
        const auto point = [&](double coef) {
            return std::array<double, 2>{centroid[0] + coef * (centroid[0] - hi[0]),
                                         centroid[1] + coef * (centroid[1] - hi[1])};
        };

        const auto refl = point(1.0);
        const double f_refl = eval(refl);
        if (f_refl < f[order[0]]) {
            const auto expa = point(2.0);
            const double f_expa = eval(expa);
            if (f_expa < f_refl) {
                hi = expa;
                f[order[2]] = f_expa;
            } else {
                hi = refl;
                f[order[2]] = f_refl;
            }
        } else if (f_refl < f[order[1]]) {
            hi = refl;
            f[order[2]] = f_refl;
        } else {
            const auto contr = point(f_refl < f[order[2]] ? 0.5 : -0.5);
            const double f_contr = eval(contr);
            if (f_contr < std::min(f_refl, f[order[2]])) {
                hi = contr;
                f[order[2]] = f_contr;
            } else {
                for (int v = 1; v < 3; ++v) {
                    auto& p = simplex[order[v]];
                    p[0] = lo[0] + 0.5 * (p[0] - lo[0]);
                    p[1] = lo[1] + 0.5 * (p[1] - lo[1]);
                    f[order[v]] = eval(p);
                }
            }
        }
    }

    int best = 0;
    for (int v = 1; v < 3; ++v)
        if (f[v] < f[best]) best = v;

    StretchedExpFit fit;
    if (f[best] <= best_rss) {
        fit.tau = std::exp(simplex[best][0]);
        fit.xi = std::exp(simplex[best][1]);
    } else {  // refinement never improved on the grid scan
        fit.tau = best_tau;
        fit.xi = best_xi;
    }
    const auto c = conditional_amplitude(times, values, fit.tau, fit.xi);
    fit.a = c.a;
    fit.rss = c.rss;
    fit.converged = converged;
    return fit;
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = cdf(sorted[i]);
        d = std::max(d, std::abs(F - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    }
    return d;
}

namespace {

std::vector<std::pair<std::int64_t, std::int64_t>> value_counts(
    std::span<const std::int64_t> samples) {
    std::map<std::int64_t, std::int64_t> counts;
    for (auto v : samples) ++counts[v];
    return {counts.begin(), counts.end()};
}

}  // namespace

double ks_statistic_discrete(std::span<const std::int64_t> samples,
                             const std::function<double(std::int64_t)>& pmf, std::int64_t lo,
                             std::int64_t hi) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic_discrete: empty sample");
    const auto counts = value_counts(samples);
    if (counts.front().first < lo || counts.back().first > hi)
        throw std::invalid_argument("ks_statistic_discrete: sample outside reference support");
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    double f_ref = 0.0;
    double f_emp = 0.0;
    std::size_t idx = 0;
    for (std::int64_t v = lo; v <= hi; ++v) {
        f_ref += pmf(v);
        if (idx < counts.size() && counts[idx].first == v) {
            f_emp += static_cast<double>(counts[idx].second) / n;
            ++idx;
        }
        d = std::max(d, std::abs(f_emp - f_ref));
    }
    return d;
}

double total_variation_discrete(std::span<const std::int64_t> samples,
                                const std::function<double(std::int64_t)>& pmf, std::int64_t lo,
                                std::int64_t hi) {
    if (samples.empty()) throw std::invalid_argument("total_variation_discrete: empty sample");
    const auto counts = value_counts(samples);
    const double n = static_cast<double>(samples.size());
    const std::int64_t v_lo = std::min(lo, counts.front().first);
    const std::int64_t v_hi = std::max(hi, counts.back().first);
    double tv = 0.0;
    std::size_t idx = 0;
    for (std::int64_t v = v_lo; v <= v_hi; ++v) {
        const double p_ref = (v >= lo && v <= hi) ? pmf(v) : 0.0;
        double p_emp = 0.0;
        if (idx < counts.size() && counts[idx].first == v) {
            p_emp = static_cast<double>(counts[idx].second) / n;
            ++idx;
        }
        tv += std::abs(p_emp - p_ref);
    }
    return 0.5 * tv;
}

double chi_square_discrete(std::span<const std::int64_t> samples,
                           const std::function<double(std::int64_t)>& pmf, std::int64_t lo,
                           std::int64_t hi) {
    if (samples.empty()) throw std::invalid_argument("chi_square_discrete: empty sample");
    const auto counts = value_counts(samples);
    const double n = static_cast<double>(samples.size());
    for (const auto& [v, c] : counts)
        if (v < lo || v > hi || !(pmf(v) > 0.0))
            throw std::invalid_argument("chi_square_discrete: observed mass outside support");
    double chi2 = 0.0;
    std::size_t idx = 0;
    for (std::int64_t v = lo; v <= hi; ++v) {
        const double expected = n * pmf(v);
        double observed = 0.0;
        if (idx < counts.size() && counts[idx].first == v) {
            observed = static_cast<double>(counts[idx].second);
            ++idx;
        }
        if (expected > 0.0) chi2 += (observed - expected) * (observed - expected) / expected;
    }
    return chi2;
}

double gof_distance(std::span<const double> continuous_samples,
                    std::span<const std::int64_t> discrete_samples,
                    const ReferenceDistribution& ref, GofKind kind) {
    if (ref.discrete) {
        if (discrete_samples.empty())
            throw std::invalid_argument("gof_distance: discrete reference needs discrete samples");
        switch (kind) {
            case GofKind::ks:
                return ks_statistic_discrete(discrete_samples, ref.pmf, ref.support_lo,
                                             ref.support_hi);
            case GofKind::total_variation:
                return total_variation_discrete(discrete_samples, ref.pmf, ref.support_lo,
                                                ref.support_hi);
            case GofKind::chi_square:
                return chi_square_discrete(discrete_samples, ref.pmf, ref.support_lo,
                                           ref.support_hi);
        }
    }
    if (continuous_samples.empty())
        throw std::invalid_argument("gof_distance: continuous reference needs continuous samples");
    if (kind != GofKind::ks)
        throw std::invalid_argument("gof_distance: only ks is defined for continuous references");
    return ks_statistic(continuous_samples, ref.cdf);
}

}  // namespace aggecon::stats
