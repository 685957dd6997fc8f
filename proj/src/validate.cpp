#include "aggecon/validate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "aggecon/stats.hpp"
#include "aggecon/theory.hpp"

namespace aggecon {

namespace {

// Clamped cumulative size pmf: entry k holds P(d <= k, d in [d_lo, d_hi]),
// renormalized to the window.
std::vector<double> clamped_size_cdf(std::int64_t na, std::int64_t big_d, std::int64_t d_lo,
                                     std::int64_t d_hi) {
    if (d_lo < 0 || d_hi > big_d || d_lo > d_hi)
        throw std::invalid_argument("wealth mixture: bad size window");
    std::vector<double> cdf(static_cast<std::size_t>(big_d) + 1, 0.0);
    double mass = 0.0;
    for (std::int64_t d = 0; d <= big_d; ++d) {
        if (d >= d_lo && d <= d_hi)
            mass += theory::size_pmf_finite(d, na, big_d, theory::SizePmfVariant::corrected);
        cdf[static_cast<std::size_t>(d)] = mass;
    }
    if (!(mass > 0.0)) throw std::invalid_argument("wealth mixture: empty size window");
    for (auto& v : cdf) v /= mass;
    return cdf;
}

}  // namespace

WealthMixtureCdf::WealthMixtureCdf(std::int64_t na, std::int64_t big_d, double big_m)
    : WealthMixtureCdf(na, big_d, big_m, 0, big_d) {}

WealthMixtureCdf::WealthMixtureCdf(std::int64_t na, std::int64_t big_d, double big_m,
                                   std::int64_t d_lo, std::int64_t d_hi)
    : big_d_(big_d), big_m_(big_m), size_cdf_(clamped_size_cdf(na, big_d, d_lo, d_hi)) {}

// F(w) = E[C(Y)] with Y ~ Bin(D-1, w/M) and C the clamped size cdf, by the
// identity I_x(d, D-d) = P(Bin(D-1, x) >= d). The binomial sum is truncated
// eight standard deviations from the mean.
double WealthMixtureCdf::operator()(double wealth) const {
    const double x = wealth / big_m_;
    if (x <= 0.0) return wealth < 0.0 ? 0.0 : size_cdf_[0];
    if (x >= 1.0) return 1.0;

    const std::int64_t n = big_d_ - 1;
    const double mean = x * static_cast<double>(n);
    const double sd = std::sqrt(std::max(1.0, static_cast<double>(n) * x * (1.0 - x)));
    const auto k_lo = static_cast<std::int64_t>(std::max(0.0, std::floor(mean - 8.0 * sd)));
    const auto k_hi = static_cast<std::int64_t>(
        std::min(static_cast<double>(n), std::ceil(mean + 8.0 * sd)));

    const double lx = std::log(x);
    const double l1x = std::log1p(-x);
    double lp = theory::lchoose(n, k_lo) + static_cast<double>(k_lo) * lx +
                static_cast<double>(n - k_lo) * l1x;
    double p = std::exp(lp);
    const double ratio_base = x / (1.0 - x);

    double acc = 0.0;
    double tail_lo = 0.0;  // P(Y < k_lo): everything below the window sees C <= C(k_lo)
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        acc += p * size_cdf_[static_cast<std::size_t>(k)];
        p *= ratio_base * static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
    if (k_lo > 0) {
        // mass below the truncation window, assigned the cdf at its edge
        double q = std::exp(lp);
        double below = 0.0;
        for (std::int64_t k = k_lo; k > 0 && q > 1e-18; --k) {
            q *= static_cast<double>(k) / (ratio_base * static_cast<double>(n - k + 1));
            below += q;
        }
        tail_lo = below * size_cdf_[static_cast<std::size_t>(k_lo)];
    }
    return std::min(1.0, acc + tail_lo);
}

ValidationReport validate_distributions(const std::vector<std::int64_t>& sizes,
                                        const std::vector<double>& wealths,
                                        const MacroInvariants& inv,
                                        const ValidationThresholds& thresholds) {
    if (sizes.empty() || wealths.empty())
        throw std::invalid_argument("validate: empty sample arrays");
    inv.validate();
    const std::int64_t na = inv.n_aggregates;
    const std::int64_t big_d = inv.n_agents;
    const double big_m = inv.total_money;

    ValidationReport rep;
    rep.n_size_samples = static_cast<std::int64_t>(sizes.size());
    rep.n_wealth_samples = static_cast<std::int64_t>(wealths.size());

    rep.tv_size_finite = stats::total_variation_discrete(
        sizes,
        [&](std::int64_t d) {
            return theory::size_pmf_finite(d, na, big_d, theory::SizePmfVariant::corrected);
        },
        0, big_d);

    if (big_d > na) {
        const auto k = theory::equilibrium_constants(inv);
        std::vector<std::int64_t> positive;
        positive.reserve(sizes.size());
        for (auto d : sizes)
            if (d >= 1) positive.push_back(d);
        if (!positive.empty())
            rep.tv_size_large_na = stats::total_variation_discrete(
                positive, [&](std::int64_t d) { return theory::size_marginal_large_na(d, k); },
                1, big_d);
    }

    // Pooled wealth KS, conditional on non-empty aggregates. The zero-wealth
    // atom coincides with the size-0 atom, which the size TV already checks;
    // conditioning keeps the continuous-sample KS convention valid. Thinned
    // deterministically to cap the mixture-CDF evaluations; the subsample is
    // still a draw from the same stationary law.
    const WealthMixtureCdf mixture(na, big_d, big_m, 1, big_d);
    std::vector<double> pool;
    pool.reserve(wealths.size());
    if (sizes.size() == wealths.size()) {
        for (std::size_t i = 0; i < wealths.size(); ++i)
            if (sizes[i] >= 1) pool.push_back(wealths[i]);
    } else {
        for (double w : wealths)
            if (w > 0.0) pool.push_back(w);
    }
    if (pool.empty()) throw std::invalid_argument("validate: no non-empty aggregate samples");
    constexpr std::size_t ks_cap = 20000;
    if (pool.size() > ks_cap) {
        std::vector<double> thin;
        thin.reserve(ks_cap + 1);
        const std::size_t stride = (pool.size() + ks_cap - 1) / ks_cap;
        for (std::size_t i = 0; i < pool.size(); i += stride) thin.push_back(pool[i]);
        pool = std::move(thin);
    }
    rep.ks_wealth_mixture =
        stats::ks_statistic(pool, [&](double w) { return mixture(w); });

    // Conditional wealth checks inside empirical size quartiles (d >= 1).
    if (sizes.size() == wealths.size()) {
        std::vector<std::int64_t> positive;
        for (auto d : sizes)
            if (d >= 1) positive.push_back(d);
        if (positive.size() >= 40) {
            std::sort(positive.begin(), positive.end());
            const auto q = [&](double f) {
                return positive[static_cast<std::size_t>(f * static_cast<double>(positive.size() - 1))];
            };
            const std::int64_t edges[5] = {1, q(0.25), q(0.5), q(0.75), big_d};
            for (int b = 0; b < 4; ++b) {
                const std::int64_t lo = b == 0 ? edges[0] : edges[b] + 1;
                const std::int64_t hi = edges[b + 1];
                if (lo > hi) continue;
                std::vector<double> w_bin;
                for (std::size_t i = 0; i < sizes.size(); ++i)
                    if (sizes[i] >= lo && sizes[i] <= hi) w_bin.push_back(wealths[i]);
                if (w_bin.size() < 20) continue;
                if (w_bin.size() > ks_cap) {
                    std::vector<double> thin;
                    const std::size_t stride = (w_bin.size() + ks_cap - 1) / ks_cap;
                    for (std::size_t i = 0; i < w_bin.size(); i += stride)
                        thin.push_back(w_bin[i]);
                    w_bin = std::move(thin);
                }
                ConditionalBinResult bin;
                bin.d_lo = lo;
                bin.d_hi = hi;
                bin.n = static_cast<std::int64_t>(w_bin.size());
                const WealthMixtureCdf cond(na, big_d, big_m, lo, hi);
                bin.ks = stats::ks_statistic(w_bin, [&](double w) { return cond(w); });
                rep.conditional.push_back(bin);
            }
        }
    }

    rep.size_ok = rep.tv_size_finite <= thresholds.tv_size;
    rep.wealth_ok = rep.ks_wealth_mixture <= thresholds.ks_wealth;
    return rep;
}

double single_aggregate_exponential_ks(const std::vector<double>& agent_wealths, const MacroInvariants& inv) {
    inv.validate();
    const double mean = inv.total_money / static_cast<double>(inv.n_agents);
    return stats::ks_statistic(agent_wealths, [mean](double x) {
        return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x / mean);
    });
}

std::vector<double> read_snapshot_wealths_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> wealths;
    std::string line;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_skipped) {
            header_skipped = true;
            continue;
        }
        const auto pos = line.rfind(',');
        if (pos == std::string::npos) throw std::runtime_error(path + ": short row");
        wealths.push_back(std::stod(line.substr(pos + 1)));
    }
    if (wealths.empty()) throw std::runtime_error(path + ": no agent rows");
    return wealths;
}

void read_aggregate_samples_csv(const std::string& path, std::vector<std::int64_t>& sizes,
                                std::vector<double>& wealths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    sizes.clear();
    wealths.clear();
    std::string line;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_skipped) {  // "step,aggregate_id,size,wealth"
            header_skipped = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // step
        std::getline(row, cell, ',');  // aggregate_id
        if (!std::getline(row, cell, ',')) throw std::runtime_error(path + ": short row");
        sizes.push_back(std::stoll(cell));
        if (!std::getline(row, cell, ',')) throw std::runtime_error(path + ": short row");
        wealths.push_back(std::stod(cell));
    }
    if (sizes.empty()) throw std::runtime_error(path + ": no sample rows");
}

SnapshotMeta read_snapshot_meta(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    SnapshotMeta meta;
    meta.invariants.n_agents = j.at("n_agents").get<std::int64_t>();
    meta.invariants.n_aggregates = j.at("n_aggregates").get<std::int64_t>();
    meta.invariants.total_money = j.at("total_money").get<double>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.step_count = j.at("step_count").get<std::uint64_t>();
    return meta;
}

}  // namespace aggecon
