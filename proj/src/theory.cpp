#include "aggecon/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace aggecon::theory {

double lchoose(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

EquilibriumConstants equilibrium_constants(const MacroInvariants& inv) {
    inv.validate();
    const auto na = static_cast<double>(inv.n_aggregates);
    const auto big_d = static_cast<double>(inv.n_agents);
    const double big_m = inv.total_money;
    if (inv.n_agents <= inv.n_aggregates)
        throw std::domain_error("equilibrium constants need n_agents > n_aggregates");

    EquilibriumConstants k;
    k.c = na / (big_d + big_m);
    k.alpha = -std::log((big_d - na) / (big_d + big_m));
    k.beta = -std::log(big_m / (big_d + big_m));
    return k;
}

double joint_pmf_large_na(std::int64_t m, std::int64_t d, const EquilibriumConstants& k) {
    if (d < 1 || m < 0) return 0.0;
    const double lp = std::log(k.c) + lchoose(m + d - 1, d - 1) -
                      k.beta * static_cast<double>(m) - k.alpha * static_cast<double>(d - 1);
    return std::exp(lp);
}

double size_marginal_large_na(std::int64_t d, const EquilibriumConstants& k) {
    if (d < 1) return 0.0;
    const double log_one_minus_eb = std::log(-std::expm1(-k.beta));
    if (-k.alpha - log_one_minus_eb >= 0.0)
        throw std::domain_error("size marginal diverges: exp(-alpha)/(1-exp(-beta)) >= 1");
    const double lp =
        std::log(k.c) + k.alpha + static_cast<double>(d) * (-k.alpha - log_one_minus_eb);
    return std::exp(lp);
}

double wealth_marginal_large_na(std::int64_t m, const EquilibriumConstants& k) {
    if (m < 0) return 0.0;
    const double log_one_minus_ea = std::log(-std::expm1(-k.alpha));
    if (-k.beta - log_one_minus_ea >= 0.0)
        throw std::domain_error("wealth marginal diverges: exp(-beta)/(1-exp(-alpha)) >= 1");
    const double lp =
        std::log(k.c) + k.beta + static_cast<double>(m + 1) * (-k.beta - log_one_minus_ea);
    return std::exp(lp);
}

double size_pmf_finite(std::int64_t d, std::int64_t na, std::int64_t big_d,
                       SizePmfVariant variant) {
    if (na < 2) throw std::domain_error("size_pmf_finite needs na >= 2");
    if (big_d < 1) throw std::domain_error("size_pmf_finite needs big_d >= 1");
    if (d < 0 || d > big_d) return 0.0;
    const double denom = lchoose(big_d + na - 1, na - 1);
    const double numer = variant == SizePmfVariant::corrected
                             ? lchoose(big_d - d + na - 2, na - 2)
                             : lchoose(big_d - d + na - 1, na - 1);
    return std::exp(numer - denom);
}

double wealth_density_given_size(double m, std::int64_t d, std::int64_t big_d, double big_m) {
    if (d < 1 || d > big_d - 1)
        throw std::domain_error("wealth_density_given_size needs 1 <= d <= D-1");
    if (!(big_m > 0.0)) throw std::domain_error("total money must be > 0");
    if (m < 0.0 || m > big_m) return 0.0;

    const double x = m / big_m;
    const double lg = std::lgamma(static_cast<double>(big_d)) -
                      std::lgamma(static_cast<double>(d)) -
                      std::lgamma(static_cast<double>(big_d - d));
    double lp = lg - std::log(big_m);
    if (d > 1) {
        if (x == 0.0) return 0.0;
        lp += static_cast<double>(d - 1) * std::log(x);
    }
    if (big_d - d > 1) {
        if (x == 1.0) return 0.0;
        lp += static_cast<double>(big_d - d - 1) * std::log1p(-x);
    }
    return std::exp(lp);
}

double joint_finite(double m, std::int64_t d, std::int64_t na, std::int64_t big_d, double big_m,
                    SizePmfVariant variant) {
    return size_pmf_finite(d, na, big_d, variant) * wealth_density_given_size(m, d, big_d, big_m);
}

namespace {

void enumerate_rec(std::int64_t remaining, std::int64_t parts_left, std::int64_t first_part,
                   CompositionTable& table) {
    if (parts_left == 1) {
        ++table.counts[static_cast<std::size_t>(first_part < 0 ? remaining : first_part)];
        ++table.total;
        return;
    }
    for (std::int64_t v = 0; v <= remaining; ++v)
        enumerate_rec(remaining - v, parts_left - 1, first_part < 0 ? v : first_part, table);
}

}  // namespace

CompositionTable enumerate_compositions_oracle(std::int64_t na, std::int64_t big_d,
                                               std::uint64_t max_compositions) {
    if (na < 1 || big_d < 0) throw std::invalid_argument("oracle needs na >= 1 and big_d >= 0");
    const double log_total = lchoose(big_d + na - 1, na - 1);
    if (log_total > std::log(static_cast<double>(max_compositions)) + 1e-9)
        throw std::invalid_argument("oracle refuses: more than " +
                                    std::to_string(max_compositions) + " compositions");

    CompositionTable table;
    table.counts.assign(static_cast<std::size_t>(big_d) + 1, 0);
    enumerate_rec(big_d, na, -1, table);
    return table;
}

double log_multiplicity(const std::vector<OccupationCell>& occupation, std::int64_t na) {
    std::int64_t total = 0;
    for (const auto& cell : occupation) {
        if (cell.count < 0 || cell.d < 1 || cell.m < 0)
            throw std::domain_error("log_multiplicity: cell out of domain");
        total += cell.count;
    }
    if (total != na) throw std::domain_error("log_multiplicity: occupation does not sum to na");

    double lw = std::lgamma(static_cast<double>(na) + 1.0);
    for (const auto& cell : occupation) {
        lw -= std::lgamma(static_cast<double>(cell.count) + 1.0);
        lw += static_cast<double>(cell.count) * lchoose(cell.m + cell.d - 1, cell.d - 1);
    }
    return lw;
}

}  // namespace aggecon::theory
