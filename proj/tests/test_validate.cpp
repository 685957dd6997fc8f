#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "aggecon/rng.hpp"
#include "aggecon/theory.hpp"
#include "aggecon/validate.hpp"

using namespace aggecon;

namespace {

double simpson(double lo, double hi, int n, const std::function<double(double)>& f) {
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Direct quadrature of the mixture CDF: p(0) + sum_d p(d) int_0^w beta(d, D-d)
double mixture_cdf_by_quadrature(double w, std::int64_t na, std::int64_t big_d, double big_m) {
    double acc = theory::size_pmf_finite(0, na, big_d);
    for (std::int64_t d = 1; d <= big_d - 1; ++d) {
        const double pd = theory::size_pmf_finite(d, na, big_d);
        if (pd < 1e-14) continue;
        acc += pd * simpson(0.0, w, 2000, [&](double m) {
            return theory::wealth_density_given_size(m, d, big_d, big_m);
        });
    }
    return acc;
}

}  // namespace

TEST_CASE("wealth mixture cdf matches direct quadrature at small scale") {
    const std::int64_t na = 3, big_d = 10;
    const double big_m = 1.0;
    const WealthMixtureCdf cdf(na, big_d, big_m);
    for (double w : {0.05, 0.2, 0.4, 0.7, 0.95}) {
        const double direct = mixture_cdf_by_quadrature(w, na, big_d, big_m);
        CHECK(cdf(w) == doctest::Approx(direct).epsilon(1e-6));
    }
}

TEST_CASE("wealth mixture cdf: endpoints, monotonicity, zero atom") {
    const WealthMixtureCdf cdf(100, 10000, 1e6);
    CHECK(cdf(-1.0) == 0.0);
    CHECK(cdf(1e6) == doctest::Approx(1.0));
    // the mass at exactly zero is the probability of an empty aggregate
    CHECK(cdf(0.0) == doctest::Approx(theory::size_pmf_finite(0, 100, 10000)).epsilon(1e-9));

    double prev = -1.0;
    for (double w = 0.0; w <= 1e6; w += 12500.0) {
        const double v = cdf(w);
        CHECK(v >= prev - 1e-12);
        CHECK(v <= 1.0 + 1e-12);
        prev = v;
    }
}

TEST_CASE("validate_distributions accepts samples drawn from the theory itself") {
    // sizes from the corrected pmf by inverse-cdf sampling; wealth given size
    // through the uniform-simplex construction (partial sums of exponentials)
    const MacroInvariants inv{50, 1000, 1e5};
    const std::int64_t big_d = inv.n_agents;
    std::vector<double> size_cdf(static_cast<std::size_t>(big_d) + 1);
    double acc = 0.0;
    for (std::int64_t d = 0; d <= big_d; ++d) {
        acc += theory::size_pmf_finite(d, inv.n_aggregates, big_d);
        size_cdf[static_cast<std::size_t>(d)] = acc;
    }

    Rng rng(2718);
    const int n = 60000;
    std::vector<std::int64_t> sizes;
    std::vector<double> wealths;
    std::vector<double> expo(static_cast<std::size_t>(big_d));
    for (int i = 0; i < n; ++i) {
        const double u = rng.u01();
        std::int64_t d = 0;
        while (d < big_d && size_cdf[static_cast<std::size_t>(d)] < u) ++d;
        sizes.push_back(d);

        double total = 0.0;
        for (auto& e : expo) {
            e = -std::log(1.0 - rng.u01());
            total += e;
        }
        double part = 0.0;
        for (std::int64_t k = 0; k < d; ++k) part += expo[static_cast<std::size_t>(k)];
        wealths.push_back(inv.total_money * part / total);
    }

    const auto rep = validate_distributions(sizes, wealths, inv, {0.02, 0.03});
    CHECK(rep.size_ok);
    CHECK(rep.wealth_ok);
    CHECK(rep.tv_size_finite <= 0.02);
    CHECK(rep.ks_wealth_mixture <= 0.03);
    for (const auto& bin : rep.conditional) CHECK(bin.ks <= 0.05);
}

TEST_CASE("validate_distributions rejects an unequilibrated point mass") {
    const MacroInvariants inv{50, 1000, 1e5};
    const std::vector<std::int64_t> sizes(5000, 20);   // everyone still at D/Na
    const std::vector<double> wealths(5000, 2000.0);   // and at M/Na
    const auto rep = validate_distributions(sizes, wealths, inv, {0.02, 0.03});
    CHECK(!rep.size_ok);
    CHECK(!rep.wealth_ok);
    CHECK(rep.tv_size_finite > 0.5);
}

TEST_CASE("single_aggregate_exponential_ks: exponential samples pass, uniform samples fail") {
    const MacroInvariants inv{1, 10000, 1e6};
    Rng rng(31);
    std::vector<double> expo(10000), flat(10000);
    for (auto& x : expo) x = -100.0 * std::log(1.0 - rng.u01());
    for (auto& x : flat) x = 200.0 * rng.u01();
    CHECK(single_aggregate_exponential_ks(expo, inv) <= 0.02);
    CHECK(single_aggregate_exponential_ks(flat, inv) > 0.1);  // Uniform[0, 2 mean] sits ~0.15 away
}

TEST_CASE("aggregate sample csv round-trip and error paths") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "aggecon_validate_test";
    fs::create_directories(dir);
    const auto path = (dir / "agg_samples.csv").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "# provenance line\n";
        out << "step,aggregate_id,size,wealth\n";
        out << "10,0,5,123.5\n10,1,0,0\n20,0,7,99.25\n";
    }
    std::vector<std::int64_t> sizes;
    std::vector<double> wealths;
    read_aggregate_samples_csv(path, sizes, wealths);
    REQUIRE(sizes.size() == 3);
    CHECK(sizes[0] == 5);
    CHECK(sizes[1] == 0);
    CHECK(wealths[2] == doctest::Approx(99.25));

    {
        std::ofstream out(path, std::ios::binary);
        out << "step,aggregate_id,size,wealth\n";
    }
    CHECK_THROWS_AS(read_aggregate_samples_csv(path, sizes, wealths), std::runtime_error);
    CHECK_THROWS_AS(read_aggregate_samples_csv((dir / "absent.csv").string(), sizes, wealths),
                    std::runtime_error);

    const auto meta_path = (dir / "meta.json").string();
    std::ofstream(meta_path, std::ios::binary)
        << R"({"n_agents": 100, "n_aggregates": 4, "seed": 9, "step_count": 50,)"
        << R"( "total_money": 1e4})";
    const auto meta = read_snapshot_meta(meta_path);
    CHECK(meta.invariants.n_agents == 100);
    CHECK(meta.invariants.n_aggregates == 4);
    CHECK(meta.seed == 9);
    CHECK(meta.step_count == 50);
    CHECK(meta.invariants.total_money == doctest::Approx(1e4));

    fs::remove_all(dir);
}
