#include <doctest.h>

#include <random>

#include "fres/evaluate.hpp"
#include "wilcoxon_oracle.hpp"

using namespace fres;

namespace {

std::vector<std::pair<double, double>> zip(const std::vector<double>& a,
                                           const std::vector<double>& b) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
    return pairs;
}

}  // namespace

TEST_CASE("all-positive differences [1..5] give W=0, p=2/32") {
    std::vector<double> a = {1, 2, 3, 4, 5};
    std::vector<double> b = {0, 0, 0, 0, 0};
    SignificanceResult r = wilcoxon_signed_rank(zip(a, b));
    CHECK(r.n_effective == 5);
    CHECK(r.w_statistic == 0.0);
    CHECK(r.p_value == 0.0625);
    CHECK(r.method == WilcoxonMethod::Exact);
}

TEST_CASE("tied magnitudes [1,-1] give average ranks and p=1") {
    SignificanceResult r = wilcoxon_signed_rank({{1, 0}, {0, 1}});
    CHECK(r.n_effective == 2);
    CHECK(r.w_statistic == 1.5);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("all-zero differences raise") {
    CHECK_THROWS_AS(wilcoxon_signed_rank({{1, 1}, {2, 2}}), AllZeroDifferences);
    CHECK_THROWS_AS(wilcoxon_signed_rank({}), AllZeroDifferences);
}

TEST_CASE("zeros drop before ranking") {
    // pairs: diffs {0, 0, 3} -> n_effective 1, W- = 0, p = 2*? with n=1: W in {0,1};
    // p = P(min <= 0) = 2/2 = 1? min(W+,W-) for diff +3: W+=1, W-=0 -> w=0;
    // assignments: (+): min(1,0)=0 <= 0; (-): min(0,1)=0 <= 0 -> p = 1
    SignificanceResult r = wilcoxon_signed_rank({{5, 5}, {2, 2}, {4, 1}});
    CHECK(r.n_effective == 1);
    CHECK(r.w_statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("property: exact mode matches the enumeration oracle bit-exactly") {
    std::mt19937 rng(99173);
    std::uniform_int_distribution<int> n_dist(1, 12);
    std::uniform_int_distribution<int> value_dist(0, 6);
    int nontrivial = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = n_dist(rng);
        std::vector<double> a, b;
        bool any_diff = false;
        for (int i = 0; i < n; ++i) {
            a.push_back(value_dist(rng));
            b.push_back(value_dist(rng));
            if (a.back() != b.back()) any_diff = true;
        }
        if (!any_diff) continue;
        ++nontrivial;
        auto oracle = testsupport::wilcoxon_enumeration_oracle(a, b);
        SignificanceResult r = wilcoxon_signed_rank(zip(a, b));
        REQUIRE(r.method == WilcoxonMethod::Exact);
        REQUIRE(r.w_statistic == oracle.w_statistic);
        REQUIRE(r.p_value == oracle.p_value);
        REQUIRE(r.n_effective == oracle.n);
        CHECK(r.p_value > 0.0);
        CHECK(r.p_value <= 1.0);
    }
    CHECK(nontrivial > 80);
}

TEST_CASE("normal approximation stays within 0.01 of exact at n=25") {
    std::mt19937 rng(55511);
    std::normal_distribution<double> noise(0.3, 1.0);
    WilcoxonOptions exact_options;
    exact_options.exact_cutoff = 25;
    WilcoxonOptions approx_options;
    approx_options.exact_cutoff = 10;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<double, double>> pairs;
        for (int i = 0; i < 25; ++i) pairs.emplace_back(noise(rng), 0.0);
        SignificanceResult exact = wilcoxon_signed_rank(pairs, exact_options);
        SignificanceResult approx = wilcoxon_signed_rank(pairs, approx_options);
        REQUIRE(exact.method == WilcoxonMethod::Exact);
        REQUIRE(approx.method == WilcoxonMethod::NormalApprox);
        CHECK(std::fabs(exact.p_value - approx.p_value) <= 0.01);
    }
}

TEST_CASE("method switches at the configured cutoff") {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 1; i <= 30; ++i) pairs.emplace_back(i % 7, (i * 3) % 5);
    SignificanceResult r = wilcoxon_signed_rank(pairs);
    CHECK(r.method == WilcoxonMethod::NormalApprox);  // default cutoff 25 < n
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value <= 1.0);
}
