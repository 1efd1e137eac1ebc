#include "meanaic/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace meanaic;

namespace {

double proportion(Scenario s, CriterionKind kind = CriterionKind::MeanAIC) {
    CriterionChoice c;
    c.kind = kind;
    return run_scenario(s, {c}).tallies[0].proportion_correct;
}

Scenario base(double sigma0_sq, double sigma1_sq) {
    Scenario s;
    s.sigma0_sq = sigma0_sq;
    s.sigma1_sq = sigma1_sq;
    s.replicates = 500;
    s.base_seed = 20240501;
    return s;
}

}  // namespace

TEST_CASE("meanAIC accuracy climbs steeply as the slope variance grows") {
    const double low = proportion(base(0.005, 0.005));
    const double high = proportion(base(0.005, 0.15));
    MESSAGE("sigma1^2 = 0.005: " << low << ", sigma1^2 = 0.15: " << high);
    CHECK(high - low >= 0.5);
}

TEST_CASE("results are similar under a skewed random-effect law") {
    for (double s1 : {0.15, 0.3, 0.8}) {
        auto normal = base(0.005, s1);
        auto gamma = normal;
        gamma.re_law = RandomEffectLaw::ShiftedGamma;
        const double a = proportion(normal), b = proportion(gamma);
        CAPTURE(s1);
        CHECK(std::abs(a - b) <= 0.08);
    }
}

TEST_CASE("results are similar with mixed cluster sizes") {
    for (double s1 : {0.15, 0.3, 0.8}) {
        auto fixed = base(0.005, s1);
        auto mixed = fixed;
        mixed.cluster_sizes = {40, 80, 160};
        const double a = proportion(fixed), b = proportion(mixed);
        CAPTURE(s1);
        CHECK(std::abs(a - b) <= 0.08);
    }
}
