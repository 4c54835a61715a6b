#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pigan/common.hpp"
#include "pigan/divergence.hpp"

using namespace pigan;

namespace {

DiscreteDistribution dist(std::vector<double> masses) { return DiscreteDistribution(std::move(masses)); }

DiscreteDistribution random_positive(RandomStream& rng, std::size_t support) {
    std::vector<double> w(support);
    for (double& v : w) v = 0.05 + rng.uniform01();
    return DiscreteDistribution::normalized(std::move(w));
}

}  // namespace

TEST_CASE("kl divergence basics") {
    CHECK(kl_divergence(dist({0.5, 0.5}), dist({0.5, 0.5})) == doctest::Approx(0.0));
    CHECK(kl_divergence(dist({1.0, 0.0}), dist({0.5, 0.5})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // direct summation oracle: 0.5 log(0.5/0.9) + 0.5 log(0.5/0.1)
    const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    CHECK(kl_divergence(dist({0.5, 0.5}), dist({0.9, 0.1})) == doctest::Approx(expected));
    CHECK(expected == doctest::Approx(0.510826).epsilon(1e-5));

    CHECK(std::isinf(kl_divergence(dist({0.5, 0.5}), dist({1.0, 0.0}))));
    CHECK(kl_divergence(dist({0.0, 1.0}), dist({0.5, 0.5})) >= 0.0);
    CHECK_THROWS_AS(kl_divergence(dist({1.0}), dist({0.5, 0.5})), DimensionError);
}

TEST_CASE("kl divergence is asymmetric somewhere") {
    const auto p = dist({0.9, 0.1});
    const auto q = dist({0.3, 0.7});
    CHECK(std::abs(kl_divergence(p, q) - kl_divergence(q, p)) > 0.1);
}

TEST_CASE("distribution invariants enforced") {
    CHECK_THROWS_AS(dist({0.5, 0.6}), DomainError);
    CHECK_THROWS_AS(dist({-0.1, 1.1}), DomainError);
    CHECK_THROWS_AS(dist({}), DomainError);
    CHECK_THROWS_AS(DiscreteDistribution::normalized({0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(PiWeight(0.0), DomainError);
    CHECK_THROWS_AS(PiWeight(1.0), DomainError);
    CHECK_THROWS_AS(DiscriminatorProfile({0.5, 1.0}), DomainError);
    CHECK_THROWS_AS(DiscriminatorProfile({0.0}), DomainError);
}

TEST_CASE("js_pi divergence") {
    const PiWeight half(0.5);
    CHECK(js_pi_divergence(dist({0.3, 0.7}), dist({0.3, 0.7}), half) == doctest::Approx(0.0));
    CHECK(js_pi_divergence(dist({0.3, 0.7}), dist({0.3, 0.7}), PiWeight(0.123)) ==
          doctest::Approx(0.0));
    CHECK(js_pi_divergence(dist({1.0, 0.0}), dist({0.0, 1.0}), half) ==
          doctest::Approx(std::log(2.0)));

    // direct summation oracle for p=(0.8,0.2), q=(0.2,0.8), pi=0.3
    const double pi = 0.3;
    double expected = 0.0;
    const double p[2] = {0.8, 0.2}, q[2] = {0.2, 0.8};
    for (int i = 0; i < 2; ++i) {
        const double m = pi * p[i] + (1 - pi) * q[i];
        expected += pi * p[i] * std::log(p[i] / m) + (1 - pi) * q[i] * std::log(q[i] / m);
    }
    CHECK(js_pi_divergence(dist({0.8, 0.2}), dist({0.2, 0.8}), PiWeight(pi)) ==
          doctest::Approx(expected).epsilon(1e-12));

    // finite even when the directed KLs are not
    CHECK(std::isfinite(js_pi_divergence(dist({1.0, 0.0}), dist({0.5, 0.5}), half)));
}

TEST_CASE("js_pi non-negativity and identity of indiscernibles") {
    RandomStream rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t support = 2 + rng.uniform_index(15);
        const auto p = random_positive(rng, support);
        const auto q = random_positive(rng, support);
        for (double pv : {0.05, 0.4, 0.95}) {
            const double js = js_pi_divergence(p, q, PiWeight(pv));
            CHECK(js >= 0.0);
            if (!p.approx_equal(q)) CHECK(js > 0.0);
        }
        CHECK(js_pi_divergence(p, p, PiWeight(0.37)) == doctest::Approx(0.0).epsilon(1e-13));
    }
}

TEST_CASE("optimal discriminator") {
    const auto p = dist({0.5, 0.5});
    SUBCASE("p=q gives pi everywhere") {
        for (double pv : {0.5, 0.3}) {
            const auto d = optimal_discriminator(p, p, PiWeight(pv));
            for (double v : d.values()) CHECK(v == doctest::Approx(pv).epsilon(1e-12));
        }
    }
    SUBCASE("pointwise formula") {
        const auto d = optimal_discriminator(dist({0.2, 0.8}), dist({0.6, 0.4}), PiWeight(0.5));
        CHECK(d.values()[0] == doctest::Approx(0.25));  // 0.1/(0.1+0.3)
    }
    SUBCASE("state with no mass anywhere is rejected") {
        CHECK_THROWS_AS(
            optimal_discriminator(dist({1.0, 0.0}), dist({1.0, 0.0}), PiWeight(0.5)),
            DomainError);
    }
    SUBCASE("values clamped inside (0,1)") {
        const auto d = optimal_discriminator(dist({1.0, 0.0}), dist({0.0, 1.0}), PiWeight(0.5));
        CHECK(d.values()[0] < 1.0);
        CHECK(d.values()[1] > 0.0);
    }
}

TEST_CASE("adversarial value") {
    const PiWeight half(0.5);
    const auto p = dist({0.5, 0.5});
    CHECK(adversarial_value(p, p, DiscriminatorProfile({0.5, 0.5}), half) ==
          doctest::Approx(-std::log(2.0)));

    // at D*, equals the generator cost by definition
    const auto pa = dist({0.9, 0.1});
    const auto qa = dist({0.1, 0.9});
    const PiWeight w(0.2);
    const double at_star = adversarial_value(pa, qa, optimal_discriminator(pa, qa, w), w);
    CHECK(at_star == doctest::Approx(generator_cost(pa, qa, w)).epsilon(1e-12));

    // direct-evaluation oracle plus a grid search that never beats D*
    const double direct = 0.2 * (0.9 * std::log(0.6) + 0.1 * std::log(0.4)) +
                          0.8 * (0.1 * std::log(0.4) + 0.9 * std::log(0.6));
    CHECK(adversarial_value(pa, qa, DiscriminatorProfile({0.6, 0.4}), w) ==
          doctest::Approx(direct).epsilon(1e-12));
    double grid_best = -1e9;
    for (double d1 = 0.01; d1 < 1.0; d1 += 0.01)
        for (double d2 = 0.01; d2 < 1.0; d2 += 0.01)
            grid_best = std::max(grid_best,
                                 adversarial_value(pa, qa, DiscriminatorProfile({d1, d2}), w));
    CHECK(grid_best <= at_star + 1e-6);
    CHECK(direct < at_star);
}

TEST_CASE("pi entropy constant") {
    CHECK(pi_entropy_constant(PiWeight(0.5)) == doctest::Approx(-std::log(2.0)));
    CHECK(pi_entropy_constant(PiWeight(0.9)) == doctest::Approx(-0.325083).epsilon(1e-5));
    CHECK(pi_entropy_constant(PiWeight(0.001)) == doctest::Approx(-0.007908).epsilon(1e-3));
    for (double pv : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        const double c = pi_entropy_constant(PiWeight(pv));
        CHECK(c >= -std::log(2.0) - 1e-15);
        CHECK(c < 0.0);
    }
}

TEST_CASE("generator cost identity and examples") {
    const auto p = dist({0.4, 0.6});
    CHECK(generator_cost(p, p, PiWeight(0.5)) == doctest::Approx(-std::log(2.0)));
    CHECK(generator_cost(p, p, PiWeight(0.9)) ==
          doctest::Approx(0.9 * std::log(0.9) + 0.1 * std::log(0.1)));
    CHECK(generator_cost(dist({1.0, 0.0}), dist({0.0, 1.0}), PiWeight(0.5)) ==
          doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("identity holds across random pairs") {
    RandomStream rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t support = 2 + rng.uniform_index(63);
        const auto p = random_positive(rng, support);
        const auto q = random_positive(rng, support);
        for (double pv : {0.01, 0.1, 0.5, 0.9, 0.99}) {
            const PiWeight w(pv);
            const double via_value = adversarial_value(p, q, optimal_discriminator(p, q, w), w);
            const double via_identity = pi_entropy_constant(w) + js_pi_divergence(p, q, w);
            CHECK(std::abs(via_value - via_identity) < 1e-10);
        }
    }
}

TEST_CASE("scalar log maximizer") {
    CHECK(scalar_log_maximizer(1.0, 1.0) == doctest::Approx(0.5));
    CHECK(scalar_log_maximizer(3.0, 1.0) == doctest::Approx(0.75));
    CHECK(scalar_log_maximizer(0.0, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(scalar_log_maximizer(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(scalar_log_maximizer(-1.0, 2.0), DomainError);

    // numeric cross-check: f(y) = a log y + b log(1-y) on a 1e-4 grid peaks
    // within one grid step of a/(a+b)
    RandomStream rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = rng.uniform01() * 4.0 + 0.1;
        const double b = rng.uniform01() * 4.0 + 0.1;
        const double argmax = scalar_log_maximizer(a, b);
        double best_y = 0.0, best_f = -1e300;
        for (double y = 1e-4; y < 1.0; y += 1e-4) {
            const double f = a * std::log(y) + b * std::log(1.0 - y);
            if (f > best_f) {
                best_f = f;
                best_y = y;
            }
        }
        CHECK(std::abs(best_y - argmax) <= 1e-4 + 1e-12);
    }
}

TEST_CASE("limit ratio profile") {
    const auto p = dist({0.7, 0.3});
    const auto q = dist({0.4, 0.6});

    SUBCASE("identical distributions give zero everywhere") {
        const auto pts = limit_ratio_profile(p, p, {PiWeight(0.1), PiWeight(0.01)},
                                             LimitDirection::TowardZero);
        for (const auto& pt : pts) {
            CHECK(pt.ratio == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(pt.target_gap == doctest::Approx(0.0).epsilon(1e-12));
        }
    }

    SUBCASE("toward zero approaches KL[P||Q]") {
        const auto pts = limit_ratio_profile(
            p, q, {PiWeight(1e-1), PiWeight(1e-2), PiWeight(1e-3)}, LimitDirection::TowardZero);
        REQUIRE(pts.size() == 3);
        CHECK(pts[0].target_gap > pts[1].target_gap);
        CHECK(pts[1].target_gap > pts[2].target_gap);
        CHECK(pts[2].target_gap < 1e-2 * kl_divergence(p, q));
    }

    SUBCASE("toward one approaches KL[Q||P]") {
        const auto pts = limit_ratio_profile(
            p, q, {PiWeight(0.9), PiWeight(0.99), PiWeight(0.999)}, LimitDirection::TowardOne);
        REQUIRE(pts.size() == 3);
        CHECK(pts[0].target_gap > pts[1].target_gap);
        CHECK(pts[1].target_gap > pts[2].target_gap);
        const double target = kl_divergence(q, p);
        CHECK(pts[2].ratio == doctest::Approx(target).epsilon(0.05));
    }

    SUBCASE("gaps non-increasing in both directions for random pairs") {
        RandomStream rng(7);
        for (int trial = 0; trial < 30; ++trial) {
            const auto a = random_positive(rng, 2 + rng.uniform_index(10));
            const auto b = random_positive(rng, a.support_size());
            const auto down = limit_ratio_profile(
                a, b, {PiWeight(1e-1), PiWeight(1e-2), PiWeight(1e-3)},
                LimitDirection::TowardZero);
            const auto up = limit_ratio_profile(
                a, b, {PiWeight(0.9), PiWeight(0.99), PiWeight(0.999)}, LimitDirection::TowardOne);
            for (std::size_t i = 1; i < down.size(); ++i)
                CHECK(down[i].target_gap <= down[i - 1].target_gap + 1e-15);
            for (std::size_t i = 1; i < up.size(); ++i)
                CHECK(up[i].target_gap <= up[i - 1].target_gap + 1e-15);
        }
    }

    SUBCASE("infinite target is unsupported") {
        CHECK_THROWS_AS(limit_ratio_profile(dist({1.0, 0.0}), dist({0.0, 1.0}),
                                            {PiWeight(0.1)}, LimitDirection::TowardZero),
                        DomainError);
    }

    SUBCASE("misordered sequences are rejected") {
        CHECK_THROWS_AS(limit_ratio_profile(p, q, {PiWeight(0.01), PiWeight(0.1)},
                                            LimitDirection::TowardZero),
                        ArgumentError);
        CHECK_THROWS_AS(limit_ratio_profile(p, q, {PiWeight(0.99), PiWeight(0.9)},
                                            LimitDirection::TowardOne),
                        ArgumentError);
    }
}
