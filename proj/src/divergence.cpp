#include "pigan/divergence.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace pigan {

namespace {
constexpr double kMassTol = 1e-12;
constexpr double kProfileClamp = 1e-12;
constexpr double kIdentityTol = 1e-10;
}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> masses) : masses_(std::move(masses)) {
    if (masses_.empty()) throw DomainError("distribution needs a non-empty support");
    double sum = 0.0;
    for (double m : masses_) {
        if (!(m >= 0.0)) throw DomainError("distribution mass must be non-negative");
        sum += m;
    }
    if (std::abs(sum - 1.0) > kMassTol)
        throw DomainError("distribution masses must sum to 1 within 1e-12");
}

DiscreteDistribution DiscreteDistribution::normalized(std::vector<double> weights) {
    if (weights.empty()) throw DomainError("distribution needs a non-empty support");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw DomainError("weights must be non-negative");
        sum += w;
    }
    if (sum <= 0.0) throw DomainError("weights must not all be zero");
    for (double& w : weights) w /= sum;
    return DiscreteDistribution(std::move(weights));
}

bool DiscreteDistribution::approx_equal(const DiscreteDistribution& o, double tol) const {
    if (o.support_size() != support_size()) return false;
    for (std::size_t i = 0; i < masses_.size(); ++i)
        if (std::abs(masses_[i] - o.masses_[i]) > tol) return false;
    return true;
}

PiWeight::PiWeight(double pi) : pi_(pi) {
    if (!(pi > 0.0 && pi < 1.0)) throw DomainError("pi must lie strictly inside (0,1)");
}

DiscriminatorProfile::DiscriminatorProfile(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DomainError("discriminator profile needs at least one state");
    for (double v : values_)
        if (!(v > 0.0 && v < 1.0))
            throw DomainError("discriminator values must lie strictly inside (0,1)");
}

static void require_same_support(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.support_size() != q.support_size())
        throw DimensionError("support sizes differ: " + std::to_string(p.support_size()) + " vs " +
                             std::to_string(q.support_size()));
}

double kl_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_support(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.support_size(); ++i) {
        if (p[i] == 0.0) continue;  // 0 log(0/q) := 0
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        sum += p[i] * std::log(p[i] / q[i]);
    }
    return sum;
}

double js_pi_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q, PiWeight w) {
    require_same_support(p, q);
    const double pi = w.value();
    double kl_pm = 0.0, kl_qm = 0.0;
    for (std::size_t i = 0; i < p.support_size(); ++i) {
        const double m = pi * p[i] + (1.0 - pi) * q[i];
        if (p[i] > 0.0) kl_pm += p[i] * std::log(p[i] / m);  // m >= pi p_i > 0
        if (q[i] > 0.0) kl_qm += q[i] * std::log(q[i] / m);
    }
    return pi * kl_pm + (1.0 - pi) * kl_qm;
}

DiscriminatorProfile optimal_discriminator(const DiscreteDistribution& p,
                                           const DiscreteDistribution& q, PiWeight w) {
    require_same_support(p, q);
    const double pi = w.value();
    std::vector<double> values(p.support_size());
    for (std::size_t i = 0; i < p.support_size(); ++i) {
        const double denom = pi * p[i] + (1.0 - pi) * q[i];
        if (denom == 0.0)
            throw DomainError("optimal discriminator undefined at state " + std::to_string(i) +
                              " with p=q=0");
        double d = pi * p[i] / denom;
        d = std::min(1.0 - kProfileClamp, std::max(kProfileClamp, d));
        values[i] = d;
    }
    return DiscriminatorProfile(std::move(values));
}

double adversarial_value(const DiscreteDistribution& p, const DiscreteDistribution& q,
                         const DiscriminatorProfile& d, PiWeight w) {
    require_same_support(p, q);
    if (d.size() != p.support_size())
        throw DimensionError("discriminator profile length " + std::to_string(d.size()) +
                             " does not match support size " + std::to_string(p.support_size()));
    const double pi = w.value();
    double real_term = 0.0, fake_term = 0.0;
    for (std::size_t i = 0; i < p.support_size(); ++i) {
        if (p[i] > 0.0) real_term += p[i] * std::log(d.values()[i]);
        if (q[i] > 0.0) fake_term += q[i] * std::log(1.0 - d.values()[i]);
    }
    return pi * real_term + (1.0 - pi) * fake_term;
}

double pi_entropy_constant(PiWeight w) {
    const double pi = w.value();
    return pi * std::log(pi) + (1.0 - pi) * std::log(1.0 - pi);
}

double generator_cost(const DiscreteDistribution& p, const DiscreteDistribution& q, PiWeight w) {
    const double via_value = adversarial_value(p, q, optimal_discriminator(p, q, w), w);
    const double via_identity = pi_entropy_constant(w) + js_pi_divergence(p, q, w);
    if (std::abs(via_value - via_identity) > kIdentityTol)
        throw ConsistencyError("generator cost identity violated: |" + std::to_string(via_value) +
                               " - " + std::to_string(via_identity) + "| > 1e-10");
    return via_value;
}

double scalar_log_maximizer(double a, double b) {
    if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("coefficients must be non-negative");
    if (a == 0.0 && b == 0.0) throw DomainError("maximizer undefined for a=b=0");
    return a / (a + b);
}

std::vector<LimitRatioPoint> limit_ratio_profile(const DiscreteDistribution& p,
                                                 const DiscreteDistribution& q,
                                                 const std::vector<PiWeight>& pis,
                                                 LimitDirection direction) {
    require_same_support(p, q);
    if (pis.empty()) throw ArgumentError("need at least one pi value");

    const bool toward_zero = direction == LimitDirection::TowardZero;
    const double target = toward_zero ? kl_divergence(p, q) : kl_divergence(q, p);
    if (!std::isfinite(target))
        throw DomainError("unsupported limit: the target KL divergence is infinite");

    for (std::size_t i = 1; i < pis.size(); ++i) {
        const bool ordered = toward_zero ? pis[i].value() < pis[i - 1].value()
                                         : pis[i].value() > pis[i - 1].value();
        if (!ordered) throw ArgumentError("pi sequence must be ordered toward the limit");
    }

    std::vector<LimitRatioPoint> points;
    points.reserve(pis.size());
    for (const PiWeight& w : pis) {
        const double js = js_pi_divergence(p, q, w);
        const double denom = toward_zero ? w.value() : 1.0 - w.value();
        const double ratio = js / denom;
        points.push_back({w.value(), ratio, std::abs(ratio - target)});
    }
    return points;
}

}  // namespace pigan
