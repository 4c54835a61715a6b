#pragma once

#include <vector>

#include "pigan/common.hpp"

namespace pigan {

/// Normalized probability mass function over a finite support.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<double> masses);

    /// Normalizes a vector of non-negative weights (not all zero) to sum 1.
    static DiscreteDistribution normalized(std::vector<double> weights);

    const std::vector<double>& masses() const { return masses_; }
    std::size_t support_size() const { return masses_.size(); }
    double operator[](std::size_t i) const { return masses_[i]; }

    bool approx_equal(const DiscreteDistribution& o, double tol = 1e-12) const;

private:
    std::vector<double> masses_;
};

/// Mixture weight pi, restricted to the open interval (0,1). The endpoint
/// behaviour is studied through limit_ratio_profile sequences, never by
/// evaluating at 0 or 1.
class PiWeight {
public:
    explicit PiWeight(double pi);
    double value() const { return pi_; }

private:
    double pi_;
};

/// Discriminator values over a support, each strictly inside (0,1).
class DiscriminatorProfile {
public:
    explicit DiscriminatorProfile(std::vector<double> values);
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
};

/// KL[p||q] = sum_i p_i log(p_i/q_i) with 0*log(0/q)=0. Returns +infinity
/// when p puts mass where q has none.
double kl_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// JS_pi[p||q] = pi KL[p||m] + (1-pi) KL[q||m] with m = pi p + (1-pi) q.
/// Always finite; zero iff p = q.
double js_pi_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q, PiWeight w);

/// d*_i = pi p_i / (pi p_i + (1-pi) q_i), clamped into (1e-12, 1-1e-12).
/// Requires p_i + q_i > 0 for every state.
DiscriminatorProfile optimal_discriminator(const DiscreteDistribution& p,
                                           const DiscreteDistribution& q, PiWeight w);

/// V = pi sum_i p_i log d_i + (1-pi) sum_i q_i log(1-d_i).
double adversarial_value(const DiscreteDistribution& p, const DiscreteDistribution& q,
                         const DiscriminatorProfile& d, PiWeight w);

/// C = V evaluated at the optimal discriminator. Computed through two
/// independent routes (adversarial value at d*, and the entropy constant plus
/// JS_pi) which must agree to 1e-10; disagreement raises ConsistencyError.
double generator_cost(const DiscreteDistribution& p, const DiscreteDistribution& q, PiWeight w);

/// pi log pi + (1-pi) log(1-pi), in [-log 2, 0).
double pi_entropy_constant(PiWeight w);

/// Maximizer of f(y) = a log y + b log(1-y) on [0,1], namely a/(a+b).
/// Requires a,b >= 0 and (a,b) != (0,0).
double scalar_log_maximizer(double a, double b);

enum class LimitDirection { TowardZero, TowardOne };

struct LimitRatioPoint {
    double pi;
    double ratio;       // JS_pi/pi or JS_pi/(1-pi) depending on direction
    double target_gap;  // |ratio - KL target|
};

/// Tabulates the normalized JS_pi ratio against its KL limit along a
/// sequence of pi values ordered toward the limit. Both KL[p||q] and
/// KL[q||p] must be finite (mutual absolute continuity).
std::vector<LimitRatioPoint> limit_ratio_profile(const DiscreteDistribution& p,
                                                 const DiscreteDistribution& q,
                                                 const std::vector<PiWeight>& pis,
                                                 LimitDirection direction);

}  // namespace pigan
