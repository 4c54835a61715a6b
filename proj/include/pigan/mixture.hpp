#pragma once

#include <vector>

#include "pigan/divergence.hpp"
#include "pigan/tensor.hpp"

namespace pigan {

struct MixtureComponent {
    double mean_x = 0.0, mean_y = 0.0;
    double sigma = 1.0;   // isotropic
    double weight = 1.0;  // normalized by MixtureSpec
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;

    /// Normalizes weights in place; throws on empty spec or non-positive
    /// sigma/weight.
    void normalize();
    void validate() const;

    /// The canonical 2D benchmark: equal-weight modes on a circle.
    static MixtureSpec ring(std::size_t modes = 8, double radius = 5.0, double sigma = 0.25);
};

struct Bounds {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// (count, 2) i.i.d. draws: component by weight, then an isotropic Gaussian.
/// When component_ids is given it receives the drawn component per sample.
Tensor sample_gaussian_mixture(const MixtureSpec& spec, std::size_t count, RandomStream& rng,
                               std::vector<std::int32_t>* component_ids = nullptr);

/// Cell masses proportional to the mixture density at the g x g cell centers.
/// Requires the bounds to hold at least 99.9% of the mixture mass (checked
/// analytically); otherwise raises CoverageError.
DiscreteDistribution mixture_grid_density(const MixtureSpec& spec, Bounds bounds, std::size_t g);

/// Analytic mixture mass inside an axis-aligned rectangle.
double mixture_mass_in_bounds(const MixtureSpec& spec, Bounds bounds);

}  // namespace pigan
