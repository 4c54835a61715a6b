#include "pigan/mixture.hpp"

#include <cmath>

namespace pigan {

void MixtureSpec::normalize() {
    if (components.empty()) throw ArgumentError("mixture needs at least one component");
    double sum = 0.0;
    for (const auto& c : components) {
        if (!(c.sigma > 0.0)) throw DomainError("mixture sigma must be positive");
        if (!(c.weight > 0.0)) throw DomainError("mixture weights must be positive");
        sum += c.weight;
    }
    for (auto& c : components) c.weight /= sum;
}

void MixtureSpec::validate() const {
    if (components.empty()) throw ArgumentError("mixture needs at least one component");
    double sum = 0.0;
    for (const auto& c : components) {
        if (!(c.sigma > 0.0)) throw DomainError("mixture sigma must be positive");
        if (!(c.weight > 0.0)) throw DomainError("mixture weights must be positive");
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1");
}

MixtureSpec MixtureSpec::ring(std::size_t modes, double radius, double sigma) {
    MixtureSpec spec;
    for (std::size_t i = 0; i < modes; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * static_cast<double>(i) /
                         static_cast<double>(modes);
        spec.components.push_back({radius * std::cos(a), radius * std::sin(a), sigma, 1.0});
    }
    spec.normalize();
    return spec;
}

Tensor sample_gaussian_mixture(const MixtureSpec& spec, std::size_t count, RandomStream& rng,
                               std::vector<std::int32_t>* component_ids) {
    spec.validate();
    if (count == 0) throw ArgumentError("sample count must be >= 1");
    Tensor out({count, 2});
    if (component_ids) component_ids->resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        // component by cumulative weight
        const double u = rng.uniform01();
        double acc = 0.0;
        std::size_t pick = spec.components.size() - 1;
        for (std::size_t c = 0; c < spec.components.size(); ++c) {
            acc += spec.components[c].weight;
            if (u < acc) {
                pick = c;
                break;
            }
        }
        const MixtureComponent& mc = spec.components[pick];
        out.at2(i, 0) = mc.mean_x + mc.sigma * rng.normal();
        out.at2(i, 1) = mc.mean_y + mc.sigma * rng.normal();
        if (component_ids) (*component_ids)[i] = static_cast<std::int32_t>(pick);
    }
    return out;
}

namespace {
double phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }
}  // namespace

double mixture_mass_in_bounds(const MixtureSpec& spec, Bounds b) {
    double mass = 0.0;
    for (const auto& c : spec.components) {
        const double mx = (phi((b.x1 - c.mean_x) / c.sigma) - phi((b.x0 - c.mean_x) / c.sigma));
        const double my = (phi((b.y1 - c.mean_y) / c.sigma) - phi((b.y0 - c.mean_y) / c.sigma));
        mass += c.weight * mx * my;
    }
    return mass;
}

DiscreteDistribution mixture_grid_density(const MixtureSpec& spec, Bounds b, std::size_t g) {
    spec.validate();
    if (g < 2) throw ArgumentError("grid resolution must be >= 2");
    if (!(b.x1 > b.x0 && b.y1 > b.y0)) throw ArgumentError("bounds rectangle is empty");
    const double covered = mixture_mass_in_bounds(spec, b);
    if (covered < 0.999)
        throw CoverageError("bounds cover only " + std::to_string(covered * 100.0) +
                            "% of the mixture mass (need 99.9%)");
    const double cw = (b.x1 - b.x0) / static_cast<double>(g);
    const double ch = (b.y1 - b.y0) / static_cast<double>(g);
    std::vector<double> weights(g * g, 0.0);
    for (std::size_t iy = 0; iy < g; ++iy) {
        const double y = b.y0 + (static_cast<double>(iy) + 0.5) * ch;
        for (std::size_t ix = 0; ix < g; ++ix) {
            const double x = b.x0 + (static_cast<double>(ix) + 0.5) * cw;
            double density = 0.0;
            for (const auto& c : spec.components) {
                const double dx = x - c.mean_x, dy = y - c.mean_y;
                const double s2 = c.sigma * c.sigma;
                density += c.weight / (2.0 * 3.14159265358979323846 * s2) *
                           std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
            }
            weights[iy * g + ix] = density;
        }
    }
    return DiscreteDistribution::normalized(std::move(weights));
}

}  // namespace pigan
