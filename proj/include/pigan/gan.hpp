#pragma once

#include <functional>
#include <span>
#include <string>

#include "pigan/network.hpp"
#include "pigan/optimizer.hpp"

namespace pigan {

enum class Prior : std::uint8_t { Uniform01 = 0 };

struct GanConfig {
    double pi = 0.5;
    std::size_t k = 0;  // discriminator steps per generator step; 0 = schedule default
    std::size_t batch_size = 128;
    std::size_t latent_dim = 100;
    std::size_t iterations = 2000;
    double learning_rate = 0.002;
    double init_std = 0.02;  // weight initialization scale
    std::uint64_t seed = 1;
    Prior prior = Prior::Uniform01;

    /// 3 for pi <= 0.5, 1 above, unless overridden.
    std::size_t resolved_k() const { return k ? k : (pi <= 0.5 ? 3 : 1); }
    void validate() const;
};

struct LossRecord {
    std::size_t iteration;  // outer (generator) iteration, 1-based
    double j_d;             // last discriminator loss of the inner loop
    double j_g;
};

/// (batch, latent_dim) i.i.d. uniform [0,1) draws.
Tensor sample_prior(std::size_t latent_dim, std::size_t batch, RandomStream& rng);

/// J_D = -(1/2m) (pi sum log d_real + (1-pi) sum log(1 - d_fake)).
double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake,
                          double pi);

/// J_G = -(1/m) sum log d_fake  (non-saturating; pi enters J_D only).
double generator_loss(std::span<const double> d_fake);

/// Produces an (m, ...) batch of real samples using the given stream.
using BatchSampler = std::function<Tensor(RandomStream&, std::size_t)>;

struct TrainedState {
    NetworkSpec g_spec, d_spec;
    ParameterSet g_params, d_params;
    AdamState g_opt, d_opt;
    GanConfig cfg;
    std::uint64_t iteration = 0;
    std::string rng_state;  // lets a resumed run continue the exact draw sequence
};

struct TrainSinks {
    std::size_t checkpoint_every = 500;
    std::function<void(const LossRecord&)> on_loss;
    std::function<void(std::size_t iteration, const TrainedState&)> on_checkpoint;
    std::function<void(const std::string&)> on_note;
};

struct TrainResult {
    TrainedState state;
    std::vector<LossRecord> losses;
};

/// Alternating adversarial training: per outer iteration, k discriminator
/// updates on the pi-weighted loss followed by one generator update. Fully
/// deterministic given the config seed. Pass `resume` to continue a loaded
/// state instead of initializing fresh parameters.
TrainResult train_gan(const NetworkSpec& g, const NetworkSpec& d, const BatchSampler& data,
                      const GanConfig& cfg, const TrainSinks& sinks = {},
                      const TrainedState* resume = nullptr);

/// Generates samples from a trained generator in inference mode.
Tensor generate(const NetworkSpec& g, const ParameterSet& g_params, const Tensor& latents);

/// Batch sampler over dataset rows (uniform with replacement). Emits a note
/// through `note` once if the dataset is smaller than the batch size.
BatchSampler make_dataset_sampler(Tensor samples, std::size_t batch_size,
                                  const std::function<void(const std::string&)>& note = {});

}  // namespace pigan
