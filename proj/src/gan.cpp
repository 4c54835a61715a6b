#include "pigan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace pigan {

namespace {
constexpr double kDClamp = 1e-7;  // keeps logs finite under sigmoid saturation

double clamp_d(double v) { return std::min(1.0 - kDClamp, std::max(kDClamp, v)); }
}  // namespace

void GanConfig::validate() const {
    if (!(pi > 0.0 && pi < 1.0)) throw DomainError("pi must lie strictly inside (0,1)");
    if (batch_size == 0) throw ArgumentError("batch size must be >= 1");
    if (latent_dim == 0) throw ArgumentError("latent dimension must be >= 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
    if (!(init_std > 0.0)) throw ArgumentError("init std must be positive");
}

Tensor sample_prior(std::size_t latent_dim, std::size_t batch, RandomStream& rng) {
    Tensor z({batch, latent_dim});
    for (double& v : z.data) v = rng.uniform01();
    return z;
}

double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake,
                          double pi) {
    if (d_real.size() != d_fake.size())
        throw DimensionError("d_real and d_fake must have equal length");
    if (d_real.empty()) throw ArgumentError("discriminator loss needs at least one sample");
    double real_term = 0.0, fake_term = 0.0;
    for (double v : d_real) {
        if (!(v > 0.0 && v < 1.0)) throw DomainError("d_real values must lie strictly inside (0,1)");
        real_term += std::log(v);
    }
    for (double v : d_fake) {
        if (!(v > 0.0 && v < 1.0)) throw DomainError("d_fake values must lie strictly inside (0,1)");
        fake_term += std::log(1.0 - v);
    }
    const double m = static_cast<double>(d_real.size());
    return -(pi * real_term + (1.0 - pi) * fake_term) / (2.0 * m);
}

double generator_loss(std::span<const double> d_fake) {
    if (d_fake.empty()) throw ArgumentError("generator loss needs at least one sample");
    double sum = 0.0;
    for (double v : d_fake) {
        if (!(v > 0.0 && v < 1.0)) throw DomainError("d_fake values must lie strictly inside (0,1)");
        sum += std::log(v);
    }
    return -sum / static_cast<double>(d_fake.size());
}

Tensor generate(const NetworkSpec& g, const ParameterSet& g_params, const Tensor& latents) {
    return forward(g, g_params, latents, Mode::Infer).output;
}

BatchSampler make_dataset_sampler(Tensor samples, std::size_t batch_size,
                                  const std::function<void(const std::string&)>& note) {
    if (samples.rank() < 2 || samples.dim(0) == 0)
        throw ArgumentError("dataset sampler needs at least one sample");
    if (samples.dim(0) < batch_size && note)
        note("dataset has " + std::to_string(samples.dim(0)) + " samples, fewer than batch size " +
             std::to_string(batch_size) + "; sampling with replacement");
    auto shared = std::make_shared<Tensor>(std::move(samples));
    return [shared](RandomStream& rng, std::size_t m) {
        const Tensor& src = *shared;
        const std::size_t count = src.dim(0);
        const std::size_t per = src.numel() / count;
        std::vector<std::size_t> shape = src.shape;
        shape[0] = m;
        Tensor batch(shape);
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t pick = rng.uniform_index(count);
            std::copy(src.data.begin() + pick * per, src.data.begin() + (pick + 1) * per,
                      batch.data.begin() + r * per);
        }
        return batch;
    };
}

namespace {

std::vector<double> clamped_outputs(const Tensor& out) {
    std::vector<double> d(out.numel());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = clamp_d(out.data[i]);
    return d;
}

void add_gradients(Gradients& into, const Gradients& other) {
    for (std::size_t i = 0; i < into.layers.size(); ++i) {
        auto add = [](Tensor& a, const Tensor& b) {
            for (std::size_t j = 0; j < a.numel(); ++j) a.data[j] += b.data[j];
        };
        add(into.layers[i].weight, other.layers[i].weight);
        add(into.layers[i].bias, other.layers[i].bias);
        add(into.layers[i].gamma, other.layers[i].gamma);
        add(into.layers[i].beta, other.layers[i].beta);
    }
}

}  // namespace

TrainResult train_gan(const NetworkSpec& g, const NetworkSpec& d, const BatchSampler& data,
                      const GanConfig& cfg, const TrainSinks& sinks, const TrainedState* resume) {
    cfg.validate();
    g.validate();
    d.validate();

    TrainResult result;
    TrainedState& st = result.state;
    RandomStream rng(cfg.seed);
    std::uint64_t start_iteration = 0;

    if (resume) {
        if (resume->g_spec.signature() != g.signature() ||
            resume->d_spec.signature() != d.signature())
            throw ConsistencyError("checkpoint networks do not match the configured presets");
        st = *resume;
        st.cfg = cfg;
        start_iteration = resume->iteration;
        rng.restore_state(resume->rng_state);
    } else {
        st.g_spec = g;
        st.d_spec = d;
        st.cfg = cfg;
        st.g_params = init_parameters(g, rng, cfg.init_std);
        st.d_params = init_parameters(d, rng, cfg.init_std);
        AdamConfig opt;
        opt.learning_rate = cfg.learning_rate;
        st.g_opt = AdamState::create(st.g_params, opt);
        st.d_opt = AdamState::create(st.d_params, opt);
    }

    const std::size_t m = cfg.batch_size;
    const std::size_t k = cfg.resolved_k();
    const double pi = cfg.pi;

    for (std::uint64_t iter = start_iteration + 1; iter <= start_iteration + cfg.iterations;
         ++iter) {
        double j_d = 0.0;
        for (std::size_t inner = 0; inner < k; ++inner) {
            // k discriminator updates per outer iteration; the generator is
            // frozen here and only theta_D moves.
            const Tensor z = sample_prior(cfg.latent_dim, m, rng);
            const Tensor reals = data(rng, m);
            Tape g_tape = forward(g, st.g_params, z, Mode::Train);
            commit_batchnorm_stats(g, st.g_params, g_tape);
            Tape real_tape = forward(d, st.d_params, reals, Mode::Train);
            commit_batchnorm_stats(d, st.d_params, real_tape);
            Tape fake_tape = forward(d, st.d_params, g_tape.output, Mode::Train);
            commit_batchnorm_stats(d, st.d_params, fake_tape);

            const std::vector<double> d_real = clamped_outputs(real_tape.output);
            const std::vector<double> d_fake = clamped_outputs(fake_tape.output);
            j_d = discriminator_loss(d_real, d_fake, pi);
            if (!std::isfinite(j_d))
                throw NumericError("non-finite discriminator loss at iteration " +
                                   std::to_string(iter) + ": " + std::to_string(j_d));

            Tensor real_grad(real_tape.output.shape);
            for (std::size_t i = 0; i < m; ++i)
                real_grad.data[i] = -pi / (2.0 * m * d_real[i]);
            Tensor fake_grad(fake_tape.output.shape);
            for (std::size_t i = 0; i < m; ++i)
                fake_grad.data[i] = (1.0 - pi) / (2.0 * m * (1.0 - d_fake[i]));

            Gradients d_grads = backward(d, st.d_params, real_tape, real_grad);
            add_gradients(d_grads, backward(d, st.d_params, fake_tape, fake_grad));
            adam_step(st.d_params, d_grads, st.d_opt);
        }

        // One generator update on the non-saturating loss.
        const Tensor z = sample_prior(cfg.latent_dim, m, rng);
        Tape g_tape = forward(g, st.g_params, z, Mode::Train);
        commit_batchnorm_stats(g, st.g_params, g_tape);
        Tape fake_tape = forward(d, st.d_params, g_tape.output, Mode::Train);
        commit_batchnorm_stats(d, st.d_params, fake_tape);
        const std::vector<double> d_fake = clamped_outputs(fake_tape.output);
        const double j_g = generator_loss(d_fake);
        if (!std::isfinite(j_g))
            throw NumericError("non-finite generator loss at iteration " + std::to_string(iter) +
                               ": " + std::to_string(j_g));

        Tensor fake_grad(fake_tape.output.shape);
        for (std::size_t i = 0; i < m; ++i) fake_grad.data[i] = -1.0 / (m * d_fake[i]);
        Gradients d_chain = backward(d, st.d_params, fake_tape, fake_grad);
        Gradients g_grads = backward(g, st.g_params, g_tape, d_chain.input);
        adam_step(st.g_params, g_grads, st.g_opt);

        st.iteration = iter;
        result.losses.push_back({static_cast<std::size_t>(iter), j_d, j_g});
        if (sinks.on_loss) sinks.on_loss(result.losses.back());
        if (sinks.on_checkpoint && sinks.checkpoint_every &&
            iter % sinks.checkpoint_every == 0) {
            st.rng_state = rng.save_state();
            sinks.on_checkpoint(iter, st);
        }
    }

    st.rng_state = rng.save_state();
    return result;
}

}  // namespace pigan
