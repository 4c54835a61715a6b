#include "pigan/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace pigan {

FeatureMatrix encode_features(const NetworkSpec& d, const ParameterSet& params,
                              const Tensor& samples) {
    std::size_t last_dense = d.layers.size();
    for (std::size_t i = 0; i < d.layers.size(); ++i)
        if (d.layers[i].kind == LayerSpec::Kind::Dense) last_dense = i;
    if (last_dense == d.layers.size())
        throw ArgumentError("network has no dense layer to take features from");

    const Tape tape = forward(d, params, samples, Mode::Infer);
    const Tensor& feats = tape.recs[last_dense].input;  // rank 2 by dense precondition
    FeatureMatrix fm;
    fm.count = feats.dim(0);
    fm.dim = feats.dim(1);
    fm.values = feats.data;
    return fm;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw DimensionError("cosine similarity needs equal dimensions");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw DomainError("cosine similarity undefined for zero vectors");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

RetrievalResult retrieve_topk(const FeatureMatrix& corpus, std::size_t query, std::size_t k) {
    if (query >= corpus.count) throw ArgumentError("query index out of range");
    if (corpus.count == 0 || k > corpus.count - 1)
        throw ArgumentError("k exceeds corpus size (query excluded)");
    RetrievalResult res;
    res.query = query;
    std::vector<std::pair<std::size_t, double>> scored;
    scored.reserve(corpus.count - 1);
    const auto q = corpus.row(query);
    for (std::size_t i = 0; i < corpus.count; ++i) {
        if (i == query) continue;
        scored.emplace_back(i, cosine_similarity(q, corpus.row(i)));
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;  // deterministic tie rule
    });
    scored.resize(k);
    res.ranked = std::move(scored);
    return res;
}

std::vector<RetrievalResult> retrieval_protocol(const FeatureMatrix& features, std::size_t k) {
    std::vector<RetrievalResult> results(features.count);
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < features.count; ++q)
        results[q] = retrieve_topk(features, q, k);
    return results;
}

std::vector<double> accuracy_retrieval_curve(const std::vector<RetrievalResult>& results,
                                             const std::vector<std::int32_t>& labels,
                                             std::size_t max_rank) {
    if (results.empty()) throw ArgumentError("need at least one retrieval result");
    std::vector<double> curve(max_rank, 0.0);
    for (const RetrievalResult& r : results) {
        if (r.ranked.size() < max_rank)
            throw ArgumentError("a query has fewer ranked results than the requested rank");
        if (r.query >= labels.size()) throw ArgumentError("query id lacks a label");
        const std::int32_t want = labels[r.query];
        std::size_t hits = 0;
        for (std::size_t rank = 0; rank < max_rank; ++rank) {
            if (r.ranked[rank].first >= labels.size())
                throw ArgumentError("ranked candidate lacks a label");
            if (labels[r.ranked[rank].first] == want) ++hits;
            curve[rank] += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    for (double& v : curve) v /= static_cast<double>(results.size());
    return curve;
}

OneShotResult one_shot_nn(const FeatureMatrix& support,
                          const std::vector<std::int32_t>& support_classes,
                          const FeatureMatrix& queries, const std::vector<std::int32_t>& truth) {
    if (support.count != support_classes.size())
        throw ArgumentError("support class list does not match support rows");
    if (queries.count != truth.size()) throw ArgumentError("query label list does not match rows");
    std::vector<std::int32_t> seen(support_classes);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw ArgumentError("duplicate class in one-shot support set");

    OneShotResult res;
    res.predicted.resize(queries.count);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < queries.count; ++i) {
        double best = 2.0;  // cosine distance upper bound
        std::int32_t best_class = 0;
        bool first = true;
        for (std::size_t s = 0; s < support.count; ++s) {
            const double dist = 1.0 - cosine_similarity(queries.row(i), support.row(s));
            if (first || dist < best || (dist == best && support_classes[s] < best_class)) {
                best = dist;
                best_class = support_classes[s];
                first = false;
            }
        }
        res.predicted[i] = best_class;
        if (best_class == truth[i]) ++correct;
    }
    res.accuracy = static_cast<double>(correct) / static_cast<double>(queries.count);
    return res;
}

namespace {

// The classifier operates on unit vectors so its geometry matches the cosine
// metric used by retrieval and 1-NN.
FeatureMatrix normalized_rows(const FeatureMatrix& fm) {
    FeatureMatrix out = fm;
    for (std::size_t i = 0; i < out.count; ++i) {
        double n2 = 0.0;
        for (std::size_t j = 0; j < out.dim; ++j) n2 += out.values[i * out.dim + j] *
                                                        out.values[i * out.dim + j];
        if (n2 == 0.0) throw DomainError("cannot normalize a zero feature vector");
        const double inv = 1.0 / std::sqrt(n2);
        for (std::size_t j = 0; j < out.dim; ++j) out.values[i * out.dim + j] *= inv;
    }
    return out;
}

}  // namespace

LinearModel train_linear_classifier(const FeatureMatrix& raw_support,
                                    const std::vector<std::int32_t>& support_classes,
                                    LinearClassifierConfig cfg) {
    if (raw_support.count < 2) throw ArgumentError("linear classifier needs at least two classes");
    if (raw_support.count != support_classes.size())
        throw ArgumentError("support class list does not match support rows");
    for (double v : raw_support.values)
        if (!std::isfinite(v)) throw NumericError("non-finite feature in linear classifier input");
    const FeatureMatrix support = normalized_rows(raw_support);
    std::int32_t max_class = 0;
    for (std::int32_t c : support_classes) max_class = std::max(max_class, c);

    LinearModel model;
    model.classes = static_cast<std::size_t>(max_class) + 1;
    model.dim = support.dim;
    model.weights.assign(model.classes * model.dim, 0.0);
    model.biases.assign(model.classes, 0.0);

    // One-vs-rest hinge loss with L2 regularization, deterministic full-batch
    // subgradient steps of size 0.1/sqrt(t).
    std::vector<double> gw(model.dim);
    for (std::size_t cls = 0; cls < model.classes; ++cls) {
        double* w = model.weights.data() + cls * model.dim;
        double& b = model.biases[cls];
        for (std::size_t t = 1; t <= cfg.steps; ++t) {
            std::fill(gw.begin(), gw.end(), 0.0);
            double gb = 0.0;
            for (std::size_t s = 0; s < support.count; ++s) {
                const double y = support_classes[s] == static_cast<std::int32_t>(cls) ? 1.0 : -1.0;
                const auto x = support.row(s);
                double score = b;
                for (std::size_t j = 0; j < model.dim; ++j) score += w[j] * x[j];
                if (y * score < 1.0) {
                    for (std::size_t j = 0; j < model.dim; ++j) gw[j] -= y * x[j];
                    gb -= y;
                }
            }
            const double inv_n = 1.0 / static_cast<double>(support.count);
            const double step = 0.1 / std::sqrt(static_cast<double>(t));
            for (std::size_t j = 0; j < model.dim; ++j)
                w[j] -= step * (gw[j] * inv_n + cfg.lambda * w[j]);
            b -= step * gb * inv_n;
        }
    }
    return model;
}

std::vector<std::int32_t> classify(const LinearModel& model, const FeatureMatrix& raw_queries) {
    if (raw_queries.dim != model.dim) throw DimensionError("query dimension does not match model");
    const FeatureMatrix queries = normalized_rows(raw_queries);
    std::vector<std::int32_t> out(queries.count);
    for (std::size_t i = 0; i < queries.count; ++i) {
        double best = 0.0;
        std::int32_t best_class = 0;
        for (std::size_t cls = 0; cls < model.classes; ++cls) {
            const double* w = model.weights.data() + cls * model.dim;
            double score = model.biases[cls];
            const auto x = queries.row(i);
            for (std::size_t j = 0; j < model.dim; ++j) score += w[j] * x[j];
            if (cls == 0 || score > best) {  // ties keep the lower class id
                best = score;
                best_class = static_cast<std::int32_t>(cls);
            }
        }
        out[i] = best_class;
    }
    return out;
}

std::vector<std::vector<double>> lerp(std::span<const double> z1, std::span<const double> z2,
                                      std::size_t steps) {
    if (z1.size() != z2.size()) throw DimensionError("interpolation endpoints must match");
    if (steps < 2) throw ArgumentError("interpolation needs at least 2 steps");
    std::vector<std::vector<double>> out(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
        out[s].resize(z1.size());
        if (s == 0)
            std::copy(z1.begin(), z1.end(), out[s].begin());
        else if (s == steps - 1)
            std::copy(z2.begin(), z2.end(), out[s].begin());
        else
            for (std::size_t j = 0; j < z1.size(); ++j) out[s][j] = z1[j] + t * (z2[j] - z1[j]);
    }
    return out;
}

std::vector<std::vector<double>> slerp(std::span<const double> z1, std::span<const double> z2,
                                       std::size_t steps) {
    if (z1.size() != z2.size()) throw DimensionError("interpolation endpoints must match");
    if (steps < 2) throw ArgumentError("interpolation needs at least 2 steps");
    double n1 = 0.0, n2 = 0.0, dot = 0.0;
    for (std::size_t j = 0; j < z1.size(); ++j) {
        n1 += z1[j] * z1[j];
        n2 += z2[j] * z2[j];
        dot += z1[j] * z2[j];
    }
    if (n1 == 0.0 || n2 == 0.0) throw DomainError("slerp undefined for zero vectors");
    double c = dot / (std::sqrt(n1) * std::sqrt(n2));
    c = std::min(1.0, std::max(-1.0, c));
    const double omega = std::acos(c);
    if (omega < 1e-6) return lerp(z1, z2, steps);  // nearly parallel

    const double so = std::sin(omega);
    std::vector<std::vector<double>> out(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        out[s].resize(z1.size());
        if (s == 0) {
            std::copy(z1.begin(), z1.end(), out[s].begin());
            continue;
        }
        if (s == steps - 1) {
            std::copy(z2.begin(), z2.end(), out[s].begin());
            continue;
        }
        const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
        const double a = std::sin((1.0 - t) * omega) / so;
        const double b = std::sin(t * omega) / so;
        for (std::size_t j = 0; j < z1.size(); ++j) out[s][j] = a * z1[j] + b * z2[j];
    }
    return out;
}

ModeCoverage mode_coverage(const Tensor& samples, const MixtureSpec& spec, double radius_sigmas,
                           double min_fraction) {
    spec.validate();
    if (samples.rank() != 2 || samples.dim(1) != 2)
        throw DimensionError("mode coverage expects (n,2) samples");
    const std::size_t n = samples.dim(0);
    ModeCoverage res;
    if (n == 0) return res;
    std::vector<std::size_t> per_mode(spec.components.size(), 0);
    std::size_t near_any = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = samples.at2(i, 0), y = samples.at2(i, 1);
        bool any = false;
        for (std::size_t c = 0; c < spec.components.size(); ++c) {
            const auto& mc = spec.components[c];
            const double dx = x - mc.mean_x, dy = y - mc.mean_y;
            const double r = radius_sigmas * mc.sigma;
            if (dx * dx + dy * dy <= r * r) {
                ++per_mode[c];
                any = true;
            }
        }
        if (any) ++near_any;
    }
    for (std::size_t c = 0; c < spec.components.size(); ++c)
        if (static_cast<double>(per_mode[c]) >= min_fraction * static_cast<double>(n))
            ++res.covered_modes;
    res.high_quality_fraction = static_cast<double>(near_any) / static_cast<double>(n);
    return res;
}

DiscreteDistribution smoothed_histogram_2d(const Tensor& samples, Bounds b, std::size_t g,
                                           double alpha) {
    if (samples.rank() != 2 || samples.dim(1) != 2)
        throw DimensionError("histogram expects (n,2) samples");
    if (samples.dim(0) == 0) throw ArgumentError("histogram needs non-empty samples");
    if (!(alpha > 0.0)) throw ArgumentError("smoothing alpha must be positive");
    std::vector<double> counts(g * g, alpha);
    const double cw = (b.x1 - b.x0) / static_cast<double>(g);
    const double ch = (b.y1 - b.y0) / static_cast<double>(g);
    for (std::size_t i = 0; i < samples.dim(0); ++i) {
        const double x = samples.at2(i, 0), y = samples.at2(i, 1);
        auto cell = [g](double v, double lo, double width) {
            const double f = std::floor((v - lo) / width);
            const long idx = static_cast<long>(f);
            return static_cast<std::size_t>(
                std::min<long>(static_cast<long>(g) - 1, std::max<long>(0, idx)));
        };
        counts[cell(y, b.y0, ch) * g + cell(x, b.x0, cw)] += 1.0;
    }
    return DiscreteDistribution::normalized(std::move(counts));
}

std::pair<double, double> empirical_kl_pair(const Tensor& samples_p, const Tensor& samples_q,
                                            Bounds bounds, std::size_t g, double alpha) {
    const DiscreteDistribution hp = smoothed_histogram_2d(samples_p, bounds, g, alpha);
    const DiscreteDistribution hq = smoothed_histogram_2d(samples_q, bounds, g, alpha);
    return {kl_divergence(hp, hq), kl_divergence(hq, hp)};
}

std::vector<NearestNeighborHit> nearest_training_neighbor(const Tensor& generated,
                                                          const Tensor& training) {
    if (generated.rank() < 2 || training.rank() < 2)
        throw DimensionError("nearest neighbor expects batched tensors");
    if (training.dim(0) == 0) throw ArgumentError("training set must be non-empty");
    const std::size_t per_g = generated.numel() / generated.dim(0);
    const std::size_t per_t = training.numel() / training.dim(0);
    if (per_g != per_t)
        throw DimensionError("sample dimensions differ: " + std::to_string(per_g) + " vs " +
                             std::to_string(per_t));
    const std::size_t n = generated.dim(0), m = training.dim(0);
    std::vector<NearestNeighborHit> hits(n);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        const double* g = generated.data.data() + i * per_g;
        double best = -1.0;
        std::size_t best_idx = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const double* t = training.data.data() + j * per_t;
            double d2 = 0.0;
            for (std::size_t p = 0; p < per_g; ++p) {
                const double d = g[p] - t[p];
                d2 += d * d;
            }
            if (best < 0.0 || d2 < best) {  // ties keep the lower index
                best = d2;
                best_idx = j;
            }
        }
        hits[i] = {best_idx, std::sqrt(best)};
    }
    return hits;
}

}  // namespace pigan
