#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pigan/mixture.hpp"
#include "pigan/network.hpp"

namespace pigan {

/// Row-per-sample feature store (penultimate-layer activations).
struct FeatureMatrix {
    std::size_t count = 0, dim = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// Activations entering the last dense layer of the discriminator, computed
/// in inference mode so they are independent of batch composition.
FeatureMatrix encode_features(const NetworkSpec& d, const ParameterSet& params,
                              const Tensor& samples);

/// dot(u,v)/(|u||v|); zero vectors are rejected.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct RetrievalResult {
    std::size_t query = 0;
    std::vector<std::pair<std::size_t, double>> ranked;  // (sample id, similarity), descending
};

/// Top-k by cosine similarity within the corpus, the query row excluded.
/// Ties break toward the lower sample id.
RetrievalResult retrieve_topk(const FeatureMatrix& corpus, std::size_t query, std::size_t k);

/// curve[r-1] = mean over queries of the fraction of the top-r results that
/// share the query's label.
std::vector<double> accuracy_retrieval_curve(const std::vector<RetrievalResult>& results,
                                             const std::vector<std::int32_t>& labels,
                                             std::size_t max_rank);

/// Runs every sample as a query against the rest of the corpus.
std::vector<RetrievalResult> retrieval_protocol(const FeatureMatrix& features, std::size_t k);

struct OneShotResult {
    std::vector<std::int32_t> predicted;
    double accuracy = 0.0;
};

/// Nearest support vector under cosine distance; exactly one support row per
/// class. Ties break toward the lower class id.
OneShotResult one_shot_nn(const FeatureMatrix& support,
                          const std::vector<std::int32_t>& support_classes,
                          const FeatureMatrix& queries, const std::vector<std::int32_t>& truth);

struct LinearClassifierConfig {
    double lambda = 1e-3;
    std::size_t steps = 2000;  // step size 0.1/sqrt(t)
};

struct LinearModel {
    std::size_t classes = 0, dim = 0;
    std::vector<double> weights;  // (classes, dim)
    std::vector<double> biases;   // (classes)
};

/// One-vs-rest hinge-loss classifier fit by subgradient descent on the
/// single support example per class. Inputs are L2-normalized internally so
/// the decision geometry matches the cosine metric used elsewhere.
LinearModel train_linear_classifier(const FeatureMatrix& support,
                                    const std::vector<std::int32_t>& support_classes,
                                    LinearClassifierConfig cfg = {});
std::vector<std::int32_t> classify(const LinearModel& model, const FeatureMatrix& queries);

/// Evenly spaced points on the straight line from z1 to z2 (endpoints exact).
std::vector<std::vector<double>> lerp(std::span<const double> z1, std::span<const double> z2,
                                      std::size_t steps);

/// Constant-angular-speed path; falls back to lerp for nearly parallel
/// vectors. Preserves the common norm when |z1| = |z2|.
std::vector<std::vector<double>> slerp(std::span<const double> z1, std::span<const double> z2,
                                       std::size_t steps);

struct ModeCoverage {
    std::size_t covered_modes = 0;
    double high_quality_fraction = 0.0;
};

/// A mode counts as covered when at least min_fraction of the samples fall
/// within radius_sigmas * sigma of its mean.
ModeCoverage mode_coverage(const Tensor& samples, const MixtureSpec& spec,
                           double radius_sigmas = 3.0, double min_fraction = 0.01);

/// Additively smoothed g x g histogram of (n,2) samples; samples outside the
/// bounds are clamped into the edge cells.
DiscreteDistribution smoothed_histogram_2d(const Tensor& samples, Bounds bounds, std::size_t g,
                                           double alpha = 0.5);

/// Histograms both sample sets on a common g x g grid with additive
/// smoothing alpha per cell and returns (KL[p||q], KL[q||p]).
std::pair<double, double> empirical_kl_pair(const Tensor& samples_p, const Tensor& samples_q,
                                            Bounds bounds, std::size_t g, double alpha = 0.5);

struct NearestNeighborHit {
    std::size_t index = 0;
    double distance = 0.0;  // pixelwise L2
};

/// Exact brute-force nearest training sample for every generated sample.
std::vector<NearestNeighborHit> nearest_training_neighbor(const Tensor& generated,
                                                          const Tensor& training);

}  // namespace pigan
