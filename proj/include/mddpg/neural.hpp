#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mddpg/rng.hpp"

namespace mddpg {

enum class Activation : std::uint8_t { ReLU = 0, Tanh = 1, Identity = 2 };

struct Layer {
    long in = 0;
    long out = 0;
    Activation act = Activation::Identity;
    std::vector<double> w; // row-major [out][in]
    std::vector<double> b; // [out]
};

struct MlpParams {
    std::vector<Layer> layers;

    long input_size() const { return layers.empty() ? 0 : layers.front().in; }
    long output_size() const { return layers.empty() ? 0 : layers.back().out; }
    long parameter_count() const {
        long n = 0;
        for (const auto& l : layers) n += l.in * l.out + l.out;
        return n;
    }
};

struct LayerGrad {
    std::vector<double> dw;
    std::vector<double> db;
};

struct GradientSet {
    std::vector<LayerGrad> layers;
};

GradientSet zero_gradients(const MlpParams& net);
void scale_gradients(GradientSet& g, double factor);

// Activations cached during forward; backward reads them instead of
// recomputing. inputs[l] is the input batch of layer l, output the final
// post-activation batch.
struct ForwardCache {
    size_t batch = 0;
    std::vector<std::vector<double>> inputs;
    std::vector<double> output;
};

// Batched forward over `batch` row-major input rows.
void forward_batch(const MlpParams& net, const double* input, size_t batch,
                   ForwardCache& cache);

// Accumulates parameter gradients of sum_i output_i . gout_i into `grads`
// (which must be zeroed or partially accumulated by the caller) and, when
// input_grad is non-null, writes the gradient with respect to the inputs.
void backward_batch(const MlpParams& net, const ForwardCache& cache,
                    const std::vector<double>& gout, GradientSet& grads,
                    std::vector<double>* input_grad = nullptr);

// Single-sample wrappers.
std::vector<double> forward(const MlpParams& net,
                            const std::vector<double>& input,
                            ForwardCache& cache);
std::pair<GradientSet, std::vector<double>> backward(
    const MlpParams& net, const ForwardCache& cache,
    const std::vector<double>& output_gradient);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    std::vector<LayerGrad> m; // first moments, same shapes as the gradients
    std::vector<LayerGrad> v; // second moments
};

AdamState make_adam_state(const MlpParams& net);
void adam_step(MlpParams& net, const GradientSet& grads, AdamState& state,
               double lr);

// theta' <- tau * theta + (1 - tau) * theta'
void soft_update(MlpParams& target, const MlpParams& online, double tau);

// Uniform +-1/sqrt(fan_in) init for weights and biases, seeded.
MlpParams make_mlp(const std::vector<long>& dims, Activation hidden,
                   Activation output, Rng& rng);

bool all_finite(const MlpParams& net);
bool same_shape(const MlpParams& a, const MlpParams& b);

// Binary checkpoint: 8-byte magic "MDDPGNET", u32 version, u32 layer count,
// then per layer u32 in, u32 out, u8 activation, f64 weights (row-major) and
// f64 biases, all little-endian.
void save_network(const MlpParams& net, const std::string& path);
MlpParams load_network(const std::string& path);

} // namespace mddpg
