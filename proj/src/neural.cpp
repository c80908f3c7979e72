#include "mddpg/neural.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mddpg {

namespace {

void check_shapes(const MlpParams& net) {
    for (size_t l = 0; l + 1 < net.layers.size(); ++l)
        if (net.layers[l].out != net.layers[l + 1].in)
            throw std::invalid_argument("consecutive layer dimensions disagree");
}

double activate(double z, Activation a) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Identity: return z;
    }
    return z;
}

// Derivative expressed through the post-activation value.
double activate_grad(double post, Activation a) {
    switch (a) {
        case Activation::ReLU: return post > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - post * post;
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

} // namespace

GradientSet zero_gradients(const MlpParams& net) {
    GradientSet g;
    g.layers.resize(net.layers.size());
    for (size_t l = 0; l < net.layers.size(); ++l) {
        g.layers[l].dw.assign(net.layers[l].w.size(), 0.0);
        g.layers[l].db.assign(net.layers[l].b.size(), 0.0);
    }
    return g;
}

void scale_gradients(GradientSet& g, double factor) {
    for (auto& l : g.layers) {
        for (auto& x : l.dw) x *= factor;
        for (auto& x : l.db) x *= factor;
    }
}

void forward_batch(const MlpParams& net, const double* input, size_t batch,
                   ForwardCache& cache) {
    const size_t n_layers = net.layers.size();
    if (n_layers == 0) throw std::invalid_argument("forward: empty network");
    cache.batch = batch;
    cache.inputs.resize(n_layers);
    cache.inputs[0].assign(input,
                           input + batch * static_cast<size_t>(net.input_size()));

    for (size_t l = 0; l < n_layers; ++l) {
        const Layer& layer = net.layers[l];
        const size_t in = static_cast<size_t>(layer.in);
        const size_t out = static_cast<size_t>(layer.out);
        if (cache.inputs[l].size() != batch * in)
            throw std::invalid_argument("forward: input width mismatch");

        const double* x = cache.inputs[l].data();
        std::vector<double>& y =
            (l + 1 == n_layers) ? cache.output : cache.inputs[l + 1];
        y.resize(batch * out);

        for (size_t i = 0; i < batch; ++i) {
            const double* xi = x + i * in;
            double* yi = y.data() + i * out;
            for (size_t o = 0; o < out; ++o) {
                const double* wrow = layer.w.data() + o * in;
                double z = layer.b[o];
                for (size_t k = 0; k < in; ++k) z += wrow[k] * xi[k];
                yi[o] = activate(z, layer.act);
            }
        }
    }
}

void backward_batch(const MlpParams& net, const ForwardCache& cache,
                    const std::vector<double>& gout, GradientSet& grads,
                    std::vector<double>* input_grad) {
    const size_t n_layers = net.layers.size();
    const size_t batch = cache.batch;
    if (grads.layers.size() != n_layers)
        throw std::invalid_argument("backward: gradient shape mismatch");
    if (gout.size() != batch * static_cast<size_t>(net.output_size()))
        throw std::invalid_argument("backward: output gradient size mismatch");

    std::vector<double> delta = gout; // dL/d(post-activation) of current layer
    std::vector<double> next_delta;

    for (size_t l = n_layers; l-- > 0;) {
        const Layer& layer = net.layers[l];
        const size_t in = static_cast<size_t>(layer.in);
        const size_t out = static_cast<size_t>(layer.out);
        const std::vector<double>& post =
            (l + 1 == n_layers) ? cache.output : cache.inputs[l + 1];
        const std::vector<double>& x = cache.inputs[l];
        LayerGrad& g = grads.layers[l];

        // delta <- dL/dz through the activation.
        for (size_t i = 0; i < batch * out; ++i)
            delta[i] *= activate_grad(post[i], layer.act);

        bool want_input = (l > 0) || (input_grad != nullptr);
        if (want_input) next_delta.assign(batch * in, 0.0);

        for (size_t i = 0; i < batch; ++i) {
            const double* xi = x.data() + i * in;
            const double* di = delta.data() + i * out;
            double* gi = want_input ? next_delta.data() + i * in : nullptr;
            for (size_t o = 0; o < out; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                double* gw = g.dw.data() + o * in;
                for (size_t k = 0; k < in; ++k) gw[k] += d * xi[k];
                g.db[o] += d;
                if (gi) {
                    const double* wrow = layer.w.data() + o * in;
                    for (size_t k = 0; k < in; ++k) gi[k] += d * wrow[k];
                }
            }
        }
        if (l == 0 && input_grad) *input_grad = next_delta;
        delta.swap(next_delta);
    }
}

std::vector<double> forward(const MlpParams& net,
                            const std::vector<double>& input,
                            ForwardCache& cache) {
    if (input.size() != static_cast<size_t>(net.input_size()))
        throw std::invalid_argument("forward: input length mismatch");
    forward_batch(net, input.data(), 1, cache);
    return cache.output;
}

std::pair<GradientSet, std::vector<double>> backward(
    const MlpParams& net, const ForwardCache& cache,
    const std::vector<double>& output_gradient) {
    GradientSet grads = zero_gradients(net);
    std::vector<double> input_grad;
    backward_batch(net, cache, output_gradient, grads, &input_grad);
    return {std::move(grads), std::move(input_grad)};
}

AdamState make_adam_state(const MlpParams& net) {
    AdamState st;
    st.m.resize(net.layers.size());
    st.v.resize(net.layers.size());
    for (size_t l = 0; l < net.layers.size(); ++l) {
        st.m[l].dw.assign(net.layers[l].w.size(), 0.0);
        st.m[l].db.assign(net.layers[l].b.size(), 0.0);
        st.v[l].dw.assign(net.layers[l].w.size(), 0.0);
        st.v[l].db.assign(net.layers[l].b.size(), 0.0);
    }
    return st;
}

void adam_step(MlpParams& net, const GradientSet& grads, AdamState& state,
               double lr) {
    if (grads.layers.size() != net.layers.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, state.t);
    const double bc2 = 1.0 - std::pow(state.beta2, state.t);

    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        if (g.size() != p.size())
            throw std::invalid_argument("adam_step: shape mismatch");
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    };
    for (size_t l = 0; l < net.layers.size(); ++l) {
        update(net.layers[l].w, grads.layers[l].dw, state.m[l].dw, state.v[l].dw);
        update(net.layers[l].b, grads.layers[l].db, state.m[l].db, state.v[l].db);
    }
}

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
    if (!same_shape(target, online))
        throw std::invalid_argument("soft_update: shape mismatch");
    for (size_t l = 0; l < target.layers.size(); ++l) {
        auto& tw = target.layers[l].w;
        auto& tb = target.layers[l].b;
        const auto& ow = online.layers[l].w;
        const auto& ob = online.layers[l].b;
        for (size_t i = 0; i < tw.size(); ++i)
            tw[i] = tau * ow[i] + (1.0 - tau) * tw[i];
        for (size_t i = 0; i < tb.size(); ++i)
            tb[i] = tau * ob[i] + (1.0 - tau) * tb[i];
    }
}

MlpParams make_mlp(const std::vector<long>& dims, Activation hidden,
                   Activation output, Rng& rng) {
    if (dims.size() < 2)
        throw std::invalid_argument("make_mlp: need at least input and output");
    MlpParams net;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.act = (l + 2 == dims.size()) ? output : hidden;
        double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        layer.w.resize(static_cast<size_t>(layer.in * layer.out));
        layer.b.resize(static_cast<size_t>(layer.out));
        for (auto& w : layer.w) w = rng.uniform(-bound, bound);
        for (auto& b : layer.b) b = rng.uniform(-bound, bound);
        net.layers.push_back(std::move(layer));
    }
    check_shapes(net);
    return net;
}

bool all_finite(const MlpParams& net) {
    for (const auto& l : net.layers) {
        for (double w : l.w)
            if (!std::isfinite(w)) return false;
        for (double b : l.b)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

bool same_shape(const MlpParams& a, const MlpParams& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (size_t l = 0; l < a.layers.size(); ++l)
        if (a.layers[l].in != b.layers[l].in ||
            a.layers[l].out != b.layers[l].out)
            return false;
    return true;
}

namespace {

constexpr char kMagic[8] = {'M', 'D', 'D', 'P', 'G', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF),
                 static_cast<char>((v >> 24) & 0xFF)};
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os.write(b, 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

} // namespace

void save_network(const MlpParams& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        put_u32(os, static_cast<std::uint32_t>(l.in));
        put_u32(os, static_cast<std::uint32_t>(l.out));
        char act = static_cast<char>(l.act);
        os.write(&act, 1);
        for (double w : l.w) put_f64(os, w);
        for (double b : l.b) put_f64(os, b);
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

MlpParams load_network(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("bad checkpoint magic: " + path);
    std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " +
                                 std::to_string(version));
    std::uint32_t n_layers = get_u32(is);
    MlpParams net;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        Layer layer;
        layer.in = static_cast<long>(get_u32(is));
        layer.out = static_cast<long>(get_u32(is));
        char act;
        is.read(&act, 1);
        if (act < 0 || act > 2)
            throw std::runtime_error("bad activation tag in checkpoint");
        layer.act = static_cast<Activation>(act);
        layer.w.resize(static_cast<size_t>(layer.in * layer.out));
        layer.b.resize(static_cast<size_t>(layer.out));
        for (auto& w : layer.w) w = get_f64(is);
        for (auto& b : layer.b) b = get_f64(is);
        net.layers.push_back(std::move(layer));
    }
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    check_shapes(net);
    return net;
}

} // namespace mddpg
