#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ganids/error.hpp"
#include "ganids/io.hpp"
#include "ganids/matrix.hpp"
#include "ganids/rng.hpp"

namespace ganids {

enum class Activation : std::uint8_t { relu = 0, sigmoid = 1, linear = 2 };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::linear: return "linear";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "linear") return Activation::linear;
    throw DataError("unknown activation: " + s);
}

struct LayerSpec {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    Activation act = Activation::linear;
    double dropout = 0.0;  // applied after the activation, training mode only
};

struct Layer {
    Matrix w;  // fan_out x fan_in
    std::vector<double> b;
    Activation act = Activation::linear;
    double dropout = 0.0;

    std::size_t fan_in() const { return w.cols; }
    std::size_t fan_out() const { return w.rows; }
};

// Fully connected network. Adjacent layer dimensions must chain.
struct Mlp {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.front().fan_in(); }
    std::size_t output_dim() const { return layers.back().fan_out(); }

    std::size_t n_params() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.w.data.size() + l.b.size();
        return n;
    }
};

// He uniform: entries i.i.d. on [-L, L] with L = sqrt(6 / fan_in); zero biases.
inline Matrix init_he_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
    if (fan_in < 1) throw ConfigError("fan_in must be >= 1");
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    Rng rng(seed);
    Matrix w(fan_out, fan_in);
    for (auto& v : w.data) v = rng.uniform(-limit, limit);
    return w;
}

inline Mlp make_mlp(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    Mlp net;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        if (i > 0 && s.fan_in != specs[i - 1].fan_out)
            throw ConfigError("layer dimensions do not chain at layer " + std::to_string(i));
        if (s.dropout < 0.0 || s.dropout >= 1.0)
            throw ConfigError("dropout rate must be in [0,1)");
        Layer l;
        l.w = init_he_uniform(s.fan_in, s.fan_out, derive_seed(seed, "layer" + std::to_string(i)));
        l.b.assign(s.fan_out, 0.0);
        l.act = s.act;
        l.dropout = s.dropout;
        net.layers.push_back(std::move(l));
    }
    return net;
}

// ---------------------------------------------------------------------------
// forward / backward
// ---------------------------------------------------------------------------

struct ForwardCache {
    std::vector<Matrix> inputs;     // input seen by each layer
    std::vector<Matrix> preacts;    // z = x W^T + b
    std::vector<Matrix> acts;       // act(z), before dropout
    std::vector<Matrix> dropscale;  // mask/(1-p); empty matrix when no dropout
    Matrix output;
};

namespace detail {

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::linear: return z;
    }
    return z;
}

// derivative in terms of (z, act(z))
inline double activate_deriv(Activation a, double z, double y) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid: return y * (1.0 - y);
        case Activation::linear: return 1.0;
    }
    return 1.0;
}

}  // namespace detail

// Inverted dropout: train-time activations are scaled by 1/(1-p) so the
// inference pass needs no mask. dropout_rng may be null when the net has no
// dropout layers or training is false.
inline ForwardCache forward(const Mlp& net, const Matrix& batch, bool training,
                            Rng* dropout_rng = nullptr) {
    if (batch.cols != net.input_dim())
        throw NumericError("batch width " + std::to_string(batch.cols) +
                           " does not match net input " + std::to_string(net.input_dim()));
    ForwardCache cache;
    Matrix h = batch;
    for (const Layer& l : net.layers) {
        cache.inputs.push_back(h);
        Matrix z = matmul_nt(h, l.w);
        for (std::size_t r = 0; r < z.rows; ++r)
            for (std::size_t c = 0; c < z.cols; ++c) z(r, c) += l.b[c];
        Matrix a(z.rows, z.cols);
        for (std::size_t i = 0; i < z.data.size(); ++i)
            a.data[i] = detail::activate(l.act, z.data[i]);
        cache.preacts.push_back(std::move(z));
        cache.acts.push_back(a);
        if (training && l.dropout > 0.0) {
            if (!dropout_rng) throw NumericError("dropout layer needs an rng in training mode");
            Matrix mask(a.rows, a.cols);
            double keep = 1.0 - l.dropout;
            for (auto& m : mask.data) m = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
            for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] *= mask.data[i];
            cache.dropscale.push_back(std::move(mask));
        } else {
            cache.dropscale.emplace_back();
        }
        h = std::move(a);
    }
    cache.output = std::move(h);
    return cache;
}

inline Matrix forward_infer(const Mlp& net, const Matrix& batch) {
    return forward(net, batch, false).output;
}

struct Gradients {
    std::vector<Matrix> dw;
    std::vector<std::vector<double>> db;

    static Gradients zeros_like(const Mlp& net) {
        Gradients g;
        for (const auto& l : net.layers) {
            g.dw.emplace_back(l.fan_out(), l.fan_in());
            g.db.emplace_back(l.fan_out(), 0.0);
        }
        return g;
    }

    void add_scaled(const Gradients& o, double s) {
        for (std::size_t i = 0; i < dw.size(); ++i) {
            for (std::size_t j = 0; j < dw[i].data.size(); ++j) dw[i].data[j] += s * o.dw[i].data[j];
            for (std::size_t j = 0; j < db[i].size(); ++j) db[i][j] += s * o.db[i][j];
        }
    }
};

// Standard backprop. output_grad is dLoss/dOutput; returns dLoss/dInput and
// fills parameter gradients.
inline Matrix backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad,
                       Gradients& grads) {
    if (!output_grad.same_shape(cache.output))
        throw NumericError("output gradient shape does not match cached forward pass");
    grads = Gradients::zeros_like(net);
    Matrix dh = output_grad;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Layer& l = net.layers[li];
        Matrix dz = dh;
        if (cache.dropscale[li].rows > 0)
            for (std::size_t i = 0; i < dz.data.size(); ++i)
                dz.data[i] *= cache.dropscale[li].data[i];
        const Matrix& z = cache.preacts[li];
        const Matrix& a = cache.acts[li];
        for (std::size_t i = 0; i < dz.data.size(); ++i)
            dz.data[i] *= detail::activate_deriv(l.act, z.data[i], a.data[i]);
        grads.dw[li] = matmul_tn(dz, cache.inputs[li]);
        for (std::size_t r = 0; r < dz.rows; ++r)
            for (std::size_t c = 0; c < dz.cols; ++c) grads.db[li][c] += dz(r, c);
        dh = matmul(dz, l.w);
    }
    return dh;
}

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

struct OptState {
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;
    std::uint64_t step = 0;
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;

    static OptState make(const Mlp& net, double lr, double beta1 = 0.5, double beta2 = 0.9) {
        OptState s;
        s.lr = lr;
        s.beta1 = beta1;
        s.beta2 = beta2;
        for (const auto& l : net.layers) {
            s.mw.emplace_back(l.fan_out(), l.fan_in());
            s.vw.emplace_back(l.fan_out(), l.fan_in());
            s.mb.emplace_back(l.fan_out(), 0.0);
            s.vb.emplace_back(l.fan_out(), 0.0);
        }
        return s;
    }
};

// Bias-corrected adaptive-moment update.
inline void adam_step(Mlp& net, const Gradients& grads, OptState& s) {
    ++s.step;
    double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        Layer& l = net.layers[li];
        for (std::size_t i = 0; i < l.w.data.size(); ++i) {
            double g = grads.dw[li].data[i];
            double& m = s.mw[li].data[i];
            double& v = s.vw[li].data[i];
            m = s.beta1 * m + (1.0 - s.beta1) * g;
            v = s.beta2 * v + (1.0 - s.beta2) * g * g;
            l.w.data[i] -= s.lr * (m / c1) / (std::sqrt(v / c2) + s.eps);
        }
        for (std::size_t i = 0; i < l.b.size(); ++i) {
            double g = grads.db[li][i];
            double& m = s.mb[li][i];
            double& v = s.vb[li][i];
            m = s.beta1 * m + (1.0 - s.beta1) * g;
            v = s.beta2 * v + (1.0 - s.beta2) * g * g;
            l.b[i] -= s.lr * (m / c1) / (std::sqrt(v / c2) + s.eps);
        }
    }
}

// ---------------------------------------------------------------------------
// input gradients and the gradient-penalty kernel
// ---------------------------------------------------------------------------

// Per-row gradient of the summed output w.r.t. the input, computed by a
// backward pass seeded with a unit output gradient (inference mode).
inline Matrix input_gradients(const Mlp& net, const Matrix& batch) {
    ForwardCache cache = forward(net, batch, false);
    Gradients g;
    Matrix ones(cache.output.rows, cache.output.cols, 1.0);
    return backward(net, cache, ones, g);
}

inline std::vector<double> input_gradient_norms(const Mlp& net, const Matrix& batch) {
    Matrix g = input_gradients(net, batch);
    std::vector<double> norms(g.rows);
    for (std::size_t r = 0; r < g.rows; ++r) {
        double s = 0.0;
        for (double v : g.row(r)) s += v * v;
        norms[r] = std::sqrt(s);
    }
    return norms;
}

// Gradient-norm penalty mean_i (||grad_x f(x_i)|| - 1)^2 together with its
// exact parameter gradients, for scalar-output nets with relu/linear
// activations only.
//
// Within a linear region the relu masks M_l = act'(z_l) (times the dropout
// scale) are constant, so the input gradient G is computed by the chain
//     d_L = 1,   d_{l-1} = (d_l . M_l) W_l,   G = d_0
// which is multilinear in the weight matrices and independent of the biases.
// Backpropagating through that chain (masks held fixed; relu'' = 0 a.e.)
// gives the exact penalty gradients: with P = dPen/dG,
//     adj_0 = P;  for l = 1..L:
//       adj_z  = adj_{l-1} W_l^T
//       dW_l  += (d_l . M_l)^T adj_{l-1}
//       adj_l  = adj_z . M_l
// Bias gradients of the penalty vanish almost everywhere.
inline double gradient_norm_penalty(const Mlp& net, const Matrix& batch, bool training,
                                    Rng* dropout_rng, Gradients& grads) {
    for (const auto& l : net.layers)
        if (l.act == Activation::sigmoid)
            throw NumericError("gradient penalty requires a relu/linear critic");
    if (net.output_dim() != 1)
        throw NumericError("gradient penalty requires a scalar-output critic");

    const std::size_t L = net.layers.size();
    const std::size_t n = batch.rows;
    ForwardCache cache = forward(net, batch, training, dropout_rng);

    // combined masks: relu derivative times dropout scale
    std::vector<Matrix> mask(L);
    for (std::size_t li = 0; li < L; ++li) {
        const Layer& l = net.layers[li];
        const Matrix& z = cache.preacts[li];
        Matrix m(z.rows, z.cols, 1.0);
        if (l.act == Activation::relu)
            for (std::size_t i = 0; i < z.data.size(); ++i)
                m.data[i] = z.data[i] > 0.0 ? 1.0 : 0.0;
        if (cache.dropscale[li].rows > 0)
            for (std::size_t i = 0; i < m.data.size(); ++i)
                m.data[i] *= cache.dropscale[li].data[i];
        mask[li] = std::move(m);
    }

    // backward chain for the input gradient; keep the masked deltas d_l . M_l
    std::vector<Matrix> masked_delta(L);
    Matrix dh(n, 1, 1.0);
    for (std::size_t li = L; li-- > 0;) {
        Matrix dz = hadamard(dh, mask[li]);
        dh = matmul(dz, net.layers[li].w);
        masked_delta[li] = std::move(dz);
    }
    const Matrix& input_grad = dh;  // n x input_dim

    double penalty = 0.0;
    Matrix p(n, input_grad.cols);  // dPen/dG
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (double v : input_grad.row(r)) s += v * v;
        double norm = std::sqrt(s);
        double diff = norm - 1.0;
        penalty += diff * diff;
        if (norm > 0.0) {
            double coef = 2.0 * diff / (norm * static_cast<double>(n));
            for (std::size_t c = 0; c < input_grad.cols; ++c)
                p(r, c) = coef * input_grad(r, c);
        }
    }
    penalty /= static_cast<double>(n);

    // adjoint sweep through the reversed chain
    grads = Gradients::zeros_like(net);
    Matrix adj = std::move(p);
    for (std::size_t li = 0; li < L; ++li) {
        grads.dw[li] = matmul_tn(masked_delta[li], adj);
        adj = hadamard(matmul_nt(adj, net.layers[li].w), mask[li]);
    }
    return penalty;
}

// ---------------------------------------------------------------------------
// weight serialization: versioned binary plus a text sidecar
// ---------------------------------------------------------------------------

inline constexpr char kMlpMagic[8] = {'G', 'I', 'D', 'S', 'M', 'L', 'P', '\n'};
inline constexpr std::uint32_t kMlpVersion = 1;

inline void write_mlp(std::ostream& os, const Mlp& net) {
    os.write(kMlpMagic, 8);
    detail::write_pod<std::uint32_t>(os, kMlpVersion);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.fan_in()));
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.fan_out()));
        detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(l.act));
        detail::write_pod<double>(os, l.dropout);
        detail::write_doubles(os, l.w.data.data(), l.w.data.size());
        detail::write_doubles(os, l.b.data(), l.b.size());
    }
}

inline Mlp read_mlp(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMlpMagic, 8) != 0) throw DataError("not a weight file");
    auto version = detail::read_pod<std::uint32_t>(is);
    if (version != kMlpVersion)
        throw DataError("unsupported weight file version " + std::to_string(version));
    auto n_layers = detail::read_pod<std::uint32_t>(is);
    Mlp net;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        Layer l;
        auto fan_in = detail::read_pod<std::uint32_t>(is);
        auto fan_out = detail::read_pod<std::uint32_t>(is);
        l.act = static_cast<Activation>(detail::read_pod<std::uint8_t>(is));
        l.dropout = detail::read_pod<double>(is);
        l.w = Matrix(fan_out, fan_in);
        detail::read_doubles(is, l.w.data.data(), l.w.data.size());
        l.b.resize(fan_out);
        detail::read_doubles(is, l.b.data(), l.b.size());
        net.layers.push_back(std::move(l));
    }
    return net;
}

}  // namespace ganids
