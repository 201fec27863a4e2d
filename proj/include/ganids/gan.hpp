#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ganids/error.hpp"
#include "ganids/io.hpp"
#include "ganids/matrix.hpp"
#include "ganids/neuralnet.hpp"
#include "ganids/preprocess.hpp"
#include "ganids/rng.hpp"

namespace ganids {

enum class GanKind : std::uint8_t { vanilla = 0, wgan = 1, ctgan = 2 };

inline const char* gan_kind_name(GanKind k) {
    switch (k) {
        case GanKind::vanilla: return "vanilla";
        case GanKind::wgan: return "wgan";
        case GanKind::ctgan: return "ctgan";
    }
    return "?";
}

inline GanKind gan_kind_from_name(const std::string& s) {
    if (s == "vanilla") return GanKind::vanilla;
    if (s == "wgan") return GanKind::wgan;
    if (s == "ctgan") return GanKind::ctgan;
    throw ConfigError("unknown GAN kind: " + s);
}

struct GanSpec {
    GanKind kind = GanKind::vanilla;
    std::size_t noise_dim = 32;
    std::size_t data_dim = 0;
    std::size_t label_dim = 0;    // ctgan only
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    double learning_rate = 2e-4;
    std::size_t n_critic = 5;     // wgan/ctgan
    double clip_value = 0.01;     // wgan only
    double gp_lambda = 10.0;      // ctgan only
    double mmd_bandwidth = 0.0;   // ctgan; 0 selects the median heuristic per step
    std::uint64_t seed = 0;

    void validate() const {
        if (data_dim == 0) throw ConfigError("data_dim must be positive");
        if (noise_dim == 0) throw ConfigError("noise_dim must be positive");
        if (epochs == 0 || batch_size == 0) throw ConfigError("epochs and batch_size must be positive");
        if (kind == GanKind::ctgan) {
            if (label_dim == 0) throw ConfigError("ctgan requires label_dim >= 1");
        } else if (label_dim != 0) {
            throw ConfigError("label_dim is a ctgan-only field");
        }
        if (kind != GanKind::vanilla && n_critic == 0)
            throw ConfigError("n_critic must be positive");
        if (kind == GanKind::wgan && clip_value <= 0.0)
            throw ConfigError("clip_value must be positive");
    }
};

// one entry per optimizer step; the counterpart loss repeats its latest value
struct LossTrace {
    std::vector<double> d_loss;
    std::vector<double> g_loss;

    std::size_t steps() const { return d_loss.size(); }
};

struct TrainedGenerator {
    Mlp generator;
    GanSpec spec;
    ScalerParams scaler;                   // per generated feature
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;  // one-hot order for ctgan
    std::string segment_id;                // optional segment binding
    LossTrace trace;
};

// ---------------------------------------------------------------------------
// losses
// ---------------------------------------------------------------------------

inline constexpr double kLogEps = 1e-12;

// -mean log D(real) - mean log(1 - D(fake)), batch means standing in for the
// distribution expectations
inline double vanilla_d_loss(std::span<const double> d_real, std::span<const double> d_fake) {
    double lr = 0.0, lf = 0.0;
    for (double v : d_real) lr += std::log(std::max(v, kLogEps));
    for (double v : d_fake) lf += std::log(std::max(1.0 - v, kLogEps));
    return -lr / static_cast<double>(d_real.size()) - lf / static_cast<double>(d_fake.size());
}

// non-saturating generator loss: -mean log D(fake)
inline double vanilla_g_loss(std::span<const double> d_fake) {
    double l = 0.0;
    for (double v : d_fake) l += std::log(std::max(v, kLogEps));
    return -l / static_cast<double>(d_fake.size());
}

struct WganLosses {
    double d_loss = 0.0;
    double g_loss = 0.0;
};

// critic outputs are unbounded; d_loss = mean(fake) - mean(real) estimates
// the negated earth-mover distance at critic optimality
inline WganLosses wgan_losses(std::span<const double> critic_real,
                              std::span<const double> critic_fake) {
    double mr = 0.0, mf = 0.0;
    for (double v : critic_real) mr += v;
    for (double v : critic_fake) mf += v;
    mr /= static_cast<double>(critic_real.size());
    mf /= static_cast<double>(critic_fake.size());
    return {mf - mr, -mf};
}

// ---------------------------------------------------------------------------
// exact earth-mover distance on weighted point sets (test oracle)
// ---------------------------------------------------------------------------

// Minimum-cost transport between discrete masses with a caller-supplied
// distance table, solved by successive shortest paths on the bipartite
// residual graph. Exact for small instances; the final cost is accumulated
// row-major so results are comparable bit-for-bit with enumeration.
inline double emd_discrete(const std::vector<double>& p_mass, const std::vector<double>& q_mass,
                           const Matrix& dist) {
    const std::size_t m = p_mass.size(), n = q_mass.size();
    if (m == 0 || n == 0) throw DataError("emd needs nonempty point sets");
    if (dist.rows != m || dist.cols != n) throw DataError("emd distance table shape mismatch");
    double sp = 0.0, sq = 0.0;
    for (double v : p_mass) {
        if (v < 0.0) throw DataError("emd masses must be nonnegative");
        sp += v;
    }
    for (double v : q_mass) {
        if (v < 0.0) throw DataError("emd masses must be nonnegative");
        sq += v;
    }
    if (std::abs(sp - sq) > 1e-9 * std::max({1.0, sp, sq}))
        throw DataError("emd total mass mismatch");

    Matrix flow(m, n, 0.0);
    std::vector<double> sup = p_mass, dem = q_mass;
    const std::size_t N = m + n;
    const double scale = std::max(1.0, sp);
    const double mass_eps = 1e-13 * scale;
    std::size_t guard = 16 * (m + 1) * (n + 1);

    while (true) {
        double remaining = 0.0;
        for (double s : sup) remaining += s;
        if (remaining <= mass_eps) break;
        if (guard-- == 0) throw NumericError("emd solver failed to converge");

        // Bellman-Ford from every supplier with remaining mass
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::vector<double> d(N, inf);
        std::vector<int> parent(N, -1);
        for (std::size_t i = 0; i < m; ++i)
            if (sup[i] > mass_eps) d[i] = 0.0;
        for (std::size_t pass = 0; pass < N; ++pass) {
            bool changed = false;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (d[i] < inf && d[i] + dist(i, j) < d[m + j] - 1e-15) {
                        d[m + j] = d[i] + dist(i, j);
                        parent[m + j] = static_cast<int>(i);
                        changed = true;
                    }
                    if (flow(i, j) > mass_eps && d[m + j] < inf &&
                        d[m + j] - dist(i, j) < d[i] - 1e-15) {
                        d[i] = d[m + j] - dist(i, j);
                        parent[i] = static_cast<int>(m + j);
                        changed = true;
                    }
                }
            if (!changed) break;
        }

        std::size_t best_sink = N;
        for (std::size_t j = 0; j < n; ++j)
            if (dem[j] > mass_eps && d[m + j] < inf &&
                (best_sink == N || d[m + j] < d[best_sink]))
                best_sink = m + j;
        if (best_sink == N) throw NumericError("emd: no augmenting path");

        // walk back to the source supplier, finding the bottleneck
        std::vector<std::size_t> path;  // node sequence sink..source
        std::size_t cur = best_sink;
        path.push_back(cur);
        while (parent[cur] != -1) {
            cur = static_cast<std::size_t>(parent[cur]);
            path.push_back(cur);
        }
        std::size_t source = cur;
        double delta = std::min(sup[source], dem[best_sink - m]);
        for (std::size_t s = path.size() - 1; s > 0; --s) {
            std::size_t from = path[s], to = path[s - 1];
            if (from >= m)  // backward edge sink->supplier carries existing flow
                delta = std::min(delta, flow(to, from - m));
        }
        for (std::size_t s = path.size() - 1; s > 0; --s) {
            std::size_t from = path[s], to = path[s - 1];
            if (from < m)
                flow(from, to - m) += delta;
            else
                flow(to, from - m) -= delta;
        }
        sup[source] -= delta;
        dem[best_sink - m] -= delta;
    }

    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) cost += dist(i, j) * flow(i, j);
    return cost;
}

// ---------------------------------------------------------------------------
// maximum mean discrepancy (biased V-statistic, Gaussian kernel)
// ---------------------------------------------------------------------------

// median pairwise Euclidean distance over the pooled rows; falls back to the
// mean and then to 1.0 when duplicates collapse the median to zero
inline double median_pairwise_distance(const Matrix& a, const Matrix& b) {
    Matrix pool = vconcat(a, b);
    std::vector<double> dists;
    dists.reserve(pool.rows * (pool.rows - 1) / 2);
    for (std::size_t i = 0; i < pool.rows; ++i)
        for (std::size_t j = i + 1; j < pool.rows; ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < pool.cols; ++c) {
                double d = pool(i, c) - pool(j, c);
                d2 += d * d;
            }
            dists.push_back(std::sqrt(d2));
        }
    if (dists.empty()) return 1.0;
    std::sort(dists.begin(), dists.end());
    double med = dists[dists.size() / 2];
    if (med > 0.0) return med;
    double mean = 0.0;
    for (double d : dists) mean += d;
    mean /= static_cast<double>(dists.size());
    return mean > 0.0 ? mean : 1.0;
}

// mean k(a,a') + mean k(b,b') - 2 mean k(a,b) with k the Gaussian kernel
// exp(-||x-y||^2 / (2 bw^2)); optionally returns the gradient w.r.t. the rows
// of a (bandwidth treated as a constant).
inline double mmd(const Matrix& a, const Matrix& b, double bandwidth, Matrix* grad_a = nullptr) {
    if (a.cols != b.cols) throw NumericError("mmd batches must have equal widths");
    if (a.rows == 0 || b.rows == 0) throw NumericError("mmd batches must be nonempty");
    if (bandwidth <= 0.0) throw NumericError("mmd bandwidth must be positive");
    const double inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
    const double invs2 = 1.0 / (bandwidth * bandwidth);
    const double mm = static_cast<double>(a.rows), nn = static_cast<double>(b.rows);

    if (grad_a) *grad_a = Matrix(a.rows, a.cols, 0.0);

    auto ksum = [&](const Matrix& x, const Matrix& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < y.rows; ++j) {
                double d2 = 0.0;
                for (std::size_t c = 0; c < x.cols; ++c) {
                    double d = x(i, c) - y(j, c);
                    d2 += d * d;
                }
                s += std::exp(-d2 * inv2s2);
            }
        return s;
    };

    double t_aa = ksum(a, a);
    double t_bb = ksum(b, b);
    double t_ab = ksum(a, b);

    if (grad_a) {
        for (std::size_t i = 0; i < a.rows; ++i) {
            for (std::size_t j = 0; j < a.rows; ++j) {
                double d2 = 0.0;
                for (std::size_t c = 0; c < a.cols; ++c) {
                    double d = a(i, c) - a(j, c);
                    d2 += d * d;
                }
                double kij = std::exp(-d2 * inv2s2);
                double coef = 2.0 / (mm * mm) * kij * invs2;
                for (std::size_t c = 0; c < a.cols; ++c)
                    (*grad_a)(i, c) += coef * (a(j, c) - a(i, c));
            }
            for (std::size_t j = 0; j < b.rows; ++j) {
                double d2 = 0.0;
                for (std::size_t c = 0; c < a.cols; ++c) {
                    double d = a(i, c) - b(j, c);
                    d2 += d * d;
                }
                double kij = std::exp(-d2 * inv2s2);
                double coef = -2.0 / (mm * nn) * kij * invs2;
                for (std::size_t c = 0; c < a.cols; ++c)
                    (*grad_a)(i, c) += coef * (b(j, c) - a(i, c));
            }
        }
    }

    double v = t_aa / (mm * mm) + t_bb / (nn * nn) - 2.0 * t_ab / (mm * nn);
    return std::max(0.0, v);
}

// ---------------------------------------------------------------------------
// gradient penalty
// ---------------------------------------------------------------------------

// mean over rows of (||grad_x D(x_hat)|| - 1)^2 with x_hat a per-row uniform
// interpolate between real and fake.
inline Matrix gp_interpolates(const Matrix& real, const Matrix& fake, Rng& rng) {
    if (!real.same_shape(fake)) throw NumericError("gradient penalty batches must match in shape");
    Matrix x(real.rows, real.cols);
    for (std::size_t r = 0; r < real.rows; ++r) {
        double eps = rng.uniform();
        for (std::size_t c = 0; c < real.cols; ++c)
            x(r, c) = eps * real(r, c) + (1.0 - eps) * fake(r, c);
    }
    return x;
}

inline double gradient_penalty_with_grads(const Mlp& critic, const Matrix& real,
                                          const Matrix& fake, std::uint64_t seed, bool training,
                                          Gradients& grads) {
    Rng rng(seed);
    Matrix x_hat = gp_interpolates(real, fake, rng);
    return gradient_norm_penalty(critic, x_hat, training, &rng, grads);
}

inline double gradient_penalty(const Mlp& critic, const Matrix& real, const Matrix& fake,
                               std::uint64_t seed) {
    Gradients scratch;
    return gradient_penalty_with_grads(critic, real, fake, seed, false, scratch);
}

// ---------------------------------------------------------------------------
// architectures
// ---------------------------------------------------------------------------

inline Mlp build_generator(const GanSpec& spec, std::uint64_t seed) {
    if (spec.kind == GanKind::ctgan) {
        std::size_t dim = spec.noise_dim + spec.label_dim;
        return make_mlp({{dim, dim, Activation::relu},
                         {dim, dim * 2, Activation::relu},
                         {dim * 2, dim * 4, Activation::relu},
                         {dim * 4, spec.data_dim, Activation::sigmoid}},
                        seed);
    }
    return make_mlp({{spec.noise_dim, 25, Activation::relu},
                     {25, 50, Activation::relu},
                     {50, spec.data_dim, Activation::sigmoid}},
                    seed);
}

inline Mlp build_critic(const GanSpec& spec, std::uint64_t seed) {
    if (spec.kind == GanKind::ctgan) {
        std::size_t dim = spec.data_dim + spec.label_dim;
        return make_mlp({{dim, dim * 4, Activation::relu, 0.1},
                         {dim * 4, dim * 2, Activation::relu, 0.1},
                         {dim * 2, dim, Activation::relu},
                         {dim, 1, Activation::linear}},
                        seed);
    }
    Activation out = spec.kind == GanKind::vanilla ? Activation::sigmoid : Activation::linear;
    return make_mlp({{spec.data_dim, 50, Activation::relu},
                     {50, 100, Activation::relu},
                     {100, 1, out}},
                    seed);
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

namespace detail {

inline void clip_params(Mlp& net, double c) {
    for (auto& l : net.layers) {
        for (auto& v : l.w.data) v = std::clamp(v, -c, c);
        for (auto& v : l.b) v = std::clamp(v, -c, c);
    }
}

inline Matrix draw_noise(Rng& rng, std::size_t n, std::size_t dim) {
    Matrix z(n, dim);
    for (auto& v : z.data) v = rng.normal();
    return z;
}

inline void check_finite(double loss, const char* which, std::size_t step,
                         const LossTrace& trace) {
    if (std::isfinite(loss)) return;
    std::ostringstream msg;
    msg << "non-finite " << which << " loss at optimizer step " << step
        << " (trace has " << trace.steps() << " entries)";
    throw NumericError(msg.str());
}

struct TraceRecorder {
    LossTrace trace;
    double last_d = std::numeric_limits<double>::quiet_NaN();
    double last_g = std::numeric_limits<double>::quiet_NaN();

    void critic_step(double d) {
        last_d = d;
        trace.d_loss.push_back(last_d);
        trace.g_loss.push_back(last_g);
    }
    void generator_step(double g) {
        last_g = g;
        trace.d_loss.push_back(last_d);
        trace.g_loss.push_back(last_g);
    }
    std::size_t steps() const { return trace.steps(); }
};

}  // namespace detail

// Train one generator on scaled rows in [0,1]. For ctgan a one-hot label
// matrix with spec.label_dim columns must accompany the data; rows pair up.
// Deterministic per spec.seed.
inline TrainedGenerator train(const GanSpec& spec, const Matrix& data,
                              const Matrix* labels = nullptr) {
    spec.validate();
    if (data.rows == 0) throw DataError("cannot train on an empty matrix");
    if (data.cols != spec.data_dim) throw ConfigError("data width does not match spec.data_dim");
    for (double v : data.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw NumericError("training data must be scaled into [0,1]");
    const bool conditional = spec.kind == GanKind::ctgan;
    if (conditional) {
        if (!labels) throw DataError("ctgan training requires labels");
        if (labels->rows != data.rows || labels->cols != spec.label_dim)
            throw DataError("label matrix shape does not match data and label_dim");
    }

    Mlp gen = build_generator(spec, derive_seed(spec.seed, "generator"));
    Mlp critic = build_critic(spec, derive_seed(spec.seed, "critic"));
    OptState gen_opt = OptState::make(gen, spec.learning_rate);
    OptState critic_opt = OptState::make(critic, spec.learning_rate);

    Rng noise_rng(derive_seed(spec.seed, "noise"));
    Rng shuffle_rng(derive_seed(spec.seed, "shuffle"));
    Rng dropout_rng(derive_seed(spec.seed, "dropout"));
    Rng pick_rng(derive_seed(spec.seed, "minibatch"));
    std::uint64_t gp_seed = derive_seed(spec.seed, "gp");

    detail::TraceRecorder rec;
    const std::size_t n = data.rows;
    const std::size_t bs = std::min(spec.batch_size, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    // draw a fresh random minibatch, used by the ctgan generator objective
    auto random_batch = [&](Matrix& rows, Matrix& labs) {
        std::vector<std::size_t> idx(bs);
        for (auto& i : idx) i = pick_rng.index(n);
        rows = take_rows(data, idx);
        if (conditional) labs = take_rows(*labels, idx);
    };

    std::size_t critic_counter = 0;

    auto generator_forward = [&](std::size_t rows, const Matrix* cond,
                                 ForwardCache& cache) -> Matrix {
        Matrix z = detail::draw_noise(noise_rng, rows, spec.noise_dim);
        Matrix in = cond ? hconcat(z, *cond) : std::move(z);
        cache = forward(gen, in, true, &dropout_rng);
        return cache.output;
    };

    auto critic_forward = [&](const Matrix& rows, const Matrix* cond, ForwardCache& cache) {
        Matrix in = cond ? hconcat(rows, *cond) : rows;
        cache = forward(critic, in, true, &dropout_rng);
    };

    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += bs) {
            std::size_t count = std::min(bs, n - start);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + start + count);
            Matrix real = take_rows(data, idx);
            Matrix real_lab = conditional ? take_rows(*labels, idx) : Matrix{};
            const Matrix* cond = conditional ? &real_lab : nullptr;
            double inv = 1.0 / static_cast<double>(count);

            if (spec.kind == GanKind::vanilla) {
                // discriminator step
                ForwardCache gcache;
                Matrix fake = generator_forward(count, nullptr, gcache);
                ForwardCache cr, cf;
                critic_forward(real, nullptr, cr);
                critic_forward(fake, nullptr, cf);
                double d_loss = vanilla_d_loss({cr.output.data.data(), count},
                                               {cf.output.data.data(), count});
                detail::check_finite(d_loss, "discriminator", rec.steps(), rec.trace);
                Matrix g_real(count, 1), g_fake(count, 1);
                for (std::size_t i = 0; i < count; ++i) {
                    g_real(i, 0) = -inv / std::max(cr.output(i, 0), kLogEps);
                    g_fake(i, 0) = inv / std::max(1.0 - cf.output(i, 0), kLogEps);
                }
                Gradients dr, df;
                backward(critic, cr, g_real, dr);
                backward(critic, cf, g_fake, df);
                dr.add_scaled(df, 1.0);
                adam_step(critic, dr, critic_opt);
                rec.critic_step(d_loss);

                // generator step
                ForwardCache gcache2;
                Matrix fake2 = generator_forward(count, nullptr, gcache2);
                ForwardCache cf2;
                critic_forward(fake2, nullptr, cf2);
                double g_loss = vanilla_g_loss({cf2.output.data.data(), count});
                detail::check_finite(g_loss, "generator", rec.steps(), rec.trace);
                Matrix gout(count, 1);
                for (std::size_t i = 0; i < count; ++i)
                    gout(i, 0) = -inv / std::max(cf2.output(i, 0), kLogEps);
                Gradients c_grads, g_grads;
                Matrix dfake = backward(critic, cf2, gout, c_grads);
                backward(gen, gcache2, dfake, g_grads);
                adam_step(gen, g_grads, gen_opt);
                rec.generator_step(g_loss);
                continue;
            }

            // wgan / ctgan critic step
            {
                ForwardCache gcache;
                Matrix fake = generator_forward(count, cond, gcache);
                ForwardCache cr, cf;
                critic_forward(real, cond, cr);
                critic_forward(fake, cond, cf);
                WganLosses wl = wgan_losses({cr.output.data.data(), count},
                                            {cf.output.data.data(), count});
                Gradients dr, df;
                backward(critic, cr, Matrix(count, 1, -inv), dr);
                backward(critic, cf, Matrix(count, 1, inv), df);
                dr.add_scaled(df, 1.0);

                double d_loss = wl.d_loss;
                if (spec.kind == GanKind::ctgan && spec.gp_lambda > 0.0) {
                    Matrix real_in = conditional ? hconcat(real, real_lab) : real;
                    Matrix fake_in = conditional ? hconcat(fake, real_lab) : fake;
                    Gradients gp_grads;
                    double gp = gradient_penalty_with_grads(
                        critic, real_in, fake_in,
                        derive_seed(gp_seed, std::to_string(rec.steps())), true, gp_grads);
                    dr.add_scaled(gp_grads, spec.gp_lambda);
                    d_loss += spec.gp_lambda * gp;
                }
                detail::check_finite(d_loss, "critic", rec.steps(), rec.trace);
                adam_step(critic, dr, critic_opt);
                if (spec.kind == GanKind::wgan) detail::clip_params(critic, spec.clip_value);
                rec.critic_step(d_loss);
            }

            if (++critic_counter % spec.n_critic != 0) continue;

            // generator step
            if (spec.kind == GanKind::wgan) {
                ForwardCache gcache;
                Matrix fake = generator_forward(count, nullptr, gcache);
                ForwardCache cf;
                critic_forward(fake, nullptr, cf);
                double g_loss = -0.0;
                {
                    double mf = 0.0;
                    for (std::size_t i = 0; i < count; ++i) mf += cf.output(i, 0);
                    g_loss = -mf * inv;
                }
                detail::check_finite(g_loss, "generator", rec.steps(), rec.trace);
                Gradients c_grads, g_grads;
                Matrix dfake = backward(critic, cf, Matrix(count, 1, -inv), c_grads);
                backward(gen, gcache, dfake, g_grads);
                adam_step(gen, g_grads, gen_opt);
                rec.generator_step(g_loss);
            } else {
                // ctgan: generator minimizes the kernel two-sample statistic
                // between generated and real rows, label columns included
                Matrix mb_rows, mb_labs;
                random_batch(mb_rows, mb_labs);
                ForwardCache gcache;
                Matrix fake = generator_forward(mb_rows.rows, conditional ? &mb_labs : nullptr, gcache);
                Matrix fake_cat = conditional ? hconcat(fake, mb_labs) : fake;
                Matrix real_cat = conditional ? hconcat(mb_rows, mb_labs) : mb_rows;
                double bw = spec.mmd_bandwidth > 0.0
                                ? spec.mmd_bandwidth
                                : median_pairwise_distance(fake_cat, real_cat);
                Matrix grad_cat;
                double g_loss = mmd(fake_cat, real_cat, bw, &grad_cat);
                detail::check_finite(g_loss, "generator", rec.steps(), rec.trace);
                // only the generated columns feed back into the generator
                Matrix grad_fake(fake.rows, fake.cols);
                for (std::size_t r = 0; r < fake.rows; ++r)
                    for (std::size_t c = 0; c < fake.cols; ++c)
                        grad_fake(r, c) = grad_cat(r, c);
                Gradients g_grads;
                backward(gen, gcache, grad_fake, g_grads);
                adam_step(gen, g_grads, gen_opt);
                rec.generator_step(g_loss);
            }
        }
    }

    TrainedGenerator out;
    out.generator = std::move(gen);
    out.spec = spec;
    out.trace = std::move(rec.trace);
    return out;
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

// n rows from seeded noise through the generator, then back to original
// feature units via the bound scaler. Label is required (and must be known)
// exactly for conditional generators.
inline Matrix sample(const TrainedGenerator& gen, std::size_t n,
                     const std::optional<std::string>& label = std::nullopt) {
    const bool conditional = gen.spec.kind == GanKind::ctgan;
    if (conditional && !label) throw DataError("conditional generator requires a label");
    if (!conditional && label) throw DataError("unconditional generator takes no label");

    Matrix onehot(n, gen.spec.label_dim, 0.0);
    if (conditional) {
        auto it = std::find(gen.label_names.begin(), gen.label_names.end(), *label);
        if (it == gen.label_names.end()) throw DataError("unknown label: " + *label);
        std::size_t li = static_cast<std::size_t>(it - gen.label_names.begin());
        for (std::size_t r = 0; r < n; ++r) onehot(r, li) = 1.0;
    }

    if (n == 0) return Matrix(0, gen.spec.data_dim);
    Rng rng(derive_seed(gen.spec.seed, "sample"));
    Matrix z = detail::draw_noise(rng, n, gen.spec.noise_dim);
    Matrix in = conditional ? hconcat(z, onehot) : std::move(z);
    Matrix scaled = forward_infer(gen.generator, in);
    for (double v : scaled.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw NumericError("generator emitted a value outside [0,1]");
    if (gen.scaler.min.empty()) return scaled;  // unbound scaler: raw [0,1] space
    return invert_scaler(scaled, gen.scaler);
}

// ---------------------------------------------------------------------------
// persistence: weights binary + text manifest + loss-trace CSV
// ---------------------------------------------------------------------------

inline void write_loss_trace(std::ostream& os, const LossTrace& t) {
    os << "step,d_loss,g_loss\n";
    for (std::size_t i = 0; i < t.steps(); ++i)
        os << i << "," << fmt_double(t.d_loss[i]) << "," << fmt_double(t.g_loss[i]) << "\n";
}

inline void save_generator(const TrainedGenerator& gen, const std::filesystem::path& stem) {
    atomic_write(std::filesystem::path(stem.string() + ".weights.bin"),
                 [&](std::ostream& os) { write_mlp(os, gen.generator); });
    atomic_write(std::filesystem::path(stem.string() + ".manifest.txt"), [&](std::ostream& os) {
        const GanSpec& s = gen.spec;
        os << "ganids.generator v1\n";
        os << "kind " << gan_kind_name(s.kind) << "\n";
        os << "architecture";
        for (std::size_t li = 0; li < gen.generator.layers.size(); ++li) {
            const Layer& l = gen.generator.layers[li];
            os << (li == 0 ? " " : " -> ") << l.fan_in() << "x" << l.fan_out() << "("
               << activation_name(l.act);
            if (l.dropout > 0.0) os << ",drop" << l.dropout;
            os << ")";
        }
        os << "\n";
        os << "noise_dim " << s.noise_dim << "\n";
        os << "data_dim " << s.data_dim << "\n";
        os << "label_dim " << s.label_dim << "\n";
        os << "epochs " << s.epochs << "\n";
        os << "batch_size " << s.batch_size << "\n";
        os << "learning_rate " << fmt_double(s.learning_rate) << "\n";
        os << "n_critic " << s.n_critic << "\n";
        os << "clip_value " << fmt_double(s.clip_value) << "\n";
        os << "gp_lambda " << fmt_double(s.gp_lambda) << "\n";
        os << "mmd_bandwidth " << fmt_double(s.mmd_bandwidth) << "\n";
        os << "seed " << s.seed << "\n";
        os << "segment_id " << (gen.segment_id.empty() ? "-" : gen.segment_id) << "\n";
        os << "n_features " << gen.feature_names.size() << "\n";
        for (const auto& f : gen.feature_names) os << "feature " << f << "\n";
        os << "n_labels " << gen.label_names.size() << "\n";
        for (const auto& l : gen.label_names) os << "label " << l << "\n";
        write_scaler(os, gen.scaler);
    });
    atomic_write(std::filesystem::path(stem.string() + ".losses.csv"),
                 [&](std::ostream& os) { write_loss_trace(os, gen.trace); });
}

namespace detail {

inline std::string manifest_value(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("truncated generator manifest");
    if (line.rfind(key + " ", 0) != 0 && line != key)
        throw DataError("generator manifest: expected '" + key + "', got '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
}

}  // namespace detail

inline TrainedGenerator load_generator(const std::filesystem::path& stem) {
    TrainedGenerator gen;
    {
        std::ifstream is(stem.string() + ".weights.bin", std::ios::binary);
        if (!is) throw DataError("missing weight file for " + stem.string());
        gen.generator = read_mlp(is);
    }
    std::ifstream is(stem.string() + ".manifest.txt");
    if (!is) throw DataError("missing manifest for " + stem.string());
    std::string header;
    std::getline(is, header);
    if (header != "ganids.generator v1") throw DataError("not a generator manifest");
    GanSpec& s = gen.spec;
    s.kind = gan_kind_from_name(detail::manifest_value(is, "kind"));
    detail::manifest_value(is, "architecture");  // informational
    s.noise_dim = std::stoull(detail::manifest_value(is, "noise_dim"));
    s.data_dim = std::stoull(detail::manifest_value(is, "data_dim"));
    s.label_dim = std::stoull(detail::manifest_value(is, "label_dim"));
    s.epochs = std::stoull(detail::manifest_value(is, "epochs"));
    s.batch_size = std::stoull(detail::manifest_value(is, "batch_size"));
    s.learning_rate = std::stod(detail::manifest_value(is, "learning_rate"));
    s.n_critic = std::stoull(detail::manifest_value(is, "n_critic"));
    s.clip_value = std::stod(detail::manifest_value(is, "clip_value"));
    s.gp_lambda = std::stod(detail::manifest_value(is, "gp_lambda"));
    s.mmd_bandwidth = std::stod(detail::manifest_value(is, "mmd_bandwidth"));
    s.seed = std::stoull(detail::manifest_value(is, "seed"));
    gen.segment_id = detail::manifest_value(is, "segment_id");
    if (gen.segment_id == "-") gen.segment_id.clear();
    std::size_t nf = std::stoull(detail::manifest_value(is, "n_features"));
    for (std::size_t i = 0; i < nf; ++i)
        gen.feature_names.push_back(detail::manifest_value(is, "feature"));
    std::size_t nl = std::stoull(detail::manifest_value(is, "n_labels"));
    for (std::size_t i = 0; i < nl; ++i)
        gen.label_names.push_back(detail::manifest_value(is, "label"));
    gen.scaler = read_scaler(is);
    return gen;
}

}  // namespace ganids
