#include "fal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "fal/rng.hpp"

namespace fal {
namespace {

constexpr double kFeatureNormFloor = 1e-12;

// Offsets of each block within the flat parameter vector.
struct Layout {
    std::size_t w1, b1, w2, b2, w3, b3;

    explicit Layout(const Arch& a) {
        w1 = 0;
        b1 = w1 + static_cast<std::size_t>(a.hidden_dim) * a.input_dim;
        w2 = b1 + static_cast<std::size_t>(a.hidden_dim);
        b2 = w2 + static_cast<std::size_t>(a.feature_dim) * a.hidden_dim;
        w3 = b2 + static_cast<std::size_t>(a.feature_dim);
        b3 = w3 + static_cast<std::size_t>(a.num_classes) * a.feature_dim;
    }
};

void check_arch(const Arch& a) {
    if (a.input_dim < 1 || a.hidden_dim < 1 || a.feature_dim < 1 || a.num_classes < 2) {
        throw ConfigError("model arch: need input_dim,hidden_dim,feature_dim >= 1 and num_classes >= 2");
    }
}

void check_input(const ModelState& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.arch.input_dim) {
        throw ConfigError("forward: input has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(m.arch.input_dim));
    }
}

void softmax_inplace(std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& v) {
    return std::sqrt(dot(v.data(), v.data(), static_cast<int>(v.size())));
}

// Backpropagates a gradient on the feature vector into W1,b1,W2,b2,
// accumulating into grad. Shared by class_loss (via dfeat from the head)
// and align_loss (dfeat from the cosine terms).
void backprop_features(const Arch& a, const Layout& L, const std::vector<double>& params,
                       std::span<const double> x, const std::vector<double>& hidden,
                       const std::vector<double>& dfeat, std::vector<double>& grad) {
    std::vector<double> dhidden(static_cast<std::size_t>(a.hidden_dim), 0.0);
    for (int m = 0; m < a.feature_dim; ++m) {
        const double g = dfeat[static_cast<std::size_t>(m)];
        if (g == 0.0) continue;
        const std::size_t row = L.w2 + static_cast<std::size_t>(m) * a.hidden_dim;
        for (int j = 0; j < a.hidden_dim; ++j) {
            grad[row + static_cast<std::size_t>(j)] += g * hidden[static_cast<std::size_t>(j)];
            dhidden[static_cast<std::size_t>(j)] += params[row + static_cast<std::size_t>(j)] * g;
        }
        grad[L.b2 + static_cast<std::size_t>(m)] += g;
    }
    for (int j = 0; j < a.hidden_dim; ++j) {
        const double h = hidden[static_cast<std::size_t>(j)];
        const double dpre = dhidden[static_cast<std::size_t>(j)] * (1.0 - h * h);
        if (dpre == 0.0) continue;
        const std::size_t row = L.w1 + static_cast<std::size_t>(j) * a.input_dim;
        for (int i = 0; i < a.input_dim; ++i) {
            grad[row + static_cast<std::size_t>(i)] += dpre * x[static_cast<std::size_t>(i)];
        }
        grad[L.b1 + static_cast<std::size_t>(j)] += dpre;
    }
}

}  // namespace

ModelState zero_model(const Arch& arch) {
    check_arch(arch);
    return ModelState{arch, std::vector<double>(static_cast<std::size_t>(arch.param_count()), 0.0)};
}

ModelState random_model(const Arch& arch, std::uint64_t seed) {
    check_arch(arch);
    ModelState m = zero_model(arch);
    const Layout L(arch);
    Rng rng(seed);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(arch.input_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(arch.hidden_dim));
    const double s3 = 1.0 / std::sqrt(static_cast<double>(arch.feature_dim));
    for (std::size_t i = L.w1; i < L.b1; ++i) m.params[i] = s1 * rng.normal();
    for (std::size_t i = L.w2; i < L.b2; ++i) m.params[i] = s2 * rng.normal();
    for (std::size_t i = L.w3; i < L.b3; ++i) m.params[i] = s3 * rng.normal();
    return m;
}

void validate_model(const ModelState& model) {
    check_arch(model.arch);
    if (static_cast<int>(model.params.size()) != model.arch.param_count()) {
        throw ConfigError("model: params length " + std::to_string(model.params.size()) +
                          " does not match arch (" + std::to_string(model.arch.param_count()) + ")");
    }
    for (double p : model.params) {
        if (!std::isfinite(p)) throw ConfigError("model: non-finite parameter");
    }
}

void LossConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw ConfigError("loss.tau: must be in (0,1], got " + std::to_string(tau));
    }
    if (!(mu >= 0.0)) {
        throw ConfigError("loss.mu: must be >= 0, got " + std::to_string(mu));
    }
}

ForwardResult forward(const ModelState& model, std::span<const double> x) {
    check_input(model, x);
    const Arch& a = model.arch;
    const Layout L(a);
    const std::vector<double>& p = model.params;

    ForwardResult out;
    out.hidden.resize(static_cast<std::size_t>(a.hidden_dim));
    for (int j = 0; j < a.hidden_dim; ++j) {
        const double pre = p[L.b1 + static_cast<std::size_t>(j)] +
                           dot(&p[L.w1 + static_cast<std::size_t>(j) * a.input_dim], x.data(), a.input_dim);
        out.hidden[static_cast<std::size_t>(j)] = std::tanh(pre);
    }
    out.features.resize(static_cast<std::size_t>(a.feature_dim));
    for (int m = 0; m < a.feature_dim; ++m) {
        out.features[static_cast<std::size_t>(m)] =
            p[L.b2 + static_cast<std::size_t>(m)] +
            dot(&p[L.w2 + static_cast<std::size_t>(m) * a.hidden_dim], out.hidden.data(), a.hidden_dim);
    }
    out.probs.resize(static_cast<std::size_t>(a.num_classes));
    for (int c = 0; c < a.num_classes; ++c) {
        out.probs[static_cast<std::size_t>(c)] =
            p[L.b3 + static_cast<std::size_t>(c)] +
            dot(&p[L.w3 + static_cast<std::size_t>(c) * a.feature_dim], out.features.data(),
                a.feature_dim);
    }
    softmax_inplace(out.probs);
    return out;
}

int predict(const ModelState& model, std::span<const double> x) {
    const ForwardResult f = forward(model, x);
    int best = 0;
    for (int c = 1; c < model.arch.num_classes; ++c) {
        if (f.probs[static_cast<std::size_t>(c)] > f.probs[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

LossResult class_loss(const ModelState& model, const Minibatch& batch) {
    if (batch.size() == 0) throw ContractError("class_loss: empty batch");
    if (batch.x.size() != batch.y.size()) {
        throw ContractError("class_loss: batch x/y size mismatch");
    }
    const Arch& a = model.arch;
    const Layout L(a);
    const std::vector<double>& p = model.params;

    LossResult out;
    out.grad.assign(p.size(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    for (std::size_t s = 0; s < batch.size(); ++s) {
        const int y = batch.y[s];
        if (y < 0 || y >= a.num_classes) {
            throw ContractError("class_loss: label " + std::to_string(y) + " out of range");
        }
        const ForwardResult f = forward(model, batch.x[s]);
        out.loss += -std::log(f.probs[static_cast<std::size_t>(y)]) * inv_b;

        // dL/dlogits = (probs - onehot(y)) / B
        std::vector<double> dfeat(static_cast<std::size_t>(a.feature_dim), 0.0);
        for (int c = 0; c < a.num_classes; ++c) {
            const double dz = (f.probs[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0)) * inv_b;
            const std::size_t row = L.w3 + static_cast<std::size_t>(c) * a.feature_dim;
            for (int m = 0; m < a.feature_dim; ++m) {
                out.grad[row + static_cast<std::size_t>(m)] += dz * f.features[static_cast<std::size_t>(m)];
                dfeat[static_cast<std::size_t>(m)] += p[row + static_cast<std::size_t>(m)] * dz;
            }
            out.grad[L.b3 + static_cast<std::size_t>(c)] += dz;
        }
        backprop_features(a, L, p, batch.x[s], f.hidden, dfeat, out.grad);
    }
    return out;
}

LossResult align_loss(const ModelState& current, std::span<const AlignAnchor> anchors,
                      const ModelState& prev_local, const ModelState& prev_global,
                      const LossConfig& cfg) {
    if (anchors.empty()) throw ContractError("align_loss: no anchors");
    if (!(prev_local.arch == current.arch) || !(prev_global.arch == current.arch)) {
        throw ConfigError("align_loss: reference model arch mismatch");
    }
    cfg.validate();

    const Arch& a = current.arch;
    const Layout L(a);
    LossResult out;
    out.grad.assign(current.params.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(anchors.size());
    const double inv_tau = 1.0 / cfg.tau;

    for (const AlignAnchor& anchor : anchors) {
        const ForwardResult cur = forward(current, anchor.x);
        const std::vector<double> f_loc = forward(prev_local, anchor.x).features;
        const std::vector<double> f_glo = forward(prev_global, anchor.x).features;

        const double nc = norm(cur.features);
        const double nl = norm(f_loc);
        const double ng = norm(f_glo);
        if (nc < kFeatureNormFloor || nl < kFeatureNormFloor || ng < kFeatureNormFloor) {
            throw DegenerateFeatureError("align_loss: feature norm below 1e-12, cosine undefined");
        }

        const int fd = a.feature_dim;
        const double d_loc = dot(cur.features.data(), f_loc.data(), fd) / (nc * nl);
        const double d_glo = dot(cur.features.data(), f_glo.data(), fd) / (nc * ng);

        const double za = d_loc * inv_tau;
        const double zb = d_glo * inv_tau;
        const double zm = std::max(za, zb);
        const double lse = zm + std::log(std::exp(za - zm) + std::exp(zb - zm));
        const double s_loc = std::exp(za - lse);
        const double s_glo = std::exp(zb - lse);

        const bool use_local = anchor.source == AlignSource::local;
        out.loss += (lse - (use_local ? za : zb)) * inv_n;

        const double g_loc = (s_loc - (use_local ? 1.0 : 0.0)) * inv_tau * inv_n;
        const double g_glo = (s_glo - (use_local ? 0.0 : 1.0)) * inv_tau * inv_n;

        // d cos(u,v)/du = v/(|u||v|) - cos(u,v) * u/|u|^2, references frozen.
        std::vector<double> dfeat(static_cast<std::size_t>(fd), 0.0);
        for (int m = 0; m < fd; ++m) {
            const double u = cur.features[static_cast<std::size_t>(m)];
            dfeat[static_cast<std::size_t>(m)] =
                g_loc * (f_loc[static_cast<std::size_t>(m)] / (nc * nl) - d_loc * u / (nc * nc)) +
                g_glo * (f_glo[static_cast<std::size_t>(m)] / (nc * ng) - d_glo * u / (nc * nc));
        }
        backprop_features(a, L, current.params, anchor.x, cur.hidden, dfeat, out.grad);
    }
    return out;
}

ModelState sgd_step(const ModelState& model, std::span<const double> grad, double eta) {
    if (grad.size() != model.params.size()) {
        throw ContractError("sgd_step: grad length " + std::to_string(grad.size()) +
                            " != params length " + std::to_string(model.params.size()));
    }
    if (!(eta > 0.0)) throw ContractError("sgd_step: eta must be positive");
    ModelState next = model;
    for (std::size_t i = 0; i < next.params.size(); ++i) next.params[i] -= eta * grad[i];
    return next;
}

}  // namespace fal
