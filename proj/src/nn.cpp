#include "amc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "amc/rng.hpp"
#include "amc/signal.hpp"

namespace amc {

namespace {

void check_specs(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) throw std::invalid_argument("empty layer spec list");
    for (std::size_t l = 0; l < specs.size(); ++l) {
        if (specs[l].in_dim <= 0 || specs[l].out_dim <= 0) {
            throw std::invalid_argument("layer dims must be positive");
        }
        if (l + 1 < specs.size() &&
            specs[l].out_dim != specs[l + 1].in_dim) {
            throw std::invalid_argument("layer dimensions do not chain");
        }
    }
    if (specs.back().act != Activation::identity) {
        throw std::invalid_argument("final layer must have identity activation");
    }
}

// z_l = W_l a_{l-1} + b_l, a_l = act(z_l); a.front() aliases the input.
struct ForwardCache {
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> z;
};

ForwardCache forward_cached(const Classifier& model,
                            std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.input_dim()) {
        throw std::invalid_argument("input length does not match model");
    }
    ForwardCache c;
    c.a.emplace_back(x.begin(), x.end());
    for (const auto& layer : model.layers) {
        const auto& in = c.a.back();
        std::vector<double> z(layer.spec.out_dim);
        for (int r = 0; r < layer.spec.out_dim; ++r) {
            const double* wr = layer.w.data() +
                               static_cast<std::size_t>(r) * layer.spec.in_dim;
            double acc = layer.b[r];
            for (int k = 0; k < layer.spec.in_dim; ++k) acc += wr[k] * in[k];
            z[r] = acc;
        }
        std::vector<double> a = z;
        if (layer.spec.act == Activation::relu) {
            for (auto& v : a) v = std::max(v, 0.0);
        }
        c.z.push_back(std::move(z));
        c.a.push_back(std::move(a));
    }
    return c;
}

// Backpropagates d(loss)/d(logits) to the input; optionally accumulates
// parameter gradients into `grads`.
std::vector<double> backprop(const Classifier& model, const ForwardCache& c,
                             std::vector<double> delta,
                             ParamGrads* grads = nullptr) {
    for (int l = static_cast<int>(model.layers.size()) - 1; l >= 0; --l) {
        const auto& layer = model.layers[static_cast<std::size_t>(l)];
        const auto& in = c.a[static_cast<std::size_t>(l)];
        if (grads) {
            auto& dw = grads->dw[static_cast<std::size_t>(l)];
            auto& db = grads->db[static_cast<std::size_t>(l)];
            for (int r = 0; r < layer.spec.out_dim; ++r) {
                double* dwr =
                    dw.data() + static_cast<std::size_t>(r) * layer.spec.in_dim;
                for (int k = 0; k < layer.spec.in_dim; ++k) {
                    dwr[k] += delta[r] * in[k];
                }
                db[r] += delta[r];
            }
        }
        std::vector<double> prev(layer.spec.in_dim, 0.0);
        for (int r = 0; r < layer.spec.out_dim; ++r) {
            const double* wr = layer.w.data() +
                               static_cast<std::size_t>(r) * layer.spec.in_dim;
            const double d = delta[r];
            for (int k = 0; k < layer.spec.in_dim; ++k) prev[k] += wr[k] * d;
        }
        if (l > 0 && model.layers[static_cast<std::size_t>(l - 1)].spec.act ==
                         Activation::relu) {
            const auto& zprev = c.z[static_cast<std::size_t>(l - 1)];
            // ReLU subgradient at 0 is taken as 0.
            for (std::size_t k = 0; k < prev.size(); ++k) {
                if (zprev[k] <= 0.0) prev[k] = 0.0;
            }
        }
        delta = std::move(prev);
    }
    return delta;
}

ParamGrads zero_grads(const Classifier& model) {
    ParamGrads g;
    for (const auto& layer : model.layers) {
        g.dw.emplace_back(layer.w.size(), 0.0);
        g.db.emplace_back(layer.b.size(), 0.0);
    }
    return g;
}

}  // namespace

Classifier init_model(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    check_specs(specs);
    Rng rng(seed);
    Classifier model;
    for (const auto& spec : specs) {
        Layer layer;
        layer.spec = spec;
        layer.w.resize(static_cast<std::size_t>(spec.in_dim) * spec.out_dim);
        const double scale = std::sqrt(2.0 / spec.in_dim);
        for (auto& v : layer.w) v = scale * rng.gaussian();
        layer.b.assign(static_cast<std::size_t>(spec.out_dim), 0.0);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

std::vector<double> forward(const Classifier& model,
                            std::span<const double> x) {
    return forward_cached(model, x).a.back();
}

int argmax_lowest(std::span<const double> v) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(v.size()); ++k) {
        if (v[static_cast<std::size_t>(k)] > v[static_cast<std::size_t>(best)]) {
            best = k;
        }
    }
    return best;
}

int predict(const Classifier& model, std::span<const double> x) {
    const auto logits = forward(model, x);
    return argmax_lowest(logits);
}

std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        p[k] = std::exp(logits[k] - m);
        sum += p[k];
    }
    for (auto& v : p) v /= sum;
    return p;
}

double cross_entropy(std::span<const double> logits, int target) {
    if (target < 0 || target >= static_cast<int>(logits.size())) {
        throw std::invalid_argument("target class out of range");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    return std::log(sum) - (logits[static_cast<std::size_t>(target)] - m);
}

std::vector<double> grad_input(const Classifier& model,
                               std::span<const double> x, int target) {
    if (target < 0 || target >= model.num_classes()) {
        throw std::invalid_argument("target class out of range");
    }
    const auto cache = forward_cached(model, x);
    auto delta = softmax(cache.a.back());
    delta[static_cast<std::size_t>(target)] -= 1.0;
    return backprop(model, cache, std::move(delta));
}

std::vector<double> grad_input_logits(const Classifier& model,
                                      std::span<const double> x,
                                      std::span<const double> coeffs) {
    if (static_cast<int>(coeffs.size()) != model.num_classes()) {
        throw std::invalid_argument("coeffs length must equal class count");
    }
    const auto cache = forward_cached(model, x);
    return backprop(model, cache,
                    std::vector<double>(coeffs.begin(), coeffs.end()));
}

ParamGrads grad_params(const Classifier& model,
                       const std::vector<std::vector<double>>& xs,
                       const std::vector<int>& labels) {
    if (xs.empty() || xs.size() != labels.size()) {
        throw std::invalid_argument("empty or mismatched batch");
    }
    ParamGrads g = zero_grads(model);
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const auto cache = forward_cached(model, xs[s]);
        auto delta = softmax(cache.a.back());
        delta[static_cast<std::size_t>(labels[s])] -= 1.0;
        backprop(model, cache, std::move(delta), &g);
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (auto& m : g.dw) {
        for (auto& v : m) v *= inv;
    }
    for (auto& m : g.db) {
        for (auto& v : m) v *= inv;
    }
    return g;
}

TrainStats train(Classifier& model, const Dataset& ds, const TrainConfig& cfg,
                 const BatchHook& hook) {
    if (ds.frame_len * 2 != model.input_dim() ||
        ds.num_classes != model.num_classes()) {
        throw std::invalid_argument("dataset and model dimensions disagree");
    }
    if (cfg.epochs < 0 || cfg.batch_size <= 0) {
        throw std::invalid_argument("invalid train config");
    }
    std::vector<std::uint32_t> order = ds.train_indices;
    Rng rng(cfg.seed);
    TrainStats stats;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t k = order.size() - 1; k > 0; --k) {
            std::swap(order[k], order[rng.below(k + 1)]);
        }
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(),
                         start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::vector<double>> xs;
            std::vector<int> ys;
            for (std::size_t k = start; k < stop; ++k) {
                const auto& ex = ds.examples[order[k]];
                xs.push_back(flatten(ex.frame));
                ys.push_back(ex.label);
            }
            if (hook) hook(model, xs, ys);
            double batch_loss = 0.0;
            for (std::size_t s = 0; s < xs.size(); ++s) {
                batch_loss += cross_entropy(forward(model, xs[s]), ys[s]);
            }
            epoch_loss += batch_loss / static_cast<double>(xs.size());
            ++batches;
            const ParamGrads g = grad_params(model, xs, ys);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                auto& layer = model.layers[l];
                for (std::size_t k = 0; k < layer.w.size(); ++k) {
                    layer.w[k] -= cfg.learning_rate * g.dw[l][k];
                }
                for (std::size_t k = 0; k < layer.b.size(); ++k) {
                    layer.b[k] -= cfg.learning_rate * g.db[l][k];
                }
            }
        }
        stats.epoch_loss.push_back(batches ? epoch_loss / batches : 0.0);
    }
    return stats;
}

void save_model(const Classifier& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write("AMCM", 4);
    const std::uint32_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 4);
    const auto num_layers = static_cast<std::uint32_t>(model.layers.size());
    os.write(reinterpret_cast<const char*>(&num_layers), 4);
    for (const auto& layer : model.layers) {
        const auto in_dim = static_cast<std::uint32_t>(layer.spec.in_dim);
        const auto out_dim = static_cast<std::uint32_t>(layer.spec.out_dim);
        const auto act = static_cast<std::uint8_t>(layer.spec.act);
        os.write(reinterpret_cast<const char*>(&in_dim), 4);
        os.write(reinterpret_cast<const char*>(&out_dim), 4);
        os.write(reinterpret_cast<const char*>(&act), 1);
        os.write(reinterpret_cast<const char*>(layer.w.data()),
                 static_cast<std::streamsize>(layer.w.size() * 8));
        os.write(reinterpret_cast<const char*>(layer.b.data()),
                 static_cast<std::streamsize>(layer.b.size() * 8));
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

Classifier load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open model file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "AMCM", 4) != 0) {
        throw std::runtime_error("not an AMCM model file: " + path);
    }
    std::uint32_t version = 0, num_layers = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw std::runtime_error("unsupported AMCM version");
    is.read(reinterpret_cast<char*>(&num_layers), 4);
    Classifier model;
    for (std::uint32_t l = 0; l < num_layers; ++l) {
        std::uint32_t in_dim = 0, out_dim = 0;
        std::uint8_t act = 0;
        is.read(reinterpret_cast<char*>(&in_dim), 4);
        is.read(reinterpret_cast<char*>(&out_dim), 4);
        is.read(reinterpret_cast<char*>(&act), 1);
        Layer layer;
        layer.spec = {static_cast<int>(in_dim), static_cast<int>(out_dim),
                      static_cast<Activation>(act)};
        layer.w.resize(static_cast<std::size_t>(in_dim) * out_dim);
        layer.b.resize(out_dim);
        is.read(reinterpret_cast<char*>(layer.w.data()),
                static_cast<std::streamsize>(layer.w.size() * 8));
        is.read(reinterpret_cast<char*>(layer.b.data()),
                static_cast<std::streamsize>(layer.b.size() * 8));
        model.layers.push_back(std::move(layer));
    }
    if (!is || model.layers.empty()) {
        throw std::runtime_error("truncated AMCM file: " + path);
    }
    return model;
}

}  // namespace amc
