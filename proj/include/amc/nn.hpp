#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace amc {

enum class Activation : std::uint8_t { relu = 0, identity = 1 };

struct LayerSpec {
    int in_dim = 0;
    int out_dim = 0;
    Activation act = Activation::relu;
};

struct Layer {
    LayerSpec spec;
    std::vector<double> w;  // row-major, out_dim x in_dim
    std::vector<double> b;  // out_dim
};

// Fully-connected softmax classifier. The last layer carries identity
// activation and emits logits.
struct Classifier {
    std::vector<Layer> layers;

    int input_dim() const { return layers.front().spec.in_dim; }
    int num_classes() const { return layers.back().spec.out_dim; }
};

struct AdvMix {
    std::string attack = "fgsm";  // fgsm | pgd
    double fraction = 0.5;
    double eps = 0.05;
    double step = 0.05;
    int iters = 10;
};

struct TrainConfig {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    bool has_adv = false;
    AdvMix adv;
};

struct ParamGrads {
    std::vector<std::vector<double>> dw;
    std::vector<std::vector<double>> db;
};

// He-scaled gaussian weights (stddev sqrt(2/in_dim)), zero biases.
Classifier init_model(const std::vector<LayerSpec>& specs, std::uint64_t seed);

std::vector<double> forward(const Classifier& model, std::span<const double> x);

// Argmax of the logits, ties broken by lowest index.
int predict(const Classifier& model, std::span<const double> x);
int argmax_lowest(std::span<const double> v);

std::vector<double> softmax(std::span<const double> logits);

// Cross-entropy -log softmax(logits)[target], max-subtraction stabilized.
double cross_entropy(std::span<const double> logits, int target);

// Exact input gradient of the cross-entropy toward class `target`.
std::vector<double> grad_input(const Classifier& model,
                               std::span<const double> x, int target);

// Input gradient of coeffs . logits; used by margin-based objectives.
std::vector<double> grad_input_logits(const Classifier& model,
                                      std::span<const double> x,
                                      std::span<const double> coeffs);

// Mean cross-entropy gradient over a batch; shapes mirror the parameters.
ParamGrads grad_params(const Classifier& model,
                       const std::vector<std::vector<double>>& xs,
                       const std::vector<int>& labels);

// Optional per-batch rewrite hook; adversarial training substitutes
// attacked inputs here before the gradient step.
using BatchHook = std::function<void(const Classifier&,
                                     std::vector<std::vector<double>>&,
                                     const std::vector<int>&)>;

struct TrainStats {
    std::vector<double> epoch_loss;
};

struct Dataset;  // see amc/signal.hpp

// Plain mini-batch gradient descent over the train split; deterministic
// given (dataset, cfg, seed).
TrainStats train(Classifier& model, const Dataset& ds, const TrainConfig& cfg,
                 const BatchHook& hook = nullptr);

// AMCM binary format, little-endian; round-trips bit-exactly.
void save_model(const Classifier& model, const std::string& path);
Classifier load_model(const std::string& path);

}  // namespace amc
