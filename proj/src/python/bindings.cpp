// Python bindings for the modulation-classification attack benchmark.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>
#include <vector>

#include "amc/attacks.hpp"
#include "amc/metrics.hpp"
#include "amc/nn.hpp"
#include "amc/signal.hpp"

namespace py = pybind11;

namespace {

amc::AttackConfig make_attack_config(const std::string& method, double p_max,
                                     double tol, double eps, double step,
                                     int iters, double initial_const,
                                     double cw_lr) {
    amc::AttackConfig cfg;
    cfg.method = amc::parse_method(method);
    cfg.p_max = p_max;
    cfg.tol = tol;
    cfg.eps = eps;
    cfg.step = step;
    cfg.iters = iters;
    cfg.initial_const = initial_const;
    cfg.cw_lr = cw_lr;
    return cfg;
}

std::vector<amc::LabeledInput> to_labeled(
    const std::vector<std::pair<std::vector<double>, int>>& samples) {
    std::vector<amc::LabeledInput> out;
    out.reserve(samples.size());
    for (const auto& [x, label] : samples) out.push_back({x, label});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Minimum-power adversarial attack benchmark for a small "
              "modulation classifier";

    py::class_<amc::ModulationScheme>(m, "ModulationScheme")
        .def_readonly("name", &amc::ModulationScheme::name)
        .def_readonly("samples_per_symbol",
                      &amc::ModulationScheme::samples_per_symbol)
        .def_property_readonly("constellation",
                               [](const amc::ModulationScheme& s) {
                                   return s.constellation;
                               });

    py::class_<amc::IQFrame>(m, "IQFrame")
        .def_readonly("i", &amc::IQFrame::i)
        .def_readonly("q", &amc::IQFrame::q)
        .def("__len__", &amc::IQFrame::size);

    py::class_<amc::ChannelConfig>(m, "ChannelConfig")
        .def(py::init<>())
        .def_readwrite("snr_db", &amc::ChannelConfig::snr_db)
        .def_readwrite("noise_free", &amc::ChannelConfig::noise_free)
        .def_readwrite("cfo_norm", &amc::ChannelConfig::cfo_norm)
        .def_readwrite("phase_rad", &amc::ChannelConfig::phase_rad)
        .def_readwrite("random_phase", &amc::ChannelConfig::random_phase)
        .def_readwrite("seed", &amc::ChannelConfig::seed);

    py::class_<amc::Example>(m, "Example")
        .def_readonly("frame", &amc::Example::frame)
        .def_readonly("label", &amc::Example::label)
        .def_readonly("snr_db", &amc::Example::snr_db);

    py::class_<amc::Dataset>(m, "Dataset")
        .def_readonly("examples", &amc::Dataset::examples)
        .def_readonly("num_classes", &amc::Dataset::num_classes)
        .def_readonly("frame_len", &amc::Dataset::frame_len)
        .def_readonly("train_indices", &amc::Dataset::train_indices)
        .def_readonly("test_indices", &amc::Dataset::test_indices)
        .def_readonly("seed", &amc::Dataset::seed)
        .def("__len__",
             [](const amc::Dataset& ds) { return ds.examples.size(); });

    py::class_<amc::Classifier>(m, "Classifier")
        .def_property_readonly("input_dim", &amc::Classifier::input_dim)
        .def_property_readonly("num_classes", &amc::Classifier::num_classes);

    py::class_<amc::TrainStats>(m, "TrainStats")
        .def_readonly("epoch_loss", &amc::TrainStats::epoch_loss);

    py::class_<amc::AttackResult>(m, "AttackResult")
        .def_readonly("perturbation", &amc::AttackResult::perturbation)
        .def_readonly("eps_star", &amc::AttackResult::eps_star)
        .def_readonly("target_class", &amc::AttackResult::target_class)
        .def_readonly("per_class_eps", &amc::AttackResult::per_class_eps)
        .def_readonly("success", &amc::AttackResult::success)
        .def_readonly("iterations", &amc::AttackResult::iterations)
        .def_readonly("wall_time_s", &amc::AttackResult::wall_time_s)
        .def_readonly("best_direction", &amc::AttackResult::best_direction)
        .def_readonly("per_class_iters", &amc::AttackResult::per_class_iters);

    // signal
    m.def("constellation", &amc::constellation, py::arg("scheme_name"),
          py::arg("samples_per_symbol") = 8);
    m.def("gen_clean_frame", &amc::gen_clean_frame, py::arg("scheme"),
          py::arg("n"), py::arg("rng_seed"));
    m.def("apply_channel", &amc::apply_channel, py::arg("frame"),
          py::arg("cfg"));
    m.def("build_dataset", &amc::build_dataset, py::arg("schemes"),
          py::arg("snr_list"), py::arg("frames_per_cell"), py::arg("n"),
          py::arg("seed"), py::arg("samples_per_symbol") = 8);
    m.def("save_dataset", &amc::save_dataset, py::arg("dataset"),
          py::arg("path"));
    m.def("load_dataset", &amc::load_dataset, py::arg("path"));
    m.def("flatten",
          [](const amc::IQFrame& f) { return amc::flatten(f); },
          py::arg("frame"));
    m.def("mean_power", &amc::mean_power, py::arg("frame"));

    // nn
    m.def(
        "train_classifier",
        [](const amc::Dataset& ds, const std::vector<int>& hidden, int epochs,
           int batch_size, double learning_rate, std::uint64_t seed,
           const std::string& adv_attack, double adv_fraction) {
            std::vector<amc::LayerSpec> specs;
            int prev = 2 * ds.frame_len;
            for (int h : hidden) {
                specs.push_back({prev, h, amc::Activation::relu});
                prev = h;
            }
            specs.push_back({prev, ds.num_classes, amc::Activation::identity});
            amc::Classifier model = amc::init_model(specs, seed);
            amc::TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.learning_rate = learning_rate;
            cfg.seed = seed;
            amc::TrainStats stats;
            if (!adv_attack.empty()) {
                cfg.has_adv = true;
                cfg.adv.attack = adv_attack;
                cfg.adv.fraction = adv_fraction;
                stats = amc::adversarial_train(model, ds, cfg);
            } else {
                stats = amc::train(model, ds, cfg);
            }
            return py::make_tuple(std::move(model), std::move(stats));
        },
        py::arg("dataset"), py::arg("hidden") = std::vector<int>{128, 64},
        py::arg("epochs") = 60, py::arg("batch_size") = 32,
        py::arg("learning_rate") = 0.05, py::arg("seed") = 1,
        py::arg("adv_attack") = std::string(), py::arg("adv_fraction") = 0.5);
    m.def("forward",
          [](const amc::Classifier& model, const std::vector<double>& x) {
              return amc::forward(model, x);
          },
          py::arg("model"), py::arg("x"));
    m.def("predict",
          [](const amc::Classifier& model, const std::vector<double>& x) {
              return amc::predict(model, x);
          },
          py::arg("model"), py::arg("x"));
    m.def("grad_input",
          [](const amc::Classifier& model, const std::vector<double>& x,
             int target) { return amc::grad_input(model, x, target); },
          py::arg("model"), py::arg("x"), py::arg("target"));
    m.def("cross_entropy",
          [](const std::vector<double>& logits, int target) {
              return amc::cross_entropy(logits, target);
          },
          py::arg("logits"), py::arg("target"));
    m.def("save_model", &amc::save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &amc::load_model, py::arg("path"));

    // attacks
    m.def(
        "attack",
        [](const amc::Classifier& model, const std::vector<double>& x,
           int l_true, const std::string& method, double p_max, double tol,
           double eps, double step, int iters, double initial_const,
           double cw_lr) {
            const auto cfg = make_attack_config(method, p_max, tol, eps, step,
                                                iters, initial_const, cw_lr);
            return amc::run_attack(model, x, l_true, cfg);
        },
        py::arg("model"), py::arg("x"), py::arg("l_true"),
        py::arg("method") = "grs", py::arg("p_max") = 0.05,
        py::arg("tol") = 1e-4, py::arg("eps") = 0.05, py::arg("step") = 0.05,
        py::arg("iters") = 10, py::arg("initial_const") = 1e-3,
        py::arg("cw_lr") = 0.01);
    m.def("oracle_min_eps",
          [](const amc::Classifier& model, const std::vector<double>& x,
             int l_true, const std::vector<double>& direction, double p_max,
             double grid_step) {
              return amc::oracle_min_eps(model, x, l_true, direction, p_max,
                                         grid_step);
          },
          py::arg("model"), py::arg("x"), py::arg("l_true"),
          py::arg("direction"), py::arg("p_max") = 0.05,
          py::arg("grid_step") = 1e-5);
    m.def("is_monotone_ray",
          [](const amc::Classifier& model, const std::vector<double>& x,
             int l_true, const std::vector<double>& direction, double p_max,
             double grid_step) {
              return amc::is_monotone_ray(model, x, l_true, direction, p_max,
                                          grid_step);
          },
          py::arg("model"), py::arg("x"), py::arg("l_true"),
          py::arg("direction"), py::arg("p_max") = 0.05,
          py::arg("grid_step") = 1e-5);

    // metrics
    m.def("avg_robustness", &amc::avg_robustness, py::arg("samples"),
          "Mean of |r|_inf / |x|_inf over (x, r) pairs (Eq. 3 style ratio)");
    m.def("clean_accuracy",
          [](const amc::Classifier& model,
             const std::vector<std::pair<std::vector<double>, int>>& samples) {
              return amc::clean_accuracy(model, to_labeled(samples));
          },
          py::arg("model"), py::arg("samples"));
    m.def("adversarial_accuracy",
          [](const amc::Classifier& model,
             const std::vector<std::pair<std::vector<double>, int>>& samples) {
              return amc::adversarial_accuracy(model, to_labeled(samples));
          },
          py::arg("model"), py::arg("samples"));
}
