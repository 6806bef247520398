#include "amc/attacks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace amc {

namespace {

constexpr double kPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double l2_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// logit margin of the true class over the best other class; negative
// (or tied at a lower index) means misclassified
double true_margin(std::span<const double> logits, int l_true) {
    double other = -kInf;
    for (int k = 0; k < static_cast<int>(logits.size()); ++k) {
        if (k != l_true) other = std::max(other, logits[static_cast<std::size_t>(k)]);
    }
    return logits[static_cast<std::size_t>(l_true)] - other;
}

AttackResult degenerate_success(std::size_t dim, int num_classes) {
    AttackResult res;
    res.perturbation.assign(dim, 0.0);
    res.per_class_eps.assign(static_cast<std::size_t>(num_classes), kInf);
    res.per_class_iters.assign(static_cast<std::size_t>(num_classes), 0);
    res.eps_star = 0.0;
    res.success = true;
    return res;
}

void check_bracket_cfg(const AttackConfig& cfg) {
    if (!(cfg.tol > 0.0 && cfg.tol < cfg.p_max)) {
        throw std::invalid_argument("attack config requires 0 < tol < p_max");
    }
}

AttackResult bracket_attack(const Classifier& model, std::span<const double> x,
                            int l_true, const AttackConfig& cfg, bool golden) {
    check_bracket_cfg(cfg);
    const auto t0 = Clock::now();
    const int num_classes = model.num_classes();
    if (predict(model, x) != l_true) {
        auto res = degenerate_success(x.size(), num_classes);
        res.wall_time_s = elapsed_s(t0);
        return res;
    }

    AttackResult res;
    res.per_class_eps.assign(static_cast<std::size_t>(num_classes), kInf);
    res.per_class_iters.assign(static_cast<std::size_t>(num_classes), 0);

    // Direction of the class whose budget probe came closest to fooling;
    // reported for failed attacks so the metrics layer can account them.
    double closest_fail_margin = kInf;
    std::vector<double> closest_fail_dir;

    std::vector<double> x_adv(x.begin(), x.end());
    for (int cls = 0; cls < num_classes; ++cls) {
        if (cls == l_true) continue;  // descending the true-class loss cannot fool
        const auto grad = grad_input(model, x, cls);
        const double gn = l2_norm(grad);
        if (gn == 0.0) continue;  // stays +inf, never divide by zero
        std::vector<double> r_norm(grad.size());
        for (std::size_t k = 0; k < grad.size(); ++k) r_norm[k] = grad[k] / gn;

        // Budget feasibility probe at p_max; without it a class that cannot
        // be fooled would silently report eps close to p_max.
        for (std::size_t k = 0; k < x.size(); ++k) {
            x_adv[k] = x[k] - cfg.p_max * r_norm[k];
        }
        const auto probe_logits = forward(model, x_adv);
        if (argmax_lowest(probe_logits) == l_true) {
            const double margin = true_margin(probe_logits, l_true);
            if (margin < closest_fail_margin) {
                closest_fail_margin = margin;
                closest_fail_dir = r_norm;
            }
            continue;
        }

        double eps_min = 0.0, eps_max = cfg.p_max;
        int iters = 0;
        while (eps_max - eps_min > cfg.tol) {
            const double eps_ave =
                golden ? eps_min + (eps_max - eps_min) * kPhi
                       : 0.5 * (eps_min + eps_max);
            for (std::size_t k = 0; k < x.size(); ++k) {
                x_adv[k] = x[k] - eps_ave * r_norm[k];
            }
            if (predict(model, x_adv) == l_true) {
                eps_min = eps_ave;
            } else {
                eps_max = eps_ave;
            }
            ++iters;
        }
        // eps_max is verified to fool (by the probe or a shrinking step) and
        // lies within tol of the last eps_ave.
        res.per_class_eps[static_cast<std::size_t>(cls)] = eps_max;
        res.per_class_iters[static_cast<std::size_t>(cls)] = iters;
        res.iterations += iters;
    }

    int target = -1;
    double best = kInf;
    for (int cls = 0; cls < num_classes; ++cls) {
        if (res.per_class_eps[static_cast<std::size_t>(cls)] < best) {
            best = res.per_class_eps[static_cast<std::size_t>(cls)];
            target = cls;
        }
    }
    if (target < 0) {
        res.perturbation.assign(x.size(), 0.0);
        res.eps_star = kInf;
        res.success = false;
        res.best_direction = std::move(closest_fail_dir);
        res.wall_time_s = elapsed_s(t0);
        return res;
    }
    const auto grad = grad_input(model, x, target);
    const double gn = l2_norm(grad);
    res.perturbation.resize(x.size());
    res.best_direction.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        res.best_direction[k] = grad[k] / gn;
        res.perturbation[k] = -best * res.best_direction[k];
    }
    res.eps_star = best;
    res.target_class = target;
    res.success = true;
    res.wall_time_s = elapsed_s(t0);
    return res;
}

}  // namespace

Method parse_method(const std::string& name) {
    if (name == "grs") return Method::grs;
    if (name == "fgsm") return Method::fgsm;
    if (name == "pgd") return Method::pgd;
    if (name == "bisect") return Method::bisect;
    if (name == "cw") return Method::cw;
    throw std::invalid_argument("unknown attack method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::grs: return "grs";
        case Method::fgsm: return "fgsm";
        case Method::pgd: return "pgd";
        case Method::bisect: return "bisect";
        case Method::cw: return "cw";
    }
    return "?";
}

AttackResult grs_attack(const Classifier& model, std::span<const double> x,
                        int l_true, const AttackConfig& cfg) {
    return bracket_attack(model, x, l_true, cfg, /*golden=*/true);
}

AttackResult bisect_attack(const Classifier& model, std::span<const double> x,
                           int l_true, const AttackConfig& cfg) {
    return bracket_attack(model, x, l_true, cfg, /*golden=*/false);
}

AttackResult fgsm_attack(const Classifier& model, std::span<const double> x,
                         int l_true, const AttackConfig& cfg) {
    if (cfg.eps <= 0.0) throw std::invalid_argument("eps must be positive");
    const auto t0 = Clock::now();
    AttackResult res;
    const auto grad = grad_input(model, x, l_true);
    res.perturbation.resize(x.size());
    std::vector<double> x_adv(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        res.perturbation[k] = cfg.eps * sign(grad[k]);
        x_adv[k] = x[k] + res.perturbation[k];
    }
    res.eps_star = cfg.eps;
    res.iterations = 1;
    res.success = predict(model, x_adv) != l_true;
    res.wall_time_s = elapsed_s(t0);
    return res;
}

AttackResult pgd_attack(const Classifier& model, std::span<const double> x,
                        int l_true, const AttackConfig& cfg) {
    if (cfg.eps <= 0.0 || cfg.step <= 0.0 || cfg.iters < 1) {
        throw std::invalid_argument("invalid pgd config");
    }
    const auto t0 = Clock::now();
    std::vector<double> x_adv(x.begin(), x.end());
    for (int it = 0; it < cfg.iters; ++it) {
        const auto grad = grad_input(model, x_adv, l_true);
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double stepped = x_adv[k] + cfg.step * sign(grad[k]);
            x_adv[k] = std::clamp(stepped, x[k] - cfg.eps, x[k] + cfg.eps);
        }
    }
    AttackResult res;
    res.perturbation.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        res.perturbation[k] = x_adv[k] - x[k];
    }
    res.eps_star = cfg.eps;
    res.iterations = cfg.iters;
    res.success = predict(model, x_adv) != l_true;
    res.wall_time_s = elapsed_s(t0);
    return res;
}

AttackResult cw_attack(const Classifier& model, std::span<const double> x,
                       int l_true, const AttackConfig& cfg) {
    const auto t0 = Clock::now();
    const int num_classes = model.num_classes();
    if (predict(model, x) != l_true) {
        auto res = degenerate_success(x.size(), num_classes);
        res.wall_time_s = elapsed_s(t0);
        return res;
    }
    AttackResult res;
    res.perturbation.assign(x.size(), 0.0);

    std::vector<double> r(x.size(), 0.0);
    std::vector<double> x_adv(x.size());
    std::vector<double> best_r;
    double best_norm = kInf;
    double c = cfg.initial_const;
    constexpr int kMaxDoublings = 20;
    for (int pass = 0; pass <= kMaxDoublings && cfg.iters > 0; ++pass) {
        for (int it = 0; it < cfg.iters; ++it) {
            for (std::size_t k = 0; k < x.size(); ++k) x_adv[k] = x[k] + r[k];
            const auto logits = forward(model, x_adv);
            if (argmax_lowest(logits) != l_true) {
                const double nrm = l2_norm(r);
                if (nrm < best_norm) {
                    best_norm = nrm;
                    best_r = r;
                }
            }
            const double margin = true_margin(logits, l_true);
            std::vector<double> step(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) step[k] = 2.0 * r[k];
            if (margin > 0.0) {
                // gradient of logit_true - logit_runner_up
                std::vector<double> coeffs(
                    static_cast<std::size_t>(num_classes), 0.0);
                int runner_up = -1;
                double best_other = -kInf;
                for (int k = 0; k < num_classes; ++k) {
                    if (k == l_true) continue;
                    if (logits[static_cast<std::size_t>(k)] > best_other) {
                        best_other = logits[static_cast<std::size_t>(k)];
                        runner_up = k;
                    }
                }
                coeffs[static_cast<std::size_t>(l_true)] = 1.0;
                coeffs[static_cast<std::size_t>(runner_up)] = -1.0;
                const auto gm = grad_input_logits(model, x_adv, coeffs);
                for (std::size_t k = 0; k < x.size(); ++k) {
                    step[k] += c * gm[k];
                }
            }
            for (std::size_t k = 0; k < x.size(); ++k) {
                r[k] -= cfg.cw_lr * step[k];
            }
            ++res.iterations;
        }
        if (!best_r.empty()) break;
        c *= 2.0;  // this pass never fooled; escalate the penalty
    }
    if (!best_r.empty()) {
        res.perturbation = std::move(best_r);
        res.eps_star = best_norm;
        res.success = true;
    }
    res.wall_time_s = elapsed_s(t0);
    return res;
}

AttackResult run_attack(const Classifier& model, std::span<const double> x,
                        int l_true, const AttackConfig& cfg) {
    switch (cfg.method) {
        case Method::grs: return grs_attack(model, x, l_true, cfg);
        case Method::fgsm: return fgsm_attack(model, x, l_true, cfg);
        case Method::pgd: return pgd_attack(model, x, l_true, cfg);
        case Method::bisect: return bisect_attack(model, x, l_true, cfg);
        case Method::cw: return cw_attack(model, x, l_true, cfg);
    }
    throw std::invalid_argument("unknown attack method");
}

std::optional<double> oracle_min_eps(const Classifier& model,
                                     std::span<const double> x, int l_true,
                                     std::span<const double> direction,
                                     double p_max, double grid_step) {
    if (std::abs(l2_norm(direction) - 1.0) > 1e-9) {
        throw std::invalid_argument("direction must be unit L2");
    }
    if (grid_step <= 0.0) throw std::invalid_argument("grid_step must be > 0");
    std::vector<double> probe(x.size());
    for (long long k = 0;; ++k) {
        const double eps = static_cast<double>(k) * grid_step;
        if (eps > p_max) break;
        for (std::size_t j = 0; j < x.size(); ++j) {
            probe[j] = x[j] - eps * direction[j];
        }
        if (predict(model, probe) != l_true) return eps;
    }
    return std::nullopt;
}

bool is_monotone_ray(const Classifier& model, std::span<const double> x,
                     int l_true, std::span<const double> direction,
                     double p_max, double grid_step) {
    if (std::abs(l2_norm(direction) - 1.0) > 1e-9) {
        throw std::invalid_argument("direction must be unit L2");
    }
    if (grid_step <= 0.0) throw std::invalid_argument("grid_step must be > 0");
    std::vector<double> probe(x.size());
    bool seen_fooled = false;
    for (long long k = 0;; ++k) {
        const double eps = static_cast<double>(k) * grid_step;
        if (eps > p_max) break;
        for (std::size_t j = 0; j < x.size(); ++j) {
            probe[j] = x[j] - eps * direction[j];
        }
        const bool fooled = predict(model, probe) != l_true;
        if (seen_fooled && !fooled) return false;
        seen_fooled = seen_fooled || fooled;
    }
    return true;
}

TrainStats adversarial_train(Classifier& model, const Dataset& ds,
                             const TrainConfig& cfg) {
    if (!cfg.has_adv) {
        throw std::invalid_argument("adversarial_train requires an adv mix");
    }
    AttackConfig attack_cfg;
    if (cfg.adv.attack == "fgsm") {
        attack_cfg.method = Method::fgsm;
    } else if (cfg.adv.attack == "pgd") {
        attack_cfg.method = Method::pgd;
    } else {
        throw std::invalid_argument("unknown adversarial-training attack: " +
                                    cfg.adv.attack);
    }
    attack_cfg.eps = cfg.adv.eps;
    attack_cfg.step = cfg.adv.step;
    attack_cfg.iters = cfg.adv.iters;
    const double fraction = cfg.adv.fraction;
    if (fraction < 0.0 || fraction > 1.0) {
        throw std::invalid_argument("adv fraction must lie in [0, 1]");
    }
    const BatchHook hook = [&attack_cfg, fraction](
                               const Classifier& live,
                               std::vector<std::vector<double>>& xs,
                               const std::vector<int>& ys) {
        const auto n_adv = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(xs.size())));
        for (std::size_t s = 0; s < n_adv; ++s) {
            const auto res = run_attack(live, xs[s], ys[s], attack_cfg);
            for (std::size_t k = 0; k < xs[s].size(); ++k) {
                xs[s][k] += res.perturbation[k];
            }
        }
    };
    return train(model, ds, cfg, hook);
}

}  // namespace amc
