#include "amc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace amc {

FailedPolicy parse_failed_policy(const std::string& name) {
    if (name == "pmax") return FailedPolicy::pmax;
    if (name == "zero") return FailedPolicy::zero;
    if (name == "exclude") return FailedPolicy::exclude;
    throw std::invalid_argument("unknown failed-policy: " + name);
}

std::string failed_policy_name(FailedPolicy p) {
    switch (p) {
        case FailedPolicy::pmax: return "pmax";
        case FailedPolicy::zero: return "zero";
        case FailedPolicy::exclude: return "exclude";
    }
    return "?";
}

double linf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double avg_robustness(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        samples) {
    if (samples.empty()) {
        throw std::invalid_argument("avg_robustness over empty sample list");
    }
    double acc = 0.0;
    for (const auto& [x, r] : samples) {
        const double xn = linf_norm(x);
        if (xn == 0.0) {
            throw std::invalid_argument(
                "avg_robustness undefined for |x|_inf = 0");
        }
        acc += linf_norm(r) / xn;
    }
    return acc / static_cast<double>(samples.size());
}

double clean_accuracy(const Classifier& model,
                      const std::vector<LabeledInput>& samples) {
    if (samples.empty()) throw std::invalid_argument("empty sample set");
    std::size_t correct = 0;
    for (const auto& s : samples) {
        if (predict(model, s.x) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double adversarial_accuracy(const Classifier& model,
                            const std::vector<LabeledInput>& samples) {
    return clean_accuracy(model, samples);
}

bool effective_perturbation(const AttackResult& res, const AttackConfig& cfg,
                            FailedPolicy policy, std::vector<double>& r_out) {
    if (res.success) {
        r_out = res.perturbation;
        return true;
    }
    switch (policy) {
        case FailedPolicy::exclude:
            return false;
        case FailedPolicy::zero:
            r_out.assign(res.perturbation.size(), 0.0);
            return true;
        case FailedPolicy::pmax:
            // Full budget along the attempted (best) direction. Attacks that
            // do not track a search direction (FGSM/PGD/CW) already return
            // their attempted full-budget step as the perturbation.
            if (res.best_direction.empty()) {
                r_out = res.perturbation;
            } else {
                r_out.resize(res.best_direction.size());
                for (std::size_t k = 0; k < r_out.size(); ++k) {
                    r_out[k] = -cfg.p_max * res.best_direction[k];
                }
            }
            return true;
    }
    return false;
}

double batch_attack_time(const Classifier& model, const AttackConfig& cfg,
                         const std::vector<LabeledInput>& batch, int reps) {
    if (batch.empty() || reps < 1) {
        throw std::invalid_argument("invalid timing request");
    }
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int rep = 0; rep < reps; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& s : batch) {
            (void)run_attack(model, s.x, s.label, cfg);
        }
        times.push_back(std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

void write_report_csv(const std::vector<ReportRow>& rows,
                      const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "model,attack,snr_db,clean_acc,adv_acc,avg_robustness,"
          "mean_batch_time_s,n\n";
    os.precision(17);
    for (const auto& r : rows) {
        os << r.model_id << ',' << r.attack << ',' << r.snr_db << ','
           << r.clean_acc << ',' << r.adv_acc << ',' << r.avg_robustness << ','
           << r.mean_batch_time_s << ',' << r.n_samples << '\n';
    }
}

void write_report_json(const std::vector<ReportRow>& rows,
                       const std::string& path) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : rows) {
        doc.push_back({{"model", r.model_id},
                       {"attack", r.attack},
                       {"snr_db", r.snr_db},
                       {"clean_acc", r.clean_acc},
                       {"adv_acc", r.adv_acc},
                       {"avg_robustness", r.avg_robustness},
                       {"mean_batch_time_s", r.mean_batch_time_s},
                       {"n", r.n_samples}});
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << doc.dump(2) << '\n';
}

}  // namespace amc
