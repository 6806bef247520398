#pragma once

#include <string>
#include <utility>
#include <vector>

#include "amc/attacks.hpp"
#include "amc/nn.hpp"

namespace amc {

// How failed attacks enter the robustness average and the perturbed
// accuracy: charge the full budget along the attempted direction, charge
// nothing, or drop the sample from the average.
enum class FailedPolicy { pmax, zero, exclude };

FailedPolicy parse_failed_policy(const std::string& name);
std::string failed_policy_name(FailedPolicy p);

double linf_norm(std::span<const double> v);

// Mean over samples of |r_hat|_inf / |x|_inf. Throws when the list is
// empty or any |x|_inf is zero.
double avg_robustness(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        samples);

struct LabeledInput {
    std::vector<double> x;
    int label = 0;
};

double clean_accuracy(const Classifier& model,
                      const std::vector<LabeledInput>& samples);

// Fraction of samples still classified as their true label; inputs are
// already perturbed.
double adversarial_accuracy(const Classifier& model,
                            const std::vector<LabeledInput>& samples);

// Perturbation charged to a result under the failure policy. Returns false
// when the sample is excluded from aggregation.
bool effective_perturbation(const AttackResult& res, const AttackConfig& cfg,
                            FailedPolicy policy, std::vector<double>& r_out);

// Median over `reps` repetitions of the wall time to attack the batch.
double batch_attack_time(const Classifier& model, const AttackConfig& cfg,
                         const std::vector<LabeledInput>& batch, int reps = 5);

struct ReportRow {
    std::string model_id;
    std::string attack;
    double snr_db = 0.0;
    double clean_acc = 0.0;
    double adv_acc = 0.0;
    double avg_robustness = 0.0;
    double mean_batch_time_s = 0.0;
    int n_samples = 0;
};

void write_report_csv(const std::vector<ReportRow>& rows,
                      const std::string& path);
void write_report_json(const std::vector<ReportRow>& rows,
                       const std::string& path);

}  // namespace amc
