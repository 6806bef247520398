#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amc/nn.hpp"

namespace amc {

enum class Method { grs, fgsm, pgd, bisect, cw };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct AttackConfig {
    Method method = Method::grs;
    double p_max = 0.05;  // GRS/bisect perturbation budget
    double tol = 1e-4;    // search termination width
    double eps = 0.05;    // FGSM/PGD L-inf budget
    double step = 0.05;   // PGD step size
    int iters = 10;       // PGD/CW iteration count
    double initial_const = 1e-3;  // CW penalty constant
    double cw_lr = 0.01;          // CW gradient-descent step
};

struct AttackResult {
    std::vector<double> perturbation;  // r_x, length 2N
    double eps_star = 0.0;
    int target_class = -1;  // -1 when no target applies
    std::vector<double> per_class_eps;  // +inf for skipped/failed classes
    bool success = false;
    int iterations = 0;
    double wall_time_s = 0.0;
    // Unit-L2 direction actually attempted (GRS/bisect); backs the
    // failed-attack accounting in the metrics layer.
    std::vector<double> best_direction;
    std::vector<int> per_class_iters;  // search loop counts, GRS/bisect only
};

// Golden-ratio minimal-strength search along per-class fixed gradient
// directions; probes at eps_min + (eps_max - eps_min) * phi with
// phi = (sqrt(5)-1)/2.
AttackResult grs_attack(const Classifier& model, std::span<const double> x,
                        int l_true, const AttackConfig& cfg);

// Same bracketing search with midpoint probes.
AttackResult bisect_attack(const Classifier& model, std::span<const double> x,
                           int l_true, const AttackConfig& cfg);

// Untargeted one-step sign attack: r = eps * sign(grad of true-class loss).
AttackResult fgsm_attack(const Classifier& model, std::span<const double> x,
                         int l_true, const AttackConfig& cfg);

// Iterated sign steps projected onto the L-inf ball of radius eps.
AttackResult pgd_attack(const Classifier& model, std::span<const double> x,
                        int l_true, const AttackConfig& cfg);

// Simplified L2 attack: gradient descent on |r|^2 + c * margin_+, with the
// penalty constant doubled after any full pass that fails to fool.
AttackResult cw_attack(const Classifier& model, std::span<const double> x,
                       int l_true, const AttackConfig& cfg);

AttackResult run_attack(const Classifier& model, std::span<const double> x,
                        int l_true, const AttackConfig& cfg);

// Smallest grid multiple of grid_step in [0, p_max] such that
// x - eps * direction is misclassified; nullopt when none fools.
std::optional<double> oracle_min_eps(const Classifier& model,
                                     std::span<const double> x, int l_true,
                                     std::span<const double> direction,
                                     double p_max, double grid_step);

// True iff the misclassification predicate along the grid is false on a
// prefix and true on the suffix (single crossing or no crossing).
bool is_monotone_ray(const Classifier& model, std::span<const double> x,
                     int l_true, std::span<const double> direction,
                     double p_max, double grid_step);

// Trains with a fraction of each batch replaced by attacks generated
// against the live model state.
TrainStats adversarial_train(Classifier& model, const Dataset& ds,
                             const TrainConfig& cfg);

}  // namespace amc
