#pragma once

#include <span>
#include <vector>

namespace prft {

// Per-class reward vector for one sample, built from the detached old-policy
// class distribution. The vector plays the role of a group of c candidate
// responses, one per class.
struct RewardVector {
    std::vector<double> values;
    int true_class = 0;
    double a = 1.0;
    double b = 0.0;
};

struct AdvantageVector {
    std::vector<double> values;
    bool degenerate = false; // all rewards equal: advantages forced to zero
};

// c at the true class, 0 elsewhere, so the mean over the group is exactly 1
// regardless of the class count.
std::vector<double> accuracy_reward(int true_class, int num_classes);

// Negated probabilities: mass concentrated anywhere is penalized there.
// `probs` must be a detached distribution (entries in [0,1], summing to 1).
std::vector<double> dispersion_reward(std::span<const double> probs);

// r = a * accuracy + b * dispersion, elementwise.
RewardVector combined_reward(int true_class, std::span<const double> probs,
                             double a, double b);

// Within-group standardization (population std). A spread below eps_std
// marks the group degenerate and zeroes the advantages instead of dividing
// by noise.
AdvantageVector standardize(std::span<const double> rewards, double eps_std = 1e-8);
AdvantageVector standardize(const RewardVector& r, double eps_std = 1e-8);

} // namespace prft
