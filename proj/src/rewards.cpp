#include "prft/rewards.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prft {

namespace {

void check_probs(std::span<const double> probs) {
    if (probs.size() < 2) {
        throw std::invalid_argument("dispersion_reward: need at least 2 classes, got " +
                                    std::to_string(probs.size()));
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("dispersion_reward: probability " + std::to_string(p) +
                                        " outside [0,1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("dispersion_reward: probabilities sum to " +
                                    std::to_string(sum) + ", expected 1");
    }
}

} // namespace

std::vector<double> accuracy_reward(int true_class, int num_classes) {
    if (num_classes < 2) {
        throw std::invalid_argument("accuracy_reward: need at least 2 classes, got " +
                                    std::to_string(num_classes));
    }
    if (true_class < 0 || true_class >= num_classes) {
        throw std::out_of_range("accuracy_reward: true class " + std::to_string(true_class) +
                                " outside [0," + std::to_string(num_classes) + ")");
    }
    std::vector<double> r(static_cast<std::size_t>(num_classes), 0.0);
    r[static_cast<std::size_t>(true_class)] = static_cast<double>(num_classes);
    return r;
}

std::vector<double> dispersion_reward(std::span<const double> probs) {
    check_probs(probs);
    std::vector<double> r(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) r[i] = -probs[i];
    return r;
}

RewardVector combined_reward(int true_class, std::span<const double> probs,
                             double a, double b) {
    const auto acc = accuracy_reward(true_class, static_cast<int>(probs.size()));
    const auto dis = dispersion_reward(probs);
    RewardVector out;
    out.true_class = true_class;
    out.a = a;
    out.b = b;
    out.values.resize(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        out.values[i] = a * acc[i] + b * dis[i];
    }
    return out;
}

AdvantageVector standardize(std::span<const double> rewards, double eps_std) {
    if (rewards.empty()) throw std::invalid_argument("standardize: empty reward group");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n; // population variance: the group is the whole population
    const double sd = std::sqrt(var);

    AdvantageVector out;
    out.values.assign(rewards.size(), 0.0);
    if (sd < eps_std) {
        out.degenerate = true;
        return out;
    }
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        out.values[i] = (rewards[i] - mean) / sd;
    }
    return out;
}

AdvantageVector standardize(const RewardVector& r, double eps_std) {
    return standardize(std::span<const double>(r.values), eps_std);
}

} // namespace prft
