#include "cotrain/schedules.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cotrain/error.hpp"

namespace cotrain {

double warmup_lambda(double epoch, double lambda_max, double warmup_epochs) {
    if (epoch < 0.0) throw ConfigError("warmup_lambda: epoch must be nonnegative");
    if (warmup_epochs <= 0.0 || epoch > warmup_epochs) return lambda_max;
    const double gap = 1.0 - epoch / warmup_epochs;
    return lambda_max * std::exp(-5.0 * gap * gap);
}

double cosine_lr(int epoch, double lr0, int total_epochs) {
    if (total_epochs < 1 || epoch < 1 || epoch > total_epochs) {
        throw ConfigError("cosine_lr: epoch " + std::to_string(epoch) + " outside [1, " +
                          std::to_string(total_epochs) + "]");
    }
    return lr0 * (1.0 + std::cos(static_cast<double>(epoch - 1) * std::numbers::pi /
                                 static_cast<double>(total_epochs)));
}

}  // namespace cotrain
