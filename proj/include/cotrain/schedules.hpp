#pragma once

namespace cotrain {

/// lambda_max * exp(-5 (1 - T/warmup)^2) for T <= warmup, lambda_max after.
/// A zero-length warmup yields lambda_max for every epoch.
double warmup_lambda(double epoch, double lambda_max, double warmup_epochs = 80.0);

/// lr0 * (1 + cos((T - 1) pi / total)) for 1 <= T <= total; ConfigError otherwise.
double cosine_lr(int epoch, double lr0, int total_epochs);

}  // namespace cotrain
