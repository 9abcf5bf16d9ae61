#pragma once

#include <cstddef>
#include <span>

namespace qevo {

inline constexpr double kMapeEpsilon = 1e-8;

struct EvaluationResult {
	double rmse = 0.0;
	double mae = 0.0;
	double mape = 0.0; // fraction, not percent
	std::size_t count = 0;
};

double rmse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);

/// Mean of |a - p| / max(|a|, epsilon). Near-zero actuals make the guard
/// visible in the result rather than producing inf.
double mape(std::span<const double> actual, std::span<const double> predicted, double epsilon = kMapeEpsilon);

EvaluationResult evaluate(std::span<const double> actual, std::span<const double> predicted,
                          double epsilon = kMapeEpsilon);

} // namespace qevo
