#include "qevo/metrics.hpp"

#include "qevo/error.hpp"

#include <algorithm>
#include <cmath>

namespace qevo {

namespace {

void check_pair(std::span<const double> actual, std::span<const double> predicted) {
	if (actual.size() != predicted.size()) {
		throw Error(ErrorCode::LengthMismatch, "actual and predicted lengths differ");
	}
	if (actual.empty()) {
		throw Error(ErrorCode::EmptyInput, "metrics need at least one value");
	}
}

} // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
	check_pair(actual, predicted);
	double acc = 0.0;
	for (std::size_t i = 0; i < actual.size(); ++i) {
		const double d = actual[i] - predicted[i];
		acc += d * d;
	}
	return std::sqrt(acc / static_cast<double>(actual.size()));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
	check_pair(actual, predicted);
	double acc = 0.0;
	for (std::size_t i = 0; i < actual.size(); ++i) {
		acc += std::abs(actual[i] - predicted[i]);
	}
	return acc / static_cast<double>(actual.size());
}

double mape(std::span<const double> actual, std::span<const double> predicted, double epsilon) {
	check_pair(actual, predicted);
	if (!(epsilon > 0.0)) {
		throw Error(ErrorCode::InvalidParams, "mape epsilon must be positive");
	}
	double acc = 0.0;
	for (std::size_t i = 0; i < actual.size(); ++i) {
		acc += std::abs(actual[i] - predicted[i]) / std::max(std::abs(actual[i]), epsilon);
	}
	return acc / static_cast<double>(actual.size());
}

EvaluationResult evaluate(std::span<const double> actual, std::span<const double> predicted, double epsilon) {
	return {rmse(actual, predicted), mae(actual, predicted), mape(actual, predicted, epsilon), actual.size()};
}

} // namespace qevo
