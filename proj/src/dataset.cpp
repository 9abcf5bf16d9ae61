#include "qevo/dataset.hpp"

#include "qevo/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace qevo {

void NormalizationParams::validate() const {
	if (!std::isfinite(d_min) || !std::isfinite(d_max) || !(d_max > d_min)) {
		throw Error(ErrorCode::InvalidParams, "normalization requires finite d_max > d_min");
	}
}

NormalizationParams fit_normalizer(std::span<const double> values) {
	if (values.size() < 2) {
		throw Error(ErrorCode::SeriesTooShort, "normalizer needs at least two values");
	}
	auto [lo, hi] = std::minmax_element(values.begin(), values.end());
	if (*hi == *lo) {
		throw Error(ErrorCode::ConstantSeries, "series is constant; min-max scaling undefined");
	}
	NormalizationParams params{*lo, *hi};
	params.validate();
	return params;
}

double normalize(double value, const NormalizationParams &params) {
	params.validate();
	return std::clamp((value - params.d_min) / (params.d_max - params.d_min), 0.0, 1.0);
}

double denormalize(double value, const NormalizationParams &params) {
	params.validate();
	return value * (params.d_max - params.d_min) + params.d_min;
}

std::vector<double> normalize_all(std::span<const double> values, const NormalizationParams &params) {
	std::vector<double> out;
	out.reserve(values.size());
	for (double v : values) {
		out.push_back(normalize(v, params));
	}
	return out;
}

WindowedDataset::WindowedDataset(std::size_t window_size, std::vector<double> inputs, std::vector<double> targets)
    : window_size_(window_size), inputs_(std::move(inputs)), targets_(std::move(targets)) {
	if (window_size_ == 0 || inputs_.size() != window_size_ * targets_.size()) {
		throw Error(ErrorCode::DimensionMismatch, "input matrix does not match window size and target count");
	}
}

WindowedDataset WindowedDataset::slice(std::size_t begin, std::size_t end) const {
	end = std::min(end, rows());
	begin = std::min(begin, end);
	std::vector<double> in(inputs_.begin() + static_cast<std::ptrdiff_t>(begin * window_size_),
	                       inputs_.begin() + static_cast<std::ptrdiff_t>(end * window_size_));
	std::vector<double> tg(targets_.begin() + static_cast<std::ptrdiff_t>(begin),
	                       targets_.begin() + static_cast<std::ptrdiff_t>(end));
	WindowedDataset out;
	out.window_size_ = window_size_;
	out.inputs_ = std::move(in);
	out.targets_ = std::move(tg);
	return out;
}

void WindowedDataset::write_csv(std::ostream &out) const {
	auto old_precision = out.precision(17);
	for (std::size_t i = 0; i < rows(); ++i) {
		for (double v : row(i)) {
			out << v << ',';
		}
		out << targets_[i] << '\n';
	}
	out.precision(old_precision);
}

WindowedDataset build_windows(std::span<const double> normalized, std::size_t window_size) {
	if (window_size == 0) {
		throw Error(ErrorCode::InvalidParams, "window size must be positive");
	}
	if (normalized.size() < window_size + 1) {
		throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(normalized.size()) +
		                                           " is too short for window " + std::to_string(window_size));
	}
	const std::size_t rows = normalized.size() - window_size;
	std::vector<double> inputs;
	inputs.reserve(rows * window_size);
	std::vector<double> targets;
	targets.reserve(rows);
	for (std::size_t i = 0; i < rows; ++i) {
		inputs.insert(inputs.end(), normalized.begin() + static_cast<std::ptrdiff_t>(i),
		              normalized.begin() + static_cast<std::ptrdiff_t>(i + window_size));
		targets.push_back(normalized[i + window_size]);
	}
	return WindowedDataset(window_size, std::move(inputs), std::move(targets));
}

std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset &dataset, double train_fraction) {
	if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
		throw Error(ErrorCode::InvalidParams, "train fraction must lie in (0,1)");
	}
	const std::size_t rows = dataset.rows();
	if (rows < 2) {
		throw Error(ErrorCode::EmptyPartition, "need at least two windows to form train and test partitions");
	}
	// The epsilon absorbs representation error such as 0.7 * 10 = 6.999...
	auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(rows) * train_fraction + 1e-9));
	cut = std::clamp<std::size_t>(cut, 1, rows - 1);
	return {dataset.slice(0, cut), dataset.slice(cut, rows)};
}

} // namespace qevo
