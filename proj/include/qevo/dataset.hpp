#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "qevo/trace_io.hpp"

namespace qevo {

/// Min-max scaling bounds fitted on a whole series.
struct NormalizationParams {
	double d_min = 0.0;
	double d_max = 1.0;

	void validate() const;
};

NormalizationParams fit_normalizer(std::span<const double> values);
inline NormalizationParams fit_normalizer(const AggregatedSeries &series) {
	return fit_normalizer(series.values);
}

/// Scales into [0,1]; out-of-range values are clamped.
double normalize(double value, const NormalizationParams &params);
double denormalize(double value, const NormalizationParams &params);
std::vector<double> normalize_all(std::span<const double> values, const NormalizationParams &params);

/// Sliding-window lag matrix. Row i holds series[i, i+n), target i is series[i+n].
class WindowedDataset {
public:
	WindowedDataset() = default;
	WindowedDataset(std::size_t window_size, std::vector<double> inputs, std::vector<double> targets);

	std::size_t window_size() const noexcept {
		return window_size_;
	}
	std::size_t rows() const noexcept {
		return targets_.size();
	}
	std::span<const double> row(std::size_t i) const {
		return {inputs_.data() + i * window_size_, window_size_};
	}
	double target(std::size_t i) const {
		return targets_[i];
	}
	std::span<const double> targets() const noexcept {
		return targets_;
	}
	std::span<const double> inputs() const noexcept {
		return inputs_;
	}

	/// Rows [begin, end) as a new dataset.
	WindowedDataset slice(std::size_t begin, std::size_t end) const;

	/// One line per window: lag columns then the target.
	void write_csv(std::ostream &out) const;

private:
	std::size_t window_size_ = 0;
	std::vector<double> inputs_; // row-major, rows() x window_size()
	std::vector<double> targets_;
};

WindowedDataset build_windows(std::span<const double> normalized, std::size_t window_size);

/// Chronological split; the first floor(rows * fraction) rows train, clamped
/// so both sides keep at least one row.
std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset &dataset, double train_fraction);

} // namespace qevo
