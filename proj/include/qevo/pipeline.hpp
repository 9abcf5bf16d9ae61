#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qevo/dataset.hpp"
#include "qevo/evolve.hpp"
#include "qevo/metrics.hpp"
#include "qevo/trace_io.hpp"

namespace qevo {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kForecastSchemaVersion = 1;

struct RunConfig {
	TrainingConfig training;
	std::filesystem::path input;
	ColumnMapping mapping;
	int pi_minutes = 5;
	double train_fraction = 0.6;
	std::filesystem::path out_dir = "qevo-out";
	std::vector<std::string> metrics{"rmse", "mae", "mape"};
	std::size_t ablation_seeds = 5;
	bool checkpoint = false;
	bool write_svg = true;

	void validate() const;
};

/// Applies `key = value` pairs. Unknown keys raise InvalidConfig.
void apply_setting(RunConfig &config, const std::string &key, const std::string &value);

/// Flat key-value text: one `key = value` per line, `#` starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string &text);
RunConfig load_run_config(const std::filesystem::path &path, RunConfig base = {});

/// Aggregated series, its normalizer and the chronological train/test windows.
struct PreparedData {
	AggregatedSeries series;
	NormalizationParams norm;
	std::vector<double> normalized;
	WindowedDataset all;
	WindowedDataset train;
	WindowedDataset test;
};

PreparedData prepare(const AggregatedSeries &series, std::size_t window_size, double train_fraction);
PreparedData prepare(const RunConfig &config);

struct SplitFit {
	std::vector<double> predicted; // normalized scale
	EvaluationResult metrics;
};

struct TrainOutcome {
	TrainingResult training;
	ConvergenceDiagnostics convergence;
	SplitFit train;
	SplitFit test;
};

TrainOutcome fit_and_evaluate(const RunConfig &config, const PreparedData &data);

/// Structured training report, schema-versioned. Contains nothing that
/// depends on thread count or output location.
std::string render_report(const RunConfig &config, const PreparedData &data, const TrainOutcome &outcome);

struct ForecastRow {
	std::size_t index = 0;           // position of the predicted value in the series
	std::optional<double> actual;    // raw scale, absent past the end of the series
	double predicted = 0.0;          // raw scale
	std::optional<double> actual_normalized;
	double predicted_normalized = 0.0;
	std::string split; // "train", "test", "observed" or "forecast"
};

std::string render_forecast_csv(const std::vector<ForecastRow> &rows, int pi_minutes);
std::vector<ForecastRow> parse_forecast_csv(const std::string &text, int *pi_minutes = nullptr);

/// Train, then write report.json, genome.bin, forecast.csv and plot/ into out_dir.
TrainOutcome cmd_train(const RunConfig &config);

struct PredictOptions {
	std::filesystem::path genome;
	std::filesystem::path input;
	ColumnMapping mapping;
	int pi_minutes = 5;
	std::optional<std::filesystem::path> report; // supplies normalization and PI
	std::optional<std::size_t> window;           // checked against the genome
	std::filesystem::path output = "forecast.csv";
};

/// One-step predictions for every window of the series plus one forecast past its end.
std::vector<ForecastRow> predict_series(const NetworkGenome &genome, const AggregatedSeries &series,
                                        const NormalizationParams &norm);
std::vector<ForecastRow> cmd_predict(const PredictOptions &options);

struct AblationRow {
	AblationMode mode = AblationMode::Full;
	std::uint64_t seed = 0;
	EvaluationResult test;
	double train_fitness = 0.0;
	bool architectures_constant = true;
	double initial_best_fitness = 0.0;
};

struct AblationSummary {
	std::vector<AblationRow> rows;
	/// Median test metrics per mode, in Full, FixedArch, FixedAll order.
	std::array<EvaluationResult, 3> medians{};
};

AblationSummary run_ablation(const RunConfig &config, const PreparedData &data);
AblationSummary cmd_ablate(const RunConfig &config);
std::string render_ablation_table(const AblationSummary &summary);

/// Writes plot/actual_vs_predicted_pi<PI>.csv (and .svg) next to the given
/// report or forecast file, or into `out_dir` when provided. Returns the CSV path.
std::filesystem::path cmd_plot_data(const std::filesystem::path &source,
                                    const std::optional<std::filesystem::path> &out_dir = std::nullopt,
                                    bool write_svg = true);

std::string render_svg(const std::vector<double> &actual, const std::vector<double> &predicted,
                       const std::string &title);

double median(std::vector<double> values);

/// 0.5 + 0.4 sin(2 pi t / period) + Normal(0, noise_sd), one value per step.
AggregatedSeries synthetic_sine_series(std::size_t points, std::uint64_t seed, double noise_sd = 0.05,
                                       double period = 48.0, int interval_minutes = 5);

/// CSV trace ("timestamp,value", seconds) of a series sampled once per interval.
/// Negative values are clamped to zero since usage cannot be negative.
std::string render_trace_csv(const AggregatedSeries &series);

} // namespace qevo
