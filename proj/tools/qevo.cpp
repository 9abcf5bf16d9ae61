#include <CLI11.hpp>

#include "qevo/error.hpp"
#include "qevo/pipeline.hpp"
#include "qevo/serialize.hpp"

#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

int exit_code_for(qevo::ErrorCode code) {
	using qevo::ErrorCode;
	switch (code) {
	case ErrorCode::FileNotFound:
	case ErrorCode::MalformedRow:
	case ErrorCode::EmptyTrace:
	case ErrorCode::MalformedGenome:
	case ErrorCode::MalformedReport:
	case ErrorCode::MalformedCheckpoint:
	case ErrorCode::InvalidConfig:
		return kExitUsage;
	default:
		return kExitDomain;
	}
}

std::size_t thread_budget() {
	std::size_t n = std::max(1u, std::thread::hardware_concurrency());
	if (const char *env = std::getenv("QEVO_THREADS"); env != nullptr && *env != '\0') {
		char *end = nullptr;
		const auto cap = std::strtoull(env, &end, 10);
		if (end == env || *end != '\0') {
			throw qevo::Error(qevo::ErrorCode::InvalidConfig, std::string("QEVO_THREADS must be an integer, got '") +
			                                                      env + "'");
		}
		n = std::min<std::size_t>(n, std::max<unsigned long long>(cap, 1));
	}
	return n;
}

// Flags are stored as text and replayed through the config-file keys.
struct Overrides {
	std::deque<std::pair<std::string, std::optional<std::string>>> slots;

	void add(CLI::App *app, const std::string &flag, const std::string &key, const std::string &help) {
		slots.emplace_back(key, std::nullopt);
		auto &slot = slots.back().second;
		app->add_option_function<std::string>("--" + flag, [&slot](const std::string &v) { slot = v; }, help);
	}

	qevo::RunConfig build(const std::optional<std::string> &config_file) const {
		qevo::RunConfig c;
		if (config_file) {
			c = qevo::load_run_config(*config_file, c);
		}
		for (const auto &[key, value] : slots) {
			if (value) {
				qevo::apply_setting(c, key, *value);
			}
		}
		c.training.threads = thread_budget();
		return c;
	}
};

void add_mapping_flags(CLI::App *app, Overrides &o) {
	o.add(app, "timestamp-col", "timestamp_col", "Timestamp column name or index");
	o.add(app, "value-col", "value_col", "Value column name or index");
	o.add(app, "delimiter", "delimiter", "Field delimiter");
	o.add(app, "has-header", "has_header", "Whether the first line is a header");
	o.add(app, "timestamp-scale", "timestamp_scale", "Multiplier turning timestamps into seconds");
	o.add(app, "machine-id", "machine_id", "Machine identifier recorded with the trace");
	o.add(app, "resource", "resource", "cpu or memory");
}

void add_run_flags(CLI::App *app, Overrides &o) {
	o.add(app, "input", "input", "Trace CSV");
	o.add(app, "pi-minutes", "pi_minutes", "Prediction interval in minutes");
	o.add(app, "window", "window", "Input window size");
	o.add(app, "population", "population", "Population size");
	o.add(app, "generations", "generations", "Generations");
	o.add(app, "train-frac", "train_frac", "Training fraction");
	o.add(app, "seed", "seed", "Random seed");
	o.add(app, "ablate-mode", "ablate_mode", "full, fixed-arch or fixed-all");
	o.add(app, "out-dir", "out_dir", "Output directory");
	o.add(app, "min-width", "min_width", "Smallest hidden width");
	o.add(app, "max-width", "max_width", "Largest hidden width");
	o.add(app, "min-depth", "min_depth", "Fewest hidden layers");
	o.add(app, "max-depth", "max_depth", "Most hidden layers");
	o.add(app, "patience", "patience", "Generations without improvement before flagging stagnation");
	o.add(app, "metrics", "metrics", "Comma-separated subset of rmse,mae,mape");
	o.add(app, "checkpoint", "checkpoint", "Write checkpoint.json after every generation");
	o.add(app, "svg", "svg", "Write the SVG chart next to the plot CSV");
	add_mapping_flags(app, o);
}

int run_train(const qevo::RunConfig &c) {
	const auto out = qevo::cmd_train(c);
	std::printf("best_fitness %.10g\n", out.training.best_fitness);
	std::printf("hidden_widths");
	for (auto w : out.training.best.architecture().hidden_widths) {
		std::printf(" %zu", w);
	}
	std::printf("\ntrain rmse %.6g mae %.6g mape %.6g\n", out.train.metrics.rmse, out.train.metrics.mae,
	            out.train.metrics.mape);
	std::printf("test rmse %.6g mae %.6g mape %.6g\n", out.test.metrics.rmse, out.test.metrics.mae,
	            out.test.metrics.mape);
	std::printf("wrote %s\n", c.out_dir.string().c_str());
	return 0;
}

int run_ablate(const qevo::RunConfig &c) {
	const auto summary = qevo::cmd_ablate(c);
	std::cout << qevo::render_ablation_table(summary);
	return 0;
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"Evolving qubit-neuron networks for workload forecasting"};
	app.require_subcommand(1);

	std::optional<std::string> train_config;
	Overrides train_flags;
	auto *train = app.add_subcommand("train", "Train on a trace and write report, genome, forecast and plot data");
	train->add_option("--config", train_config, "Key-value config file; flags override it");
	add_run_flags(train, train_flags);

	std::optional<std::string> ablate_config;
	Overrides ablate_flags;
	auto *ablate = app.add_subcommand("ablate", "Compare full, fixed-arch and fixed-all training over several seeds");
	ablate->add_option("--config", ablate_config, "Key-value config file; flags override it");
	add_run_flags(ablate, ablate_flags);
	ablate_flags.add(ablate, "seeds", "ablation_seeds", "Number of consecutive seeds");

	qevo::PredictOptions predict_opts;
	std::string predict_genome;
	std::string predict_input;
	std::optional<std::string> predict_report;
	std::optional<std::size_t> predict_window;
	std::string predict_output = "forecast.csv";
	Overrides predict_mapping;
	auto *predict = app.add_subcommand("predict", "One-step forecasts from a saved genome");
	predict->add_option("--genome", predict_genome, "Genome file")->required();
	predict->add_option("--input", predict_input, "Trace CSV")->required();
	predict->add_option("--report", predict_report, "Training report supplying normalization and PI");
	predict->add_option("--window", predict_window, "Expected window size");
	predict->add_option("--pi-minutes", predict_opts.pi_minutes, "Prediction interval in minutes");
	predict->add_option("--output", predict_output, "Forecast CSV to write");
	add_mapping_flags(predict, predict_mapping);

	std::string plot_source;
	std::optional<std::string> plot_out;
	bool plot_no_svg = false;
	auto *plot = app.add_subcommand("plot-data", "Actual-vs-predicted CSV and SVG from a report or forecast");
	plot->add_option("source", plot_source, "report.json or forecast CSV")->required();
	plot->add_option("--out-dir", plot_out, "Directory for the plot files");
	plot->add_flag("--no-svg", plot_no_svg, "Skip the SVG chart");

	std::size_t synth_points = 2000;
	std::uint64_t synth_seed = 12345;
	double synth_noise = 0.05;
	double synth_period = 48.0;
	int synth_pi = 5;
	std::string synth_output = "synthetic.csv";
	auto *synth = app.add_subcommand("synth", "Write a noisy sine trace as CSV");
	synth->add_option("--points", synth_points, "Number of samples");
	synth->add_option("--seed", synth_seed, "Noise seed");
	synth->add_option("--noise", synth_noise, "Noise standard deviation");
	synth->add_option("--period", synth_period, "Period in samples");
	synth->add_option("--pi-minutes", synth_pi, "Minutes between samples");
	synth->add_option("--output", synth_output, "CSV to write");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int code = app.exit(e);
		return code == 0 ? 0 : kExitUsage;
	}

	try {
		if (train->parsed()) {
			return run_train(train_flags.build(train_config));
		}
		if (ablate->parsed()) {
			return run_ablate(ablate_flags.build(ablate_config));
		}
		if (predict->parsed()) {
			qevo::RunConfig mapping;
			for (const auto &[key, value] : predict_mapping.slots) {
				if (value) {
					qevo::apply_setting(mapping, key, *value);
				}
			}
			predict_opts.genome = predict_genome;
			predict_opts.input = predict_input;
			predict_opts.mapping = mapping.mapping;
			if (predict_report) {
				predict_opts.report = *predict_report;
			}
			predict_opts.window = predict_window;
			predict_opts.output = predict_output;
			const auto rows = qevo::cmd_predict(predict_opts);
			std::printf("wrote %zu rows to %s\n", rows.size(), predict_output.c_str());
			return 0;
		}
		if (plot->parsed()) {
			std::optional<std::filesystem::path> dir;
			if (plot_out) {
				dir = *plot_out;
			}
			const auto path = qevo::cmd_plot_data(plot_source, dir, !plot_no_svg);
			std::printf("wrote %s\n", path.string().c_str());
			return 0;
		}
		if (synth->parsed()) {
			const auto series = qevo::synthetic_sine_series(synth_points, synth_seed, synth_noise, synth_period, synth_pi);
			std::ofstream out(synth_output, std::ios::binary);
			if (!out) {
				throw qevo::Error(qevo::ErrorCode::FileNotFound, "cannot write " + synth_output);
			}
			out << qevo::render_trace_csv(series);
			std::printf("wrote %zu samples to %s\n", series.values.size(), synth_output.c_str());
			return 0;
		}
	} catch (const qevo::Error &e) {
		std::fprintf(stderr, "qevo: %s: %s\n", qevo::to_string(e.code()), e.what());
		return exit_code_for(e.code());
	} catch (const std::exception &e) {
		std::fprintf(stderr, "qevo: %s\n", e.what());
		return kExitDomain;
	}
	return kExitUsage;
}
