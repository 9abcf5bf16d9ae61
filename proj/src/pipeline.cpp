#include "qevo/pipeline.hpp"

#include "qevo/error.hpp"
#include "qevo/serialize.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace qevo {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string &s) {
	const auto b = s.find_first_not_of(" \t\r\n");
	if (b == std::string::npos) {
		return {};
	}
	const auto e = s.find_last_not_of(" \t\r\n");
	return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

std::size_t to_size(const std::string &key, const std::string &value) {
	try {
		std::size_t pos = 0;
		const long long v = std::stoll(value, &pos);
		if (pos != value.size() || v < 0) {
			throw std::invalid_argument(value);
		}
		return static_cast<std::size_t>(v);
	} catch (const std::exception &) {
		throw Error(ErrorCode::InvalidConfig, "'" + key + "' expects a non-negative integer, got '" + value + "'");
	}
}

double to_double(const std::string &key, const std::string &value) {
	try {
		std::size_t pos = 0;
		const double v = std::stod(value, &pos);
		if (pos != value.size() || !std::isfinite(v)) {
			throw std::invalid_argument(value);
		}
		return v;
	} catch (const std::exception &) {
		throw Error(ErrorCode::InvalidConfig, "'" + key + "' expects a number, got '" + value + "'");
	}
}

bool to_bool(const std::string &key, const std::string &value) {
	if (value == "1" || value == "true" || value == "yes") {
		return true;
	}
	if (value == "0" || value == "false" || value == "no") {
		return false;
	}
	throw Error(ErrorCode::InvalidConfig, "'" + key + "' expects true/false, got '" + value + "'");
}

std::string read_text(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
	}
	std::ostringstream buf;
	buf << in.rdbuf();
	return buf.str();
}

void write_text(const std::filesystem::path &path, const std::string &text) {
	if (path.has_parent_path()) {
		std::filesystem::create_directories(path.parent_path());
	}
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out) {
		throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
	}
	out << text;
}

ordered_json metrics_json(const EvaluationResult &r, const std::vector<std::string> &selected) {
	ordered_json j = ordered_json::object();
	for (const auto &m : selected) {
		if (m == "rmse") {
			j["rmse"] = r.rmse;
		} else if (m == "mae") {
			j["mae"] = r.mae;
		} else if (m == "mape") {
			j["mape"] = r.mape;
		}
	}
	j["count"] = r.count;
	return j;
}

SplitFit fit_split(const NetworkGenome &genome, const WindowedDataset &data) {
	SplitFit out;
	out.predicted = CompiledNetwork(genome).predict_all(data);
	out.metrics = evaluate(data.targets(), out.predicted);
	return out;
}

ordered_json config_json(const RunConfig &c) {
	const auto &t = c.training;
	return {{"input", c.input.filename().string()},
	        {"timestamp_col", c.mapping.timestamp_col},
	        {"value_col", c.mapping.value_col},
	        {"pi_minutes", c.pi_minutes},
	        {"train_fraction", c.train_fraction},
	        {"window", t.window_size},
	        {"population", t.population_size},
	        {"generations", t.generations},
	        {"hidden_width_range", {t.min_hidden_width, t.max_hidden_width}},
	        {"depth_range", {t.min_depth, t.max_depth}},
	        {"rate_mean", t.rate_mean},
	        {"rate_stddev", t.rate_stddev},
	        {"initial_probabilities", t.initial_probabilities},
	        {"seed", t.seed},
	        {"ablate_mode", to_string(t.mode)}};
}

} // namespace

void RunConfig::validate() const {
	training.validate();
	if (pi_minutes < 1) {
		throw Error(ErrorCode::InvalidConfig, "prediction interval must be at least one minute");
	}
	if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
		throw Error(ErrorCode::InvalidConfig, "train fraction must lie in (0,1)");
	}
	for (const auto &m : metrics) {
		if (m != "rmse" && m != "mae" && m != "mape") {
			throw Error(ErrorCode::InvalidConfig, "unknown metric '" + m + "'");
		}
	}
}

void apply_setting(RunConfig &c, const std::string &raw_key, const std::string &raw_value) {
	std::string key = trim(raw_key);
	std::replace(key.begin(), key.end(), '-', '_');
	const std::string value = trim(raw_value);
	auto &t = c.training;
	if (key == "input") {
		c.input = value;
	} else if (key == "timestamp_col") {
		c.mapping.timestamp_col = value;
	} else if (key == "value_col") {
		c.mapping.value_col = value;
	} else if (key == "delimiter") {
		if (value.size() != 1 && value != "\\t" && value != "tab") {
			throw Error(ErrorCode::InvalidConfig, "delimiter must be a single character");
		}
		c.mapping.delimiter = value.size() == 1 ? value[0] : '\t';
	} else if (key == "has_header") {
		c.mapping.has_header = to_bool(key, value);
	} else if (key == "timestamp_scale") {
		c.mapping.timestamp_scale = to_double(key, value);
	} else if (key == "machine_id") {
		c.mapping.machine_id = value;
	} else if (key == "resource") {
		if (value == "cpu" || value == "CPU") {
			c.mapping.resource = Resource::Cpu;
		} else if (value == "memory" || value == "Memory") {
			c.mapping.resource = Resource::Memory;
		} else {
			throw Error(ErrorCode::InvalidConfig, "resource must be cpu or memory");
		}
	} else if (key == "pi_minutes") {
		c.pi_minutes = static_cast<int>(to_size(key, value));
	} else if (key == "train_frac" || key == "train_fraction") {
		c.train_fraction = to_double(key, value);
	} else if (key == "out_dir") {
		c.out_dir = value;
	} else if (key == "window") {
		t.window_size = to_size(key, value);
	} else if (key == "population") {
		t.population_size = to_size(key, value);
	} else if (key == "generations") {
		t.generations = to_size(key, value);
	} else if (key == "min_width") {
		t.min_hidden_width = to_size(key, value);
	} else if (key == "max_width") {
		t.max_hidden_width = to_size(key, value);
	} else if (key == "min_depth") {
		t.min_depth = to_size(key, value);
	} else if (key == "max_depth") {
		t.max_depth = to_size(key, value);
	} else if (key == "rate_mean") {
		t.rate_mean = to_double(key, value);
	} else if (key == "rate_stddev") {
		t.rate_stddev = to_double(key, value);
	} else if (key == "seed") {
		t.seed = to_size(key, value);
	} else if (key == "ablate_mode") {
		t.mode = parse_ablation_mode(value);
	} else if (key == "patience") {
		t.stagnation_patience = to_size(key, value);
	} else if (key == "threads") {
		t.threads = std::max<std::size_t>(1, to_size(key, value));
	} else if (key == "metrics") {
		c.metrics.clear();
		std::istringstream in(value);
		for (std::string m; std::getline(in, m, ',');) {
			if (!trim(m).empty()) {
				c.metrics.push_back(trim(m));
			}
		}
	} else if (key == "ablation_seeds") {
		c.ablation_seeds = to_size(key, value);
	} else if (key == "checkpoint") {
		c.checkpoint = to_bool(key, value);
	} else if (key == "svg") {
		c.write_svg = to_bool(key, value);
	} else {
		throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
	}
}

std::map<std::string, std::string> parse_key_values(const std::string &text) {
	std::map<std::string, std::string> out;
	std::istringstream in(text);
	std::size_t line_no = 0;
	for (std::string line; std::getline(in, line);) {
		++line_no;
		if (const auto hash = line.find('#'); hash != std::string::npos) {
			line.erase(hash);
		}
		if (trim(line).empty()) {
			continue;
		}
		const auto eq = line.find('=');
		if (eq == std::string::npos) {
			throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line_no) + " has no '='");
		}
		out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
	}
	return out;
}

RunConfig load_run_config(const std::filesystem::path &path, RunConfig base) {
	for (const auto &[k, v] : parse_key_values(read_text(path))) {
		apply_setting(base, k, v);
	}
	return base;
}

PreparedData prepare(const AggregatedSeries &series, std::size_t window_size, double train_fraction) {
	if (series.values.size() < window_size + 2) {
		throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(series.values.size()) +
		                                           " cannot form train and test windows of size " +
		                                           std::to_string(window_size));
	}
	PreparedData d;
	d.series = series;
	d.norm = fit_normalizer(series);
	d.normalized = normalize_all(series.values, d.norm);
	d.all = build_windows(d.normalized, window_size);
	std::tie(d.train, d.test) = split(d.all, train_fraction);
	return d;
}

PreparedData prepare(const RunConfig &config) {
	config.validate();
	const auto trace = parse_trace(config.input, config.mapping);
	return prepare(aggregate(trace, config.pi_minutes), config.training.window_size, config.train_fraction);
}

TrainOutcome fit_and_evaluate(const RunConfig &config, const PreparedData &data) {
	TrainOutcome out;
	out.training = train(config.training, data.train);
	out.convergence = convergence_monitor(out.training.report, config.training.stagnation_patience);
	out.train = fit_split(out.training.best, data.train);
	out.test = fit_split(out.training.best, data.test);
	return out;
}

std::string render_report(const RunConfig &config, const PreparedData &data, const TrainOutcome &outcome) {
	const auto &tr = outcome.training;
	ordered_json j;
	j["schema_version"] = kReportSchemaVersion;
	j["kind"] = "qevo-training-report";
	j["config"] = config_json(config);
	j["series_length"] = data.series.values.size();
	j["normalization"] = {{"d_min", data.norm.d_min}, {"d_max", data.norm.d_max}};
	j["rows"] = {{"train", data.train.rows()}, {"test", data.test.rows()}};
	const auto &arch = tr.best.architecture();
	j["best"] = {{"fitness", tr.best_fitness},
	             {"input_width", arch.input_width},
	             {"hidden_widths", arch.hidden_widths},
	             {"output_width", arch.output_width},
	             {"genome_length", tr.best.size()}};
	ordered_json gens = ordered_json::array();
	for (const auto &g : tr.report.generations) {
		gens.push_back({{"generation", g.generation},
		                {"best_fitness", g.best_fitness},
		                {"probabilities", g.probabilities},
		                {"successes", g.successes},
		                {"failures", g.failures},
		                {"best_hidden_widths", g.best_hidden_widths}});
	}
	j["generations"] = std::move(gens);
	j["strategies"] = {{"names", {"QARM", "QACO", "QAOM"}},
	                   {"final_probabilities", tr.report.final_probabilities},
	                   {"success_totals", tr.report.success_totals},
	                   {"failure_totals", tr.report.failure_totals}};
	j["degenerate_args"] = tr.report.degenerate_args;
	j["convergence"] = {{"monotone", true},
	                    {"total_descent", outcome.convergence.total_descent},
	                    {"improvements", outcome.convergence.improvements},
	                    {"trailing_flat_steps", outcome.convergence.trailing_flat_steps},
	                    {"stagnated", outcome.convergence.stagnated}};
	j["metrics"] = {{"scale", "normalized"},
	                {"train", metrics_json(outcome.train.metrics, config.metrics)},
	                {"test", metrics_json(outcome.test.metrics, config.metrics)}};
	auto targets = [](const WindowedDataset &d) { return std::vector<double>(d.targets().begin(), d.targets().end()); };
	j["fits"] = {{"first_target_index", data.all.window_size()},
	             {"train", {{"actual", targets(data.train)}, {"predicted", outcome.train.predicted}}},
	             {"test", {{"actual", targets(data.test)}, {"predicted", outcome.test.predicted}}}};
	return j.dump(1, '\t') + "\n";
}

std::string render_forecast_csv(const std::vector<ForecastRow> &rows, int pi_minutes) {
	std::ostringstream out;
	out << "# qevo-forecast schema_version=" << kForecastSchemaVersion << " pi_minutes=" << pi_minutes << '\n';
	out << "index,split,actual,predicted,actual_normalized,predicted_normalized\n";
	for (const auto &r : rows) {
		out << r.index << ',' << r.split << ',' << (r.actual ? fmt_double(*r.actual) : "") << ','
		    << fmt_double(r.predicted) << ',' << (r.actual_normalized ? fmt_double(*r.actual_normalized) : "")
		    << ',' << fmt_double(r.predicted_normalized) << '\n';
	}
	return out.str();
}

std::vector<ForecastRow> parse_forecast_csv(const std::string &text, int *pi_minutes) {
	std::istringstream in(text);
	std::string line;
	if (!std::getline(in, line) || line.rfind("# qevo-forecast", 0) != 0) {
		throw Error(ErrorCode::MalformedReport, "forecast file lacks its schema line");
	}
	if (pi_minutes != nullptr) {
		const auto at = line.find("pi_minutes=");
		*pi_minutes = at == std::string::npos ? 0 : std::atoi(line.c_str() + at + 11);
	}
	if (!std::getline(in, line) || line.rfind("index,", 0) != 0) {
		throw Error(ErrorCode::MalformedReport, "forecast file lacks its column header");
	}
	std::vector<ForecastRow> rows;
	while (std::getline(in, line)) {
		if (trim(line).empty()) {
			continue;
		}
		std::vector<std::string> f;
		std::istringstream ls(line);
		for (std::string cell; std::getline(ls, cell, ',');) {
			f.push_back(cell);
		}
		if (!line.empty() && line.back() == ',') {
			f.emplace_back();
		}
		if (f.size() != 6) {
			throw Error(ErrorCode::MalformedReport, "forecast row has " + std::to_string(f.size()) + " fields");
		}
		try {
			ForecastRow r;
			r.index = static_cast<std::size_t>(std::stoull(f[0]));
			r.split = f[1];
			if (!f[2].empty()) {
				r.actual = std::stod(f[2]);
			}
			r.predicted = std::stod(f[3]);
			if (!f[4].empty()) {
				r.actual_normalized = std::stod(f[4]);
			}
			r.predicted_normalized = std::stod(f[5]);
			rows.push_back(std::move(r));
		} catch (const std::exception &) {
			throw Error(ErrorCode::MalformedReport, "unparsable forecast row: " + line);
		}
	}
	return rows;
}

std::vector<ForecastRow> predict_series(const NetworkGenome &genome, const AggregatedSeries &series,
                                        const NormalizationParams &norm) {
	const std::size_t n = genome.architecture().input_width;
	if (series.values.size() < n + 1) {
		throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(series.values.size()) +
		                                           " is too short for window " + std::to_string(n));
	}
	const auto normalized = normalize_all(series.values, norm);
	const CompiledNetwork net(genome);
	std::vector<ForecastRow> rows;
	for (std::size_t start = 0; start + n <= normalized.size(); ++start) {
		const std::span<const double> window(normalized.data() + start, n);
		ForecastRow r;
		r.index = start + n;
		r.predicted_normalized = net.predict(window);
		r.predicted = denormalize(r.predicted_normalized, norm);
		if (r.index < normalized.size()) {
			r.actual = series.values[r.index];
			r.actual_normalized = normalized[r.index];
			r.split = "observed";
		} else {
			r.split = "forecast";
		}
		rows.push_back(std::move(r));
	}
	return rows;
}

TrainOutcome cmd_train(const RunConfig &config) {
	const auto data = prepare(config);
	std::filesystem::create_directories(config.out_dir);

	TrainOutcome out;
	if (config.checkpoint) {
		Trainer trainer(config.training, rmse_fitness(data.train));
		const auto cp_path = config.out_dir / "checkpoint.json";
		while (!trainer.done()) {
			trainer.step();
			save_checkpoint(trainer.checkpoint(), cp_path);
		}
		out.training = trainer.result();
		out.convergence = convergence_monitor(out.training.report, config.training.stagnation_patience);
		out.train = fit_split(out.training.best, data.train);
		out.test = fit_split(out.training.best, data.test);
	} else {
		out = fit_and_evaluate(config, data);
	}

	write_text(config.out_dir / "report.json", render_report(config, data, out));
	save_genome(out.training.best, config.out_dir / "genome.bin");

	std::vector<ForecastRow> rows;
	const std::size_t n = data.all.window_size();
	auto emit = [&](const WindowedDataset &part, const SplitFit &fit, std::size_t first_row, const char *split) {
		for (std::size_t i = 0; i < part.rows(); ++i) {
			ForecastRow r;
			r.index = first_row + i + n;
			r.split = split;
			r.actual = data.series.values[r.index];
			r.actual_normalized = part.target(i);
			r.predicted_normalized = fit.predicted[i];
			r.predicted = denormalize(fit.predicted[i], data.norm);
			rows.push_back(std::move(r));
		}
	};
	emit(data.train, out.train, 0, "train");
	emit(data.test, out.test, data.train.rows(), "test");
	const auto forecast_path = config.out_dir / "forecast.csv";
	write_text(forecast_path, render_forecast_csv(rows, config.pi_minutes));
	cmd_plot_data(forecast_path, config.out_dir / "plot", config.write_svg);
	return out;
}

std::vector<ForecastRow> cmd_predict(const PredictOptions &options) {
	const auto genome = load_genome(options.genome);
	const std::size_t n = genome.architecture().input_width;
	if (options.window && *options.window != n) {
		throw Error(ErrorCode::Incompatible, "genome expects window " + std::to_string(n) + ", configuration says " +
		                                         std::to_string(*options.window));
	}
	int pi = options.pi_minutes;
	std::optional<NormalizationParams> norm;
	if (options.report) {
		try {
			const auto j = nlohmann::json::parse(read_text(*options.report));
			norm = NormalizationParams{j.at("normalization").at("d_min").get<double>(),
			                           j.at("normalization").at("d_max").get<double>()};
			pi = j.at("config").at("pi_minutes").get<int>();
			if (j.at("config").at("window").get<std::size_t>() != n) {
				throw Error(ErrorCode::Incompatible, "report window differs from the genome's input width");
			}
		} catch (const nlohmann::json::exception &e) {
			throw Error(ErrorCode::MalformedReport, std::string("cannot read report: ") + e.what());
		}
	}
	const auto series = aggregate(parse_trace(options.input, options.mapping), pi);
	if (!norm) {
		norm = fit_normalizer(series);
	}
	auto rows = predict_series(genome, series, *norm);
	write_text(options.output, render_forecast_csv(rows, pi));
	return rows;
}

double median(std::vector<double> values) {
	if (values.empty()) {
		throw Error(ErrorCode::EmptyInput, "median of nothing");
	}
	std::sort(values.begin(), values.end());
	const auto mid = values.size() / 2;
	return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

AblationSummary run_ablation(const RunConfig &config, const PreparedData &data) {
	AblationSummary summary;
	const std::array<AblationMode, 3> modes{AblationMode::Full, AblationMode::FixedArch, AblationMode::FixedAll};
	for (std::size_t m = 0; m < modes.size(); ++m) {
		std::vector<double> rmses, maes, mapes;
		for (std::size_t s = 0; s < config.ablation_seeds; ++s) {
			TrainingConfig tc = config.training;
			tc.mode = modes[m];
			tc.seed = config.training.seed + s;
			Trainer trainer(tc, rmse_fitness(data.train));
			AblationRow row;
			row.mode = modes[m];
			row.seed = tc.seed;
			row.initial_best_fitness = trainer.population().best_fitness();
			const auto first_arch = trainer.population().candidates.front().architecture();
			auto shared_arch = [&] {
				const auto &c = trainer.population().candidates;
				return std::all_of(c.begin(), c.end(),
				                   [&](const NetworkGenome &g) { return g.architecture() == first_arch; });
			};
			row.architectures_constant = shared_arch();
			while (!trainer.done()) {
				trainer.step();
				row.architectures_constant = row.architectures_constant && shared_arch();
			}
			const auto result = trainer.result();
			convergence_monitor(result.report, tc.stagnation_patience);
			row.train_fitness = result.best_fitness;
			row.test = fit_split(result.best, data.test).metrics;
			rmses.push_back(row.test.rmse);
			maes.push_back(row.test.mae);
			mapes.push_back(row.test.mape);
			summary.rows.push_back(row);
		}
		if (!rmses.empty()) {
			summary.medians[m] = {median(rmses), median(maes), median(mapes), data.test.rows()};
		}
	}
	return summary;
}

std::string render_ablation_table(const AblationSummary &summary) {
	std::ostringstream out;
	out << "# qevo-ablation schema_version=" << kReportSchemaVersion << '\n';
	out << "structure,parameters,mode,seed,mae,rmse,mape\n";
	auto labels = [](AblationMode m) -> std::pair<const char *, const char *> {
		switch (m) {
		case AblationMode::Full: return {"varied", "varied"};
		case AblationMode::FixedArch: return {"fixed", "varied"};
		case AblationMode::FixedAll: return {"fixed", "fixed"};
		}
		return {"?", "?"};
	};
	for (const auto &r : summary.rows) {
		const auto [structure, params] = labels(r.mode);
		out << structure << ',' << params << ',' << to_string(r.mode) << ',' << r.seed << ',' << fmt_double(r.test.mae)
		    << ',' << fmt_double(r.test.rmse) << ',' << fmt_double(r.test.mape) << '\n';
	}
	const std::array<AblationMode, 3> modes{AblationMode::Full, AblationMode::FixedArch, AblationMode::FixedAll};
	for (std::size_t m = 0; m < 3; ++m) {
		const auto [structure, params] = labels(modes[m]);
		const auto &med = summary.medians[m];
		out << structure << ',' << params << ',' << to_string(modes[m]) << ",median," << fmt_double(med.mae) << ','
		    << fmt_double(med.rmse) << ',' << fmt_double(med.mape) << '\n';
	}
	return out.str();
}

AblationSummary cmd_ablate(const RunConfig &config) {
	const auto data = prepare(config);
	auto summary = run_ablation(config, data);
	std::filesystem::create_directories(config.out_dir);
	write_text(config.out_dir / "ablation.csv", render_ablation_table(summary));
	return summary;
}

std::string render_svg(const std::vector<double> &actual, const std::vector<double> &predicted,
                       const std::string &title) {
	constexpr double width = 800.0;
	constexpr double height = 300.0;
	constexpr double margin = 30.0;
	double lo = std::numeric_limits<double>::infinity();
	double hi = -lo;
	for (const auto *series : {&actual, &predicted}) {
		for (double v : *series) {
			lo = std::min(lo, v);
			hi = std::max(hi, v);
		}
	}
	if (!(hi > lo)) {
		hi = lo + 1.0;
	}
	const std::size_t count = std::max(actual.size(), predicted.size());
	auto polyline = [&](const std::vector<double> &ys, const char *colour) {
		std::ostringstream pts;
		for (std::size_t i = 0; i < ys.size(); ++i) {
			const double x = margin + (count > 1 ? (width - 2 * margin) * static_cast<double>(i) /
			                                           static_cast<double>(count - 1)
			                                     : 0.0);
			const double y = height - margin - (height - 2 * margin) * (ys[i] - lo) / (hi - lo);
			char buf[64];
			std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
			pts << buf;
		}
		return "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1\" points=\"" +
		       trim(pts.str()) + "\"/>\n";
	};
	std::string escaped;
	for (char ch : title) {
		switch (ch) {
		case '<': escaped += "&lt;"; break;
		case '>': escaped += "&gt;"; break;
		case '&': escaped += "&amp;"; break;
		default: escaped += ch;
		}
	}
	std::ostringstream out;
	out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
	out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
	out << "<title>" << escaped << "</title>\n";
	out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
	out << polyline(actual, "black");
	out << polyline(predicted, "red");
	out << "</svg>\n";
	return out.str();
}

std::filesystem::path cmd_plot_data(const std::filesystem::path &source,
                                    const std::optional<std::filesystem::path> &out_dir, bool write_svg) {
	const auto text = read_text(source);
	std::vector<double> actual;
	std::vector<double> predicted;
	int pi = 0;
	if (text.rfind("# qevo-forecast", 0) == 0) {
		for (const auto &r : parse_forecast_csv(text, &pi)) {
			if (r.actual) {
				actual.push_back(*r.actual);
				predicted.push_back(r.predicted);
			}
		}
	} else {
		try {
			const auto j = nlohmann::json::parse(text);
			if (j.at("kind").get<std::string>() != "qevo-training-report") {
				throw Error(ErrorCode::MalformedReport, "not a training report");
			}
			pi = j.at("config").at("pi_minutes").get<int>();
			const double d_min = j.at("normalization").at("d_min").get<double>();
			const double d_max = j.at("normalization").at("d_max").get<double>();
			const NormalizationParams norm{d_min, d_max};
			const auto &fits = j.at("fits");
			for (const char *part : {"train", "test"}) {
				const auto &pred = fits.at(part).at("predicted");
				const auto &act = fits.at(part).at("actual");
				if (pred.size() != act.size()) {
					throw Error(ErrorCode::MalformedReport, "report fit columns differ in length");
				}
				for (std::size_t i = 0; i < pred.size(); ++i) {
					actual.push_back(denormalize(act[i].get<double>(), norm));
					predicted.push_back(denormalize(pred[i].get<double>(), norm));
				}
			}
		} catch (const nlohmann::json::exception &e) {
			throw Error(ErrorCode::MalformedReport, std::string("cannot read report: ") + e.what());
		}
	}
	if (predicted.empty()) {
		throw Error(ErrorCode::MalformedReport, "no rows to plot in " + source.string());
	}
	const auto dir = out_dir ? *out_dir : source.parent_path() / "plot";
	std::filesystem::create_directories(dir);
	const auto stem = "actual_vs_predicted_pi" + std::to_string(pi);
	std::ostringstream csv;
	csv << "actual,predicted\n";
	for (std::size_t i = 0; i < predicted.size(); ++i) {
		csv << fmt_double(actual[i]) << ',' << fmt_double(predicted[i]) << '\n';
	}
	const auto csv_path = dir / (stem + ".csv");
	write_text(csv_path, csv.str());
	if (write_svg) {
		write_text(dir / (stem + ".svg"),
		           render_svg(actual, predicted, "actual vs predicted, PI " + std::to_string(pi) + " min"));
	}
	return csv_path;
}

AggregatedSeries synthetic_sine_series(std::size_t points, std::uint64_t seed, double noise_sd, double period,
                                       int interval_minutes) {
	std::mt19937_64 rng(seed);
	std::normal_distribution<double> noise(0.0, noise_sd);
	const double two_pi = 4.0 * std::acos(0.0);
	AggregatedSeries s;
	s.interval_minutes = interval_minutes;
	s.values.reserve(points);
	for (std::size_t t = 0; t < points; ++t) {
		s.values.push_back(0.5 + 0.4 * std::sin(two_pi * static_cast<double>(t) / period) + noise(rng));
	}
	return s;
}

std::string render_trace_csv(const AggregatedSeries &series) {
	std::ostringstream out;
	out << "timestamp,value\n";
	for (std::size_t t = 0; t < series.values.size(); ++t) {
		out << t * 60 * static_cast<std::size_t>(series.interval_minutes) << ','
		    << fmt_double(std::max(0.0, series.values[t])) << '\n';
	}
	return out.str();
}

} // namespace qevo
