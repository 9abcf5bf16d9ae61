#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qevo/dataset.hpp"
#include "qevo/error.hpp"
#include "qevo/evolve.hpp"
#include "qevo/metrics.hpp"
#include "qevo/pipeline.hpp"
#include "qevo/qnn.hpp"
#include "qevo/serialize.hpp"
#include "qevo/trace_io.hpp"

namespace py = pybind11;
using namespace qevo;

namespace {

RunConfig run_config(const py::dict &settings) {
	RunConfig c;
	for (const auto &[k, v] : settings) {
		apply_setting(c, py::str(k), py::str(v));
	}
	return c;
}

py::dict report_dict(const TrainingReport &r) {
	py::dict d;
	d["best_fitness"] = r.best_fitness_trajectory();
	std::vector<std::array<double, kStrategyCount>> probs;
	for (const auto &g : r.generations) {
		probs.push_back(g.probabilities);
	}
	d["probabilities"] = probs;
	d["success_totals"] = r.success_totals;
	d["failure_totals"] = r.failure_totals;
	d["final_probabilities"] = r.final_probabilities;
	d["degenerate_args"] = r.degenerate_args;
	return d;
}

py::dict metrics_dict(const EvaluationResult &r) {
	py::dict d;
	d["rmse"] = r.rmse;
	d["mae"] = r.mae;
	d["mape"] = r.mape;
	d["count"] = r.count;
	return d;
}

} // namespace

PYBIND11_MODULE(_qevo, m) {
	m.doc() = "Qubit-neuron network evolution for workload forecasting";

	static PyObject *error_type = py::exception<Error>(m, "QevoError").release().ptr();
	py::register_exception_translator([](std::exception_ptr p) {
		try {
			if (p) {
				std::rethrow_exception(p);
			}
		} catch (const Error &e) {
			py::object exc = py::handle(error_type)(std::string(to_string(e.code())) + ": " + e.what());
			exc.attr("code") = to_string(e.code());
			PyErr_SetObject(error_type, exc.ptr());
		}
	});

	py::class_<Architecture>(m, "Architecture")
	    .def(py::init([](std::size_t input_width, std::vector<std::size_t> hidden) {
		         Architecture a;
		         a.input_width = input_width;
		         a.hidden_widths = std::move(hidden);
		         a.validate();
		         return a;
	         }),
	         py::arg("input_width"), py::arg("hidden_widths"))
	    .def_readonly("input_width", &Architecture::input_width)
	    .def_readonly("hidden_widths", &Architecture::hidden_widths)
	    .def_readonly("output_width", &Architecture::output_width)
	    .def("genome_length", [](const Architecture &a) { return layout(a).total; })
	    .def("__eq__", [](const Architecture &a, const Architecture &b) { return a == b; })
	    .def("__repr__", [](const Architecture &a) {
		    std::string s = "Architecture(" + std::to_string(a.input_width) + ", [";
		    for (std::size_t i = 0; i < a.hidden_widths.size(); ++i) {
			    s += (i ? ", " : "") + std::to_string(a.hidden_widths[i]);
		    }
		    return s + "])";
	    });

	py::class_<NetworkGenome>(m, "Genome")
	    .def(py::init<Architecture, std::vector<double>>(), py::arg("architecture"), py::arg("phases"))
	    .def_property_readonly("architecture", &NetworkGenome::architecture)
	    .def_property_readonly("phases",
	                           [](const NetworkGenome &g) { return std::vector<double>(g.phases().begin(), g.phases().end()); })
	    .def("__len__", &NetworkGenome::size)
	    .def("__eq__", [](const NetworkGenome &a, const NetworkGenome &b) { return a == b; })
	    .def("predict", [](const NetworkGenome &g, const std::vector<double> &row) { return forward(g, row); },
	         py::arg("row"))
	    .def("predict_many",
	         [](const NetworkGenome &g, const std::vector<std::vector<double>> &rows) {
		         const CompiledNetwork net(g);
		         std::vector<double> out;
		         out.reserve(rows.size());
		         for (const auto &r : rows) {
			         out.push_back(net.predict(r));
		         }
		         return out;
	         },
	         py::arg("rows"))
	    .def("save", [](const NetworkGenome &g, const std::filesystem::path &p) { save_genome(g, p); }, py::arg("path"))
	    .def_static("load", &load_genome, py::arg("path"))
	    .def_static("random", [](const Architecture &a, std::uint64_t seed) {
		    std::mt19937_64 rng(seed);
		    return random_genome(a, rng);
	    }, py::arg("architecture"), py::arg("seed"));

	m.def(
	    "parse_trace",
	    [](const std::string &text, const std::string &timestamp_col, const std::string &value_col, bool has_header,
	       double timestamp_scale) {
		    ColumnMapping map;
		    map.timestamp_col = timestamp_col;
		    map.value_col = value_col;
		    map.has_header = has_header;
		    map.timestamp_scale = timestamp_scale;
		    std::vector<std::pair<double, double>> out;
		    for (const auto &s : parse_trace_text(text, map).samples) {
			    out.emplace_back(s.timestamp, s.value);
		    }
		    return out;
	    },
	    py::arg("text"), py::arg("timestamp_col") = "0", py::arg("value_col") = "1", py::arg("has_header") = true,
	    py::arg("timestamp_scale") = 1.0, "Parse CSV text into sorted (timestamp seconds, value) pairs.");

	m.def(
	    "aggregate",
	    [](const std::vector<std::pair<double, double>> &samples, int interval_minutes) {
		    RawTrace t;
		    for (const auto &[ts, v] : samples) {
			    t.samples.push_back({ts, v});
		    }
		    return aggregate(t, interval_minutes).values;
	    },
	    py::arg("samples"), py::arg("interval_minutes"));

	m.def(
	    "fit_normalizer",
	    [](const std::vector<double> &series) {
		    const auto p = fit_normalizer(series);
		    return std::make_pair(p.d_min, p.d_max);
	    },
	    py::arg("series"));
	m.def(
	    "normalize", [](double v, double lo, double hi) { return normalize(v, {lo, hi}); }, py::arg("value"),
	    py::arg("d_min"), py::arg("d_max"));
	m.def(
	    "denormalize", [](double v, double lo, double hi) { return denormalize(v, {lo, hi}); }, py::arg("value"),
	    py::arg("d_min"), py::arg("d_max"));
	m.def(
	    "build_windows",
	    [](const std::vector<double> &series, std::size_t n) {
		    const auto d = build_windows(series, n);
		    std::vector<std::vector<double>> rows;
		    for (std::size_t i = 0; i < d.rows(); ++i) {
			    rows.emplace_back(d.row(i).begin(), d.row(i).end());
		    }
		    return std::make_pair(rows, std::vector<double>(d.targets().begin(), d.targets().end()));
	    },
	    py::arg("series"), py::arg("window"), "Return (inputs, targets) for one-step-ahead windows.");

	m.def("rmse", [](const std::vector<double> &a, const std::vector<double> &p) { return rmse(a, p); });
	m.def("mae", [](const std::vector<double> &a, const std::vector<double> &p) { return mae(a, p); });
	m.def(
	    "mape", [](const std::vector<double> &a, const std::vector<double> &p, double eps) { return mape(a, p, eps); },
	    py::arg("actual"), py::arg("predicted"), py::arg("epsilon") = kMapeEpsilon);

	m.def(
	    "update_probabilities",
	    [](std::array<std::uint64_t, 3> successes, std::array<std::uint64_t, 3> failures) {
		    StrategyState s;
		    s.successes = successes;
		    s.failures = failures;
		    return update_probabilities(s).probabilities;
	    },
	    py::arg("successes"), py::arg("failures"));
	m.def(
	    "select_strategy",
	    [](double mss, std::array<double, 3> probabilities) {
		    StrategyState s;
		    s.probabilities = probabilities;
		    return std::string(to_string(select_strategy(mss, s)));
	    },
	    py::arg("mss"), py::arg("probabilities"));

	m.def("synthetic_series", [](std::size_t points, std::uint64_t seed, double noise, double period) {
		return synthetic_sine_series(points, seed, noise, period).values;
	}, py::arg("points"), py::arg("seed"), py::arg("noise") = 0.05, py::arg("period") = 48.0);

	m.def(
	    "train",
	    [](const std::vector<double> &series, const py::dict &settings, double train_fraction) {
		    const auto config = run_config(settings);
		    AggregatedSeries s;
		    s.values = series;
		    const auto data = prepare(s, config.training.window_size, train_fraction);
		    TrainOutcome out;
		    {
			    py::gil_scoped_release release;
			    out = fit_and_evaluate(config, data);
		    }
		    py::dict d;
		    d["genome"] = out.training.best;
		    d["best_fitness"] = out.training.best_fitness;
		    d["normalization"] = std::make_pair(data.norm.d_min, data.norm.d_max);
		    d["report"] = report_dict(out.training.report);
		    d["train"] = metrics_dict(out.train.metrics);
		    d["test"] = metrics_dict(out.test.metrics);
		    d["test_predicted"] = out.test.predicted;
		    return d;
	    },
	    py::arg("series"), py::arg("settings") = py::dict(), py::arg("train_fraction") = 0.6,
	    "Train on an in-memory series. `settings` takes the config-file keys.");

	m.def(
	    "train_files",
	    [](const py::dict &settings) {
		    const auto config = run_config(settings);
		    TrainOutcome out;
		    {
			    py::gil_scoped_release release;
			    out = cmd_train(config);
		    }
		    py::dict d;
		    d["best_fitness"] = out.training.best_fitness;
		    d["train"] = metrics_dict(out.train.metrics);
		    d["test"] = metrics_dict(out.test.metrics);
		    return d;
	    },
	    py::arg("settings"), "Same as `qevo train`: writes report, genome, forecast and plot files.");

	m.def(
	    "predict_files",
	    [](const std::filesystem::path &genome, const std::filesystem::path &input,
	       const std::optional<std::filesystem::path> &report, const std::filesystem::path &output) {
		    PredictOptions o;
		    o.genome = genome;
		    o.input = input;
		    o.report = report;
		    o.output = output;
		    std::vector<std::pair<std::size_t, double>> out;
		    for (const auto &r : cmd_predict(o)) {
			    out.emplace_back(r.index, r.predicted);
		    }
		    return out;
	    },
	    py::arg("genome"), py::arg("input"), py::arg("report") = py::none(), py::arg("output") = "forecast.csv",
	    "Same as `qevo predict`; returns (index, denormalized prediction) pairs.");
}
