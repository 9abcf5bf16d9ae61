#include "qevo/testkit.hpp"

#include "qevo/error.hpp"
#include "qevo/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qevo::testkit {

namespace {

struct Pair {
	double re;
	double im;
};

Pair mul(Pair a, Pair b) {
	return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

Pair unit(double phase) {
	return {std::cos(phase), std::sin(phase)};
}

double squash(double x) {
	return 1.0 / (1.0 + std::exp(-x));
}

std::string describe(const Architecture &a) {
	std::ostringstream out;
	out << a.input_width << '-';
	for (auto w : a.hidden_widths) {
		out << w << '-';
	}
	out << a.output_width;
	return out.str();
}

} // namespace

std::size_t expected_genome_length(const Architecture &arch) {
	std::size_t total = 0;
	std::size_t prev = arch.input_width;
	for (auto w : arch.hidden_widths) {
		total += prev * w + 2 * w; // weights, biases, reversals
		prev = w;
	}
	return total + prev * arch.output_width + arch.output_width;
}

double oracle_forward(const NetworkGenome &genome, std::span<const double> row) {
	const auto &arch = genome.architecture();
	const auto phases = genome.phases();
	if (row.size() != arch.input_width) {
		throw Error(ErrorCode::DimensionMismatch, "oracle: row width mismatch");
	}
	const double half_pi = std::acos(0.0);

	std::vector<Pair> y;
	for (double d : row) {
		y.push_back(unit(half_pi * d));
	}

	std::size_t cursor = 0;
	auto run_layer = [&](std::size_t width, bool biased) {
		const std::size_t from = y.size();
		const std::size_t weights_at = cursor;
		const std::size_t bias_at = weights_at + from * width;
		const std::size_t rev_at = bias_at + (biased ? width : 0);
		std::vector<Pair> next;
		for (std::size_t j = 0; j < width; ++j) {
			Pair u{0.0, 0.0};
			for (std::size_t i = 0; i < from; ++i) {
				const Pair term = mul(unit(phases[weights_at + i * width + j]), y[i]);
				u.re += term.re;
				u.im += term.im;
			}
			if (biased) {
				const Pair b = unit(phases[bias_at + j]);
				u.re -= b.re;
				u.im -= b.im;
			}
			const double arg = (u.re == 0.0 && u.im == 0.0) ? 0.0 : std::atan2(u.im, u.re);
			next.push_back(unit(half_pi * squash(phases[rev_at + j]) - arg));
		}
		cursor = rev_at + width;
		y = std::move(next);
	};

	for (auto w : arch.hidden_widths) {
		run_layer(w, true);
	}
	run_layer(arch.output_width, false);
	if (cursor != phases.size()) {
		throw Error(ErrorCode::DimensionMismatch, "oracle: genome length disagrees with architecture");
	}
	return y[0].im * y[0].im;
}

Architecture random_architecture(std::mt19937_64 &rng, std::size_t input_width, std::size_t min_depth,
                                 std::size_t max_depth, std::size_t min_width, std::size_t max_width) {
	std::uniform_int_distribution<std::size_t> depth(min_depth, max_depth);
	std::uniform_int_distribution<std::size_t> width(min_width, max_width);
	Architecture a;
	a.input_width = input_width;
	a.hidden_widths.resize(depth(rng));
	for (auto &w : a.hidden_widths) {
		w = width(rng);
	}
	return a;
}

OracleReport check_forward_equivalence(std::size_t cases, std::mt19937_64 &rng, double tolerance,
                                       std::size_t input_width, std::size_t max_depth, std::size_t max_width) {
	OracleReport report;
	report.tolerance = tolerance;
	std::uniform_real_distribution<double> unit_interval(0.0, 1.0);
	for (std::size_t c = 0; c < cases; ++c) {
		const auto arch = random_architecture(rng, input_width, 1, max_depth, 1, max_width);
		const auto genome = random_genome(arch, rng);
		std::vector<double> row(input_width);
		for (auto &v : row) {
			v = unit_interval(rng);
		}
		const double dev = std::abs(forward(genome, row) - oracle_forward(genome, row));
		report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
		report.cases_run += 1;
		if (!(dev <= tolerance)) {
			report.failures.push_back("case " + std::to_string(c) + " arch " + describe(arch) +
			                          " deviation " + std::to_string(dev));
		}
	}
	return report;
}

OracleReport check_recombination_validity(std::size_t trials, std::mt19937_64 &rng) {
	OracleReport report;
	std::uniform_int_distribution<std::size_t> input(1, 10);
	for (std::size_t t = 0; t < trials; ++t) {
		const auto n = input(rng);
		const auto a1 = random_architecture(rng, n, 1, 4, 1, 10);
		const bool identical = t % 10 == 0;
		const auto a2 = identical ? a1 : random_architecture(rng, n, 1, 4, 1, 10);
		const auto p1 = random_genome(a1, rng);
		const auto p2 = identical ? p1 : random_genome(a2, rng);
		const auto [c1, c2] = recombine(p1, p2, rng);
		report.cases_run += 1;

		auto fail = [&](const std::string &why) {
			report.failures.push_back("trial " + std::to_string(t) + " parents " + describe(a1) + " x " +
			                          describe(a2) + ": " + why);
			report.max_abs_deviation = 1.0;
		};

		if (identical) {
			if (!(c1 == p1) || !(c2 == p2)) {
				fail("identical parents produced different children");
			}
			continue;
		}
		const std::array<const NetworkGenome *, 2> kids{&c1, &c2};
		const std::array<const Architecture *, 2> primary{&a1, &a2};
		for (std::size_t k = 0; k < 2; ++k) {
			const auto &arch = kids[k]->architecture();
			if (kids[k]->phases().size() != expected_genome_length(arch)) {
				fail("child " + std::to_string(k + 1) + " length does not match its architecture");
			}
			if (arch.input_width != n || arch.output_width != 1) {
				fail("child " + std::to_string(k + 1) + " changed input or output width");
			}
			if (arch.depth() != primary[k]->depth()) {
				fail("child " + std::to_string(k + 1) + " depth differs from its primary parent");
			}
			std::size_t changed = 0;
			for (std::size_t l = 0; l < arch.depth(); ++l) {
				const auto w = arch.hidden_widths[l];
				if (w < 1) {
					fail("child has an empty hidden layer");
				}
				if (w != primary[k]->hidden_widths[l]) {
					changed += 1;
					if (l >= std::min(a1.depth(), a2.depth()) || w > a1.hidden_widths[l] + a2.hidden_widths[l]) {
						fail("child width outside [1, p1 + p2]");
					}
				}
			}
			if (changed > 1) {
				fail("more than one hidden level changed width");
			}
			for (double p : kids[k]->phases()) {
				if (!std::isfinite(p)) {
					fail("non-finite phase");
					break;
				}
			}
		}
	}
	return report;
}

OracleReport check_selection_distribution(const std::array<double, 3> &probabilities, std::size_t draws,
                                          std::mt19937_64 &rng, double tolerance) {
	OracleReport report;
	report.tolerance = tolerance;
	StrategyState state;
	state.probabilities = probabilities;
	std::uniform_real_distribution<double> mss(0.0, 1.0);
	std::array<std::size_t, 3> counts{};
	for (std::size_t d = 0; d < draws; ++d) {
		counts[static_cast<std::size_t>(select_strategy(mss(rng), state))] += 1;
	}
	report.cases_run = draws;
	for (std::size_t k = 0; k < 3; ++k) {
		const double freq = static_cast<double>(counts[k]) / static_cast<double>(draws);
		const double dev = std::abs(freq - probabilities[k]);
		report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
		if (!(dev <= tolerance)) {
			report.failures.push_back(std::string(to_string(static_cast<Strategy>(k))) + " frequency " +
			                          std::to_string(freq) + " vs target " + std::to_string(probabilities[k]));
		}
	}
	return report;
}

} // namespace qevo::testkit
