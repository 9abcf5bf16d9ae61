#include <doctest.h>

#include "qevo/dataset.hpp"
#include "qevo/error.hpp"
#include "qevo/qnn.hpp"
#include "qevo/testkit.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace qevo;

namespace {

Architecture arch(std::size_t n, std::vector<std::size_t> hidden) {
	Architecture a;
	a.input_width = n;
	a.hidden_widths = std::move(hidden);
	return a;
}

ErrorCode code_of(auto &&fn) {
	try {
		fn();
	} catch (const Error &e) {
		return e.code();
	}
	FAIL("expected an Error");
	return ErrorCode::Incompatible;
}

} // namespace

TEST_CASE("layout totals") {
	CHECK(layout(arch(2, {2})).total == 11);
	CHECK(layout(arch(10, {5})).total == 66);
	CHECK(layout(arch(1, {1})).total == 5);

	const auto l = layout(arch(2, {2}));
	REQUIRE(l.transitions.size() == 2);
	CHECK(l.transitions[0].weight_offset == 0);
	CHECK(l.transitions[0].bias_offset == 4);
	CHECK(l.transitions[0].reversal_offset == 6);
	CHECK(l.transitions[1].weight_offset == 8);
	CHECK_FALSE(l.transitions[1].has_bias);
	CHECK(l.transitions[1].reversal_offset == 10);
	CHECK(l.transitions[1].end() == 11);
}

TEST_CASE("layout agrees with the independent length formula") {
	std::mt19937_64 rng(5);
	for (int k = 0; k < 200; ++k) {
		const auto a = testkit::random_architecture(rng, 1 + k % 12, 1, 4, 1, 9);
		CHECK(layout(a).total == testkit::expected_genome_length(a));
	}
}

TEST_CASE("architecture and genome validation") {
	CHECK(code_of([] { arch(0, {1}).validate(); }) == ErrorCode::InvalidParams);
	CHECK(code_of([] { arch(2, {}).validate(); }) == ErrorCode::InvalidParams);
	CHECK(code_of([] { arch(2, {3, 0}).validate(); }) == ErrorCode::InvalidParams);
	CHECK(code_of([] { NetworkGenome(arch(1, {1}), std::vector<double>(4)); }) == ErrorCode::DimensionMismatch);
	CHECK(code_of([] {
		      NetworkGenome(arch(1, {1}), {0, 0, 0, 0, std::numeric_limits<double>::quiet_NaN()});
	      }) == ErrorCode::InvalidParams);
}

TEST_CASE("random_genome is seeded and range-bounded") {
	const auto a = arch(10, {50, 40});
	std::mt19937_64 r1(42), r2(42);
	CHECK(random_genome(a, r1) == random_genome(a, r2));

	std::mt19937_64 rng(9);
	std::size_t weights_seen = 0;
	double reversal_sum = 0.0;
	std::size_t reversal_seen = 0;
	while (weights_seen < 10000 || reversal_seen < 10000) {
		const auto g = random_genome(a, rng);
		for (const auto &t : layout(a).transitions) {
			for (std::size_t i = 0; i < t.weight_count(); ++i) {
				const double w = g.phases()[t.weight_offset + i];
				CHECK(w >= -kHalfPi);
				CHECK(w <= kHalfPi);
				++weights_seen;
			}
			for (std::size_t j = 0; j < t.to; ++j) {
				reversal_sum += g.phases()[t.reversal_offset + j];
				++reversal_seen;
			}
		}
	}
	CHECK(std::abs(reversal_sum / static_cast<double>(reversal_seen)) <= 0.05);
}

TEST_CASE("encode, activate and sigmoid") {
	const std::vector<double> row{1.0, 0.0, 0.5};
	const auto phases = encode_input(row);
	CHECK(phases[0] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
	CHECK(phases[1] == 0.0);
	CHECK(phases[2] == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));

	CHECK(activate(0) == QubitState(1, 0));
	CHECK(std::abs(activate(std::numbers::pi / 2) - QubitState(0, 1)) < 1e-15);
	const double h = std::sqrt(2.0) / 2;
	CHECK(std::abs(activate(std::numbers::pi / 4) - QubitState(h, h)) < 1e-15);

	CHECK(sigmoid(0) == 0.5);
	CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("neuron_aggregate") {
	const std::vector<QubitState> one{activate(std::numbers::pi / 4)};
	const std::vector<double> theta{std::numbers::pi / 4};
	const double bias = 0.0;
	const auto u = neuron_aggregate(one, theta, &bias);
	CHECK(std::abs(u.real() - (-1.0)) < 1e-15);
	CHECK(std::abs(u.imag() - 1.0) < 1e-15);

	const std::vector<QubitState> ones(4, QubitState(1, 0));
	const std::vector<double> zeros(4, 0.0);
	CHECK(neuron_aggregate(ones, zeros) == QubitState(4, 0));

	CHECK(code_of([&] { neuron_aggregate(ones, std::vector<double>{}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("reverse_rotate") {
	// Oracle: (pi/2) * 1/(1+e^0) - atan2(1, 1)
	const auto r = reverse_rotate({1, 1}, 0.0);
	CHECK(std::abs(r.phase - ((std::numbers::pi / 2) * 0.5 - std::atan2(1.0, 1.0))) < 1e-15);
	CHECK_FALSE(r.degenerate);

	CHECK(reverse_rotate({1, 0}, 800.0).phase == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));

	const auto d = reverse_rotate({0, 0}, 0.0);
	CHECK(d.degenerate);
	CHECK(d.phase == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
}

TEST_CASE("qubit_vector_magnitude") {
	CHECK(qubit_vector_magnitude(std::vector<QubitState>{{1, 0}}) == 1.0);
	CHECK(qubit_vector_magnitude(std::vector<QubitState>{{0.6, 0.8}}) == doctest::Approx(1.0).epsilon(1e-15));
	CHECK(qubit_vector_magnitude(std::vector<QubitState>{{1, 0}, {0, 1}}) ==
	      doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("minimal all-zero network traces to zero with one degenerate argument") {
	const NetworkGenome g(arch(1, {1}), std::vector<double>(5, 0.0));
	const std::vector<double> row{0.0};
	ForwardStats stats;
	CHECK(std::abs(forward(g, row, &stats)) < 1e-15);
	CHECK(stats.degenerate_args == 1);
	CHECK(std::abs(testkit::oracle_forward(g, row)) < 1e-15);
}

TEST_CASE("forward matches the oracle on random networks") {
	std::mt19937_64 rng(2024);
	const auto report = testkit::check_forward_equivalence(100, rng);
	CHECK(report.cases_run == 100);
	CHECK(report.max_abs_deviation <= 1e-10);
	CHECK(report.passed());

	std::mt19937_64 deep(77);
	const auto wide = testkit::check_forward_equivalence(100, deep, 1e-10, 10, 4, 12);
	CHECK(wide.passed());
}

TEST_CASE("forward output stays in [0,1] and CompiledNetwork agrees") {
	std::mt19937_64 rng(31);
	std::uniform_real_distribution<double> u(0, 1);
	std::vector<double> series(40);
	for (auto &v : series) {
		v = u(rng);
	}
	const auto data = build_windows(series, 6);
	for (int k = 0; k < 30; ++k) {
		const auto a = testkit::random_architecture(rng, 6, 1, 3, 1, 8);
		const auto g = random_genome(a, rng);
		const CompiledNetwork net(g);
		const auto all = net.predict_all(data);
		REQUIRE(all.size() == data.rows());
		for (std::size_t i = 0; i < data.rows(); ++i) {
			const double y = forward(g, data.row(i));
			CHECK(y >= 0.0);
			CHECK(y <= 1.0);
			CHECK(std::abs(all[i] - y) <= 1e-12);
			CHECK(net.predict(data.row(i)) == all[i]);
		}
	}
	const CompiledNetwork net(random_genome(arch(6, {3}), rng));
	CHECK(code_of([&] { net.predict(std::vector<double>(5, 0.1)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("activate has unit modulus") {
	std::mt19937_64 rng(1);
	std::uniform_real_distribution<double> phase(-100, 100);
	for (int k = 0; k < 10000; ++k) {
		CHECK(std::abs(std::abs(activate(phase(rng))) - 1.0) <= 1e-12);
	}
}
