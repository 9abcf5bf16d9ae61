#include <doctest.h>

#include "qevo/error.hpp"
#include "qevo/metrics.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace qevo;

using V = std::vector<double>;

namespace {

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

TEST_CASE("rmse") {
	CHECK(rmse(V{0.3, 0.7}, V{0.3, 0.7}) == 0.0);
	CHECK(rmse(V{0, 0}, V{1, 1}) == 1.0);
	CHECK(rmse(V{0.2, 0.4}, V{0.3, 0.5}) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("mae") {
	CHECK(mae(V{0.3, 0.7}, V{0.3, 0.7}) == 0.0);
	CHECK(mae(V{0, 1}, V{1, 0}) == 1.0);
	CHECK(mae(V{0.2, 0.4}, V{0.3, 0.6}) == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("mape") {
	CHECK(mape(V{0.3, 0.7}, V{0.3, 0.7}) == 0.0);
	CHECK(mape(V{1, 1}, V{0.9, 1.1}) == doctest::Approx(0.1).epsilon(1e-12));
	CHECK(mape(V{0}, V{0.5}) == doctest::Approx(0.5 / 1e-8));
	CHECK(mape(V{0}, V{0.5}, 0.5) == 1.0);
}

TEST_CASE("metric errors") {
	CHECK(code_of([] { rmse(V{1}, V{1, 2}); }) == ErrorCode::LengthMismatch);
	CHECK(code_of([] { mae(V{}, V{}); }) == ErrorCode::EmptyInput);
	CHECK(code_of([] { mape(V{1, 2}, V{1}); }) == ErrorCode::LengthMismatch);
	CHECK(code_of([] { evaluate(V{}, V{}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("metrics agree with brute-force recomputation") {
	std::mt19937_64 rng(99);
	std::uniform_real_distribution<double> u(-1, 1);
	std::uniform_int_distribution<int> len(1, 50);
	for (int trial = 0; trial < 1000; ++trial) {
		V a(static_cast<std::size_t>(len(rng)));
		V p(a.size());
		for (std::size_t i = 0; i < a.size(); ++i) {
			a[i] = u(rng);
			p[i] = u(rng);
		}
		double sq = 0, ab = 0, pc = 0;
		for (std::size_t i = 0; i < a.size(); ++i) {
			sq += (a[i] - p[i]) * (a[i] - p[i]);
			ab += std::abs(a[i] - p[i]);
			pc += std::abs(a[i] - p[i]) / std::max(std::abs(a[i]), 1e-8);
		}
		const double m = static_cast<double>(a.size());
		const auto r = evaluate(a, p);
		CHECK(std::abs(r.rmse - std::sqrt(sq / m)) <= 1e-12);
		CHECK(std::abs(r.mae - ab / m) <= 1e-12);
		CHECK(std::abs(r.mape - pc / m) <= 1e-12 * std::max(1.0, pc / m));
		CHECK(r.count == a.size());
		CHECK(r.rmse >= r.mae);
	}
}
