#include <doctest.h>

#include "qevo/dataset.hpp"
#include "qevo/error.hpp"

#include <random>
#include <sstream>

using namespace qevo;

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

WindowedDataset rows_of(std::size_t count) {
	std::vector<double> series;
	for (std::size_t i = 0; i < count + 1; ++i) {
		series.push_back(static_cast<double>(i) / static_cast<double>(count + 1));
	}
	return build_windows(series, 1);
}

} // namespace

TEST_CASE("fit_normalizer") {
	auto p = fit_normalizer(std::vector<double>{2, 4, 6});
	CHECK(p.d_min == 2.0);
	CHECK(p.d_max == 6.0);
	auto neg = fit_normalizer(std::vector<double>{-1, 0, 3});
	CHECK(neg.d_min == -1.0);
	CHECK(neg.d_max == 3.0);
	CHECK(code_of([] { fit_normalizer(std::vector<double>{5, 5, 5}); }) == ErrorCode::ConstantSeries);
	CHECK(code_of([] { fit_normalizer(std::vector<double>{5}); }) == ErrorCode::SeriesTooShort);
}

TEST_CASE("normalize and denormalize") {
	const NormalizationParams p{2, 6};
	CHECK(normalize(4, p) == 0.5);
	CHECK(normalize(2, p) == 0.0);
	CHECK(normalize(7, p) == 1.0);
	CHECK(normalize(-3, p) == 0.0);
	CHECK(denormalize(0.5, p) == 4.0);
	CHECK(denormalize(0.0, p) == 2.0);
	CHECK(code_of([] { normalize(1, NormalizationParams{3, 3}); }) == ErrorCode::InvalidParams);
}

TEST_CASE("normalize round-trips on in-range values") {
	std::mt19937_64 rng(11);
	std::uniform_real_distribution<double> bound(-100, 100);
	for (int trial = 0; trial < 200; ++trial) {
		double a = bound(rng);
		double b = bound(rng);
		if (a == b) {
			continue;
		}
		const NormalizationParams p{std::min(a, b), std::max(a, b)};
		std::uniform_real_distribution<double> inside(p.d_min, p.d_max);
		for (int k = 0; k < 20; ++k) {
			const double x = inside(rng);
			const double n = normalize(x, p);
			CHECK(n >= 0.0);
			CHECK(n <= 1.0);
			CHECK(std::abs(denormalize(n, p) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
		}
	}
}

TEST_CASE("build_windows lays out lags and targets") {
	const std::vector<double> s{.1, .2, .3, .4, .5};
	auto d = build_windows(s, 2);
	REQUIRE(d.rows() == 3);
	CHECK(d.row(0)[0] == .1);
	CHECK(d.row(0)[1] == .2);
	CHECK(d.row(1)[0] == .2);
	CHECK(d.row(2)[1] == .4);
	CHECK(std::vector<double>(d.targets().begin(), d.targets().end()) == std::vector<double>{.3, .4, .5});

	auto single = build_windows(s, 1);
	REQUIRE(single.rows() == 4);
	for (std::size_t i = 0; i < single.rows(); ++i) {
		CHECK(single.row(i)[0] == s[i]);
		CHECK(single.target(i) == s[i + 1]);
	}

	CHECK(code_of([] { build_windows(std::vector<double>{.1, .2, .3}, 3); }) == ErrorCode::SeriesTooShort);
}

TEST_CASE("overlapping windows share entries") {
	std::mt19937_64 rng(3);
	std::uniform_real_distribution<double> u(0, 1);
	std::vector<double> s(60);
	for (auto &v : s) {
		v = u(rng);
	}
	for (std::size_t n : {1u, 4u, 10u}) {
		auto d = build_windows(s, n);
		CHECK(d.rows() == s.size() - n);
		for (std::size_t i = 0; i + 1 < d.rows(); ++i) {
			for (std::size_t j = 1; j < n; ++j) {
				CHECK(d.row(i)[j] == d.row(i + 1)[j - 1]);
			}
			CHECK(d.target(i) == d.row(i + 1)[n - 1]);
		}
	}
}

TEST_CASE("split is chronological") {
	auto [train6, test4] = split(rows_of(10), 0.6);
	CHECK(train6.rows() == 6);
	CHECK(test4.rows() == 4);
	auto [train8, test2] = split(rows_of(10), 0.8);
	CHECK(train8.rows() == 8);
	CHECK(test2.rows() == 2);
	auto [a, b] = split(rows_of(2), 0.9);
	CHECK(a.rows() == 1);
	CHECK(b.rows() == 1);
	auto [c, d] = split(rows_of(10), 0.7);
	CHECK(c.rows() == 7);

	const auto all = rows_of(37);
	auto [tr, te] = split(all, 0.63);
	CHECK(tr.rows() + te.rows() == all.rows());
	CHECK(tr.target(0) == all.target(0));
	CHECK(te.target(0) == all.target(tr.rows()));
	CHECK(te.target(te.rows() - 1) == all.target(all.rows() - 1));

	CHECK(code_of([] { split(rows_of(1), 0.5); }) == ErrorCode::EmptyPartition);
	CHECK(code_of([] { split(rows_of(10), 1.0); }) == ErrorCode::InvalidParams);
}

TEST_CASE("write_csv emits one row per window with the target last") {
	auto d = build_windows(std::vector<double>{0, 0.5, 1}, 2);
	std::ostringstream out;
	d.write_csv(out);
	CHECK(out.str() == "0,0.5,1\n");
}
