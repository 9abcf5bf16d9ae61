#include <doctest.h>

#include "qevo/dataset.hpp"
#include "qevo/error.hpp"
#include "qevo/evolve.hpp"
#include "qevo/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

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

Architecture arch(std::size_t n, std::vector<std::size_t> hidden) {
	Architecture a;
	a.input_width = n;
	a.hidden_widths = std::move(hidden);
	return a;
}

NetworkGenome filled(const Architecture &a, double v) {
	return NetworkGenome(a, std::vector<double>(layout(a).total, v));
}

std::vector<double> sine(std::size_t points, double phase = 0.0) {
	std::vector<double> s(points);
	for (std::size_t t = 0; t < points; ++t) {
		s[t] = 0.5 + 0.4 * std::sin(2 * std::numbers::pi * static_cast<double>(t) / 24.0 + phase);
	}
	return s;
}

TrainingConfig small_config(std::uint64_t seed) {
	TrainingConfig c;
	c.population_size = 12;
	c.generations = 6;
	c.window_size = 4;
	c.min_hidden_width = 1;
	c.max_hidden_width = 4;
	c.min_depth = 1;
	c.max_depth = 2;
	c.seed = seed;
	return c;
}

} // namespace

TEST_CASE("sample_modulation_rate is truncated to the open unit interval") {
	std::mt19937_64 rng(17);
	double sum = 0.0;
	const int draws = 100000;
	for (int k = 0; k < draws; ++k) {
		const double r = sample_modulation_rate(rng);
		REQUIRE(r > 0.0);
		REQUIRE(r < 1.0);
		sum += r;
	}
	CHECK(std::abs(sum / draws - 0.5) <= 0.02);
}

TEST_CASE("select_strategy follows the cumulative thresholds") {
	const StrategyState s;
	CHECK(select_strategy(0.2, s) == Strategy::Qarm);
	CHECK(select_strategy(0.5, s) == Strategy::Qaco);
	CHECK(select_strategy(0.99, s) == Strategy::Qaom);
	CHECK(select_strategy(0.33, s) == Strategy::Qarm);
	CHECK(select_strategy(0.0, s) == Strategy::Qaom);
}

TEST_CASE("pick_donors") {
	std::mt19937_64 rng(4);
	for (int k = 0; k < 500; ++k) {
		const auto base = static_cast<std::size_t>(k % 6);
		const auto d = pick_donors(base, 6, rng);
		const std::set<std::size_t> all{base, d.r1, d.r2, d.r3};
		CHECK(all.size() == 4);
		CHECK(*all.rbegin() < 6);
	}
	CHECK(code_of([&] { pick_donors(0, 3, rng); }) == ErrorCode::PopulationTooSmall);
}

TEST_CASE("modulation arithmetic") {
	const auto a = arch(1, {1});
	const auto one = filled(a, 1.0);
	const auto two = filled(a, 2.0);
	const auto zero = filled(a, 0.0);

	const auto qarm = modulate(Strategy::Qarm, zero, zero, one, two, one, 0.5);
	for (double v : qarm.phases()) {
		CHECK(v == 1.5);
	}

	const auto x = filled(a, 0.3);
	const auto qaco = modulate(Strategy::Qaco, x, x, two, two, one, 0.7);
	CHECK(qaco == x);

	const double rate = 0.999999;
	const auto qaom = modulate(Strategy::Qaom, zero, x, two, one, zero, rate);
	for (double v : qaom.phases()) {
		CHECK(std::abs(v - (0.3 + 1.0)) <= 1e-5);
	}
}

TEST_CASE("modulation with vanishing rate returns the base vector") {
	std::mt19937_64 rng(8);
	for (int k = 0; k < 50; ++k) {
		const auto g = [&] { return random_genome(testkit::random_architecture(rng, 3, 1, 3, 1, 5), rng); };
		const auto cur = g(), best = g(), r1 = g(), r2 = g(), r3 = g();
		CHECK(modulate(Strategy::Qarm, cur, best, r1, r2, r3, 0.0) == r1);
		CHECK(modulate(Strategy::Qaco, cur, best, r1, r2, r3, 0.0) == cur);
		CHECK(modulate(Strategy::Qaom, cur, best, r1, r2, r3, 0.0) == best);
	}
}

TEST_CASE("cross-architecture modulation touches only the shared block prefixes") {
	const auto donor_one = filled(arch(2, {1}), 1.0);
	const auto donor_zero = filled(arch(2, {1}), 0.0);
	const auto base = filled(arch(2, {3, 2}), 1.0);
	const auto out = modulate(Strategy::Qaom, donor_zero, base, donor_one, donor_zero, donor_zero, 0.5);
	REQUIRE(out.architecture() == base.architecture());
	const auto l = layout(base.architecture());
	const auto p = out.phases();

	const auto &first = l.transitions[0];
	CHECK(p[first.weight_offset + 0] == 1.5);
	CHECK(p[first.weight_offset + 1] == 1.5);
	for (std::size_t k = 2; k < first.weight_count(); ++k) {
		CHECK(p[first.weight_offset + k] == 1.0);
	}
	CHECK(p[first.bias_offset] == 1.5);
	CHECK(p[first.bias_offset + 1] == 1.0);
	CHECK(p[first.reversal_offset] == 1.5);
	CHECK(p[first.reversal_offset + 2] == 1.0);

	const auto &second = l.transitions[1];
	for (std::size_t k = second.weight_offset; k < second.end(); ++k) {
		CHECK(p[k] == 1.0);
	}

	const auto &output = l.transitions[2];
	CHECK(p[output.weight_offset] == 1.5);
	CHECK(p[output.weight_offset + 1] == 1.0);
	CHECK(p[output.reversal_offset] == 1.5);
}

TEST_CASE("recombination widths follow the bundle arithmetic") {
	std::mt19937_64 rng(3);
	const auto p1 = random_genome(arch(2, {2}), rng);
	const auto p2 = random_genome(arch(2, {3}), rng);
	const auto [c1, c2] = recombine(p1, p2, RecombinationCut{1, 2, 2}, rng);
	CHECK(c1.architecture().hidden_widths == std::vector<std::size_t>{3});
	CHECK(c2.architecture().hidden_widths == std::vector<std::size_t>{2});
	CHECK(c1.size() == layout(c1.architecture()).total);

	// Child 1's first two neurons are parent 1's, its third is parent 2's third.
	const auto l1 = layout(c1.architecture()).transitions[0];
	const auto lp1 = layout(p1.architecture()).transitions[0];
	const auto lp2 = layout(p2.architecture()).transitions[0];
	for (std::size_t i = 0; i < 2; ++i) {
		CHECK(c1.phases()[l1.weight_offset + i * 3 + 0] == p1.phases()[lp1.weight_offset + i * 2 + 0]);
		CHECK(c1.phases()[l1.weight_offset + i * 3 + 2] == p2.phases()[lp2.weight_offset + i * 3 + 2]);
	}
	CHECK(c1.phases()[l1.reversal_offset + 2] == p2.phases()[lp2.reversal_offset + 2]);
	CHECK(c1.phases()[l1.bias_offset + 1] == p1.phases()[lp1.bias_offset + 1]);

	CHECK(code_of([&] { recombine(p1, p2, RecombinationCut{2, 1, 1}, rng); }) == ErrorCode::InvalidParams);
	CHECK(code_of([&] { recombine(p1, p2, RecombinationCut{1, 3, 1}, rng); }) == ErrorCode::InvalidParams);
}

TEST_CASE("recombining identical parents reproduces them") {
	std::mt19937_64 rng(12);
	for (int k = 0; k < 100; ++k) {
		const auto p = random_genome(testkit::random_architecture(rng, 4, 1, 4, 1, 7), rng);
		const auto [c1, c2] = recombine(p, p, rng);
		CHECK(c1 == p);
		CHECK(c2 == p);
	}
}

TEST_CASE("recombination structural oracle") {
	std::mt19937_64 rng(2718);
	const auto report = testkit::check_recombination_validity(10000, rng);
	CHECK(report.cases_run == 10000);
	CHECK(report.passed());
}

TEST_CASE("select_survivor") {
	const auto a = arch(1, {1});
	const Scored cur{filled(a, 0.0), 0.2};
	const Scored better{filled(a, 1.0), 0.1};
	const Scored tie{filled(a, 2.0), 0.2};
	const Scored worse{filled(a, 3.0), 0.3};

	auto d = select_survivor(cur, {better});
	CHECK(d.succeeded);
	CHECK(d.survivor.genome == better.genome);

	d = select_survivor(cur, {tie});
	CHECK(d.succeeded);
	CHECK(d.survivor.genome == tie.genome);

	d = select_survivor(cur, {worse});
	CHECK_FALSE(d.succeeded);
	CHECK(d.survivor.genome == cur.genome);

	d = select_survivor(cur, {worse, better});
	CHECK(d.survivor.genome == better.genome);
	d = select_survivor(cur, {tie, Scored{filled(a, 4.0), 0.2}});
	CHECK(d.survivor.genome == tie.genome);
}

TEST_CASE("update_probabilities") {
	StrategyState s;
	auto next = update_probabilities(s);
	for (double p : next.probabilities) {
		CHECK(std::abs(p - 1.0 / 3.0) <= 1e-12);
	}

	s.record(Strategy::Qarm, true);
	next = update_probabilities(s);
	CHECK(std::abs(next.probabilities[0] - 0.4) <= 1e-12);
	CHECK(std::abs(next.probabilities[1] - 0.3) <= 1e-12);
	CHECK(std::abs(next.probabilities[2] - 0.3) <= 1e-12);
	CHECK(next.successes == std::array<std::uint64_t, 3>{});

	std::mt19937_64 rng(5);
	std::uniform_int_distribution<std::uint64_t> count(0, 200);
	for (int k = 0; k < 2000; ++k) {
		StrategyState r;
		for (std::size_t j = 0; j < 3; ++j) {
			r.successes[j] = count(rng);
			r.failures[j] = count(rng);
		}
		const auto p = update_probabilities(r).probabilities;
		CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) <= 1e-12);
		CHECK(std::min({p[0], p[1], p[2]}) >= 0.0);
	}
}

TEST_CASE("selection distribution oracle") {
	std::mt19937_64 rng(1);
	CHECK(testkit::check_selection_distribution({0.2, 0.3, 0.5}, 100000, rng).passed());
	CHECK(testkit::check_selection_distribution({1.0, 0.0, 0.0}, 10000, rng).passed());
	CHECK(testkit::check_selection_distribution({1.0 / 3, 1.0 / 3, 1.0 / 3}, 100000, rng).passed());
}

TEST_CASE("init_population respects config and seed") {
	const auto data = build_windows(sine(60), 4);
	auto c = small_config(3);
	c.population_size = 80;
	c.max_depth = 4;
	const auto fit = rmse_fitness(data);
	const auto a = init_population(c, fit);
	const auto b = init_population(c, fit);
	CHECK(a.candidates.size() == 80);
	CHECK(a.candidates == b.candidates);
	CHECK(a.fitness == b.fitness);
	for (const auto &g : a.candidates) {
		CHECK(g.architecture().depth() >= 1);
		CHECK(g.architecture().depth() <= 4);
		CHECK(g.size() == layout(g.architecture()).total);
	}
	CHECK(a.best_fitness() == *std::min_element(a.fitness.begin(), a.fitness.end()));
}

TEST_CASE("training is deterministic, elitist and thread-count independent") {
	const auto data = build_windows(sine(80), 4);
	auto c = small_config(7);
	const auto a = train(c, data);
	const auto b = train(c, data);
	CHECK(a.best == b.best);
	CHECK(a.report.best_fitness_trajectory() == b.report.best_fitness_trajectory());

	c.threads = 4;
	const auto t = train(c, data);
	CHECK(t.best == a.best);
	CHECK(t.report.best_fitness_trajectory() == a.report.best_fitness_trajectory());
	CHECK(t.report.success_totals == a.report.success_totals);
	CHECK(t.report.degenerate_args == a.report.degenerate_args);

	REQUIRE(a.report.generations.size() == c.generations + 1);
	const auto traj = a.report.best_fitness_trajectory();
	for (std::size_t g = 1; g < traj.size(); ++g) {
		CHECK(traj[g] <= traj[g - 1]);
	}
	std::uint64_t attempts = 0;
	for (std::size_t k = 0; k < 3; ++k) {
		attempts += a.report.success_totals[k] + a.report.failure_totals[k];
	}
	CHECK(attempts == c.population_size * c.generations);
	for (const auto &g : a.report.generations) {
		CHECK(std::abs(g.probabilities[0] + g.probabilities[1] + g.probabilities[2] - 1.0) <= 1e-9);
	}
	CHECK_NOTHROW(convergence_monitor(a.report, 3));
}

TEST_CASE("zero generations reports only the initial population") {
	const auto data = build_windows(sine(40), 4);
	auto c = small_config(1);
	c.generations = 0;
	const auto r = train(c, data);
	REQUIRE(r.report.generations.size() == 1);
	CHECK(r.report.generations[0].best_fitness == r.best_fitness);
}

TEST_CASE("window mismatch is rejected") {
	const auto data = build_windows(sine(40), 5);
	CHECK(code_of([&] { train(small_config(1), data); }) == ErrorCode::Incompatible);
}

TEST_CASE("resuming from a checkpoint matches an uninterrupted run") {
	const auto data = build_windows(sine(80, 0.3), 4);
	const auto c = small_config(11);
	const auto fit = rmse_fitness(data);
	const auto whole = train(c, fit);

	Trainer first(c, fit);
	first.step();
	first.step();
	Trainer resumed(first.checkpoint(), fit);
	resumed.run();
	const auto r = resumed.result();
	CHECK(r.best == whole.best);
	CHECK(r.best_fitness == whole.best_fitness);
	CHECK(r.report.best_fitness_trajectory() == whole.report.best_fitness_trajectory());
	CHECK(r.report.success_totals == whole.report.success_totals);
}

TEST_CASE("ablation modes") {
	const auto data = build_windows(sine(80), 4);
	auto c = small_config(5);
	c.mode = AblationMode::FixedArch;
	Trainer fixed_arch(c, rmse_fitness(data));
	const auto shared = fixed_arch.population().candidates.front().architecture();
	while (!fixed_arch.done()) {
		fixed_arch.step();
		for (const auto &g : fixed_arch.population().candidates) {
			CHECK(g.architecture() == shared);
		}
	}

	c.mode = AblationMode::FixedAll;
	const auto r = train(c, data);
	const auto traj = r.report.best_fitness_trajectory();
	REQUIRE(traj.size() == c.generations + 1);
	for (double f : traj) {
		CHECK(f == traj.front());
	}

	CHECK(parse_ablation_mode("fixed-arch") == AblationMode::FixedArch);
	CHECK(std::string(to_string(AblationMode::FixedAll)) == "fixed-all");
	CHECK(code_of([] { parse_ablation_mode("partial"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("convergence_monitor") {
	const auto d = convergence_monitor({0.5, 0.4, 0.4, 0.3}, 10);
	CHECK(d.total_descent == doctest::Approx(0.2).epsilon(1e-12));
	CHECK(d.improvements == 2);
	CHECK_FALSE(d.stagnated);
	CHECK(code_of([] { convergence_monitor({0.5, 0.6}, 10); }) == ErrorCode::MonotonicityViolation);
	const auto flat = convergence_monitor(std::vector<double>(12, 0.3), 10);
	CHECK(flat.stagnated);
	CHECK(flat.trailing_flat_steps == 11);
}

TEST_CASE("config validation") {
	TrainingConfig c;
	CHECK_NOTHROW(c.validate());
	c.population_size = 3;
	CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
	c = {};
	c.min_depth = 3;
	c.max_depth = 2;
	CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
	c = {};
	c.initial_probabilities = {0.5, 0.5, 0.5};
	CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("parallel_for covers every index and rethrows") {
	std::vector<int> hits(1000, 0);
	parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
	CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
	CHECK_THROWS_AS(parallel_for(10, 3,
	                             [](std::size_t i) {
		                             if (i == 5) {
			                             throw Error(ErrorCode::EmptyInput, "boom");
		                             }
	                             }),
	                Error);
}
