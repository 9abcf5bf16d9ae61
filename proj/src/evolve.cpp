#include "qevo/evolve.hpp"

#include "qevo/dataset.hpp"
#include "qevo/error.hpp"
#include "qevo/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace qevo {

namespace {

constexpr std::uint64_t kArchitectureSlot = std::numeric_limits<std::uint64_t>::max();

std::size_t uniform_index(std::mt19937_64 &rng, std::size_t lo, std::size_t hi) {
	return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Adds rate * (a - b) to `out` over the positions of each matched block that
/// exist in all three layouts.
void add_scaled_difference(std::span<double> out, const GenomeLayout &base_layout, const NetworkGenome &a,
                           const NetworkGenome &b, double rate) {
	const auto la = layout(a.architecture());
	const auto lb = layout(b.architecture());
	const std::size_t base_hidden = base_layout.transitions.size() - 1;
	const std::size_t a_hidden = la.transitions.size() - 1;
	const std::size_t b_hidden = lb.transitions.size() - 1;

	auto apply = [&](std::size_t base_off, std::size_t base_len, std::size_t a_off, std::size_t a_len,
	                 std::size_t b_off, std::size_t b_len) {
		const std::size_t n = std::min({base_len, a_len, b_len});
		const auto pa = a.phases();
		const auto pb = b.phases();
		for (std::size_t k = 0; k < n; ++k) {
			out[base_off + k] += rate * (pa[a_off + k] - pb[b_off + k]);
		}
	};

	for (std::size_t t = 0; t < base_layout.transitions.size(); ++t) {
		const bool is_output = t == base_hidden;
		if (!is_output && (t >= a_hidden || t >= b_hidden)) {
			continue;
		}
		const auto &tb = base_layout.transitions[t];
		const auto &ta = la.transitions[is_output ? a_hidden : t];
		const auto &tx = lb.transitions[is_output ? b_hidden : t];
		apply(tb.weight_offset, tb.weight_count(), ta.weight_offset, ta.weight_count(), tx.weight_offset,
		      tx.weight_count());
		if (tb.has_bias) {
			apply(tb.bias_offset, tb.to, ta.bias_offset, ta.to, tx.bias_offset, tx.to);
		}
		apply(tb.reversal_offset, tb.to, ta.reversal_offset, ta.to, tx.reversal_offset, tx.to);
	}
}

/// Child made of `primary` with its hidden level replaced by primary neurons
/// [0, keep) followed by donor neurons [donor_from, donor width).
NetworkGenome build_child(const NetworkGenome &primary, const NetworkGenome &donor, std::size_t level,
                          std::size_t keep, std::size_t donor_from, std::mt19937_64 &rng) {
	const auto &parch = primary.architecture();
	const auto &darch = donor.architecture();
	const std::size_t h = level - 1;
	const std::size_t donor_width = darch.hidden_widths[h];

	Architecture child_arch = parch;
	child_arch.hidden_widths[h] = keep + (donor_width - donor_from);

	const auto pl = layout(parch);
	const auto dl = layout(darch);
	const auto cl = layout(child_arch);
	const auto pp = primary.phases();
	const auto dp = donor.phases();
	std::uniform_real_distribution<double> pad(-kHalfPi, kHalfPi);

	std::vector<double> phases(cl.total);
	for (std::size_t t = 0; t < cl.transitions.size(); ++t) {
		const auto &ct = cl.transitions[t];
		const auto &pt = pl.transitions[t];
		if (t != h && t != level) {
			std::copy(pp.begin() + static_cast<std::ptrdiff_t>(pt.weight_offset),
			          pp.begin() + static_cast<std::ptrdiff_t>(pt.end()),
			          phases.begin() + static_cast<std::ptrdiff_t>(ct.weight_offset));
			continue;
		}
		if (t == h) {
			// Into the exchanged level: one column, bias and reversal per neuron.
			const auto &dt = dl.transitions[h];
			for (std::size_t j = 0; j < ct.to; ++j) {
				const bool own = j < keep;
				const std::size_t src = own ? j : donor_from + (j - keep);
				for (std::size_t i = 0; i < ct.from; ++i) {
					double w;
					if (own) {
						w = pp[pt.weight_offset + i * pt.to + src];
					} else if (i < dt.from) {
						w = dp[dt.weight_offset + i * dt.to + src];
					} else {
						w = pad(rng);
					}
					phases[ct.weight_offset + i * ct.to + j] = w;
				}
				phases[ct.bias_offset + j] = own ? pp[pt.bias_offset + src] : dp[dt.bias_offset + src];
				phases[ct.reversal_offset + j] = own ? pp[pt.reversal_offset + src] : dp[dt.reversal_offset + src];
			}
		} else {
			// Out of the exchanged level: one row per neuron; next layer's gates stay with the primary.
			const auto &dt = dl.transitions[level];
			for (std::size_t j = 0; j < ct.from; ++j) {
				const bool own = j < keep;
				const std::size_t src = own ? j : donor_from + (j - keep);
				for (std::size_t k = 0; k < ct.to; ++k) {
					double w;
					if (own) {
						w = pp[pt.weight_offset + src * pt.to + k];
					} else if (k < dt.to) {
						w = dp[dt.weight_offset + src * dt.to + k];
					} else {
						w = pad(rng);
					}
					phases[ct.weight_offset + j * ct.to + k] = w;
				}
			}
			if (ct.has_bias) {
				std::copy_n(pp.begin() + static_cast<std::ptrdiff_t>(pt.bias_offset), ct.to,
				            phases.begin() + static_cast<std::ptrdiff_t>(ct.bias_offset));
			}
			std::copy_n(pp.begin() + static_cast<std::ptrdiff_t>(pt.reversal_offset), ct.to,
			            phases.begin() + static_cast<std::ptrdiff_t>(ct.reversal_offset));
		}
	}
	return NetworkGenome(std::move(child_arch), std::move(phases));
}

} // namespace

const char *to_string(Strategy s) {
	switch (s) {
	case Strategy::Qarm: return "QARM";
	case Strategy::Qaco: return "QACO";
	case Strategy::Qaom: return "QAOM";
	}
	return "?";
}

const char *to_string(AblationMode m) {
	switch (m) {
	case AblationMode::Full: return "full";
	case AblationMode::FixedArch: return "fixed-arch";
	case AblationMode::FixedAll: return "fixed-all";
	}
	return "?";
}

AblationMode parse_ablation_mode(const std::string &text) {
	if (text == "full") {
		return AblationMode::Full;
	}
	if (text == "fixed-arch") {
		return AblationMode::FixedArch;
	}
	if (text == "fixed-all") {
		return AblationMode::FixedAll;
	}
	throw Error(ErrorCode::InvalidConfig, "unknown ablation mode '" + text + "'");
}

void TrainingConfig::validate() const {
	auto fail = [](const std::string &msg) { throw Error(ErrorCode::InvalidConfig, msg); };
	if (population_size < 4) {
		fail("population size must be at least 4");
	}
	if (window_size == 0) {
		fail("window size must be positive");
	}
	if (min_hidden_width == 0 || min_hidden_width > max_hidden_width) {
		fail("hidden width range must satisfy 1 <= min <= max");
	}
	if (min_depth == 0 || min_depth > max_depth) {
		fail("depth range must satisfy 1 <= min <= max");
	}
	if (!(rate_stddev > 0.0) || !std::isfinite(rate_mean)) {
		fail("modulation rate distribution must have positive spread");
	}
	double sum = 0.0;
	for (double p : initial_probabilities) {
		if (!(p >= 0.0 && p <= 1.0)) {
			fail("strategy probabilities must lie in [0,1]");
		}
		sum += p;
	}
	if (std::abs(sum - 1.0) > 1e-9) {
		fail("strategy probabilities must sum to 1");
	}
}

void Population::refresh_best() {
	best_index = static_cast<std::size_t>(std::min_element(fitness.begin(), fitness.end()) - fitness.begin());
}

FitnessFunction rmse_fitness(const WindowedDataset &train_data) {
	if (train_data.rows() == 0) {
		throw Error(ErrorCode::EmptyInput, "training data is empty");
	}
	return [&train_data](const NetworkGenome &genome, ForwardStats &stats) {
		const CompiledNetwork net(genome);
		return rmse(train_data.targets(), net.predict_all(train_data, &stats));
	};
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t generation, std::uint64_t slot) {
	auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
	auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
	std::seed_seq seq{lo(seed), hi(seed), lo(generation), hi(generation), lo(slot), hi(slot)};
	return std::mt19937_64(seq);
}

Architecture sample_architecture(const TrainingConfig &config, std::mt19937_64 &rng) {
	Architecture arch;
	arch.input_width = config.window_size;
	const auto depth = uniform_index(rng, config.min_depth, config.max_depth);
	arch.hidden_widths.clear();
	for (std::size_t l = 0; l < depth; ++l) {
		arch.hidden_widths.push_back(uniform_index(rng, config.min_hidden_width, config.max_hidden_width));
	}
	return arch;
}

Population init_population(const TrainingConfig &config, const FitnessFunction &fitness, ForwardStats *stats) {
	config.validate();
	const std::size_t n = config.population_size;
	std::optional<Architecture> shared;
	if (config.mode == AblationMode::FixedArch) {
		auto rng = stream_rng(config.seed, 0, kArchitectureSlot);
		shared = sample_architecture(config, rng);
	}

	Population pop;
	pop.candidates.resize(n);
	pop.fitness.assign(n, 0.0);
	std::vector<ForwardStats> local(n);
	parallel_for(n, config.threads, [&](std::size_t i) {
		auto rng = stream_rng(config.seed, 0, i);
		const auto arch = shared ? *shared : sample_architecture(config, rng);
		pop.candidates[i] = random_genome(arch, rng);
		pop.fitness[i] = fitness(pop.candidates[i], local[i]);
	});
	if (stats != nullptr) {
		for (const auto &s : local) {
			stats->degenerate_args += s.degenerate_args;
		}
	}
	pop.refresh_best();
	return pop;
}

double sample_modulation_rate(std::mt19937_64 &rng, double mean, double stddev) {
	std::normal_distribution<double> dist(mean, stddev);
	for (;;) {
		const double r = dist(rng);
		if (r > 0.0 && r < 1.0) {
			return r;
		}
	}
}

Strategy select_strategy(double mss, const StrategyState &state) {
	const auto &t = state.probabilities;
	if (mss > 0.0 && mss <= t[0]) {
		return Strategy::Qarm;
	}
	if (mss > t[0] && mss <= t[0] + t[1]) {
		return Strategy::Qaco;
	}
	return Strategy::Qaom;
}

Donors pick_donors(std::size_t base, std::size_t population_size, std::mt19937_64 &rng) {
	if (population_size < 4) {
		throw Error(ErrorCode::PopulationTooSmall, "modulation needs at least four candidates");
	}
	std::array<std::size_t, 3> picked{};
	for (std::size_t k = 0; k < 3; ++k) {
		std::size_t r;
		do {
			r = uniform_index(rng, 0, population_size - 1);
		} while (r == base || std::find(picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(k), r) !=
		                          picked.begin() + static_cast<std::ptrdiff_t>(k));
		picked[k] = r;
	}
	return {picked[0], picked[1], picked[2]};
}

NetworkGenome modulate(Strategy strategy, const NetworkGenome &current, const NetworkGenome &best,
                       const NetworkGenome &r1, const NetworkGenome &r2, const NetworkGenome &r3, double rate) {
	const NetworkGenome *base = nullptr;
	switch (strategy) {
	case Strategy::Qarm: base = &r1; break;
	case Strategy::Qaco: base = &current; break;
	case Strategy::Qaom: base = &best; break;
	}
	const auto base_layout = layout(base->architecture());
	std::vector<double> out(base->phases().begin(), base->phases().end());
	switch (strategy) {
	case Strategy::Qarm:
		add_scaled_difference(out, base_layout, r2, r3, rate);
		break;
	case Strategy::Qaco:
		add_scaled_difference(out, base_layout, best, current, rate);
		add_scaled_difference(out, base_layout, r1, r2, rate);
		break;
	case Strategy::Qaom:
		add_scaled_difference(out, base_layout, r1, r2, rate);
		break;
	}
	return NetworkGenome(base->architecture(), std::move(out));
}

NetworkGenome modulate(Strategy strategy, std::size_t base_index, const Population &population,
                       const NetworkGenome &best, double rate, std::mt19937_64 &rng) {
	const auto d = pick_donors(base_index, population.candidates.size(), rng);
	const auto &c = population.candidates;
	return modulate(strategy, c[base_index], best, c[d.r1], c[d.r2], c[d.r3], rate);
}

RecombinationCut draw_cut(const Architecture &a, const Architecture &b, std::mt19937_64 &rng) {
	RecombinationCut cut;
	cut.level = uniform_index(rng, 1, std::min(a.depth(), b.depth()));
	const auto p1 = a.hidden_widths[cut.level - 1];
	const auto p2 = b.hidden_widths[cut.level - 1];
	cut.cut1 = uniform_index(rng, 1, p1);
	cut.cut2 = p1 == p2 ? cut.cut1 : uniform_index(rng, 1, p2);
	return cut;
}

std::pair<NetworkGenome, NetworkGenome> recombine(const NetworkGenome &parent1, const NetworkGenome &parent2,
                                                  const RecombinationCut &cut, std::mt19937_64 &rng) {
	const auto &a = parent1.architecture();
	const auto &b = parent2.architecture();
	if (cut.level < 1 || cut.level > std::min(a.depth(), b.depth())) {
		throw Error(ErrorCode::InvalidParams, "recombination level outside the shared hidden depth");
	}
	const auto p1 = a.hidden_widths[cut.level - 1];
	const auto p2 = b.hidden_widths[cut.level - 1];
	if (cut.cut1 < 1 || cut.cut1 > p1 || cut.cut2 < 1 || cut.cut2 > p2) {
		throw Error(ErrorCode::InvalidParams, "recombination cut outside the layer");
	}
	auto child1 = build_child(parent1, parent2, cut.level, cut.cut1, cut.cut2, rng);
	auto child2 = build_child(parent2, parent1, cut.level, cut.cut2, cut.cut1, rng);
	return {std::move(child1), std::move(child2)};
}

std::pair<NetworkGenome, NetworkGenome> recombine(const NetworkGenome &parent1, const NetworkGenome &parent2,
                                                  std::mt19937_64 &rng) {
	const auto cut = draw_cut(parent1.architecture(), parent2.architecture(), rng);
	return recombine(parent1, parent2, cut, rng);
}

SurvivorDecision select_survivor(const Scored &current, const std::vector<Scored> &children) {
	if (children.empty()) {
		return {current, false};
	}
	const auto best_child = std::min_element(children.begin(), children.end(),
	                                         [](const Scored &x, const Scored &y) { return x.fitness < y.fitness; });
	if (best_child->fitness <= current.fitness) {
		return {*best_child, true};
	}
	return {current, false};
}

StrategyState update_probabilities(const StrategyState &state) {
	std::array<double, kStrategyCount> e{};
	std::array<double, kStrategyCount> f{};
	for (std::size_t k = 0; k < kStrategyCount; ++k) {
		e[k] = static_cast<double>(state.successes[k]) + 1.0;
		f[k] = static_cast<double>(state.failures[k]);
	}
	const double st = 2.0 * (e[1] * e[2] + e[0] * e[2] + e[0] * e[1]) + f[0] * (e[1] + e[2]) + f[1] * (e[0] + e[2]) +
	                  f[2] * (e[0] + e[1]);
	StrategyState next;
	next.probabilities[0] = e[0] * (e[1] + f[1] + e[2] + f[2]) / st;
	next.probabilities[1] = e[1] * (e[0] + f[0] + e[2] + f[2]) / st;
	next.probabilities[2] = 1.0 - (next.probabilities[0] + next.probabilities[1]);
	return next;
}

std::vector<double> TrainingReport::best_fitness_trajectory() const {
	std::vector<double> out;
	out.reserve(generations.size());
	for (const auto &g : generations) {
		out.push_back(g.best_fitness);
	}
	return out;
}

Trainer::Trainer(TrainingConfig config, FitnessFunction fitness)
    : config_(std::move(config)), fitness_(std::move(fitness)) {
	config_.validate();
	ForwardStats stats;
	population_ = init_population(config_, fitness_, &stats);
	state_.probabilities = config_.initial_probabilities;
	report_.degenerate_args = stats.degenerate_args;
	record_generation({}, {});
}

Trainer::Trainer(Checkpoint checkpoint, FitnessFunction fitness)
    : config_(std::move(checkpoint.config)), fitness_(std::move(fitness)),
      population_(std::move(checkpoint.population)), state_(checkpoint.state), report_(std::move(checkpoint.report)) {
	config_.validate();
	if (population_.candidates.size() != config_.population_size ||
	    population_.fitness.size() != config_.population_size) {
		throw Error(ErrorCode::MalformedCheckpoint, "checkpoint population size disagrees with its config");
	}
}

bool Trainer::done() const noexcept {
	return population_.generation >= config_.generations;
}

void Trainer::record_generation(const std::array<std::uint64_t, kStrategyCount> &successes,
                                const std::array<std::uint64_t, kStrategyCount> &failures) {
	GenerationRecord rec;
	rec.generation = population_.generation;
	rec.best_fitness = population_.best_fitness();
	rec.probabilities = state_.probabilities;
	rec.successes = successes;
	rec.failures = failures;
	rec.best_hidden_widths = population_.best().architecture().hidden_widths;
	report_.generations.push_back(std::move(rec));
	report_.final_probabilities = state_.probabilities;
}

void Trainer::step() {
	if (done()) {
		return;
	}
	const std::size_t n = population_.candidates.size();
	const std::uint64_t gen = population_.generation + 1;

	if (config_.mode == AblationMode::FixedAll) {
		population_.generation = gen;
		record_generation({}, {});
		return;
	}

	struct Outcome {
		Strategy strategy = Strategy::Qarm;
		SurvivorDecision decision;
		ForwardStats stats;
	};
	std::vector<Outcome> outcomes(n);
	const NetworkGenome best = population_.best();

	parallel_for(n, config_.threads, [&](std::size_t i) {
		auto rng = stream_rng(config_.seed, gen, i);
		auto &out = outcomes[i];
		const double mss = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
		out.strategy = select_strategy(mss, state_);
		const double rate = sample_modulation_rate(rng, config_.rate_mean, config_.rate_stddev);
		auto modulated = modulate(out.strategy, i, population_, best, rate, rng);
		auto [c1, c2] = recombine(population_.candidates[i], modulated, rng);
		std::vector<Scored> children;
		children.reserve(2);
		const double f1 = fitness_(c1, out.stats);
		const double f2 = fitness_(c2, out.stats);
		children.push_back({std::move(c1), f1});
		children.push_back({std::move(c2), f2});
		out.decision = select_survivor({population_.candidates[i], population_.fitness[i]}, children);
	});

	std::array<std::uint64_t, kStrategyCount> successes{};
	std::array<std::uint64_t, kStrategyCount> failures{};
	for (std::size_t i = 0; i < n; ++i) {
		auto &out = outcomes[i];
		state_.record(out.strategy, out.decision.succeeded);
		const auto k = static_cast<std::size_t>(out.strategy);
		(out.decision.succeeded ? successes[k] : failures[k]) += 1;
		report_.degenerate_args += out.stats.degenerate_args;
		population_.candidates[i] = std::move(out.decision.survivor.genome);
		population_.fitness[i] = out.decision.survivor.fitness;
	}
	for (std::size_t k = 0; k < kStrategyCount; ++k) {
		report_.success_totals[k] += successes[k];
		report_.failure_totals[k] += failures[k];
	}
	state_ = update_probabilities(state_);
	population_.generation = gen;
	population_.refresh_best();
	record_generation(successes, failures);
}

void Trainer::run() {
	while (!done()) {
		step();
	}
}

Checkpoint Trainer::checkpoint() const {
	return {config_, population_, state_, report_};
}

TrainingResult Trainer::result() const {
	return {population_.best(), population_.best_fitness(), report_};
}

TrainingResult train(const TrainingConfig &config, const WindowedDataset &train_data) {
	if (train_data.window_size() != config.window_size) {
		throw Error(ErrorCode::Incompatible, "dataset window size differs from the configured window size");
	}
	return train(config, rmse_fitness(train_data));
}

TrainingResult train(const TrainingConfig &config, const FitnessFunction &fitness) {
	Trainer trainer(config, fitness);
	trainer.run();
	return trainer.result();
}

ConvergenceDiagnostics convergence_monitor(const std::vector<double> &best_fitness, std::size_t patience) {
	ConvergenceDiagnostics diag;
	for (std::size_t t = 1; t < best_fitness.size(); ++t) {
		const double prev = best_fitness[t - 1];
		const double cur = best_fitness[t];
		if (cur > prev) {
			throw Error(ErrorCode::MonotonicityViolation,
			            "best fitness increased at generation " + std::to_string(t));
		}
		if (cur < prev) {
			diag.total_descent += prev - cur;
			diag.improvements += 1;
			diag.trailing_flat_steps = 0;
		} else {
			diag.trailing_flat_steps += 1;
		}
	}
	diag.stagnated = patience > 0 && diag.trailing_flat_steps >= patience;
	return diag;
}

ConvergenceDiagnostics convergence_monitor(const TrainingReport &report, std::size_t patience) {
	return convergence_monitor(report.best_fitness_trajectory(), patience);
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)> &fn) {
	const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), count);
	if (workers <= 1) {
		for (std::size_t i = 0; i < count; ++i) {
			fn(i);
		}
		return;
	}
	std::atomic<std::size_t> next{0};
	std::exception_ptr failure;
	std::mutex failure_mutex;
	auto work = [&] {
		for (std::size_t i = next++; i < count; i = next++) {
			try {
				fn(i);
			} catch (...) {
				std::lock_guard lock(failure_mutex);
				if (!failure) {
					failure = std::current_exception();
				}
			}
		}
	};
	std::vector<std::jthread> pool;
	pool.reserve(workers - 1);
	for (std::size_t w = 1; w < workers; ++w) {
		pool.emplace_back(work);
	}
	work();
	pool.clear();
	if (failure) {
		std::rethrow_exception(failure);
	}
}

} // namespace qevo
