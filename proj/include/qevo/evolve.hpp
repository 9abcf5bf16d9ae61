#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qevo/qnn.hpp"

namespace qevo {

class WindowedDataset;

enum class Strategy : std::uint8_t {
	Qarm, // randomized: r1 + R (r2 - r3)
	Qaco, // current-to-optimal: x + R (best - x) + R (r1 - r2)
	Qaom, // optimal: best + R (r1 - r2)
};
inline constexpr std::size_t kStrategyCount = 3;

const char *to_string(Strategy s);

/// Self-adaptive roulette state. Counters hold the current generation's
/// outcomes and are cleared by `update_probabilities`.
struct StrategyState {
	std::array<double, kStrategyCount> probabilities{0.33, 0.33, 0.34};
	std::array<std::uint64_t, kStrategyCount> successes{};
	std::array<std::uint64_t, kStrategyCount> failures{};

	void record(Strategy s, bool succeeded) {
		auto k = static_cast<std::size_t>(s);
		(succeeded ? successes[k] : failures[k]) += 1;
	}

	friend bool operator==(const StrategyState &, const StrategyState &) = default;
};

enum class AblationMode : std::uint8_t {
	Full,      // architectures and parameters both evolve
	FixedArch, // one shared architecture, parameters evolve
	FixedAll,  // initial random population only
};

const char *to_string(AblationMode m);
AblationMode parse_ablation_mode(const std::string &text);

struct TrainingConfig {
	std::size_t population_size = 80;
	std::size_t generations = 50;
	std::size_t window_size = 10;
	std::size_t min_hidden_width = 5;
	std::size_t max_hidden_width = 10;
	std::size_t min_depth = 1;
	std::size_t max_depth = 4;
	double rate_mean = 0.5;
	double rate_stddev = 0.3;
	std::array<double, kStrategyCount> initial_probabilities{0.33, 0.33, 0.34};
	std::uint64_t seed = 1;
	AblationMode mode = AblationMode::Full;
	std::size_t stagnation_patience = 10;
	std::size_t threads = 1; // evaluation workers; results never depend on it

	void validate() const;
};

struct Population {
	std::vector<NetworkGenome> candidates;
	std::vector<double> fitness;
	std::size_t best_index = 0;
	std::size_t generation = 0;

	const NetworkGenome &best() const {
		return candidates[best_index];
	}
	double best_fitness() const {
		return fitness[best_index];
	}
	/// argmin of fitness, lowest index on ties.
	void refresh_best();
};

/// Must be safe to call concurrently. Increments degenerate-argument
/// counts into `stats`.
using FitnessFunction = std::function<double(const NetworkGenome &, ForwardStats &)>;

/// RMSE of the genome's predictions against the dataset targets.
FitnessFunction rmse_fitness(const WindowedDataset &train_data);

/// Independent RNG stream keyed by (seed, generation, slot). Slots index
/// candidates; the maximum slot value is reserved for the shared architecture.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t generation, std::uint64_t slot);

Architecture sample_architecture(const TrainingConfig &config, std::mt19937_64 &rng);

Population init_population(const TrainingConfig &config, const FitnessFunction &fitness,
                           ForwardStats *stats = nullptr);

/// Normal(mean, stddev) redrawn until strictly inside (0, 1).
double sample_modulation_rate(std::mt19937_64 &rng, double mean = 0.5, double stddev = 0.3);

/// Roulette wheel over the cumulative probabilities.
Strategy select_strategy(double mss, const StrategyState &state);

struct Donors {
	std::size_t r1 = 0;
	std::size_t r2 = 0;
	std::size_t r3 = 0;
};

/// Three mutually distinct indices in [0, population_size), none equal to `base`.
Donors pick_donors(std::size_t base, std::size_t population_size, std::mt19937_64 &rng);

/// Applies one modulation strategy. Blocks are matched transition by transition
/// (hidden to hidden by index, output to output); each difference term acts on
/// the prefix its two vectors share with the base, other entries keep the base
/// value. The result takes the base vector's architecture.
NetworkGenome modulate(Strategy strategy, const NetworkGenome &current, const NetworkGenome &best,
                       const NetworkGenome &r1, const NetworkGenome &r2, const NetworkGenome &r3, double rate);

/// Picks donors from the population and modulates candidate `base_index`.
NetworkGenome modulate(Strategy strategy, std::size_t base_index, const Population &population,
                       const NetworkGenome &best, double rate, std::mt19937_64 &rng);

struct RecombinationCut {
	std::size_t level = 1; // hidden layer, 1-based
	std::size_t cut1 = 1;  // neurons kept from parent 1's layer, 1-based
	std::size_t cut2 = 1;  // neurons kept from parent 2's layer, 1-based
};

/// Draws a cut. Equal layer widths share a single cut point so the
/// exchange preserves width; unequal widths draw independent cuts.
RecombinationCut draw_cut(const Architecture &a, const Architecture &b, std::mt19937_64 &rng);

/// Whole-neuron bundle exchange at one hidden level. Child 1 keeps parent 1's
/// first `cut1` neurons followed by parent 2's neurons after `cut2`; child 2 is
/// the mirror image. Each bundle carries its incoming weight column, bias,
/// reversal parameter and outgoing weight row; columns and rows are truncated
/// or padded with uniform [-pi/2, pi/2] phases to fit the child.
std::pair<NetworkGenome, NetworkGenome> recombine(const NetworkGenome &parent1, const NetworkGenome &parent2,
                                                  const RecombinationCut &cut, std::mt19937_64 &rng);

std::pair<NetworkGenome, NetworkGenome> recombine(const NetworkGenome &parent1, const NetworkGenome &parent2,
                                                  std::mt19937_64 &rng);

struct Scored {
	NetworkGenome genome;
	double fitness = 0.0;
};

struct SurvivorDecision {
	Scored survivor;
	bool succeeded = false;
};

/// Best child (first on ties) replaces the incumbent when its fitness is <= the incumbent's.
SurvivorDecision select_survivor(const Scored &current, const std::vector<Scored> &children);

/// Laplace-smoothed success-ratio update; counters are reset in the result.
StrategyState update_probabilities(const StrategyState &state);

struct GenerationRecord {
	std::size_t generation = 0;
	double best_fitness = 0.0;
	std::array<double, kStrategyCount> probabilities{};
	std::array<std::uint64_t, kStrategyCount> successes{};
	std::array<std::uint64_t, kStrategyCount> failures{};
	std::vector<std::size_t> best_hidden_widths;
};

struct TrainingReport {
	std::vector<GenerationRecord> generations; // entry 0 is the initial population
	std::array<std::uint64_t, kStrategyCount> success_totals{};
	std::array<std::uint64_t, kStrategyCount> failure_totals{};
	std::array<double, kStrategyCount> final_probabilities{};
	std::uint64_t degenerate_args = 0;

	std::vector<double> best_fitness_trajectory() const;
};

struct TrainingResult {
	NetworkGenome best;
	double best_fitness = 0.0;
	TrainingReport report;
};

/// Resumable snapshot between generations.
struct Checkpoint {
	TrainingConfig config;
	Population population;
	StrategyState state;
	TrainingReport report;
};

/// Drives the generational loop one step at a time so runs can be checkpointed.
class Trainer {
public:
	Trainer(TrainingConfig config, FitnessFunction fitness);
	Trainer(Checkpoint checkpoint, FitnessFunction fitness);

	bool done() const noexcept;
	/// Runs one generation: modulation, recombination, evaluation, adoption,
	/// then the probability update.
	void step();
	void run();

	const Population &population() const noexcept {
		return population_;
	}
	const StrategyState &strategy_state() const noexcept {
		return state_;
	}
	const TrainingReport &report() const noexcept {
		return report_;
	}
	Checkpoint checkpoint() const;
	TrainingResult result() const;

private:
	void record_generation(const std::array<std::uint64_t, kStrategyCount> &successes,
	                       const std::array<std::uint64_t, kStrategyCount> &failures);

	TrainingConfig config_;
	FitnessFunction fitness_;
	Population population_;
	StrategyState state_;
	TrainingReport report_;
};

TrainingResult train(const TrainingConfig &config, const WindowedDataset &train_data);
TrainingResult train(const TrainingConfig &config, const FitnessFunction &fitness);

struct ConvergenceDiagnostics {
	double total_descent = 0.0;
	std::size_t improvements = 0;
	std::size_t trailing_flat_steps = 0;
	bool stagnated = false;
};

/// Checks the best-so-far sequence never increases (throws
/// MonotonicityViolation otherwise) and summarizes the descent.
ConvergenceDiagnostics convergence_monitor(const std::vector<double> &best_fitness, std::size_t patience);
ConvergenceDiagnostics convergence_monitor(const TrainingReport &report, std::size_t patience);

/// Runs `fn(i)` for i in [0, count) across up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)> &fn);

} // namespace qevo
