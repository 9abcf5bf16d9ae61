#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qevo/qnn.hpp"

// Deliberately naive reference implementations. Nothing here calls into the
// forward-pass or layout code it is used to check.
namespace qevo::testkit {

struct OracleReport {
	double max_abs_deviation = 0.0;
	double tolerance = 0.0;
	std::size_t cases_run = 0;
	std::vector<std::string> failures;

	bool passed() const {
		return failures.empty();
	}
};

/// Phase count implied by an architecture, recomputed from scratch.
std::size_t expected_genome_length(const Architecture &arch);

/// Forward pass with explicit (re, im) arithmetic and independently derived
/// block offsets.
double oracle_forward(const NetworkGenome &genome, std::span<const double> row);

/// Random architecture with the given input width and bounds.
Architecture random_architecture(std::mt19937_64 &rng, std::size_t input_width, std::size_t min_depth,
                                 std::size_t max_depth, std::size_t min_width, std::size_t max_width);

/// Compares `forward` with `oracle_forward` on random small networks.
OracleReport check_forward_equivalence(std::size_t cases, std::mt19937_64 &rng, double tolerance = 1e-10,
                                       std::size_t input_width = 3, std::size_t max_depth = 2,
                                       std::size_t max_width = 3);

/// Recombines random parent pairs (every tenth pair identical) and
/// re-validates each child's structure.
OracleReport check_recombination_validity(std::size_t trials, std::mt19937_64 &rng);

/// Empirical strategy frequencies from uniform roulette draws against the
/// target probabilities.
OracleReport check_selection_distribution(const std::array<double, 3> &probabilities, std::size_t draws,
                                          std::mt19937_64 &rng, double tolerance = 0.01);

} // namespace qevo::testkit
