#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace qevo {

class WindowedDataset;

inline constexpr double kHalfPi = 1.57079632679489661923;

/// Layer widths of a qubit-neuron network. The output layer is always a
/// single neuron.
struct Architecture {
	std::size_t input_width = 1;
	std::vector<std::size_t> hidden_widths{1};
	std::size_t output_width = 1;

	std::size_t depth() const noexcept {
		return hidden_widths.size();
	}
	/// [input, hidden..., output]
	std::vector<std::size_t> widths() const;
	void validate() const;

	friend bool operator==(const Architecture &, const Architecture &) = default;
};

/// Offsets of one layer transition's blocks inside the flat phase vector.
/// Weights are stored source-major: entry (i, j) lives at weight_offset + i * to + j.
struct TransitionLayout {
	std::size_t from = 0;
	std::size_t to = 0;
	std::size_t weight_offset = 0;
	bool has_bias = false;
	std::size_t bias_offset = 0;
	std::size_t reversal_offset = 0;

	std::size_t weight_count() const noexcept {
		return from * to;
	}
	std::size_t end() const noexcept {
		return reversal_offset + to;
	}
};

struct GenomeLayout {
	std::vector<TransitionLayout> transitions;
	std::size_t total = 0;
};

/// Hidden transitions carry weight, bias and reversal blocks; the output
/// transition carries weights and reversal only.
GenomeLayout layout(const Architecture &arch);

/// Architecture plus the flat phase vector it indexes. Construction checks the
/// length against `layout(architecture)`.
class NetworkGenome {
public:
	NetworkGenome() = default;
	NetworkGenome(Architecture arch, std::vector<double> phases);

	const Architecture &architecture() const noexcept {
		return arch_;
	}
	std::span<const double> phases() const noexcept {
		return phases_;
	}
	std::span<double> mutable_phases() noexcept {
		return phases_;
	}
	std::size_t size() const noexcept {
		return phases_.size();
	}

	friend bool operator==(const NetworkGenome &, const NetworkGenome &) = default;

private:
	Architecture arch_;
	std::vector<double> phases_;
};

using QubitState = std::complex<double>;

/// Weight and bias phases uniform in [-pi/2, pi/2], reversal parameters uniform in [-1, 1].
NetworkGenome random_genome(const Architecture &arch, std::mt19937_64 &rng);

std::vector<double> encode_input(std::span<const double> normalized_row);

inline QubitState activate(double phase) {
	return {std::cos(phase), std::sin(phase)};
}

double sigmoid(double x);

/// Sum of activate(weight) * incoming, minus activate(bias) when a bias is given.
QubitState neuron_aggregate(std::span<const QubitState> incoming, std::span<const double> weight_phases,
                            const double *bias_phase = nullptr);

struct RotationResult {
	double phase = 0.0;
	bool degenerate = false; // aggregate was exactly zero; arg taken as 0
};

/// (pi/2) * sigmoid(reversal) - arg(u).
RotationResult reverse_rotate(QubitState u, double reversal);

double qubit_vector_magnitude(std::span<const QubitState> states);

struct ForwardStats {
	std::size_t degenerate_args = 0;
};

/// Full forward pass; result is sin^2 of the output phase, in [0,1].
double forward(const NetworkGenome &genome, std::span<const double> normalized_row, ForwardStats *stats = nullptr);

/// Genome with trigonometric terms of weights, biases and reversal gates
/// precomputed, for repeated evaluation over many rows.
class CompiledNetwork {
public:
	explicit CompiledNetwork(const NetworkGenome &genome);

	double predict(std::span<const double> normalized_row, ForwardStats *stats = nullptr) const;
	std::vector<double> predict_all(const WindowedDataset &data, ForwardStats *stats = nullptr) const;

	std::size_t input_width() const noexcept {
		return input_width_;
	}

private:
	struct Layer {
		std::size_t from = 0;
		std::size_t to = 0;
		std::vector<double> w_re, w_im; // source-major like the genome
		std::vector<double> b_re, b_im; // empty for the output layer
		std::vector<double> gate;       // (pi/2) * sigmoid(reversal)
	};

	std::size_t input_width_ = 0;
	std::size_t max_width_ = 0;
	std::vector<Layer> layers_;
};

} // namespace qevo
