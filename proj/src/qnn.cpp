#include "qevo/qnn.hpp"

#include "qevo/dataset.hpp"
#include "qevo/error.hpp"

#include <cmath>

namespace qevo {

std::vector<std::size_t> Architecture::widths() const {
	std::vector<std::size_t> w;
	w.reserve(hidden_widths.size() + 2);
	w.push_back(input_width);
	w.insert(w.end(), hidden_widths.begin(), hidden_widths.end());
	w.push_back(output_width);
	return w;
}

void Architecture::validate() const {
	if (input_width == 0) {
		throw Error(ErrorCode::InvalidParams, "input width must be positive");
	}
	if (hidden_widths.empty()) {
		throw Error(ErrorCode::InvalidParams, "at least one hidden layer is required");
	}
	for (auto w : hidden_widths) {
		if (w == 0) {
			throw Error(ErrorCode::InvalidParams, "hidden widths must be positive");
		}
	}
	if (output_width != 1) {
		throw Error(ErrorCode::InvalidParams, "output width must be 1");
	}
}

GenomeLayout layout(const Architecture &arch) {
	arch.validate();
	const auto w = arch.widths();
	GenomeLayout out;
	std::size_t offset = 0;
	for (std::size_t l = 0; l + 1 < w.size(); ++l) {
		TransitionLayout t;
		t.from = w[l];
		t.to = w[l + 1];
		t.weight_offset = offset;
		offset += t.from * t.to;
		t.has_bias = l + 2 < w.size();
		if (t.has_bias) {
			t.bias_offset = offset;
			offset += t.to;
		}
		t.reversal_offset = offset;
		offset += t.to;
		out.transitions.push_back(t);
	}
	out.total = offset;
	return out;
}

NetworkGenome::NetworkGenome(Architecture arch, std::vector<double> phases)
    : arch_(std::move(arch)), phases_(std::move(phases)) {
	const auto expected = layout(arch_).total;
	if (phases_.size() != expected) {
		throw Error(ErrorCode::DimensionMismatch, "genome has " + std::to_string(phases_.size()) +
		                                              " phases, layout requires " + std::to_string(expected));
	}
	for (double p : phases_) {
		if (!std::isfinite(p)) {
			throw Error(ErrorCode::InvalidParams, "genome phases must be finite");
		}
	}
}

NetworkGenome random_genome(const Architecture &arch, std::mt19937_64 &rng) {
	const auto lay = layout(arch);
	std::uniform_real_distribution<double> phase(-kHalfPi, kHalfPi);
	std::uniform_real_distribution<double> reversal(-1.0, 1.0);
	std::vector<double> phases(lay.total);
	for (const auto &t : lay.transitions) {
		for (std::size_t k = 0; k < t.weight_count(); ++k) {
			phases[t.weight_offset + k] = phase(rng);
		}
		if (t.has_bias) {
			for (std::size_t k = 0; k < t.to; ++k) {
				phases[t.bias_offset + k] = phase(rng);
			}
		}
		for (std::size_t k = 0; k < t.to; ++k) {
			phases[t.reversal_offset + k] = reversal(rng);
		}
	}
	return NetworkGenome(arch, std::move(phases));
}

std::vector<double> encode_input(std::span<const double> normalized_row) {
	std::vector<double> out;
	out.reserve(normalized_row.size());
	for (double d : normalized_row) {
		out.push_back(kHalfPi * d);
	}
	return out;
}

double sigmoid(double x) {
	return 1.0 / (1.0 + std::exp(-x));
}

QubitState neuron_aggregate(std::span<const QubitState> incoming, std::span<const double> weight_phases,
                            const double *bias_phase) {
	if (incoming.size() != weight_phases.size() || incoming.empty()) {
		throw Error(ErrorCode::DimensionMismatch, "aggregate needs one weight per incoming state");
	}
	QubitState u{0.0, 0.0};
	for (std::size_t i = 0; i < incoming.size(); ++i) {
		u += activate(weight_phases[i]) * incoming[i];
	}
	if (bias_phase != nullptr) {
		u -= activate(*bias_phase);
	}
	return u;
}

RotationResult reverse_rotate(QubitState u, double reversal) {
	const bool degenerate = u.real() == 0.0 && u.imag() == 0.0;
	const double arg = degenerate ? 0.0 : std::atan2(u.imag(), u.real());
	return {kHalfPi * sigmoid(reversal) - arg, degenerate};
}

double qubit_vector_magnitude(std::span<const QubitState> states) {
	double acc = 0.0;
	for (const auto &s : states) {
		acc += std::norm(s);
	}
	return std::sqrt(acc);
}

double forward(const NetworkGenome &genome, std::span<const double> normalized_row, ForwardStats *stats) {
	return CompiledNetwork(genome).predict(normalized_row, stats);
}

CompiledNetwork::CompiledNetwork(const NetworkGenome &genome) : input_width_(genome.architecture().input_width) {
	const auto lay = layout(genome.architecture());
	const auto phases = genome.phases();
	max_width_ = input_width_;
	for (const auto &t : lay.transitions) {
		Layer layer;
		layer.from = t.from;
		layer.to = t.to;
		layer.w_re.resize(t.weight_count());
		layer.w_im.resize(t.weight_count());
		for (std::size_t k = 0; k < t.weight_count(); ++k) {
			layer.w_re[k] = std::cos(phases[t.weight_offset + k]);
			layer.w_im[k] = std::sin(phases[t.weight_offset + k]);
		}
		if (t.has_bias) {
			layer.b_re.resize(t.to);
			layer.b_im.resize(t.to);
			for (std::size_t j = 0; j < t.to; ++j) {
				layer.b_re[j] = std::cos(phases[t.bias_offset + j]);
				layer.b_im[j] = std::sin(phases[t.bias_offset + j]);
			}
		}
		layer.gate.resize(t.to);
		for (std::size_t j = 0; j < t.to; ++j) {
			layer.gate[j] = kHalfPi * sigmoid(phases[t.reversal_offset + j]);
		}
		max_width_ = std::max(max_width_, t.to);
		layers_.push_back(std::move(layer));
	}
}

double CompiledNetwork::predict(std::span<const double> normalized_row, ForwardStats *stats) const {
	if (normalized_row.size() != input_width_) {
		throw Error(ErrorCode::DimensionMismatch, "row has " + std::to_string(normalized_row.size()) +
		                                              " values, network expects " + std::to_string(input_width_));
	}
	// Layer states (y) are overwritten in place once a layer's aggregates (u) are complete.
	thread_local std::vector<double> y_re, y_im, u_re, u_im;
	y_re.resize(max_width_);
	y_im.resize(max_width_);
	u_re.resize(max_width_);
	u_im.resize(max_width_);

	for (std::size_t i = 0; i < input_width_; ++i) {
		const double psi = kHalfPi * normalized_row[i];
		y_re[i] = std::cos(psi);
		y_im[i] = std::sin(psi);
	}

	double out_phase = 0.0;
	for (const auto &layer : layers_) {
		const std::size_t to = layer.to;
		if (layer.b_re.empty()) {
			std::fill_n(u_re.begin(), to, 0.0);
			std::fill_n(u_im.begin(), to, 0.0);
		} else {
			for (std::size_t j = 0; j < to; ++j) {
				u_re[j] = -layer.b_re[j];
				u_im[j] = -layer.b_im[j];
			}
		}
		for (std::size_t i = 0; i < layer.from; ++i) {
			const double yr = y_re[i];
			const double yi = y_im[i];
			const double *wr = layer.w_re.data() + i * to;
			const double *wi = layer.w_im.data() + i * to;
			for (std::size_t j = 0; j < to; ++j) {
				u_re[j] += wr[j] * yr - wi[j] * yi;
				u_im[j] += wr[j] * yi + wi[j] * yr;
			}
		}
		for (std::size_t j = 0; j < to; ++j) {
			double arg = 0.0;
			if (u_re[j] == 0.0 && u_im[j] == 0.0) {
				if (stats != nullptr) {
					++stats->degenerate_args;
				}
			} else {
				arg = std::atan2(u_im[j], u_re[j]);
			}
			const double psi = layer.gate[j] - arg;
			y_re[j] = std::cos(psi);
			y_im[j] = std::sin(psi);
			out_phase = psi;
		}
	}
	// Output layer has exactly one neuron, so its phase is the last one written.
	const double s = std::sin(out_phase);
	return s * s;
}

std::vector<double> CompiledNetwork::predict_all(const WindowedDataset &data, ForwardStats *stats) const {
	std::vector<double> out;
	out.reserve(data.rows());
	for (std::size_t i = 0; i < data.rows(); ++i) {
		out.push_back(predict(data.row(i), stats));
	}
	return out;
}

} // namespace qevo
