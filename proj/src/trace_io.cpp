#include "qevo/trace_io.hpp"

#include "qevo/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace qevo {

namespace {

std::vector<std::string> split_fields(const std::string &line, char delimiter) {
	std::vector<std::string> fields;
	std::string field;
	std::istringstream in(line);
	while (std::getline(in, field, delimiter)) {
		auto begin = field.find_first_not_of(" \t\r\"");
		auto end = field.find_last_not_of(" \t\r\"");
		fields.push_back(begin == std::string::npos ? std::string() : field.substr(begin, end - begin + 1));
	}
	if (!line.empty() && line.back() == delimiter) {
		fields.emplace_back();
	}
	return fields;
}

bool parse_double(const std::string &text, double &out) {
	if (text.empty()) {
		return false;
	}
	char *end = nullptr;
	out = std::strtod(text.c_str(), &end);
	return end == text.c_str() + text.size() && std::isfinite(out);
}

bool is_index(const std::string &col) {
	return !col.empty() && std::all_of(col.begin(), col.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::size_t resolve_column(const std::string &col, const std::vector<std::string> &header) {
	for (std::size_t i = 0; i < header.size(); ++i) {
		if (header[i] == col) {
			return i;
		}
	}
	if (is_index(col)) {
		return static_cast<std::size_t>(std::stoul(col));
	}
	throw Error(ErrorCode::InvalidConfig, "column '" + col + "' not found in header");
}

} // namespace

const char *to_string(ErrorCode code) {
	switch (code) {
	case ErrorCode::FileNotFound: return "file-not-found";
	case ErrorCode::MalformedRow: return "malformed-row";
	case ErrorCode::EmptyTrace: return "empty-trace";
	case ErrorCode::AllBucketsEmpty: return "all-buckets-empty";
	case ErrorCode::ConstantSeries: return "constant-series";
	case ErrorCode::InvalidParams: return "invalid-params";
	case ErrorCode::SeriesTooShort: return "series-too-short";
	case ErrorCode::EmptyPartition: return "empty-partition";
	case ErrorCode::DimensionMismatch: return "dimension-mismatch";
	case ErrorCode::PopulationTooSmall: return "population-too-small";
	case ErrorCode::LengthMismatch: return "length-mismatch";
	case ErrorCode::EmptyInput: return "empty-input";
	case ErrorCode::MonotonicityViolation: return "monotonicity-violation";
	case ErrorCode::MalformedGenome: return "malformed-genome";
	case ErrorCode::MalformedReport: return "malformed-report";
	case ErrorCode::MalformedCheckpoint: return "malformed-checkpoint";
	case ErrorCode::InvalidConfig: return "invalid-config";
	case ErrorCode::Incompatible: return "incompatible";
	}
	return "unknown";
}

RawTrace parse_trace_text(const std::string &text, const ColumnMapping &mapping) {
	std::istringstream in(text);
	std::string line;
	std::vector<std::string> header;

	if (mapping.has_header) {
		while (std::getline(in, line)) {
			if (line.find_first_not_of(" \t\r") != std::string::npos) {
				break;
			}
		}
		header = split_fields(line, mapping.delimiter);
		// A header-flagged file whose first line is numeric is treated as data.
		double probe = 0.0;
		bool numeric_first_line = !header.empty() && std::all_of(header.begin(), header.end(), [&](const std::string &f) {
			return parse_double(f, probe);
		});
		if (numeric_first_line) {
			in.clear();
			in.seekg(0);
			header.clear();
		}
	}
	const auto ts_col = resolve_column(mapping.timestamp_col, header);
	const auto val_col = resolve_column(mapping.value_col, header);

	// Data rows are numbered from 1, not counting the header.
	std::map<double, std::pair<double, std::size_t>> by_time;
	std::size_t row = 0;
	while (std::getline(in, line)) {
		if (line.find_first_not_of(" \t\r") == std::string::npos) {
			continue;
		}
		++row;
		auto fields = split_fields(line, mapping.delimiter);
		double ts = 0.0;
		double value = 0.0;
		if (ts_col >= fields.size() || val_col >= fields.size() || !parse_double(fields[ts_col], ts) ||
		    !parse_double(fields[val_col], value) || value < 0.0) {
			throw Error(ErrorCode::MalformedRow, "malformed row " + std::to_string(row) + ": '" + line + "'");
		}
		ts *= mapping.timestamp_scale;
		auto &slot = by_time[ts];
		slot.first += value;
		slot.second += 1;
	}
	if (by_time.empty()) {
		throw Error(ErrorCode::EmptyTrace, "trace contains no data rows");
	}

	RawTrace trace;
	trace.machine_id = mapping.machine_id;
	trace.resource = mapping.resource;
	trace.samples.reserve(by_time.size());
	for (const auto &[ts, acc] : by_time) {
		trace.samples.push_back({ts, acc.first / static_cast<double>(acc.second)});
	}
	return trace;
}

RawTrace parse_trace(const std::filesystem::path &path, const ColumnMapping &mapping) {
	std::ifstream file(path, std::ios::binary);
	if (!file) {
		throw Error(ErrorCode::FileNotFound, "cannot open trace file: " + path.string());
	}
	std::ostringstream buffer;
	buffer << file.rdbuf();
	return parse_trace_text(buffer.str(), mapping);
}

std::vector<std::size_t> bucket_counts(const RawTrace &trace, int interval_minutes) {
	if (interval_minutes < 1) {
		throw Error(ErrorCode::InvalidParams, "interval_minutes must be >= 1");
	}
	if (trace.samples.empty()) {
		throw Error(ErrorCode::EmptyTrace, "trace has no samples");
	}
	const double width = 60.0 * interval_minutes;
	const double origin = trace.samples.front().timestamp;
	const double span = trace.samples.back().timestamp - origin;
	const auto buckets = static_cast<std::size_t>(std::floor(span / width)) + 1;
	std::vector<std::size_t> counts(buckets, 0);
	for (const auto &s : trace.samples) {
		auto b = static_cast<std::size_t>(std::floor((s.timestamp - origin) / width));
		counts[std::min(b, buckets - 1)] += 1;
	}
	return counts;
}

AggregatedSeries aggregate(const RawTrace &trace, int interval_minutes) {
	auto counts = bucket_counts(trace, interval_minutes);
	const double width = 60.0 * interval_minutes;
	const double origin = trace.samples.front().timestamp;
	const std::size_t buckets = counts.size();

	std::vector<double> sums(buckets, 0.0);
	for (const auto &s : trace.samples) {
		auto b = static_cast<std::size_t>(std::floor((s.timestamp - origin) / width));
		sums[std::min(b, buckets - 1)] += s.value;
	}

	std::vector<std::size_t> filled;
	for (std::size_t b = 0; b < buckets; ++b) {
		if (counts[b] > 0) {
			filled.push_back(b);
		}
	}
	if (filled.empty()) {
		throw Error(ErrorCode::AllBucketsEmpty, "no bucket received a sample");
	}

	AggregatedSeries out;
	out.interval_minutes = interval_minutes;
	out.values.assign(buckets, 0.0);
	for (auto b : filled) {
		out.values[b] = sums[b] / static_cast<double>(counts[b]);
	}
	for (std::size_t b = 0; b < filled.front(); ++b) {
		out.values[b] = out.values[filled.front()];
	}
	for (std::size_t b = filled.back() + 1; b < buckets; ++b) {
		out.values[b] = out.values[filled.back()];
	}
	for (std::size_t k = 0; k + 1 < filled.size(); ++k) {
		const auto lo = filled[k];
		const auto hi = filled[k + 1];
		for (auto b = lo + 1; b < hi; ++b) {
			const double t = static_cast<double>(b - lo) / static_cast<double>(hi - lo);
			out.values[b] = out.values[lo] + t * (out.values[hi] - out.values[lo]);
		}
	}
	return out;
}

} // namespace qevo
