#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qevo {

enum class Resource { Cpu, Memory };

struct Sample {
	double timestamp = 0.0; // seconds since epoch
	double value = 0.0;
};

/// Timestamped usage samples of one machine and resource kind.
/// Timestamps are strictly increasing once produced by `parse_trace`.
struct RawTrace {
	std::string machine_id;
	Resource resource = Resource::Cpu;
	std::vector<Sample> samples;
};

/// Mean usage per prediction-interval bucket.
struct AggregatedSeries {
	int interval_minutes = 1;
	std::vector<double> values;
};

/// Where to find the timestamp and value columns. A column is addressed by
/// header name when `has_header` is set and the name is non-numeric,
/// otherwise by zero-based index.
struct ColumnMapping {
	std::string timestamp_col = "0";
	std::string value_col = "1";
	char delimiter = ',';
	bool has_header = true;
	double timestamp_scale = 1.0; // multiplier to seconds, e.g. 1e-6 for microsecond traces
	std::string machine_id;
	Resource resource = Resource::Cpu;
};

RawTrace parse_trace_text(const std::string &text, const ColumnMapping &mapping);
RawTrace parse_trace(const std::filesystem::path &path, const ColumnMapping &mapping);

/// Bucket b covers [b*PI, (b+1)*PI) measured from the first sample, in minutes.
/// Empty buckets are linearly interpolated from their non-empty neighbours;
/// leading and trailing gaps copy the nearest value.
AggregatedSeries aggregate(const RawTrace &trace, int interval_minutes);

/// Per-bucket sample counts, same bucketing as `aggregate`.
std::vector<std::size_t> bucket_counts(const RawTrace &trace, int interval_minutes);

} // namespace qevo
