#pragma once

#include <stdexcept>
#include <string>

namespace qevo {

enum class ErrorCode {
	FileNotFound,
	MalformedRow,
	EmptyTrace,
	AllBucketsEmpty,
	ConstantSeries,
	InvalidParams,
	SeriesTooShort,
	EmptyPartition,
	DimensionMismatch,
	PopulationTooSmall,
	LengthMismatch,
	EmptyInput,
	MonotonicityViolation,
	MalformedGenome,
	MalformedReport,
	MalformedCheckpoint,
	InvalidConfig,
	Incompatible,
};

const char *to_string(ErrorCode code);

// All domain failures surface as this type; `code()` lets callers branch
// without parsing messages.
class Error : public std::runtime_error {
public:
	Error(ErrorCode code, const std::string &message)
	    : std::runtime_error(message), code_(code) {
	}

	ErrorCode code() const noexcept {
		return code_;
	}

private:
	ErrorCode code_;
};

} // namespace qevo
