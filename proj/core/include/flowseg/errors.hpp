#pragma once

#include <stdexcept>
#include <string>

namespace flowseg {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed .flo / PPM / PGM input.
struct FormatError : Error {
    enum class Kind { BadMagic, Truncated, BadDims, NonFinite, BadHeader };

    FormatError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
    Kind kind;
};

/// Weighted model fit could not be carried out.
struct FitError : Error {
    enum class Kind { DegenerateWeights, SingularSystem };

    FitError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
    Kind kind;
};

/// Every EM initialization failed with a solver error.
struct AllInitsFailed : Error {
    using Error::Error;
};

struct DimMismatch : Error {
    using Error::Error;
};

struct LabelOutOfRange : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

/// Region predicates passed to synth_flow do not partition the grid.
struct NonPartition : Error {
    using Error::Error;
};

}  // namespace flowseg
