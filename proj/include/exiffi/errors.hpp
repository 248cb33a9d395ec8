#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace exiffi {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be opened, read or written.
struct IoError : Error {
    using Error::Error;
};

// Malformed cell or row in a text input.  Carries the 1-based data row and
// column where parsing failed (0 when not applicable).
struct ParseError : Error {
    std::size_t row = 0;
    std::size_t column = 0;
    ParseError(const std::string& msg, std::size_t r = 0, std::size_t c = 0)
        : Error(msg), row(r), column(c) {}
};

// Header-level problems: duplicate or empty column names, missing label
// column, non-binary labels.
struct SchemaError : Error {
    using Error::Error;
};

// Argument outside its documented domain (fractions, counts, geometry).
struct DomainError : Error {
    using Error::Error;
};

// Mismatched vector / matrix dimensions.
struct ShapeError : Error {
    using Error::Error;
};

// Operation requires state that was never established (e.g. predicting with
// an unresolved contamination level).
struct StateError : Error {
    using Error::Error;
};

// A computation hit a degenerate configuration that valid inputs cannot
// produce (e.g. an internal node with an empty side).
struct DegenerateError : Error {
    using Error::Error;
};

// Both classes of a binary partition are required but one is empty.
struct PartitionError : Error {
    using Error::Error;
};

// Labels required but absent.
struct LabelError : Error {
    using Error::Error;
};

// A feature ranking is not a permutation of the feature indices.
struct RankError : Error {
    using Error::Error;
};

// Two curves that must share an evaluation grid do not.
struct GridError : Error {
    using Error::Error;
};

// Feature or row index out of range, or an invalid index pair.
struct IndexError : Error {
    using Error::Error;
};

// Model file written by a newer format revision.
struct VersionError : Error {
    using Error::Error;
};

// Model file truncated or failing its checksum / structural validation.
struct CorruptionError : Error {
    using Error::Error;
};

}  // namespace exiffi
