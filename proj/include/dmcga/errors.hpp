#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dmcga {

/// Base of every error raised by the library. `stage()` names the pipeline
/// stage that raised it ("load", "rank", "cluster", ...), empty when unknown.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, std::string stage = {})
        : std::runtime_error(what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    std::string stage_;
};

/// Problems with the input data (bad files, degenerate labels, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Caller passed arguments outside an operation's domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// An internal invariant did not hold. Always a bug.
class InvariantError : public Error {
public:
    using Error::Error;
};

class MissingFile : public DataError {
public:
    explicit MissingFile(const std::string& path)
        : DataError("cannot open file: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t row, std::size_t col, const std::string& detail)
        : DataError("parse error at row " + std::to_string(row) + ", column " +
                    std::to_string(col) + ": " + detail),
          row_(row), col_(col) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class NonFiniteValue : public DataError {
public:
    NonFiniteValue(std::size_t row, std::size_t col)
        : DataError("non-finite value at row " + std::to_string(row) + ", column " +
                    std::to_string(col)),
          row_(row), col_(col) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class NotBinaryLabels : public DataError {
public:
    explicit NotBinaryLabels(std::size_t distinct)
        : DataError("expected exactly 2 distinct labels, found " + std::to_string(distinct)),
          distinct_(distinct) {}
    std::size_t distinct() const noexcept { return distinct_; }

private:
    std::size_t distinct_;
};

class DegenerateSplit : public DataError {
public:
    using DataError::DataError;
};

class SingleClass : public DataError {
public:
    SingleClass() : DataError("feature view holds a single class") {}
};

class IndexOutOfRange : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

class TooFewPoints : public ArgumentError {
public:
    TooFewPoints(std::size_t q, std::size_t points)
        : ArgumentError("cannot form " + std::to_string(q) + " clusters from " +
                        std::to_string(points) + " points") {}
};

class EmptyCluster : public InvariantError {
public:
    explicit EmptyCluster(std::size_t cluster)
        : InvariantError("cluster " + std::to_string(cluster) + " has no members") {}
};

class EmptyTrainingSet : public ArgumentError {
public:
    EmptyTrainingSet() : ArgumentError("decision tree needs at least one training sample") {}
};

class WidthMismatch : public ArgumentError {
public:
    WidthMismatch(std::size_t expected, std::size_t got)
        : ArgumentError("row width " + std::to_string(got) + " does not match tree width " +
                        std::to_string(expected)) {}
};

class ExhaustedSpace : public ArgumentError {
public:
    ExhaustedSpace()
        : ArgumentError("mutation needs a feature space strictly larger than the subset") {}
};

}  // namespace dmcga
