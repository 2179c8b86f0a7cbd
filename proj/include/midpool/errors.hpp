#pragma once

#include <stdexcept>
#include <string>

namespace midpool {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NormalizationError : public Error {
public:
    using Error::Error;
};

class SelectionError : public Error {
public:
    using Error::Error;
};

class DiagnosticError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Dataset files missing or unreadable.
class IngestionError : public Error {
public:
    using Error::Error;
};

/// Malformed dataset content; carries the offending 1-based line number.
class ParseError : public IngestionError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : IngestionError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class TrainingDivergedError : public Error {
public:
    explicit TrainingDivergedError(int epoch)
        : Error("training diverged (non-finite loss) at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace midpool
