#ifndef TPS_ERRORS_HPP
#define TPS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tps {

// Invalid user-supplied configuration (bad spec fields, bad grids, bad counts).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Input value outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Dimension mismatch between conformable arguments.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Linear system too ill-conditioned to solve; carries the condition estimate.
class RankError : public std::runtime_error {
public:
    RankError(const std::string& msg, double condition_estimate)
        : std::runtime_error(msg), condition(condition_estimate) {}
    double condition;
};

// Divergence, NaN objectives and similar runtime numerical breakdowns.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files; message carries row/column diagnostics.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

class TuningError : public std::runtime_error {
public:
    explicit TuningError(const std::string& msg) : std::runtime_error(msg) {}
};

class ReductionError : public std::runtime_error {
public:
    explicit ReductionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tps

#endif
