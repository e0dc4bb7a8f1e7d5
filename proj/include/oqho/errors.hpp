#pragma once

#include <stdexcept>
#include <string>

namespace oqho {

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct OddChannelCount : std::runtime_error {
    explicit OddChannelCount(const std::string& what) : std::runtime_error(what) {}
};

struct NotStable : std::runtime_error {
    explicit NotStable(const std::string& what) : std::runtime_error(what) {}
};

struct NotSymmetric : std::runtime_error {
    explicit NotSymmetric(const std::string& what) : std::runtime_error(what) {}
};

struct ConvergenceFailure : std::runtime_error {
    explicit ConvergenceFailure(const std::string& what) : std::runtime_error(what) {}
};

struct IndexOutOfRange : std::out_of_range {
    explicit IndexOutOfRange(const std::string& what) : std::out_of_range(what) {}
};

struct TimeOutOfDomain : std::out_of_range {
    explicit TimeOutOfDomain(const std::string& what) : std::out_of_range(what) {}
};

struct GridTooCoarse : std::runtime_error {
    explicit GridTooCoarse(const std::string& what) : std::runtime_error(what) {}
};

struct GridTooSmall : std::runtime_error {
    explicit GridTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureBudgetExceeded : std::runtime_error {
    explicit QuadratureBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct AdmissibilityViolation : std::runtime_error {
    explicit AdmissibilityViolation(const std::string& what) : std::runtime_error(what) {}
};

struct RadiusExceeded : std::runtime_error {
    explicit RadiusExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct SingularGamma : std::runtime_error {
    explicit SingularGamma(const std::string& what) : std::runtime_error(what) {}
};

struct BracketInvalid : std::runtime_error {
    explicit BracketInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace oqho
