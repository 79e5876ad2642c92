#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace steadyvort {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidSpec : Error {
    using Error::Error;
};

struct SpacingTooCoarse : Error {
    using Error::Error;
};

struct BackendMismatch : Error {
    using Error::Error;
};

struct SolveFailure : Error {
    using Error::Error;
};

struct CompatibilityViolation : Error {
    using Error::Error;
};

struct InvalidKappa : Error {
    using Error::Error;
};

struct BoxViolation : Error {
    using Error::Error;
};

struct Infeasible : Error {
    using Error::Error;
};

struct SiteInfeasible : Error {
    using Error::Error;
};

struct NoRoot : Error {
    using Error::Error;
};

struct GridTooLarge : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

// Carries every violation found, not just the first.
struct ValidationError : Error {
    std::vector<std::string> issues;
    explicit ValidationError(std::vector<std::string> list)
        : Error(join(list)), issues(std::move(list)) {}

  private:
    static std::string join(const std::vector<std::string>& list) {
        std::string out = "validation failed:";
        for (const auto& s : list) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }
};

} // namespace steadyvort
