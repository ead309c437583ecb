#pragma once

// Command-line front end. Kept in the library so tests can drive it with
// in-memory streams.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error (including a
// calibration that did not converge), 3 data errors in monitor input.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfstart/experiment.hpp"

namespace selfstart::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitData = 3;

inline constexpr const char* kVersion = "selfstart 1.0.0";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses "reference", "informative" or "mu,lambda,a,b".
NigParams parse_prior(const std::string& text);

/// Grid configuration from JSON text. Missing keys keep their defaults; a
/// run manifest is accepted too (its "config" object is used). Throws
/// UsageError with the parser's line/column diagnostic on malformed input.
GridSpec parse_grid_config(const std::string& text);

/// Fully resolved configuration as JSON; parse_grid_config inverts it.
std::string grid_config_json(const GridSpec& spec);

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace selfstart::cli
