#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ahmca/config.hpp"
#include "ahmca/error.hpp"

namespace ahmca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;

/// Training configuration from JSON text; see config_from_json.
TrainConfig load_config(std::string_view json_text);

/// Exit code for an error of the given kind.
int exit_code(ErrorKind kind) noexcept;

/// Runs one command line; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ahmca::cli
