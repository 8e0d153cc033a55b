#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace kurdner::cli {

// Run configuration files are flat `key = value` text, one pair per line;
// '#' starts a comment and blank lines are skipped. Keys mirror the
// TrainConfig / ModelConfig field names. Throws std::runtime_error on
// malformed lines or duplicate keys.
std::map<std::string, std::string> parse_flat_config(const std::string& text);

// Entry point behind main(). Routes argv to the subcommands; command output
// goes to `out`, diagnostics to `err`. Returns 0 on success, 1 on usage
// errors, 2 on data errors (unreadable or invalid inputs).
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// dispatch() bound to std::cout / std::cerr.
int dispatch(int argc, const char* const* argv);

}  // namespace kurdner::cli
