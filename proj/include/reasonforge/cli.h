#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace reasonforge::cli {

/// Entry point for `reasonforge <gen|split|sample|grade|stats> ...`.
/// Returns 0 on success. Failures print one JSON line
/// {"error": kind, "message": ...} to `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace reasonforge::cli
