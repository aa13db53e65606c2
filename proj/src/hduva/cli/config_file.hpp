#pragma once

#include <map>
#include <string>
#include <vector>

namespace hduva::cli {

using KeyValues = std::map<std::string, std::string>;

// Flat "section.key = value" text; '#' starts a comment.
KeyValues parse_config_file(const std::string& path);

struct ParsedArgs {
  KeyValues kv;  // --dotted.key value (or --dotted.key=value)
  std::vector<std::string> positional;
};

ParsedArgs parse_args(const std::vector<std::string>& args);

// Typed lookups with defaults; throw argument_error on malformed values.
std::string get_string(const KeyValues& kv, const std::string& key,
                       const std::string& def);
int get_int(const KeyValues& kv, const std::string& key, int def);
double get_double(const KeyValues& kv, const std::string& key, double def);
bool get_bool(const KeyValues& kv, const std::string& key, bool def);
std::vector<double> get_double_list(const KeyValues& kv, const std::string& key,
                                    const std::vector<double>& def);
std::vector<std::string> split_list(const std::string& text);

}  // namespace hduva::cli
