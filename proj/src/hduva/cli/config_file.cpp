#include "hduva/cli/config_file.hpp"

#include <fstream>
#include <sstream>

#include "hduva/core/errors.hpp"

namespace hduva::cli {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw argument_error(path + ":" + std::to_string(lineno) +
                           ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw argument_error(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

ParsedArgs parse_args(const std::vector<std::string>& args) {
  ParsedArgs out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      out.positional.push_back(a);
      continue;
    }
    std::string key = a.substr(2);
    const std::size_t eq = key.find('=');
    if (eq != std::string::npos) {
      out.kv[key.substr(0, eq)] = key.substr(eq + 1);
      continue;
    }
    if (i + 1 >= args.size())
      throw argument_error("flag --" + key + " needs a value");
    out.kv[key] = args[++i];
  }
  return out;
}

std::string get_string(const KeyValues& kv, const std::string& key,
                       const std::string& def) {
  auto it = kv.find(key);
  return it == kv.end() ? def : it->second;
}

int get_int(const KeyValues& kv, const std::string& key, int def) {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw argument_error("key " + key + ": expected integer, got '" +
                         it->second + "'");
  }
}

double get_double(const KeyValues& kv, const std::string& key, double def) {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw argument_error("key " + key + ": expected number, got '" +
                         it->second + "'");
  }
}

bool get_bool(const KeyValues& kv, const std::string& key, bool def) {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  const std::string& v = it->second;
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw argument_error("key " + key + ": expected on/off, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> get_double_list(const KeyValues& kv, const std::string& key,
                                    const std::vector<double>& def) {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  std::vector<double> out;
  for (const auto& s : split_list(it->second)) {
    try {
      out.push_back(std::stod(s));
    } catch (...) {
      throw argument_error("key " + key + ": expected number list");
    }
  }
  if (out.empty()) throw argument_error("key " + key + ": empty list");
  return out;
}

}  // namespace hduva::cli
