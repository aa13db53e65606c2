#include "hduva/scenarios/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hduva/core/errors.hpp"
#include "hduva/scenarios/image.hpp"

namespace hduva::scen {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> ScenarioManifest::test_rotation_domains() const {
  std::vector<std::string> out;
  for (const auto& d : domains)
    if (!is_bridge(d)) out.push_back(d);
  return out;
}

bool ScenarioManifest::is_bridge(const std::string& domain) const {
  return std::find(bridge_domains.begin(), bridge_domains.end(), domain) !=
         bridge_domains.end();
}

std::string resolve_instance_path(const std::string& manifest_dir,
                                  const std::string& instance_path) {
  fs::path p(instance_path);
  if (p.is_absolute()) return instance_path;
  return (fs::path(manifest_dir) / p).string();
}

namespace {

std::string csv_rows(const ScenarioManifest& m) {
  std::ostringstream out;
  out << "path,class,nominal_domain,sub_domain,transform,split\n";
  for (const auto& ins : m.instances)
    out << ins.path << ',' << ins.class_label << ',' << ins.nominal_domain
        << ',' << ins.sub_domain << ',' << ins.transform << ',' << ins.split
        << '\n';
  return out.str();
}

}  // namespace

std::uint64_t manifest_content_hash(const ScenarioManifest& m,
                                    const std::string& dir) {
  std::uint64_t h = fnv1a64(m.scenario_id.data(), m.scenario_id.size());
  h = fnv1a64(&m.seed, sizeof(m.seed), h);
  h = fnv1a64(m.generator_version.data(), m.generator_version.size(), h);
  const std::string rows = csv_rows(m);
  h = fnv1a64(rows.data(), rows.size(), h);
  // Image bytes, deduplicated by path in first-appearance order.
  std::vector<std::string> seen;
  for (const auto& ins : m.instances) {
    if (std::find(seen.begin(), seen.end(), ins.path) != seen.end()) continue;
    seen.push_back(ins.path);
    std::ifstream f(resolve_instance_path(dir, ins.path), std::ios::binary);
    if (!f) throw io_error("manifest references missing image: " + ins.path);
    std::ostringstream buf;
    buf << f.rdbuf();
    const std::string bytes = buf.str();
    h = fnv1a64(bytes.data(), bytes.size(), h);
  }
  return h;
}

void write_manifest(ScenarioManifest& m, const std::string& dir) {
  fs::create_directories(dir);
  m.content_hash = manifest_content_hash(m, dir);
  {
    std::ofstream csv(fs::path(dir) / "manifest.csv");
    if (!csv) throw io_error("cannot write manifest.csv in " + dir);
    csv << csv_rows(m);
  }
  json j;
  j["scenario_id"] = m.scenario_id;
  j["seed"] = m.seed;
  j["generator_version"] = m.generator_version;
  j["domains"] = m.domains;
  j["bridge_domains"] = m.bridge_domains;
  j["content_hash"] = m.content_hash;
  j["extra"] = json::parse(m.extra_meta_json);
  std::ofstream meta(fs::path(dir) / "manifest.meta.json");
  if (!meta) throw io_error("cannot write manifest.meta.json in " + dir);
  meta << j.dump(2) << "\n";
}

ScenarioManifest read_manifest(const std::string& dir) {
  std::ifstream meta(fs::path(dir) / "manifest.meta.json");
  if (!meta) throw io_error("missing manifest.meta.json in " + dir);
  json j = json::parse(meta);
  ScenarioManifest m;
  m.scenario_id = j.at("scenario_id").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.generator_version = j.at("generator_version").get<std::string>();
  m.domains = j.at("domains").get<std::vector<std::string>>();
  m.bridge_domains = j.at("bridge_domains").get<std::vector<std::string>>();
  m.content_hash = j.at("content_hash").get<std::uint64_t>();
  m.extra_meta_json = j.at("extra").dump();

  std::ifstream csv(fs::path(dir) / "manifest.csv");
  if (!csv) throw io_error("missing manifest.csv in " + dir);
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Instance ins;
    std::string cls;
    std::getline(row, ins.path, ',');
    std::getline(row, cls, ',');
    std::getline(row, ins.nominal_domain, ',');
    std::getline(row, ins.sub_domain, ',');
    std::getline(row, ins.transform, ',');
    std::getline(row, ins.split, ',');
    ins.class_label = std::stoi(cls);
    m.instances.push_back(std::move(ins));
  }
  return m;
}

}  // namespace hduva::scen
