#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hduva::scen {

struct Instance {
  std::string path;  // image file; relative paths resolve against the manifest dir
  int class_label = 0;
  std::string nominal_domain;
  std::string sub_domain;
  std::string transform;  // "fg=RRGGBB;bg=RRGGBB" or "angle=<deg>" or ""
  std::string split;      // train | val | test
};

struct ScenarioManifest {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::string generator_version;
  std::vector<std::string> domains;         // declared nominal domains
  std::vector<std::string> bridge_domains;  // excluded from the test rotation
  std::vector<Instance> instances;
  std::string extra_meta_json = "{}";  // palette values, conformance counts
  std::uint64_t content_hash = 0;

  std::vector<std::string> test_rotation_domains() const;
  bool is_bridge(const std::string& domain) const;
};

// Writes manifest.csv plus manifest.meta.json into dir; computes the content
// hash over the CSV rows and the referenced image bytes first.
void write_manifest(ScenarioManifest& m, const std::string& dir);
ScenarioManifest read_manifest(const std::string& dir);

// Hash over meta fields, CSV-serialized rows and referenced image bytes;
// independent of where the manifest directory lives.
std::uint64_t manifest_content_hash(const ScenarioManifest& m,
                                    const std::string& dir);

std::string resolve_instance_path(const std::string& manifest_dir,
                                  const std::string& instance_path);

}  // namespace hduva::scen
