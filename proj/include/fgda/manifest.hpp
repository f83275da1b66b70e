#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fgda {

// FNV-1a over raw bytes; the checksum recorded for every output file.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);
std::string fnv1a64_file_hex(const std::string& path);

struct FileRecord {
  std::string name;      // relative to the manifest's directory
  std::uint64_t bytes = 0;
  std::string checksum;  // fnv1a64 hex
};

// Provenance record written next to every command's outputs.  Downstream
// commands re-derive the checksums of the files they consume and refuse
// inputs whose manifest disagrees, so a pipeline cannot silently mix runs
// from different configurations or edited files.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string rng_id;
  std::string grid_desc;
  std::vector<FileRecord> outputs;
  std::map<std::string, double> summary;       // command-specific scalar results
  std::map<std::string, std::string> notes;    // command-specific labels
  double wall_seconds = 0.0;                   // excluded from determinism claims
};

// File name is derived from the command so several stages can share a
// directory without clobbering each other's manifests.
std::string manifest_filename(const std::string& command);

void write_manifest(const std::string& dir, const RunManifest& manifest);
RunManifest read_manifest(const std::string& dir, const std::string& command);

// Recomputes the checksum of `name` under `dir` and compares it with the
// manifest record; throws ValidationError on mismatch or missing record.
void verify_manifest_file(const std::string& dir, const RunManifest& manifest,
                          const std::string& name);

}  // namespace fgda
