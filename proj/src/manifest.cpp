#include "fgda/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fgda/errors.hpp"

namespace fgda {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path + " for checksumming");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string s = buf.str();
  return fnv1a64_hex(s);
}

std::string manifest_filename(const std::string& command) {
  return "manifest_" + command + ".json";
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["rng_id"] = m.rng_id;
  j["grid"] = m.grid_desc;
  j["wall_seconds"] = m.wall_seconds;
  j["outputs"] = nlohmann::json::array();
  for (const auto& f : m.outputs) {
    j["outputs"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.checksum}});
  }
  j["summary"] = m.summary;
  j["notes"] = m.notes;

  const std::string path = dir + "/" + manifest_filename(m.command);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& dir, const std::string& command) {
  const std::string path = dir + "/" + manifest_filename(command);
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("missing manifest " + path +
                          "; run the producing command first");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ValidationError("manifest " + path + " is not valid JSON: " + err.what());
  }
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.rng_id = j.at("rng_id").get<std::string>();
    m.grid_desc = j.at("grid").get<std::string>();
    m.wall_seconds = j.value("wall_seconds", 0.0);
    for (const auto& f : j.at("outputs")) {
      m.outputs.push_back({f.at("name").get<std::string>(),
                           f.at("bytes").get<std::uint64_t>(),
                           f.at("fnv1a64").get<std::string>()});
    }
    if (j.contains("summary")) {
      for (const auto& [k, v] : j.at("summary").items()) {
        m.summary[k] = v.get<double>();
      }
    }
    if (j.contains("notes")) {
      for (const auto& [k, v] : j.at("notes").items()) {
        m.notes[k] = v.get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& err) {
    throw ValidationError("manifest " + path + " is malformed: " + err.what());
  }
  return m;
}

void verify_manifest_file(const std::string& dir, const RunManifest& manifest,
                          const std::string& name) {
  for (const auto& f : manifest.outputs) {
    if (f.name != name) continue;
    const std::string actual = fnv1a64_file_hex(dir + "/" + name);
    if (actual != f.checksum) {
      throw ValidationError(name + " does not match its manifest checksum (" + actual +
                            " vs " + f.checksum + "); refusing modified inputs");
    }
    return;
  }
  throw ValidationError(name + " is not listed in the " + manifest.command +
                        " manifest");
}

}  // namespace fgda
