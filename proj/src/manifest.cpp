#include "rydkerr/manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rydkerr/errors.hpp"

namespace rydkerr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> known_commands = {"spectrum", "synth", "extract", "fit"};

std::vector<std::string> string_list(const json& step, const char* key, const std::string& where) {
  if (!step.contains(key)) return {};
  const json& v = step.at(key);
  if (!v.is_array()) throw ConfigError(where + ": '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(where + ": '" + key + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

}  // namespace

PipelineManifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");
  PipelineManifest m;
  if (!doc.contains("config") || !doc["config"].is_string())
    throw ConfigError("manifest lacks a 'config' path");
  m.config_path = resolve(base_dir, doc["config"].get<std::string>());
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("manifest 'seed' must be a non-negative integer");
    m.seed = doc["seed"].get<std::uint64_t>();
  }
  m.output_dir = resolve(base_dir, doc.value("output_dir", std::string(".")));
  if (!doc.contains("steps") || !doc["steps"].is_array()) throw ConfigError("manifest lacks a 'steps' array");

  std::set<std::string> names;
  std::map<std::string, std::string> producer;
  for (const auto& s : doc["steps"]) {
    if (!s.is_object()) throw ConfigError("manifest steps must be objects");
    PipelineStep step;
    step.name = s.value("name", std::string());
    const std::string where = "manifest step '" + step.name + "'";
    if (step.name.empty()) throw ConfigError("manifest step without a name");
    if (!names.insert(step.name).second) throw ConfigError("duplicate manifest step name '" + step.name + "'");
    step.command = s.value("command", std::string());
    if (!known_commands.count(step.command))
      throw ConfigError(where + ": unknown command '" + step.command + "'");
    step.args = string_list(s, "args", where);
    step.inputs = string_list(s, "inputs", where);
    step.outputs = string_list(s, "outputs", where);
    for (const auto& o : step.outputs) {
      const auto key = resolve(m.output_dir, o).lexically_normal().string();
      if (!producer.emplace(key, step.name).second)
        throw ConfigError(where + ": output '" + o + "' is also written by step '" + producer[key] + "'");
    }
    m.steps.push_back(std::move(step));
  }
  for (const auto& step : m.steps)
    for (const auto& i : step.inputs) {
      const auto p = resolve(m.output_dir, i);
      if (!producer.count(p.lexically_normal().string()) && !fs::exists(p))
        throw ConfigError("manifest step '" + step.name + "': input '" + i +
                          "' is neither produced by a step nor present on disk");
    }
  schedule(m);
  return m;
}

PipelineManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

std::vector<std::size_t> schedule(const PipelineManifest& m) {
  const std::size_t n = m.steps.size();
  std::map<std::string, std::size_t> producer;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& o : m.steps[i].outputs)
      producer[resolve(m.output_dir, o).lexically_normal().string()] = i;
  std::vector<std::set<std::size_t>> deps(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& in : m.steps[i].inputs)
      if (auto it = producer.find(resolve(m.output_dir, in).lexically_normal().string()); it != producer.end()) {
        if (it->second == i)
          throw ConfigError("manifest step '" + m.steps[i].name + "' consumes its own output '" + in + "'");
        deps[i].insert(it->second);
      }
  // Kahn's algorithm, always taking the earliest ready step in manifest order.
  std::vector<std::size_t> order;
  std::vector<bool> done(n, false);
  while (order.size() < n) {
    bool progressed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      bool ready = true;
      for (auto d : deps[i]) ready = ready && done[d];
      if (!ready) continue;
      done[i] = true;
      order.push_back(i);
      progressed = true;
      break;
    }
    if (!progressed) throw ConfigError("manifest steps contain a dependency cycle");
  }
  return order;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace rydkerr
