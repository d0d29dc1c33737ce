#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rydkerr {

struct PipelineStep {
  std::string name;
  std::string command;  // spectrum | synth | extract | fit
  std::vector<std::string> args;
  std::vector<std::string> inputs;   // relative to the output directory unless absolute
  std::vector<std::string> outputs;
};

struct PipelineManifest {
  std::filesystem::path config_path;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::vector<PipelineStep> steps;
};

/// Parses and validates: unique step names, known commands, every input
/// produced by an earlier step or present on disk, no file written twice.
PipelineManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);
PipelineManifest load_manifest(const std::filesystem::path& path);

/// Steps in execution order; throws ConfigError on a dependency cycle.
std::vector<std::size_t> schedule(const PipelineManifest& manifest);

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace rydkerr
