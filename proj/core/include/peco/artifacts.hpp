#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace peco::artifacts {

/// FNV-1a over the file bytes; the manifest checksum primitive.
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t size);
std::string to_hex(std::uint64_t value);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

struct Manifest {
    std::string subcommand;
    std::string mode;                  // resolved train mode, "" when not applicable
    std::string config_text;           // full resolved configuration
    std::vector<std::string> artifacts; // file names relative to the output dir
    // named external inputs (checkpoints, evaluation files), absolute paths
    std::vector<std::pair<std::string, std::string>> inputs;
};

/// Writes manifest.json listing every artifact with its checksum. A run is
/// replayable from this file alone.
void write_manifest(const std::filesystem::path& out_dir, const Manifest& manifest);

struct ManifestData {
    std::string subcommand;
    std::string mode;
    std::string config_text;
    std::vector<std::pair<std::string, std::string>> artifact_checksums; // name -> fnv1a hex
    std::vector<std::pair<std::string, std::string>> inputs;
};

ManifestData read_manifest(const std::filesystem::path& manifest_path);

} // namespace peco::artifacts
