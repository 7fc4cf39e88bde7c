#include "peco/artifacts.hpp"

#include <fstream>

#include <json.hpp>

#include "peco/errors.hpp"

namespace peco::artifacts {

using json = nlohmann::json;

std::uint64_t fnv1a_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    return fnv1a_bytes(text.data(), text.size());
}

std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[std::size_t(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

void write_manifest(const std::filesystem::path& out_dir, const Manifest& manifest) {
    json j;
    j["format"] = "peco-manifest";
    j["version"] = 1;
    j["subcommand"] = manifest.subcommand;
    if (!manifest.mode.empty()) j["mode"] = manifest.mode;
    j["config"] = manifest.config_text;
    json arts = json::array();
    for (const auto& name : manifest.artifacts) {
        json a;
        a["file"] = name;
        a["fnv1a"] = to_hex(fnv1a_file(out_dir / name));
        arts.push_back(std::move(a));
    }
    j["artifacts"] = std::move(arts);
    if (!manifest.inputs.empty()) {
        json inputs;
        for (const auto& [name, path] : manifest.inputs) inputs[name] = path;
        j["inputs"] = std::move(inputs);
    }
    write_text(out_dir / "manifest.json", j.dump(2) + "\n");
}

ManifestData read_manifest(const std::filesystem::path& manifest_path) {
    json j;
    try {
        j = json::parse(read_text(manifest_path));
    } catch (const json::exception& e) {
        throw IoError(manifest_path.string() + ": parse error: " + e.what());
    }
    if (j.value("format", "") != "peco-manifest")
        throw IoError(manifest_path.string() + ": not a peco-manifest file");
    ManifestData data;
    data.subcommand = j.at("subcommand").get<std::string>();
    data.mode = j.value("mode", "");
    data.config_text = j.at("config").get<std::string>();
    for (const auto& a : j.at("artifacts"))
        data.artifact_checksums.emplace_back(a.at("file").get<std::string>(),
                                             a.at("fnv1a").get<std::string>());
    if (j.contains("inputs"))
        for (const auto& [name, path] : j.at("inputs").items())
            data.inputs.emplace_back(name, path.get<std::string>());
    return data;
}

} // namespace peco::artifacts
