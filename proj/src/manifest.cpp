#include "aif/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "aif/digest.hpp"
#include "aif/errors.hpp"

namespace aif {

using nlohmann::json;

RunManifest load_manifest(const std::string& path) {
    RunManifest manifest;
    std::ifstream in(path, std::ios::binary);
    if (!in) return manifest;
    json root;
    try {
        in >> root;
    } catch (const json::parse_error& e) {
        throw ValidationError("corrupt manifest " + path + ": " + e.what());
    }
    manifest.trace_id = root.value("trace_id", "");
    for (const auto& [stage, record] : root.value("stages", json::object()).items()) {
        StageRecord sr;
        for (const auto& [p, d] : record.value("outputs", json::object()).items()) {
            sr.outputs[p] = d.get<std::string>();
        }
        for (const auto& [k, v] : record.value("config", json::object()).items()) {
            sr.config[k] = v.get<std::string>();
        }
        sr.warnings = record.value("warnings", 0);
        sr.failures = record.value("failures", 0);
        manifest.stages[stage] = std::move(sr);
    }
    return manifest;
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
    json root;
    root["trace_id"] = manifest.trace_id;
    json stages = json::object();
    for (const auto& [stage, record] : manifest.stages) {
        json r;
        r["outputs"] = record.outputs;
        r["config"] = record.config;
        r["warnings"] = record.warnings;
        r["failures"] = record.failures;
        stages[stage] = std::move(r);
    }
    root["stages"] = std::move(stages);
    std::ofstream out(path, std::ios::binary);
    out << root.dump(2) << "\n";
}

void record_stage(RunManifest& manifest, const std::string& run_dir,
                  const std::string& stage, const std::vector<std::string>& outputs,
                  const std::map<std::string, std::string>& config, int warnings,
                  int failures) {
    StageRecord record;
    for (const auto& rel : outputs) {
        const std::string full = run_dir + "/" + rel;
        if (!std::filesystem::exists(full)) {
            throw ValidationError("manifest output missing: " + full);
        }
        record.outputs[rel] = sha256_file(full);
    }
    record.config = config;
    record.warnings = warnings;
    record.failures = failures;
    manifest.stages[stage] = std::move(record);
}

}  // namespace aif
