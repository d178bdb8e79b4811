#pragma once

#include <map>
#include <string>
#include <vector>

namespace aif {

/// Per-stage record of what a CLI run produced: output paths (relative to
/// the trace's run directory) with content digests, the configuration that
/// produced them, and warning/failure counters. Stored as manifest.json in
/// the run directory and merged across stage invocations.
struct StageRecord {
    std::map<std::string, std::string> outputs;  // relative path -> sha256
    std::map<std::string, std::string> config;
    int warnings = 0;
    int failures = 0;
};

struct RunManifest {
    std::string trace_id;
    std::map<std::string, StageRecord> stages;
};

RunManifest load_manifest(const std::string& path);  // empty manifest if absent
void save_manifest(const std::string& path, const RunManifest& manifest);

/// Record a stage's outputs, digesting each file (paths relative to
/// run_dir). Every referenced file must exist.
void record_stage(RunManifest& manifest, const std::string& run_dir,
                  const std::string& stage, const std::vector<std::string>& outputs,
                  const std::map<std::string, std::string>& config, int warnings,
                  int failures);

}  // namespace aif
