#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "edgeprop/pipeline.hpp"
#include "edgeprop/synth.hpp"
#include "edgeprop/trainer.hpp"

namespace edgeprop {

// Flat key=value run configuration. Unknown keys are rejected; parsing is
// all-or-nothing.
struct RunConfig {
    SynthConfig synth;
    TrainConfig train;
    IngestOptions ingest;
    std::string data_dir = ".";
    std::string out_dir = ".";

    // Canonical sorted key=value text of every effective setting.
    std::string canonical_text() const;
    std::uint64_t config_hash() const;  // FNV-1a over canonical_text

    static RunConfig defaults();
    static RunConfig parse(const std::map<std::string, std::string>& kv);
    static RunConfig load(const std::string& path,
                          const std::map<std::string, std::string>& overrides = {});
};

}  // namespace edgeprop
