#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bae/errors.hpp"

#include "bae/detection.hpp"
#include "bae/simdyn.hpp"

namespace bae {

// Config problems; exit code 2 at the CLI.
struct ConfigError : Error {
    using Error::Error;
};

struct GridSettings {
    double nu_min = 0;
    double nu_max = 0;
    int points = 201;
};

struct RunConfig {
    std::string preset;
    SystemParams system;
    PumpConfig pump;
    RegimeThresholds regime;
    double t_f = 1;
    double force_amp = 0;
    double force_phase = 0;
    GridSettings grid;
    SimConfig sim;
    bool auto_compensation = false;  // use the stability prescription
    int psd_segment = 4096;
    double psd_overlap = 0.5;

    DetectionConfig detection() const {
        return detection_config(pump, t_f, force_amp, force_phase);
    }
};

// Raw document with "a.b.c=value" overrides applied; value is parsed as JSON
// when possible, otherwise taken as a string.
nlohmann::json load_document(const std::string& path, std::string* raw_text = nullptr);
nlohmann::json parse_document(const std::string& text, const std::string& source);
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Validates keys and types and resolves presets, strength blocks and defaults.
RunConfig resolve_config(const nlohmann::json& doc, const std::string& text = "");

// Fully resolved config (amplitudes as magnitude/phase), suitable for re-loading.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace bae
