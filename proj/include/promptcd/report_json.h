#ifndef PROMPTCD_REPORT_JSON_H_
#define PROMPTCD_REPORT_JSON_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "promptcd/detector.h"

namespace promptcd {

// Effective detector configuration, as echoed in reports.
nlohmann::ordered_json config_to_json(const DetectorConfig& config);

// Report document:
//   {"changed": [...], "margins": [...], "iterations": [{"iteration",
//    "excluded", "confidence"}...], "ignored": [...], "seed": n,
//    "config": {...}}
// `extra_config` entries (backend, paths) are merged into "config".
nlohmann::ordered_json report_to_json(const ChangeReport& report,
                              const nlohmann::ordered_json& extra_config = {});

// Pretty-printed JSON with every floating-point number written with six
// fixed decimals, so output bytes are stable.
std::string format_json(const nlohmann::ordered_json& value);

void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace promptcd

#endif  // PROMPTCD_REPORT_JSON_H_
