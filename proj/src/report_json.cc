#include "promptcd/report_json.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "promptcd/errors.h"

namespace promptcd {
namespace {

void append_fixed(std::string& out, const nlohmann::ordered_json& value, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close_pad(2 * depth, ' ');
  switch (value.type()) {
    case nlohmann::ordered_json::value_t::number_float: {
      const double v = value.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", v);
      // Avoid "-0.000000".
      out += std::string(buf) == "-0.000000" ? "0.000000" : buf;
      break;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        append_fixed(out, item, depth + 1);
      }
      out += "\n" + close_pad + "]";
      break;
    }
    case nlohmann::ordered_json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::ordered_json(key).dump() + ": ";
        append_fixed(out, item, depth + 1);
      }
      out += "\n" + close_pad + "}";
      break;
    }
    default:
      out += value.dump();
  }
}

}  // namespace

nlohmann::ordered_json config_to_json(const DetectorConfig& config) {
  nlohmann::ordered_json j;
  j["points_per_object"] = config.points_per_object;
  j["min_area"] = config.min_area;
  j["connectivity"] = static_cast<int>(config.connectivity);
  if (config.expected_changes) {
    j["mode"] = "fixed";
    j["num_changed"] = *config.expected_changes;
  } else {
    j["mode"] = "auto (extension: stop when no exclusion beats the reference "
                "by min_margin)";
    j["num_changed"] = "auto";
  }
  j["min_margin"] = config.min_margin;
  j["seed"] = config.seed;
  j["aggregation"] = config.aggregation;
  return j;
}

nlohmann::ordered_json report_to_json(const ChangeReport& report,
                              const nlohmann::ordered_json& extra_config) {
  nlohmann::ordered_json j;
  j["changed"] = report.changed_labels;
  nlohmann::ordered_json margins = nlohmann::ordered_json::array();
  for (double m : report.margins) margins.push_back(m);
  j["margins"] = margins;

  nlohmann::ordered_json iterations = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.tables.size(); ++i) {
    for (const ConfidenceRow& row : report.tables[i].rows) {
      nlohmann::ordered_json r;
      r["iteration"] = i;
      r["excluded"] = row.excluded_label;
      r["confidence"] = row.confidence;
      if (!row.scorable) r["scorable"] = false;
      iterations.push_back(r);
    }
  }
  j["iterations"] = iterations;
  j["ignored"] = report.ignored_labels;
  j["num_objects"] = report.num_objects;
  j["seed"] = report.seed;
  nlohmann::ordered_json config = config_to_json(report.config);
  if (extra_config.is_object()) config.update(extra_config);
  j["config"] = config;
  j["warnings"] = report.warnings;
  return j;
}

std::string format_json(const nlohmann::ordered_json& value) {
  std::string out;
  append_fixed(out, value, 0);
  out += "\n";
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("cannot write " + path.string());
}

}  // namespace promptcd
