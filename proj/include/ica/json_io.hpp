#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ica/curvature.hpp"
#include "ica/instance.hpp"
#include "ica/valuation.hpp"

namespace ica {

using Json = nlohmann::json;

// Parsers throw ValidationError whose path names the offending field relative
// to `path` (e.g. "agents[1].valuation.cap").
Valuation valuation_from_json(const Json& j, const std::string& path = "");
Json to_json(const Valuation& v);

Instance instance_from_json(const Json& j);
Json to_json(const Instance& inst);

Allocation allocation_from_json(const Json& j);
Json to_json(const Allocation& alloc);

// Finite doubles as numbers; inf / nan as the strings "inf", "-inf", "nan".
Json json_real(double x);

Json to_json(const CurvatureReport& rep);
Json to_json(const GapInstanceSpec& spec);

// Read and parse a JSON file. Syntax errors and missing files surface as
// ValidationError with the file name as path.
Json read_json_file(const std::filesystem::path& file);
void write_json_file(const std::filesystem::path& file, const Json& j);

Instance load_instance(const std::filesystem::path& file);
void save_instance(const Instance& inst, const std::filesystem::path& file);

}  // namespace ica
