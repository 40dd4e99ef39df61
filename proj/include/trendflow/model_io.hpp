#pragma once

#include <string>

#include <json.hpp>

#include "trendflow/poly_field.hpp"
#include "trendflow/var_model.hpp"

namespace trendflow {

// Model documents are JSON with every real number written as decimal text at
// 17 significant digits, so serialize/deserialize round trips are exact.

std::string serialize(const PolyVectorField& model,
                      const nlohmann::json& provenance = nlohmann::json::object());
PolyVectorField deserialize_field(const std::string& document);

std::string serialize(const VarModel& model,
                      const nlohmann::json& provenance = nlohmann::json::object());
VarModel deserialize_var(const std::string& document);

// "poly_field" or "var"; throws on anything else.
std::string document_kind(const std::string& document);

}  // namespace trendflow
