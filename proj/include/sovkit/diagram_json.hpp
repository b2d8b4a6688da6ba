#pragma once

#include "json.hpp"
#include "sovkit/diagrams.hpp"

namespace sovkit {

nlohmann::json exponent_to_json(const FieldExponent& e);
FieldExponent exponent_from_json(const nlohmann::json& j);

nlohmann::json closed_form_to_json(const ClosedFormFactor& f);
ClosedFormFactor closed_form_from_json(const nlohmann::json& j);

nlohmann::json diagram_to_json(const Diagram& d);
// throws ConfigError on schema violations
Diagram diagram_from_json(const nlohmann::json& j);

// 17 significant digits
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace sovkit
