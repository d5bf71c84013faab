#pragma once

#include <string>

#include <json.hpp>

#include "kwb/kripke.hpp"

namespace kwb {

using Json = nlohmann::ordered_json;

// Reads the model file format. The order lists generator edges; the loader
// closes them reflexively and transitively and composes homs that are not
// given explicitly. Structural violations are left for validate_model.
KripkeModel model_from_json(const Json& j);
// The "signature" block of a model file.
Signature signature_from_json(const Json& j);
Json model_to_json(const KripkeModel& m);

KripkeModel parse_model(const std::string& text);
std::string dump_model(const KripkeModel& m);
KripkeModel load_model(const std::string& path);
void save_model(const KripkeModel& m, const std::string& path);

}  // namespace kwb
