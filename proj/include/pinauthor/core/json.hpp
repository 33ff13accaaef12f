#pragma once

#include "pinauthor/core/height_field.hpp"
#include "pinauthor/core/types.hpp"

#include <json.hpp>

namespace pinauthor {

using Json = nlohmann::json;

void to_json(Json& j, ScriptCategory c);
void from_json(const Json& j, ScriptCategory& c);
void to_json(Json& j, const ParamMap& m);
void from_json(const Json& j, ParamMap& m);
void to_json(Json& j, const ScriptArtifact& a);
void from_json(const Json& j, ScriptArtifact& a);
void to_json(Json& j, const SegmentPlan& p);
void from_json(const Json& j, SegmentPlan& p);
void to_json(Json& j, const ParameterSet& p);
void from_json(const Json& j, ParameterSet& p);
void to_json(Json& j, const InstructionBundle& b);
void from_json(const Json& j, InstructionBundle& b);
void to_json(Json& j, const HistoryCard& c);
void from_json(const Json& j, HistoryCard& c);
void to_json(Json& j, const SliderSpec& s);
void to_json(Json& j, const HeightField& f);

} // namespace pinauthor
