#pragma once

// Prompt template assets. Slots are written {NAME} and filled by
// fill_template; unknown braces (the JSON schema line) are left alone.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dki::prompt::templates {

extern const std::string_view kProbe;
extern const std::string_view kNarrativeProbe;
extern const std::string_view kRewriteRequest;

extern const std::string_view kCot;
extern const std::string_view kTwoShot;
extern const std::string_view kRehearsal;
extern const std::string_view kSemantic;
extern const std::string_view kIntegration;
extern const std::string_view kForgetting;
extern const std::string_view kIndexNote;

std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string_view, std::string>>& slots);

}  // namespace dki::prompt::templates
