#include "templates.hpp"

namespace dki::prompt::templates {

const std::string_view kProbe =
    R"(You are given a long updated list of cue-value records and a target cue (CUE).
For this target cue, return its earliest historical and latest current VALUE according to FIRST and LAST occurrence order in the provided record list.

{PREAMBLE}CUE (JSON array): {CUE_JSON}

INPUT FORMAT
- Each record is one line in the form: cue:value
- Boundaries: lines strictly between the literal markers START: and END
{FORMAT_NOTES}
Record List
START:
{RECORDS}
END

Output (valid JSON only):
{"cue":"<cue>", "earliest":"<VERBATIM or UNKNOWN>","latest":"<VERBATIM or UNKNOWN>"}

Rules:
- Only the cue specified by CUE.
- Earliest/Latest are defined strictly by first/last appearance order within START..END.
- Keep VALUE VERBATIM; JSON-escape only as required.
- Output exactly one JSON object and nothing else. No code, no prose, no markdown.
)";

const std::string_view kNarrativeProbe =
    R"(You are given a long document describing successive updates of a target cue (CUE).
For this target cue, return its earliest historical and latest current VALUE according to FIRST and LAST occurrence order in the provided document.

CUE (JSON array): {CUE_JSON}

INPUT FORMAT
- The document is narrative text; each update of the cue is described in the order it happened.
- Boundaries: lines strictly between the literal markers START: and END

Document
START:
{DOCUMENT}
END

Output (valid JSON only):
{"cue":"<cue>", "earliest":"<VERBATIM or UNKNOWN>","latest":"<VERBATIM or UNKNOWN>"}

Rules:
- Only the cue specified by CUE.
- Earliest/Latest are defined strictly by first/last appearance order within START..END.
- Keep VALUE VERBATIM; JSON-escape only as required.
- Output exactly one JSON object and nothing else. No code, no prose, no markdown.
)";

const std::string_view kRewriteRequest =
    R"(Rewrite the update history below into a coherent narrative long-text document.

Cue: {CUE}
Updates in chronological order ({COUNT} in total):
START:
{RECORDS}
END

Requirements:
- Write one paragraph per update, in exactly the order listed, so the story moves from the first value to the last.
- Each value must appear verbatim exactly once in the whole document. Do not abbreviate, translate, or repeat a value.
- Make it clear that each later value replaces the previous one for this cue, and that the last value is the current one.
- Do not mention any value that is not in the list.
- Output only the document text.
)";

const std::string_view kCot =
    R"(Chain-of-Thought (CoT) instructions:
- Think step by step to solve the task, but keep all reasoning hidden.
- Do not output any explanations or reasoning; output only the final JSON object.
)";

const std::string_view kTwoShot =
    R"(Below are two examples. Follow the same pattern:

EXAMPLE 1
START:
edgewise:artistic
edgewise:tributes
edgewise:overplay
edgewise:cowardly
edgewise:applause
edgewise:slavered
edgewise:coincide
edgewise:teletype
edgewise:sunburnt
END

Correct output:
{
  "cue":"edgewise",
  "latest":"sunburnt",
  "earliest":"artistic"
}

EXAMPLE 2
START:
tributes:coherent
tributes:allergen
tributes:shivered
tributes:cowardly
tributes:arranged
tributes:emeritus
tributes:teletype
tributes:antennae
END

Correct output:
{
  "cue":"tributes",
  "latest":"antennae",
  "earliest":"coherent"
}

Now solve the following instance in exactly the same way.
)";

const std::string_view kRehearsal =
    "Rehearse each new cue:value pair {K} when you read it. Do this internally and do not output the "
    "rehearsals into text.\n";

const std::string_view kSemantic =
    "Create a meaningful association between the next cue:value pair and the previous cue:value pair based on "
    "semantic meaning. Create these associations internally and do not output it in your response.\n";

const std::string_view kIntegration =
    R"(Internal organization rule:
- As you read from top to bottom, maintain for each cue in CUES an evolving chain:
  CUE: v(1) → v(2) → ⋯ → v(T),
  where v(1) is the value from the first occurrence and v(T) is the value from the last occurrence.
- Do not treat records as independent pairs. Treat each later occurrence of the same cue as an update to that cue, so that the earliest value is v(1) and the latest value is v(T).
)";

const std::string_view kForgetting =
    "When reading the list of cue-value records, overwrite every previous cue-value pair with the current "
    "cue-value pair.\n";

const std::string_view kIndexNote =
    "- Index is a monotonically increasing integer (0, 1, 2, ...). It only indicates the order;\n";

std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string_view, std::string>>& slots) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    out.append(tmpl, pos, open - pos);
    const std::size_t close = tmpl.find('}', open);
    bool replaced = false;
    if (close != std::string_view::npos) {
      const auto name = tmpl.substr(open + 1, close - open - 1);
      for (const auto& [slot, value] : slots) {
        if (slot == name) {
          out += value;
          pos = close + 1;
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) {
      out += '{';
      pos = open + 1;
    }
  }
  if (pos < tmpl.size()) out.append(tmpl, pos);
  return out;
}

}  // namespace dki::prompt::templates
