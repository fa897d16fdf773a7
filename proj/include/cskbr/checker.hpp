#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cskbr/core.hpp"
#include "cskbr/prompts.hpp"
#include "cskbr/provider.hpp"

namespace cskbr {

// Main-task verdict. An unparseable answer is fail-closed: verdict 0 with
// parsed_ok=false (a garbled response never justifies a positive claim).
struct Prediction {
    int verdict = 0;  // 1 = plausible, 0 = implausible
    std::string raw;
    bool parsed_ok = false;
};

// Outcome of one constraint check. Parse failures are fail-open: the
// constraint counts as satisfied with parsed_ok=false, so noise can only
// leave the main prediction alone, never veto it.
struct ConstraintVerdict {
    Constraint constraint;
    bool satisfied = true;
    std::string raw;
    bool parsed_ok = false;
};

// Non-CoT designs match the leading answer token (Yes/No for seeds 1-2,
// True/False for seed 3). CoT-style designs (zero-shot-cot, few-shot-cot,
// constraint-l2m) scan for the last standalone Yes/No/True/False token.
Prediction parse_main_answer(std::string_view raw, const MainDesign& design);

// Leading option digit 1/2/3, else the first type keyword
// (event/activity, persona, mental); case-insensitive.
std::optional<EventType> parse_typing_answer(std::string_view raw);

// First standalone 0 or 1 digit.
std::optional<int> parse_temporal_answer(std::string_view raw);

// First standalone yes/no token, case-insensitive.
std::optional<bool> parse_yes_no(std::string_view raw);

struct ConversionOutcome {
    bool satisfied = true;
    bool parsed_ok = false;
};

// The answer -> satisfied conversion snippet for each constraint kind and
// prompt variant:
//   typing v1:   satisfied iff the parsed type equals the required type
//   typing v2:   the question asks "is it an event/activity", so
//                satisfied iff (answer Yes) == (required type is Activity)
//   temporal v1: answer 0 asserts "tail before head" (head after tail);
//                satisfied iff the asserted order equals the required one
//   temporal v2: the question asks "does tail occur after head";
//                Yes means head-before-tail
//   ambiguity v1: satisfied iff answer 0 (both clauses clear)
//   ambiguity v2: satisfied iff Yes
ConversionOutcome convert_constraint_answer(const Constraint& constraint, int variant,
                                            std::string_view raw);

// Renders the constraint question, completes it through the provider, and
// converts the answer. Appends the completion to `ledger` when given.
ConstraintVerdict check_constraint(const LabeledInstance& instance, const Constraint& constraint,
                                   int variant, Provider& provider, const ProviderParams& params,
                                   RunLedger* ledger = nullptr);

// Logical conjunction of the main prediction with all constraint verdicts.
// Can only flip 1 -> 0; the main answer's raw text and parse flag survive.
Prediction aggregate(const Prediction& main, std::span<const ConstraintVerdict> verdicts);

}  // namespace cskbr
