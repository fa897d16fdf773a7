#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cskbr/core.hpp"

namespace cskbr {

enum class TemplateSetName {
    HTemplate,  // readable relation phrases; assertion = "<h>, <phrase> <t>"
    STemplate,  // self-curated sentences with explicit <h>/<t> slots
};

struct TemplateSet {
    TemplateSetName name = TemplateSetName::HTemplate;
    std::map<Relation, std::string> templates;
};

const TemplateSet& h_template();
const TemplateSet& s_template();

enum class MainFamily {
    ZeroShot,
    FewShot,
    ZeroShotCoT,
    FewShotCoT,
    ConstraintL2M,
};

std::string_view to_string(MainFamily family);

// One of the three seed prompt designs of a baseline family. Seed 1 renders
// assertions with the H-template, seeds 2 and 3 with the S-template.
struct MainDesign {
    MainFamily family = MainFamily::ZeroShot;
    int seed = 1;

    bool operator==(const MainDesign&) const = default;
};

struct UndefinedDesign : std::runtime_error {
    explicit UndefinedDesign(const std::string& what) : std::runtime_error(what) {}
};

const TemplateSet& template_set_for_seed(int seed);

// In-context exemplar. FewShotCoT exemplars carry a worked rationale; for
// ConstraintL2M the rationale holds the exemplar's full Q/A block.
struct Exemplar {
    LabeledInstance instance;
    std::optional<std::string> rationale;
};

// Free-text form of a triple. H-template phrases are joined as
// "<h>, <phrase> <t>"; templates with <h>/<t> slots are substituted in place.
std::string render_assertion(const KnowledgeTriple& triple, const TemplateSet& template_set);

// Full main-task prompt for the four baseline families. ConstraintL2M is
// rendered by render_constraint_l2m (it needs the constraint list).
// Zero-shot families require an empty exemplar list, few-shot a non-empty
// one; FewShot exemplars must not carry rationales, FewShotCoT must.
std::string render_main_prompt(const MainDesign& design, const KnowledgeTriple& triple,
                               std::span<const Exemplar> exemplars);

// Zero-shot constraint-checking question, variant 1 or 2. Never includes
// exemplars and is independent of the main-task design.
std::string render_constraint_prompt(const Constraint& constraint, const KnowledgeTriple& triple,
                                     int variant);

// Single least-to-most prompt: constraint questions first, plausibility
// question last, with the early-stop instruction. Exemplar rationales are
// prepended verbatim as worked statement blocks.
std::string render_constraint_l2m(const KnowledgeTriple& triple,
                                  std::span<const Constraint> constraints,
                                  std::span<const Exemplar> exemplars);

// Fixed exemplars used by the few-shot design tables and the CoT/L2M blocks.
std::vector<Exemplar> fewshot_fixture_exemplars(int seed);
std::vector<Exemplar> fewshot_cot_fixture_exemplars();
std::vector<Exemplar> l2m_fixture_exemplars();

}  // namespace cskbr
