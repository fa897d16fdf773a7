#include "cskbr/prompts.hpp"

#include <stdexcept>

namespace cskbr {

namespace {

TemplateSet build_h_template() {
    TemplateSet set;
    set.name = TemplateSetName::HTemplate;
    set.templates = {
        {Relation::xWant, "as a result, PersonX wants to"},
        {Relation::oWant, "as a result, PersonY or others want to"},
        {Relation::xEffect, "as a result, PersonX will"},
        {Relation::oEffect, "as a result, PersonY or others will"},
        {Relation::xReact, "as a result, PersonX feels"},
        {Relation::oReact, "as a result, PersonY or others feel"},
        {Relation::xAttr, "PersonX is seen as"},
        {Relation::xIntent, "because PersonX wanted"},
        {Relation::xNeed, "but before, PersonX needed"},
        {Relation::Causes, "causes"},
        {Relation::xReason, "because"},
        {Relation::isBefore, "happens before"},
        {Relation::isAfter, "happens after"},
        {Relation::HinderedBy, "can be hindered by"},
        {Relation::HasSubEvent, "includes the event or action"},
    };
    return set;
}

TemplateSet build_s_template() {
    TemplateSet set;
    set.name = TemplateSetName::STemplate;
    set.templates = {
        {Relation::xWant, "<h>, thus, <t>"},
        {Relation::oWant, "<h>, thus, <t>"},
        {Relation::xEffect, "<h>, thus as an result, <t>"},
        {Relation::oEffect, "<h>, thus as an result, <t>"},
        {Relation::xReact, "<h>, thus as a result on PersonX's emotion, <t>"},
        {Relation::oReact, "<h>, thus as a result on PersonY's emotion, <t>"},
        {Relation::xAttr, "<h>, thus it can be seen about PersonX's attribute that <t>"},
        {Relation::xIntent, "<h>, thus it can be seen about PersonX's intention that <t>"},
        {Relation::xNeed, "The event <h> will not happen unless <t>"},
        {Relation::Causes, "Because <h>, <t>"},
        {Relation::xReason, "<h>, because <t>"},
        {Relation::isBefore, "After <h>, <t>"},
        {Relation::isAfter, "Before <h>, <t>"},
        {Relation::HinderedBy, "The event <h> will not happen, if <t>"},
        {Relation::HasSubEvent, "The event <h> includes the event/action that <t>"},
    };
    return set;
}

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

constexpr std::string_view kPlausibleInstruction =
    "Answer whether the following statement is plausible. Answer with only Yes or No:";
constexpr std::string_view kLikelyInstruction =
    "Judge the following statement if it's likely to occur, only answer True or False:";
constexpr std::string_view kCotSuffix =
    "Let's think step by step, then conclude by answering True or False.";
constexpr std::string_view kTypingChoiceQuestion =
    "Which aspect (among three options 1. event/activity, 2. persona, 3. mental state) of the "
    "subject does the clause ";

// Statement form used by the few-shot design-1 table and the L2M blocks.
std::string if_statement(const KnowledgeTriple& triple) {
    const auto& phrase = h_template().templates.at(triple.relation);
    return "If " + triple.head + ", " + phrase + ", " + triple.tail;
}

std::string fewshot_statement(int seed, const KnowledgeTriple& triple) {
    if (seed == 1) return if_statement(triple);
    return render_assertion(triple, s_template());
}

std::string answer_token(int seed, const LabeledInstance& instance) {
    if (!instance.label.has_value()) {
        throw std::invalid_argument("few-shot exemplar needs a label (instance " +
                                    std::to_string(instance.id) + ")");
    }
    bool positive = *instance.label == 1;
    if (seed == 3) return positive ? "True" : "False";
    return positive ? "Yes" : "No";
}

void require_seed(const MainDesign& design) {
    if (design.seed < 1 || design.seed > 3) {
        throw UndefinedDesign("no design for family " + std::string(to_string(design.family)) +
                              " seed " + std::to_string(design.seed));
    }
    if (design.family == MainFamily::ConstraintL2M && design.seed != 1) {
        throw UndefinedDesign("constraint-l2m is defined only for seed 1");
    }
}

std::string l2m_question_block(const Constraint& constraint, const KnowledgeTriple& triple) {
    std::string out;
    if (const auto* typing = std::get_if<TypingConstraint>(&constraint)) {
        out += "Q: ";
        out += kTypingChoiceQuestion;
        out += "'" + triple.tail + "' express. Answer the choice only.\n";
        if (typing->required == EventType::Activity) {
            out += "Q: Is the above answer option 1. event/activity?\n";
        } else {
            out += "Q: Is the above answer different from option 1. event/activity?\n";
        }
    } else if (const auto* temporal = std::get_if<TemporalConstraint>(&constraint)) {
        out += "Q: Which one of the following two statements is more plausible: 0. " + triple.tail +
               " before " + triple.head + ", 1. " + triple.tail + " after " + triple.head +
               ". Answer 0 or 1 only.\n";
        out += temporal->required == TemporalOrder::HeadAfterTail
                   ? "Q: Is the above answer option 0?\n"
                   : "Q: Is the above answer option 1?\n";
    } else {
        out += "Q: Judge if the meaning of the clauses " + triple.head + " and " + triple.tail +
               " are all clear. Answer 'Yes' or 'No' only.\n";
    }
    return out;
}

}  // namespace

const TemplateSet& h_template() {
    static const TemplateSet set = build_h_template();
    return set;
}

const TemplateSet& s_template() {
    static const TemplateSet set = build_s_template();
    return set;
}

std::string_view to_string(MainFamily family) {
    switch (family) {
        case MainFamily::ZeroShot: return "zero-shot";
        case MainFamily::FewShot: return "few-shot";
        case MainFamily::ZeroShotCoT: return "zero-shot-cot";
        case MainFamily::FewShotCoT: return "few-shot-cot";
        case MainFamily::ConstraintL2M: return "constraint-l2m";
    }
    throw std::logic_error("bad MainFamily");
}

const TemplateSet& template_set_for_seed(int seed) {
    if (seed == 1) return h_template();
    if (seed == 2 || seed == 3) return s_template();
    throw UndefinedDesign("no template set for seed " + std::to_string(seed));
}

std::string render_assertion(const KnowledgeTriple& triple, const TemplateSet& template_set) {
    auto it = template_set.templates.find(triple.relation);
    if (it == template_set.templates.end()) {
        throw std::invalid_argument("template set has no entry for relation " +
                                    std::string(to_string(triple.relation)));
    }
    std::string text;
    if (it->second.find("<h>") != std::string::npos || it->second.find("<t>") != std::string::npos) {
        text = it->second;
        replace_all(text, "<h>", triple.head);
        replace_all(text, "<t>", triple.tail);
    } else {
        text = triple.head + ", " + it->second + " " + triple.tail;
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.pop_back();
    return text;
}

std::string render_main_prompt(const MainDesign& design, const KnowledgeTriple& triple,
                               std::span<const Exemplar> exemplars) {
    require_seed(design);
    const TemplateSet& tset = template_set_for_seed(design.seed);
    const std::string assertion = render_assertion(triple, tset);

    switch (design.family) {
        case MainFamily::ZeroShot: {
            if (!exemplars.empty()) throw std::invalid_argument("zero-shot takes no exemplars");
            const auto instruction = design.seed == 3 ? kLikelyInstruction : kPlausibleInstruction;
            return std::string(instruction) + " " + assertion + ".";
        }
        case MainFamily::FewShot: {
            if (exemplars.empty()) throw std::invalid_argument("few-shot needs exemplars");
            std::string out(design.seed == 3 ? kLikelyInstruction : kPlausibleInstruction);
            out += "\n";
            for (const Exemplar& exemplar : exemplars) {
                if (exemplar.rationale.has_value()) {
                    throw std::invalid_argument("plain few-shot exemplars must not carry rationales");
                }
                out += "Statement: " + fewshot_statement(design.seed, exemplar.instance.triple) +
                       "\nAnswer: " + answer_token(design.seed, exemplar.instance) + "\n";
            }
            out += "Statement: " + assertion + "\nAnswer:";
            return out;
        }
        case MainFamily::ZeroShotCoT: {
            if (!exemplars.empty()) throw std::invalid_argument("zero-shot-cot takes no exemplars");
            if (design.seed == 3) {
                return "Judge the statement " + assertion + " if it's likely to occur. " +
                       std::string(kCotSuffix);
            }
            return "Answer whether the statement " + assertion + " is plausible. " +
                   std::string(kCotSuffix);
        }
        case MainFamily::FewShotCoT: {
            if (exemplars.empty()) throw std::invalid_argument("few-shot-cot needs exemplars");
            std::string out;
            for (const Exemplar& exemplar : exemplars) {
                if (!exemplar.rationale.has_value()) {
                    throw std::invalid_argument("few-shot-cot exemplars need rationales");
                }
                if (!exemplar.instance.label.has_value()) {
                    throw std::invalid_argument("few-shot-cot exemplars need labels");
                }
                out += "Q: Answer whether the following statement is plausible: " +
                       render_assertion(exemplar.instance.triple, tset) + ".\n";
                out += "A: " + *exemplar.rationale + " Thus, the statement is " +
                       (*exemplar.instance.label == 1 ? "likely" : "not likely") + " to occur.\n\n";
            }
            out += "Q: Answer whether the following statement is plausible: " + assertion + ".\nA:";
            return out;
        }
        case MainFamily::ConstraintL2M:
            throw std::invalid_argument(
                "constraint-l2m prompts are rendered by render_constraint_l2m");
    }
    throw std::logic_error("bad MainFamily");
}

std::string render_constraint_prompt(const Constraint& constraint, const KnowledgeTriple& triple,
                                     int variant) {
    if (variant != 1 && variant != 2) {
        throw std::invalid_argument("constraint prompt variant must be 1 or 2");
    }
    if (std::holds_alternative<TypingConstraint>(constraint)) {
        if (variant == 1) {
            return std::string(kTypingChoiceQuestion) + triple.tail +
                   " express? Answer the choice only.";
        }
        return "Determine if clause " + triple.tail +
               " expresses an event or activity of the subject. Answer \"Yes\" or \"No\" only.";
    }
    if (std::holds_alternative<TemporalConstraint>(constraint)) {
        if (variant == 1) {
            return "Which one of the following two statements is more plausible: 0. " + triple.tail +
                   " before " + triple.head + ", 1. " + triple.tail + " after " + triple.head +
                   ". Answer 0 or 1 only.";
        }
        return "Judge if the event " + triple.tail + " likely occurs after the event " +
               triple.head + ". Answer \"Yes\" or \"No\" only.";
    }
    if (variant == 1) {
        return "Which one of the following two statements make more sense: 0. Two clauses " +
               triple.head + " and " + triple.tail +
               " all have clear meaning. 1. One of two following clauses " + triple.head + " and " +
               triple.tail + " has ambiguous meaning. Answer 0 or 1 only.";
    }
    return "Judge if the meaning of the clauses " + triple.head + " and " + triple.tail +
           " are all clear. Answer 'Yes' or 'No' only.";
}

std::string render_constraint_l2m(const KnowledgeTriple& triple,
                                  std::span<const Constraint> constraints,
                                  std::span<const Exemplar> exemplars) {
    if (constraints.empty()) {
        throw std::invalid_argument("constraint-l2m needs at least one constraint");
    }
    std::string out =
        "For each statement below, please answer several questions to reach the final conclusion "
        "if the statement is commonsense.\n"
        "Whenever your answer of a question is No, please conclude that the statement is not "
        "commonsense. Otherwise, please conclude that the statement is commonsense.\n";
    for (const Exemplar& exemplar : exemplars) {
        if (!exemplar.rationale.has_value()) {
            throw std::invalid_argument("l2m exemplars need worked Q/A blocks as rationales");
        }
        out += "\nStatement: " + if_statement(exemplar.instance.triple) + "\n";
        out += *exemplar.rationale;
        out += "\n";
    }
    const std::string statement = if_statement(triple);
    out += "\nStatement: " + statement + "\n";
    for (const Constraint& constraint : constraints) {
        out += l2m_question_block(constraint, triple);
    }
    out += "Q: Is the statement \"" + statement + "\" plausible?\nA:";
    return out;
}

std::vector<Exemplar> fewshot_fixture_exemplars(int seed) {
    auto ex = [](std::int64_t id, std::string_view head, Relation relation, std::string_view tail,
                 int label) {
        return Exemplar{LabeledInstance{id, make_triple(head, relation, tail), label, "train"},
                        std::nullopt};
    };
    switch (seed) {
        case 1:
            return {
                ex(1, "PersonX push PersonY back", Relation::oEffect,
                   "PeopleX step back from PersonX", 1),
                ex(2, "PersonX regain PersonY 's composure", Relation::HinderedBy,
                   "PersonY be disown personx", 1),
                ex(3, "PersonX be nowhere", Relation::HinderedBy,
                   "PersonX friend will not keep PersonY", 1),
                ex(4, "PersonX chase PersonZ away", Relation::xEffect, "PersonY lose friend", 1),
                ex(5, "PersonX wave PersonY away", Relation::xEffect, "PersonY roll PersonZ eye", 1),
            };
        case 2:
            return {
                ex(1, "PersonX stay away from PersonY", Relation::xEffect,
                   "PersonX call out to PersonX", 0),
                ex(2, "PersonX help the PersonY", Relation::xEffect, "PersonX be rebuff by PersonY",
                   1),
                ex(3, "PersonX turn down that", Relation::xAttr, "PersonX get PersonY into trouble",
                   0),
                ex(4, "PersonX be real", Relation::oEffect, "PersonY argue PersonZ about it", 1),
                ex(5, "PersonX challenge PersonZ 's friend", Relation::oWant,
                   "PersonY want PersonY not let", 1),
            };
        case 3:
            return {
                ex(1, "PersonX get PersonX thing together", Relation::xAttr, "PersonX be helpful",
                   1),
                ex(2, "PersonX invite PersonY to lunch", Relation::oWant,
                   "PersonY want PersonX be a leader", 0),
                ex(3, "PersonX catch", Relation::oReact, "PersonY feel PersonY be fluster", 1),
                ex(4, "PersonX break PersonX glass", Relation::xReact,
                   "PersonX feel PersonX be ashamed", 1),
                ex(5, "PersonX need to set plan", Relation::xNeed, "PersonX know about it", 0),
            };
        default:
            throw UndefinedDesign("no few-shot fixture for seed " + std::to_string(seed));
    }
}

std::vector<Exemplar> fewshot_cot_fixture_exemplars() {
    auto ex = [](std::int64_t id, std::string_view head, Relation relation, std::string_view tail,
                 int label, std::string rationale) {
        return Exemplar{LabeledInstance{id, make_triple(head, relation, tail), label, "train"},
                        std::move(rationale)};
    };
    return {
        ex(1, "PersonX find PersonY", Relation::isBefore, "PersonX wake up on ground", 0,
           "Let's think step by step. If PersonX just wake up on the ground, that means PersonX "
           "was sleeping before that. Thus, PersonX cannot be conscious to find another person."),
        ex(2, "PeopleX deserve happiness", Relation::xReact, "PersonX reach out to PeopleX", 0,
           "Let's think step by step. The events 'PeopleX deserve happiness' and 'PersonX reach "
           "out to PeopleX' are likely irrevelant. Also, the clause 'PersonX reach out to PeopleX' "
           "does not describe what PersonX feels."),
        ex(3, "PersonX have a sheet", Relation::xNeed, "PersonX meet PersonY requirement", 0,
           "Let's think step by step. If PersonX doesn't meet PersonY requirement, PersonX likely "
           "doesn't get the reward from PersonY. However, in this case, it's not clear whether 'a "
           "sheet' refer to PersonY's reward or not."),
        ex(4, "PersonX occupy PersonY position", Relation::xWant, "PersonY want to aid in position",
           1,
           "Let's think step by step. When PersonX occupy PersonY position, it means PersonY "
           "already worked at this position and has experience to do the job. Therefore, it's "
           "likely that PersonX want PersonY to aid PerosonX when PersonX is in that job "
           "position."),
        ex(5, "PersonX see that", Relation::xEffect, "PersonX want a pet", 1,
           "Let's think step by step. In this context, we can refer the word 'that' as some "
           "activity where people play with their pet. Therefore, it stimulates PersonX's desire "
           "to have a pet."),
    };
}

std::vector<Exemplar> l2m_fixture_exemplars() {
    auto ex = [](std::int64_t id, std::string_view head, std::string_view tail, int label,
                 std::string block) {
        return Exemplar{LabeledInstance{id, make_triple(head, Relation::xReact, tail), label,
                                        "train"},
                        std::move(block)};
    };
    const std::string choice_q(kTypingChoiceQuestion);
    return {
        ex(1, "PersonX prevent PersonY", "PersonX never reach out to anyone", 0,
           "Q: " + choice_q +
               "'PersonX never reach out to anyone' express. Answer the choice only.\n"
               "A: 1. event/activity\n"
               "Q: Is the above answer different from option 1. event/activity?\n"
               "A: No. Thus, the statement is not commonsense"),
        ex(2, "PersonX go to sleep on hollow", "PersonX be tired", 0,
           "Q: " + choice_q +
               "'PersonX feel PersonX be tired' express. Answer the choice only.\n"
               "A: 3. mental state\n"
               "Q: Is the above answer different from option 1. event/activity?\n"
               "A: Yes\n"
               "Q: Is the statement \"If PersonX go to sleep on hollow, as a result, PersonX "
               "feels, PersonX be tired\" plausible?\n"
               "A: No. Thus, the statement is not commonsense"),
        ex(3, "PersonX eat the sub", "PersonX be full", 1,
           "Q: " + choice_q +
               "'PersonX feel PersonX be full' express. Answer the choice only.\n"
               "A: 3. mental state\n"
               "Q: Is the above answer different from option 1. event/activity?\n"
               "A: Yes\n"
               "Q: Is the statement \"If PersonX eat the sub, as a result, PersonX feels, PersonX "
               "be full\" plausible?\n"
               "A: Yes. Thus, the statement is commonsense"),
    };
}

}  // namespace cskbr
