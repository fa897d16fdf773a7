#include "cskbr/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

namespace cskbr {

namespace {

constexpr std::array<Relation, kRelationCount> kAllRelations = {
    Relation::xWant,    Relation::oWant,     Relation::xEffect, Relation::oEffect,
    Relation::xReact,   Relation::oReact,    Relation::xAttr,   Relation::xIntent,
    Relation::xNeed,    Relation::Causes,    Relation::xReason, Relation::isBefore,
    Relation::isAfter,  Relation::HinderedBy, Relation::HasSubEvent,
};

constexpr std::array<std::string_view, kRelationCount> kRelationNames = {
    "xWant",   "oWant",    "xEffect",  "oEffect",    "xReact",
    "oReact",  "xAttr",    "xIntent",  "xNeed",      "Causes",
    "xReason", "isBefore", "isAfter",  "HinderedBy", "HasSubEvent",
};

}  // namespace

std::span<const Relation> all_relations() { return kAllRelations; }

std::string_view to_string(Relation relation) {
    return kRelationNames[static_cast<std::size_t>(relation)];
}

Relation parse_relation(std::string_view name) {
    for (std::size_t i = 0; i < kRelationCount; ++i) {
        if (kRelationNames[i] == name) return kAllRelations[i];
    }
    throw UnknownRelation(name);
}

std::string_view to_string(EventType type) {
    switch (type) {
        case EventType::Activity: return "activity";
        case EventType::Persona: return "persona";
        case EventType::MentalState: return "mental";
    }
    throw std::logic_error("bad EventType");
}

int option_number(EventType type) { return static_cast<int>(type); }

std::string_view to_string(TemporalOrder order) {
    return order == TemporalOrder::HeadAfterTail ? "after" : "before";
}

std::string_view to_string(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::Typing: return "typing";
        case ConstraintKind::Temporal: return "temporal";
        case ConstraintKind::Ambiguity: return "ambiguity";
    }
    throw std::logic_error("bad ConstraintKind");
}

ConstraintKind kind_of(const Constraint& constraint) {
    if (std::holds_alternative<TypingConstraint>(constraint)) return ConstraintKind::Typing;
    if (std::holds_alternative<TemporalConstraint>(constraint)) return ConstraintKind::Temporal;
    return ConstraintKind::Ambiguity;
}

std::string to_string(const Constraint& constraint) {
    if (const auto* typing = std::get_if<TypingConstraint>(&constraint)) {
        return "typing:" + std::string(to_string(typing->required));
    }
    if (const auto* temporal = std::get_if<TemporalConstraint>(&constraint)) {
        return "temporal:" + std::string(to_string(temporal->required));
    }
    return "ambiguity";
}

Constraint parse_constraint(std::string_view spec) {
    if (spec == "ambiguity") return AmbiguityConstraint{};
    if (spec == "typing:mental") return TypingConstraint{EventType::MentalState};
    if (spec == "typing:persona") return TypingConstraint{EventType::Persona};
    if (spec == "typing:activity") return TypingConstraint{EventType::Activity};
    if (spec == "temporal:after") return TemporalConstraint{TemporalOrder::HeadAfterTail};
    if (spec == "temporal:before") return TemporalConstraint{TemporalOrder::HeadBeforeTail};
    throw std::invalid_argument("unknown constraint spec: " + std::string(spec));
}

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

KnowledgeTriple make_triple(std::string_view head, Relation relation, std::string_view tail) {
    KnowledgeTriple triple{trim(head), relation, trim(tail)};
    if (triple.head.empty()) throw std::invalid_argument("triple head is empty");
    if (triple.tail.empty()) throw std::invalid_argument("triple tail is empty");
    return triple;
}

std::string_view to_string(RuleSet::Name name) {
    switch (name) {
        case RuleSet::Name::PrePilot: return "PrePilot";
        case RuleSet::Name::PostPilot: return "PostPilot";
        case RuleSet::Name::Custom: return "Custom";
    }
    throw std::logic_error("bad RuleSet::Name");
}

void validate(const RuleSet& ruleset) {
    for (const auto& [relation, constraints] : ruleset.rules) {
        bool seen[3] = {false, false, false};
        for (const auto& constraint : constraints) {
            auto slot = static_cast<std::size_t>(kind_of(constraint));
            if (seen[slot]) {
                throw std::invalid_argument("duplicate " + std::string(to_string(kind_of(constraint))) +
                                            " constraint for relation " +
                                            std::string(to_string(relation)));
            }
            seen[slot] = true;
        }
    }
}

RuleSet post_pilot_rules() {
    RuleSet ruleset;
    ruleset.name = RuleSet::Name::PostPilot;
    for (Relation relation : all_relations()) ruleset.rules[relation] = {};
    ruleset.rules[Relation::xReact] = {TypingConstraint{EventType::MentalState}};
    ruleset.rules[Relation::oReact] = {TypingConstraint{EventType::MentalState}};
    ruleset.rules[Relation::xAttr] = {TypingConstraint{EventType::Persona}};
    ruleset.rules[Relation::xIntent] = {TemporalConstraint{TemporalOrder::HeadAfterTail}};
    ruleset.rules[Relation::xNeed] = {TemporalConstraint{TemporalOrder::HeadAfterTail}};
    return ruleset;
}

RuleSet pre_pilot_rules() {
    RuleSet ruleset = post_pilot_rules();
    ruleset.name = RuleSet::Name::PrePilot;
    ruleset.rules[Relation::Causes] = {TemporalConstraint{TemporalOrder::HeadBeforeTail}};
    ruleset.rules[Relation::HinderedBy] = {TemporalConstraint{TemporalOrder::HeadAfterTail}};
    for (Relation relation : all_relations()) {
        ruleset.rules[relation].push_back(AmbiguityConstraint{});
    }
    return ruleset;
}

std::span<const Constraint> relation_constraints(Relation relation, const RuleSet& ruleset) {
    auto it = ruleset.rules.find(relation);
    if (it == ruleset.rules.end()) return {};
    return it->second;
}

std::string serialize_rules(const RuleSet& ruleset) {
    std::string out;
    for (Relation relation : all_relations()) {
        out += to_string(relation);
        out += " = [";
        auto constraints = relation_constraints(relation, ruleset);
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            if (i > 0) out += ", ";
            out += to_string(constraints[i]);
        }
        out += "]\n";
    }
    return out;
}

RuleSet parse_rules_text(std::string_view text, RuleSet::Name name) {
    RuleSet ruleset;
    ruleset.name = name;
    std::istringstream stream{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        std::string entry = trim(line);
        if (entry.empty() || entry.front() == '#') continue;
        auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("rule file line " + std::to_string(line_no) +
                                        ": expected 'relation = [...]'");
        }
        Relation relation = parse_relation(trim(entry.substr(0, eq)));
        std::string rhs = trim(entry.substr(eq + 1));
        if (rhs.size() < 2 || rhs.front() != '[' || rhs.back() != ']') {
            throw std::invalid_argument("rule file line " + std::to_string(line_no) +
                                        ": constraint list must be bracketed");
        }
        std::vector<Constraint> constraints;
        std::string body = trim(rhs.substr(1, rhs.size() - 2));
        if (!body.empty()) {
            std::size_t start = 0;
            while (start <= body.size()) {
                auto comma = body.find(',', start);
                std::string spec = trim(body.substr(start, comma - start));
                if (spec.empty()) {
                    throw std::invalid_argument("rule file line " + std::to_string(line_no) +
                                                ": empty constraint spec");
                }
                constraints.push_back(parse_constraint(spec));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
        if (ruleset.rules.contains(relation)) {
            throw std::invalid_argument("rule file line " + std::to_string(line_no) +
                                        ": duplicate entry for " + std::string(to_string(relation)));
        }
        ruleset.rules[relation] = std::move(constraints);
    }
    validate(ruleset);
    return ruleset;
}

RuleSet load_rules_file(const std::string& path, RuleSet::Name name) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rule file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_rules_text(buffer.str(), name);
}

}  // namespace cskbr
