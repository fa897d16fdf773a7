#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cskbr {

// The 15 event relations of the CKBPv2 taxonomy. Parsing is case-sensitive
// and rejects everything else (including the ATOMIC physical-entity block).
enum class Relation {
    xWant,
    oWant,
    xEffect,
    oEffect,
    xReact,
    oReact,
    xAttr,
    xIntent,
    xNeed,
    Causes,
    xReason,
    isBefore,
    isAfter,
    HinderedBy,
    HasSubEvent,
};

inline constexpr std::size_t kRelationCount = 15;

std::span<const Relation> all_relations();
std::string_view to_string(Relation relation);

struct UnknownRelation : std::runtime_error {
    explicit UnknownRelation(std::string_view name)
        : std::runtime_error("unknown relation: " + std::string(name)) {}
};

Relation parse_relation(std::string_view name);

// Content type a tail event can express. Ordinals match the multiple-choice
// options of the typing question (1. event/activity, 2. persona, 3. mental state).
enum class EventType : int {
    Activity = 1,
    Persona = 2,
    MentalState = 3,
};

std::string_view to_string(EventType type);
int option_number(EventType type);

// Required estimated order of head and tail events.
// HeadAfterTail is the rule table's "(a)", HeadBeforeTail its "(b)".
enum class TemporalOrder {
    HeadAfterTail,
    HeadBeforeTail,
};

std::string_view to_string(TemporalOrder order);

enum class ConstraintKind {
    Typing,
    Temporal,
    Ambiguity,
};

std::string_view to_string(ConstraintKind kind);

struct TypingConstraint {
    EventType required;
    bool operator==(const TypingConstraint&) const = default;
};

struct TemporalConstraint {
    TemporalOrder required;
    bool operator==(const TemporalConstraint&) const = default;
};

struct AmbiguityConstraint {
    bool operator==(const AmbiguityConstraint&) const = default;
};

using Constraint = std::variant<TypingConstraint, TemporalConstraint, AmbiguityConstraint>;

ConstraintKind kind_of(const Constraint& constraint);

// Compact spec form used in rule files: "typing:mental", "temporal:after", "ambiguity".
std::string to_string(const Constraint& constraint);
Constraint parse_constraint(std::string_view spec);

std::string trim(std::string_view text);

// One (head event, relation, tail event) knowledge unit.
struct KnowledgeTriple {
    std::string head;
    Relation relation = Relation::xWant;
    std::string tail;

    bool operator==(const KnowledgeTriple&) const = default;
};

// Trims head/tail and rejects triples whose events are empty.
KnowledgeTriple make_triple(std::string_view head, Relation relation, std::string_view tail);

struct LabeledInstance {
    std::int64_t id = 0;
    KnowledgeTriple triple;
    std::optional<int> label;  // 1 = commonsense/plausible, 0 = not
    std::string split;         // optional train/dev/test tag

    bool operator==(const LabeledInstance&) const = default;
};

// Relation -> ordered constraint list. Constraints are ordered typing,
// temporal, ambiguity; no constraint kind appears twice for one relation.
struct RuleSet {
    enum class Name {
        PrePilot,
        PostPilot,
        Custom,
    };

    Name name = Name::Custom;
    std::map<Relation, std::vector<Constraint>> rules;
};

std::string_view to_string(RuleSet::Name name);

// Throws std::invalid_argument when a (relation, kind) pair repeats.
void validate(const RuleSet& ruleset);

// Post-pilot rule table: typing on xReact/oReact (mental), xAttr (persona);
// temporal "after" on xIntent/xNeed.
RuleSet post_pilot_rules();

// Pre-pilot table: post-pilot plus temporal "before" on Causes, temporal
// "after" on HinderedBy, and ambiguity on every relation.
RuleSet pre_pilot_rules();

// Ordered constraint list for a relation; empty when unconstrained. The view
// aliases the rule set, which therefore must outlive it.
std::span<const Constraint> relation_constraints(Relation relation, const RuleSet& ruleset);
std::span<const Constraint> relation_constraints(Relation relation, RuleSet&& ruleset) = delete;

// Rule file format: one "relation = [spec, spec, ...]" line per relation,
// '#' comments and blank lines ignored. Serialization emits all 15 relations
// in taxonomy order.
std::string serialize_rules(const RuleSet& ruleset);
RuleSet parse_rules_text(std::string_view text, RuleSet::Name name = RuleSet::Name::Custom);
RuleSet load_rules_file(const std::string& path, RuleSet::Name name = RuleSet::Name::Custom);

}  // namespace cskbr
