#include <doctest.h>

#include "cskbr/core.hpp"
#include "golden_corpus.hpp"

using namespace cskbr;

TEST_CASE("relation parsing is total over the 15 names and case-sensitive") {
    CHECK(all_relations().size() == 15);
    for (Relation relation : all_relations()) {
        CHECK(parse_relation(to_string(relation)) == relation);
    }
    CHECK_THROWS_AS(parse_relation("xreact"), UnknownRelation);
    CHECK_THROWS_AS(parse_relation("XReact"), UnknownRelation);
    CHECK_THROWS_AS(parse_relation("isbefore"), UnknownRelation);
    // physical-entity relations from the wider taxonomy are rejected
    CHECK_THROWS_AS(parse_relation("ObjectUse"), UnknownRelation);
    CHECK_THROWS_AS(parse_relation("AtLocation"), UnknownRelation);
    CHECK_THROWS_AS(parse_relation(""), UnknownRelation);
}

TEST_CASE("make_triple trims and rejects empty events") {
    KnowledgeTriple triple = make_triple("  A  ", Relation::Causes, "\tB\n");
    CHECK(triple.head == "A");
    CHECK(triple.tail == "B");
    CHECK_THROWS_AS(make_triple("  ", Relation::Causes, "B"), std::invalid_argument);
    CHECK_THROWS_AS(make_triple("A", Relation::Causes, " \n "), std::invalid_argument);
}

TEST_CASE("event type options map to the multiple-choice ordinals") {
    CHECK(option_number(EventType::Activity) == 1);
    CHECK(option_number(EventType::Persona) == 2);
    CHECK(option_number(EventType::MentalState) == 3);
}

TEST_CASE("relation_constraints returns the exact rule-table rows") {
    const RuleSet post = post_pilot_rules();
    const RuleSet pre = pre_pilot_rules();

    auto post_xreact = relation_constraints(Relation::xReact, post);
    REQUIRE(post_xreact.size() == 1);
    CHECK(post_xreact[0] == Constraint{TypingConstraint{EventType::MentalState}});

    CHECK(relation_constraints(Relation::Causes, post).empty());

    auto pre_hindered = relation_constraints(Relation::HinderedBy, pre);
    REQUIRE(pre_hindered.size() == 2);
    CHECK(pre_hindered[0] == Constraint{TemporalConstraint{TemporalOrder::HeadAfterTail}});
    CHECK(pre_hindered[1] == Constraint{AmbiguityConstraint{}});

    auto pre_causes = relation_constraints(Relation::Causes, pre);
    REQUIRE(pre_causes.size() == 2);
    CHECK(pre_causes[0] == Constraint{TemporalConstraint{TemporalOrder::HeadBeforeTail}});
}

TEST_CASE("post-pilot rules are the pre-pilot rules minus ambiguity and dropped pairs") {
    const RuleSet post = post_pilot_rules();
    const RuleSet pre = pre_pilot_rules();
    for (Relation relation : all_relations()) {
        auto post_list = relation_constraints(relation, post);
        auto pre_list = relation_constraints(relation, pre);
        // post list must be a subsequence of the pre list with ambiguity removed
        std::size_t cursor = 0;
        for (const Constraint& constraint : post_list) {
            CHECK(kind_of(constraint) != ConstraintKind::Ambiguity);
            bool found = false;
            while (cursor < pre_list.size()) {
                if (pre_list[cursor] == constraint) {
                    found = true;
                    ++cursor;
                    break;
                }
                ++cursor;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("built-in rule sets serialize byte-identically to the transcribed fixtures") {
    const std::string dir = std::string(CSKBR_REPO_DIR) + "/tests/fixtures/";
    CHECK(serialize_rules(post_pilot_rules()) ==
          testing::normalize_newlines(testing::read_file(dir + "rules_postpilot.rules")));
    CHECK(serialize_rules(pre_pilot_rules()) ==
          testing::normalize_newlines(testing::read_file(dir + "rules_prepilot.rules")));
}

TEST_CASE("rule file round trip and error handling") {
    const RuleSet pre = pre_pilot_rules();
    RuleSet parsed = parse_rules_text(serialize_rules(pre));
    CHECK(parsed.rules == pre.rules);
    CHECK(parsed.name == RuleSet::Name::Custom);

    RuleSet sparse = parse_rules_text("# comment\nxReact = [typing:mental]\n\n");
    CHECK(relation_constraints(Relation::xReact, sparse).size() == 1);
    CHECK(relation_constraints(Relation::xWant, sparse).empty());

    CHECK_THROWS_AS(parse_rules_text("xReact = typing:mental"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rules_text("Fake = [ambiguity]"), UnknownRelation);
    CHECK_THROWS_AS(parse_rules_text("xReact = [typing:wrong]"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rules_text("xReact = [ambiguity]\nxReact = [ambiguity]"),
                    std::invalid_argument);
    // one relation cannot carry two constraints of the same kind
    CHECK_THROWS_AS(parse_rules_text("xReact = [typing:mental, typing:persona]"),
                    std::invalid_argument);
}

TEST_CASE("constraint spec strings round trip") {
    for (const char* spec : {"typing:mental", "typing:persona", "typing:activity", "temporal:after",
                             "temporal:before", "ambiguity"}) {
        CHECK(to_string(parse_constraint(spec)) == spec);
    }
    CHECK_THROWS_AS(parse_constraint("typing"), std::invalid_argument);
}
