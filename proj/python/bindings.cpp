#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cskbr/checker.hpp"
#include "cskbr/core.hpp"
#include "cskbr/evalbench.hpp"
#include "cskbr/prompts.hpp"
#include "cskbr/provider.hpp"
#include "cskbr/selection.hpp"

namespace py = pybind11;
using namespace cskbr;

namespace {

const TemplateSet& template_set_by_name(const std::string& name) {
    if (name == "h" || name == "H" || name == "h-template") return h_template();
    if (name == "s" || name == "S" || name == "s-template") return s_template();
    throw std::invalid_argument("template set must be 'h' or 's'");
}

RuleSet ruleset_by_name(const std::string& name) {
    if (name == "post-pilot") return post_pilot_rules();
    if (name == "pre-pilot") return pre_pilot_rules();
    return parse_rules_text(name);  // treat anything else as rule-file text
}

}  // namespace

PYBIND11_MODULE(_cskbr, m) {
    m.doc() = "constraint-checked LLM prompting for commonsense KB triple classification";

    py::enum_<Relation>(m, "Relation")
        .value("xWant", Relation::xWant)
        .value("oWant", Relation::oWant)
        .value("xEffect", Relation::xEffect)
        .value("oEffect", Relation::oEffect)
        .value("xReact", Relation::xReact)
        .value("oReact", Relation::oReact)
        .value("xAttr", Relation::xAttr)
        .value("xIntent", Relation::xIntent)
        .value("xNeed", Relation::xNeed)
        .value("Causes", Relation::Causes)
        .value("xReason", Relation::xReason)
        .value("isBefore", Relation::isBefore)
        .value("isAfter", Relation::isAfter)
        .value("HinderedBy", Relation::HinderedBy)
        .value("HasSubEvent", Relation::HasSubEvent);

    py::enum_<EventType>(m, "EventType")
        .value("Activity", EventType::Activity)
        .value("Persona", EventType::Persona)
        .value("MentalState", EventType::MentalState);

    py::enum_<TemporalOrder>(m, "TemporalOrder")
        .value("HeadAfterTail", TemporalOrder::HeadAfterTail)
        .value("HeadBeforeTail", TemporalOrder::HeadBeforeTail);

    py::enum_<MainFamily>(m, "MainFamily")
        .value("ZeroShot", MainFamily::ZeroShot)
        .value("FewShot", MainFamily::FewShot)
        .value("ZeroShotCoT", MainFamily::ZeroShotCoT)
        .value("FewShotCoT", MainFamily::FewShotCoT)
        .value("ConstraintL2M", MainFamily::ConstraintL2M);

    py::class_<TypingConstraint>(m, "TypingConstraint")
        .def(py::init<EventType>(), py::arg("required"))
        .def_readonly("required", &TypingConstraint::required)
        .def("__repr__", [](const TypingConstraint& c) { return to_string(Constraint{c}); });
    py::class_<TemporalConstraint>(m, "TemporalConstraint")
        .def(py::init<TemporalOrder>(), py::arg("required"))
        .def_readonly("required", &TemporalConstraint::required)
        .def("__repr__", [](const TemporalConstraint& c) { return to_string(Constraint{c}); });
    py::class_<AmbiguityConstraint>(m, "AmbiguityConstraint")
        .def(py::init<>())
        .def("__repr__", [](const AmbiguityConstraint&) { return std::string("ambiguity"); });

    py::class_<KnowledgeTriple>(m, "KnowledgeTriple")
        .def(py::init([](const std::string& head, Relation relation, const std::string& tail) {
                 return make_triple(head, relation, tail);
             }),
             py::arg("head"), py::arg("relation"), py::arg("tail"))
        .def_readonly("head", &KnowledgeTriple::head)
        .def_readonly("relation", &KnowledgeTriple::relation)
        .def_readonly("tail", &KnowledgeTriple::tail)
        .def("__repr__", [](const KnowledgeTriple& t) {
            return "(" + t.head + ", " + std::string(to_string(t.relation)) + ", " + t.tail + ")";
        });

    py::class_<LabeledInstance>(m, "LabeledInstance")
        .def(py::init([](std::int64_t id, const KnowledgeTriple& triple, std::optional<int> label,
                         const std::string& split) {
                 return LabeledInstance{id, triple, label, split};
             }),
             py::arg("id"), py::arg("triple"), py::arg("label") = std::nullopt,
             py::arg("split") = "")
        .def_readonly("id", &LabeledInstance::id)
        .def_readonly("triple", &LabeledInstance::triple)
        .def_readonly("label", &LabeledInstance::label)
        .def_readonly("split", &LabeledInstance::split);

    py::class_<Exemplar>(m, "Exemplar")
        .def(py::init([](const LabeledInstance& instance, std::optional<std::string> rationale) {
                 return Exemplar{instance, std::move(rationale)};
             }),
             py::arg("instance"), py::arg("rationale") = std::nullopt)
        .def_readonly("instance", &Exemplar::instance)
        .def_readonly("rationale", &Exemplar::rationale);

    m.def("parse_relation", &parse_relation, py::arg("name"));
    m.def("relation_name", [](Relation relation) { return std::string(to_string(relation)); });
    m.def("all_relations", [] {
        return std::vector<Relation>(all_relations().begin(), all_relations().end());
    });

    m.def(
        "render_assertion",
        [](const KnowledgeTriple& triple, const std::string& template_set) {
            return render_assertion(triple, template_set_by_name(template_set));
        },
        py::arg("triple"), py::arg("template_set") = "h");

    m.def(
        "render_main_prompt",
        [](MainFamily family, int seed, const KnowledgeTriple& triple,
           const std::vector<Exemplar>& exemplars) {
            return render_main_prompt({family, seed}, triple, exemplars);
        },
        py::arg("family"), py::arg("seed"), py::arg("triple"),
        py::arg("exemplars") = std::vector<Exemplar>{});

    m.def(
        "render_constraint_prompt",
        [](const Constraint& constraint, const KnowledgeTriple& triple, int variant) {
            return render_constraint_prompt(constraint, triple, variant);
        },
        py::arg("constraint"), py::arg("triple"), py::arg("variant") = 1);

    m.def(
        "render_constraint_l2m",
        [](const KnowledgeTriple& triple, const std::vector<Constraint>& constraints,
           int n_exemplars) {
            auto exemplars = l2m_fixture_exemplars();
            exemplars.resize(std::min<std::size_t>(n_exemplars, exemplars.size()));
            return render_constraint_l2m(triple, constraints, exemplars);
        },
        py::arg("triple"), py::arg("constraints"), py::arg("n_exemplars") = 0);

    m.def("fewshot_fixture_exemplars", &fewshot_fixture_exemplars, py::arg("seed"));
    m.def("fewshot_cot_fixture_exemplars", &fewshot_cot_fixture_exemplars);

    m.def(
        "relation_constraints",
        [](Relation relation, const std::string& ruleset) {
            const RuleSet rules = ruleset_by_name(ruleset);
            auto constraints = relation_constraints(relation, rules);
            return std::vector<Constraint>(constraints.begin(), constraints.end());
        },
        py::arg("relation"), py::arg("ruleset") = "post-pilot");
    m.def("serialize_rules",
          [](const std::string& ruleset) { return serialize_rules(ruleset_by_name(ruleset)); });

    py::class_<Prediction>(m, "Prediction")
        .def_readonly("verdict", &Prediction::verdict)
        .def_readonly("raw", &Prediction::raw)
        .def_readonly("parsed_ok", &Prediction::parsed_ok);

    py::class_<ConstraintVerdict>(m, "ConstraintVerdict")
        .def(py::init([](const Constraint& constraint, bool satisfied, const std::string& raw,
                         bool parsed_ok) {
                 return ConstraintVerdict{constraint, satisfied, raw, parsed_ok};
             }),
             py::arg("constraint"), py::arg("satisfied"), py::arg("raw") = "",
             py::arg("parsed_ok") = true)
        .def_readonly("satisfied", &ConstraintVerdict::satisfied)
        .def_readonly("raw", &ConstraintVerdict::raw)
        .def_readonly("parsed_ok", &ConstraintVerdict::parsed_ok);

    m.def(
        "parse_main_answer",
        [](const std::string& raw, MainFamily family, int seed) {
            return parse_main_answer(raw, {family, seed});
        },
        py::arg("raw"), py::arg("family"), py::arg("seed"));
    m.def("parse_typing_answer",
          [](const std::string& raw) { return parse_typing_answer(raw); });
    m.def("parse_temporal_answer",
          [](const std::string& raw) { return parse_temporal_answer(raw); });

    py::class_<ConversionOutcome>(m, "ConversionOutcome")
        .def_readonly("satisfied", &ConversionOutcome::satisfied)
        .def_readonly("parsed_ok", &ConversionOutcome::parsed_ok);
    m.def(
        "convert_constraint_answer",
        [](const Constraint& constraint, int variant, const std::string& raw) {
            return convert_constraint_answer(constraint, variant, raw);
        },
        py::arg("constraint"), py::arg("variant"), py::arg("raw"));

    m.def(
        "aggregate",
        [](const Prediction& main, const std::vector<ConstraintVerdict>& verdicts) {
            return aggregate(main, verdicts);
        },
        py::arg("main"), py::arg("verdicts"));

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("tp", &MetricsReport::tp)
        .def_readonly("fp", &MetricsReport::fp)
        .def_readonly("tn", &MetricsReport::tn)
        .def_readonly("fn", &MetricsReport::fn)
        .def_readonly("accuracy", &MetricsReport::accuracy)
        .def_readonly("precision", &MetricsReport::precision)
        .def_readonly("recall", &MetricsReport::recall)
        .def_readonly("f1", &MetricsReport::f1)
        .def_readonly("per_relation_f1", &MetricsReport::per_relation_f1);

    m.def("compute_metrics", &compute_metrics, py::arg("predictions"), py::arg("golds"),
          py::arg("relations"));
    m.def("average_over_designs",
          [](const std::vector<MetricsReport>& reports) { return average_over_designs(reports); });

    m.def(
        "stratified_downsample",
        [](const std::vector<LabeledInstance>& dataset, double factor, std::uint64_t seed,
           std::optional<std::size_t> target_size) {
            return stratified_downsample(dataset, factor, seed, target_size);
        },
        py::arg("dataset"), py::arg("factor"), py::arg("seed"),
        py::arg("target_size") = std::nullopt);

    m.def(
        "synthesize_sd_atomic",
        [](const std::vector<LabeledInstance>& source, std::size_t n_heads,
           std::size_t n_relation_negatives, std::size_t n_tail_negatives, std::uint64_t seed) {
            SynthesisParams params;
            params.n_heads = n_heads;
            params.n_relation_negatives = n_relation_negatives;
            params.n_tail_negatives = n_tail_negatives;
            params.seed = seed;
            return synthesize_sd_atomic(source, params);
        },
        py::arg("source"), py::arg("n_heads") = 1000, py::arg("n_relation_negatives") = 250,
        py::arg("n_tail_negatives") = 250, py::arg("seed") = 0);

    py::class_<EmbeddingStore>(m, "EmbeddingStore")
        .def(py::init<std::size_t>(), py::arg("dimension"))
        .def("add", &EmbeddingStore::add, py::arg("id"), py::arg("vector"))
        .def("dimension", &EmbeddingStore::dimension)
        .def("__len__", &EmbeddingStore::size);

    m.def(
        "select_random",
        [](const std::vector<LabeledInstance>& pool, std::size_t k, std::uint64_t seed) {
            return select_random(pool, k, seed);
        },
        py::arg("pool"), py::arg("k"), py::arg("seed"));
    m.def(
        "select_kate",
        [](const std::vector<LabeledInstance>& pool, const std::vector<double>& query_vector,
           const EmbeddingStore& store, std::size_t k) {
            return select_kate(pool, query_vector, store, k);
        },
        py::arg("pool"), py::arg("query_vector"), py::arg("store"), py::arg("k"));
    m.def(
        "select_kate_s",
        [](const std::vector<LabeledInstance>& pool, const LabeledInstance& query,
           const std::vector<double>& query_vector, const EmbeddingStore& store, std::size_t k) {
            return select_kate_s(pool, query, query_vector, store, k);
        },
        py::arg("pool"), py::arg("query"), py::arg("query_vector"), py::arg("store"), py::arg("k"));

    m.def("count_words", [](const std::string& text) { return count_words(text); });

    m.def("load_dataset_csv", &load_dataset_csv, py::arg("path"));
    m.def(
        "save_dataset_csv",
        [](const std::string& path, const std::vector<LabeledInstance>& dataset) {
            save_dataset_csv(path, dataset);
        },
        py::arg("path"), py::arg("dataset"));
    m.def(
        "dataset_to_csv",
        [](const std::vector<LabeledInstance>& dataset) { return dataset_to_csv(dataset); },
        py::arg("dataset"));
    m.def("parse_dataset_csv",
          [](const std::string& text) { return parse_dataset_csv(text, "<string>"); });

    py::class_<RefinementInput>(m, "RefinementInput")
        .def(py::init([](const std::string& kind, Relation relation, double f1_with,
                         double f1_baseline, bool keep) {
                 RefinementInput input;
                 if (kind == "typing") input.kind = ConstraintKind::Typing;
                 else if (kind == "temporal") input.kind = ConstraintKind::Temporal;
                 else if (kind == "ambiguity") input.kind = ConstraintKind::Ambiguity;
                 else throw std::invalid_argument("kind must be typing/temporal/ambiguity");
                 input.relation = relation;
                 input.f1_with = f1_with;
                 input.f1_baseline = f1_baseline;
                 input.keep_flag = keep;
                 return input;
             }),
             py::arg("kind"), py::arg("relation"), py::arg("f1_with"), py::arg("f1_baseline"),
             py::arg("keep") = false)
        .def_readonly("f1_with", &RefinementInput::f1_with)
        .def_readonly("f1_baseline", &RefinementInput::f1_baseline)
        .def_readonly("keep_flag", &RefinementInput::keep_flag);

    // refines the given rule set and returns its serialized rule-file text
    m.def(
        "pilot_refine",
        [](const std::string& ruleset, const std::vector<RefinementInput>& scores) {
            const RuleSet rules = ruleset_by_name(ruleset);
            RefinementResult result = pilot_refine(rules, scores);
            return serialize_rules(result.ruleset);
        },
        py::arg("ruleset"), py::arg("scores"));
}
