#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cskbr/experiment.hpp"
#include "cskbr/selection.hpp"

namespace {

using namespace cskbr;
using nlohmann::json;

int report_error(const std::string& stage, const std::exception& e) {
    json summary = {{"error", e.what()}, {"stage", stage}};
    std::cerr << summary.dump() << "\n";
    return 1;
}

Constraint constraint_from_design_name(const std::string& name) {
    if (name.rfind("typing", 0) == 0) return TypingConstraint{EventType::MentalState};
    if (name.rfind("temporal", 0) == 0) return TemporalConstraint{TemporalOrder::HeadAfterTail};
    return AmbiguityConstraint{};
}

// Design names: zero-shot-1..3, few-shot-1..3, zero-shot-cot-1..3,
// few-shot-cot-1..3, constraint-l2m-1, typing-1/2, temporal-1/2, ambiguity-1/2.
std::string render_by_name(const std::string& design, const KnowledgeTriple& triple,
                           std::size_t exemplar_count) {
    auto ends_with_seat = [&design](std::string_view prefix, int& seed) {
        if (design.size() != prefix.size() + 2 || design.rfind(prefix, 0) != 0) return false;
        if (design[prefix.size()] != '-') return false;
        char last = design.back();
        if (last < '1' || last > '9') return false;
        seed = last - '0';
        return true;
    };
    int seed = 0;
    if (ends_with_seat("zero-shot", seed)) {
        return render_main_prompt({MainFamily::ZeroShot, seed}, triple, {});
    }
    if (ends_with_seat("few-shot", seed)) {
        auto exemplars = fewshot_fixture_exemplars(seed);
        exemplars.resize(std::min(exemplar_count, exemplars.size()));
        return render_main_prompt({MainFamily::FewShot, seed}, triple, exemplars);
    }
    if (ends_with_seat("zero-shot-cot", seed)) {
        return render_main_prompt({MainFamily::ZeroShotCoT, seed}, triple, {});
    }
    if (ends_with_seat("few-shot-cot", seed)) {
        auto exemplars = fewshot_cot_fixture_exemplars();
        exemplars.resize(std::min(exemplar_count, exemplars.size()));
        return render_main_prompt({MainFamily::FewShotCoT, seed}, triple, exemplars);
    }
    if (ends_with_seat("constraint-l2m", seed)) {
        if (seed != 1) throw UndefinedDesign("constraint-l2m is defined only for seed 1");
        const RuleSet rules = post_pilot_rules();
        auto constraints = relation_constraints(triple.relation, rules);
        auto exemplars = l2m_fixture_exemplars();
        exemplars.resize(std::min(exemplar_count, exemplars.size()));
        return render_constraint_l2m(triple, constraints, exemplars);
    }
    if (ends_with_seat("typing", seed) || ends_with_seat("temporal", seed) ||
        ends_with_seat("ambiguity", seed)) {
        return render_constraint_prompt(constraint_from_design_name(design), triple, seed);
    }
    throw std::invalid_argument("unknown design name: " + design);
}

std::vector<std::pair<ConstraintKind, Relation>> parse_keep_pairs(
    const std::vector<std::string>& specs) {
    std::vector<std::pair<ConstraintKind, Relation>> pairs;
    for (const std::string& spec : specs) {
        auto colon = spec.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("keep pair must look like typing:xReact, got " + spec);
        }
        std::string kind = spec.substr(0, colon);
        ConstraintKind parsed_kind;
        if (kind == "typing") parsed_kind = ConstraintKind::Typing;
        else if (kind == "temporal") parsed_kind = ConstraintKind::Temporal;
        else if (kind == "ambiguity") parsed_kind = ConstraintKind::Ambiguity;
        else throw std::invalid_argument("unknown constraint kind: " + kind);
        pairs.emplace_back(parsed_kind, parse_relation(spec.substr(colon + 1)));
    }
    return pairs;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constraint-checked LLM prompting for commonsense KB triple classification"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a full evaluation from a config file");
    std::string config_path;
    std::string override_output;
    std::string override_cache_mode;
    std::string override_dataset;
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--output-dir", override_output, "override output directory");
    run->add_option("--cache-mode", override_cache_mode, "override cache mode");
    run->add_option("--dataset", override_dataset, "override dataset path");

    // synthesize
    auto* synthesize = app.add_subcommand("synthesize", "build a negative-sampling benchmark");
    std::string synth_source, synth_out;
    SynthesisParams synth_params;
    synthesize->add_option("--source", synth_source, "source dataset CSV")->required();
    synthesize->add_option("--out", synth_out, "output CSV")->required();
    synthesize->add_option("--seed", synth_params.seed, "random seed");
    synthesize->add_option("--heads", synth_params.n_heads, "distinct heads to select");
    synthesize->add_option("--rel-neg", synth_params.n_relation_negatives,
                           "relation-corrupted negatives");
    synthesize->add_option("--tail-neg", synth_params.n_tail_negatives,
                           "tail-corrupted negatives");

    // downsample
    auto* downsample = app.add_subcommand("downsample", "stratified (relation,label) downsampling");
    std::string down_input, down_out;
    std::string down_strata = "relation-label";
    double down_factor = 4.0;
    std::uint64_t down_seed = 0;
    std::optional<std::size_t> down_target;
    std::size_t down_target_value = 0;
    downsample->add_option("--input", down_input, "dataset CSV")->required();
    downsample->add_option("--out", down_out, "output CSV")->required();
    downsample->add_option("--factor", down_factor, "downsampling factor");
    downsample->add_option("--seed", down_seed, "random seed");
    downsample->add_option("--strata", down_strata,
                           "'relation-label' (default) or 'relation' (pilot-sample profile)");
    auto* target_opt = downsample->add_option("--target", down_target_value,
                                              "exact output size (adjusts largest strata)");

    // pilot
    auto* pilot = app.add_subcommand("pilot", "score constraint-relation pairs and refine rules");
    std::string pilot_scores, pilot_config, pilot_rules_out, pilot_table_out;
    std::vector<std::string> pilot_keep;
    pilot->add_option("--scores", pilot_scores, "pilot score fixture JSON (skips the LLM pass)");
    pilot->add_option("--config", pilot_config, "experiment config for a live pilot pass");
    pilot->add_option("--keep", pilot_keep, "prior-knowledge keep pairs, e.g. typing:xReact");
    pilot->add_option("--rules-out", pilot_rules_out, "write the refined rule set here")
        ->required();
    pilot->add_option("--table-out", pilot_table_out, "write the decision table here");

    // render
    auto* render = app.add_subcommand("render", "print any prompt for inspection");
    std::string render_design, render_head, render_relation, render_tail, render_triple;
    std::size_t render_exemplars = 5;
    render->add_option("--design", render_design, "design name, e.g. zero-shot-1")->required();
    render->add_option("--triple", render_triple, "whole triple as 'head|relation|tail'");
    render->add_option("--head", render_head, "head event");
    render->add_option("--relation", render_relation, "relation name");
    render->add_option("--tail", render_tail, "tail event");
    render->add_option("--exemplars", render_exemplars, "exemplar count for few-shot designs");

    // cost
    auto* cost = app.add_subcommand("cost", "per-instance word cost from a run ledger");
    std::string cost_ledger;
    cost->add_option("--ledger", cost_ledger, "ledger.jsonl from a run")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ExperimentConfig config = load_config_file(config_path);
            if (!override_output.empty()) config.output_dir = override_output;
            if (!override_cache_mode.empty()) config.cache_mode = parse_cache_mode(override_cache_mode);
            if (!override_dataset.empty()) config.dataset_path = override_dataset;
            auto provider = make_provider(config);
            ExperimentResult result = run_experiment(config, *provider);
            std::cout << result.report_text;
            return 0;
        }
        if (synthesize->parsed()) {
            auto source = load_dataset_csv(synth_source);
            auto benchmark = synthesize_sd_atomic(source, synth_params);
            save_dataset_csv(synth_out, benchmark);
            std::size_t positives = 0;
            for (const auto& instance : benchmark) positives += *instance.label;
            std::cout << "wrote " << benchmark.size() << " instances (" << positives
                      << " positive) to " << synth_out << "\n";
            return 0;
        }
        if (downsample->parsed()) {
            if (target_opt->count() > 0) down_target = down_target_value;
            StrataKey strata;
            if (down_strata == "relation-label") strata = StrataKey::RelationAndLabel;
            else if (down_strata == "relation") strata = StrataKey::RelationOnly;
            else throw std::invalid_argument("--strata must be 'relation-label' or 'relation'");
            auto dataset = load_dataset_csv(down_input);
            auto sampled =
                stratified_downsample(dataset, down_factor, down_seed, down_target, strata);
            save_dataset_csv(down_out, sampled);
            std::size_t positives = 0;
            for (const auto& instance : sampled) positives += instance.label.value_or(0);
            std::cout << "wrote " << sampled.size() << " instances (" << positives
                      << " positive) to " << down_out << "\n";
            return 0;
        }
        if (pilot->parsed()) {
            PilotOutcome outcome;
            auto keep_pairs = parse_keep_pairs(pilot_keep);
            if (!pilot_scores.empty()) {
                auto scores = load_refinement_scores(pilot_scores);
                for (auto& score : scores) {
                    for (const auto& [kind, relation] : keep_pairs) {
                        if (score.kind == kind && score.relation == relation) score.keep_flag = true;
                    }
                }
                outcome.scores = scores;
                outcome.refinement = pilot_refine(pre_pilot_rules(), scores);
            } else if (!pilot_config.empty()) {
                ExperimentConfig config = load_config_file(pilot_config);
                auto provider = make_provider(config);
                outcome = run_pilot(config, *provider, keep_pairs);
            } else {
                throw std::invalid_argument("pilot needs --scores or --config");
            }
            std::ofstream rules_out(pilot_rules_out, std::ios::binary);
            if (!rules_out) throw std::runtime_error("cannot write " + pilot_rules_out);
            rules_out << serialize_rules(outcome.refinement.ruleset);
            std::string table = format_refinement_table(outcome);
            if (!pilot_table_out.empty()) {
                std::ofstream table_out(pilot_table_out, std::ios::binary);
                table_out << table;
            }
            std::cout << table;
            std::cout << "refined rule set written to " << pilot_rules_out << "\n";
            return 0;
        }
        if (render->parsed()) {
            if (!render_triple.empty()) {
                auto first = render_triple.find('|');
                auto second = first == std::string::npos ? std::string::npos
                                                         : render_triple.find('|', first + 1);
                if (second == std::string::npos) {
                    throw std::invalid_argument("--triple must look like 'head|relation|tail'");
                }
                render_head = render_triple.substr(0, first);
                render_relation = render_triple.substr(first + 1, second - first - 1);
                render_tail = render_triple.substr(second + 1);
            }
            KnowledgeTriple triple =
                make_triple(render_head, parse_relation(trim(render_relation)), render_tail);
            std::cout << render_by_name(render_design, triple, render_exemplars) << "\n";
            return 0;
        }
        if (cost->parsed()) {
            auto entries = load_ledger_file(cost_ledger);
            auto average = estimate_cost(entries);
            std::map<std::string, std::vector<LedgerEntry>> by_purpose;
            for (const LedgerEntry& entry : entries) by_purpose[entry.purpose].push_back(entry);
            std::cout << "entries: " << entries.size() << "\n";
            for (const auto& [purpose, subset] : by_purpose) {
                std::cout << purpose << ": " << estimate_cost(subset) << " words/instance\n";
            }
            std::cout << "overall: " << average << " words/instance\n";
            return 0;
        }
    } catch (const std::exception& e) {
        return report_error(app.get_subcommands().front()->get_name(), e);
    }
    return 0;
}
