#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cskbr/checker.hpp"
#include "cskbr/core.hpp"
#include "cskbr/evalbench.hpp"
#include "cskbr/prompts.hpp"
#include "cskbr/provider.hpp"

namespace cskbr {

struct ExperimentConfig {
    std::string name = "experiment";
    std::string dataset_path;

    MainFamily family = MainFamily::ZeroShot;
    std::vector<int> designs = {1, 2, 3};

    std::string exemplar_strategy = "random";  // random | kate | kate-s
    std::size_t exemplar_count = 5;
    std::uint64_t seed = 0;
    std::string exemplar_pool_path;  // CSV; empty -> built-in fixture exemplars
    std::string cot_pool_path;       // JSONL with rationales; empty -> built-in fixture
    std::string train_embeddings_path;
    std::string test_embeddings_path;

    std::string ruleset = "post-pilot";  // post-pilot | pre-pilot | rule-file path
    bool apply_plugin = true;
    int typing_variant = 1;
    int temporal_variant = 1;
    int ambiguity_variant = 2;

    std::string provider_kind = "scripted";  // scripted | http
    std::string model = "gpt-3.5-turbo-0301";
    double temperature = 0.0;
    int max_output_tokens = 8;
    int max_output_tokens_cot = 256;
    std::string scripted_responses_path;
    HttpProviderConfig http;

    std::string cache_path;
    CacheMode cache_mode = CacheMode::Off;

    std::string output_dir = "out";
    std::size_t parallelism = 1;
};

ExperimentConfig config_from_json_text(const std::string& text, const std::string& origin);
ExperimentConfig load_config_file(const std::string& path);

// Backend named by the config, wrapped in the record/replay cache layer when
// a cache mode is set. Strict replay builds a cache-only provider.
std::unique_ptr<Provider> make_provider(const ExperimentConfig& config);

struct DesignOutcome {
    int design_seed = 1;
    std::map<std::int64_t, int> baseline_predictions;
    std::map<std::int64_t, int> final_predictions;  // after conjunction with the plugin
    MetricsReport baseline;
    MetricsReport with_plugin;
};

struct InstanceVerdicts {
    std::int64_t instance_id = 0;
    std::vector<ConstraintVerdict> verdicts;
};

struct ExperimentResult {
    std::vector<DesignOutcome> designs;
    MetricsReport baseline_average;
    MetricsReport plugin_average;
    std::vector<InstanceVerdicts> verdicts;
    std::vector<LedgerEntry> ledger;
    std::string report_text;
};

// Full evaluation pass: per design, selects exemplars, renders the main
// prompt, completes and parses it; runs the constraint plugin once per
// instance; conjoins; writes report.txt, per_design/*.csv, verdicts.jsonl,
// and ledger.jsonl under config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, Provider& provider);

struct PilotOutcome {
    std::vector<RefinementInput> scores;
    RefinementResult refinement;
};

// Pilot pass over a dev sample: zero-shot design-3 baseline plus every
// pre-pilot constraint, per-(constraint, relation) F1 with and without the
// check, then rule refinement. keep_pairs marks prior-knowledge overrides.
PilotOutcome run_pilot(const ExperimentConfig& config, Provider& provider,
                       const std::vector<std::pair<ConstraintKind, Relation>>& keep_pairs);

std::string format_refinement_table(const PilotOutcome& outcome);

// Per-instance deterministic seed for exemplar draws.
std::uint64_t mix_seed(std::uint64_t seed, std::int64_t instance_id);

RuleSet resolve_ruleset(const std::string& spec);

}  // namespace cskbr
