#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cskbr/core.hpp"

namespace cskbr {

struct KeyMismatch : std::runtime_error {
    explicit KeyMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct UnlabeledInstance : std::runtime_error {
    explicit UnlabeledInstance(std::int64_t id)
        : std::runtime_error("instance " + std::to_string(id) + " has no gold label") {}
};

struct InsufficientHeads : std::runtime_error {
    InsufficientHeads(std::size_t available, std::size_t needed)
        : std::runtime_error("source has " + std::to_string(available) +
                             " usable distinct heads, need " + std::to_string(needed)) {}
};

struct ExhaustedResampling : std::runtime_error {
    explicit ExhaustedResampling(const std::string& what) : std::runtime_error(what) {}
};

struct MissingScore : std::runtime_error {
    MissingScore(ConstraintKind kind, Relation relation)
        : std::runtime_error("no pilot score for pair (" + std::string(to_string(kind)) + ", " +
                             std::string(to_string(relation)) + ")") {}
};

// Percent metrics plus raw confusion counts. Counts are reals so reports can
// be averaged across seed designs.
struct MetricsReport {
    double tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    std::map<Relation, double> per_relation_f1;
};

// Confusion-matrix arithmetic over identical key sets; precision/recall/F1
// are w.r.t. the positive class, per-relation F1 on each relation's subset.
MetricsReport compute_metrics(const std::map<std::int64_t, int>& predictions,
                              const std::map<std::int64_t, int>& golds,
                              const std::map<std::int64_t, Relation>& relations);

// Field-wise arithmetic mean; per-relation entries averaged over the
// reports that contain them.
MetricsReport average_over_designs(std::span<const MetricsReport> reports);

enum class StrataKey {
    RelationAndLabel,  // benchmark down-scaling; every instance needs a label
    RelationOnly,      // pilot-sample profile; labels not required
};

// Deterministic stratified sampling: each stratum keeps
// round(count / factor) instances, optionally nudged by +-1 on the largest
// strata to hit target_size.
std::vector<LabeledInstance> stratified_downsample(std::span<const LabeledInstance> dataset,
                                                   double factor, std::uint64_t seed,
                                                   std::optional<std::size_t> target_size = {},
                                                   StrataKey strata = StrataKey::RelationAndLabel);

struct SynthesisParams {
    std::size_t n_heads = 1000;
    std::size_t n_relation_negatives = 250;
    std::size_t n_tail_negatives = 250;
    std::vector<Relation> relations = {Relation::xReact, Relation::oReact, Relation::xAttr,
                                       Relation::xIntent, Relation::xNeed};
    std::uint64_t seed = 0;
};

// Negative-sampling benchmark synthesis: picks one triple per head for
// n_heads distinct heads (restricted to the given relations), corrupts the
// relation on n_relation_negatives of them and the tail on n_tail_negatives
// others, resampling until the corrupted triple is absent from the source.
// Corrupted instances get label 0, untouched ones label 1.
std::vector<LabeledInstance> synthesize_sd_atomic(std::span<const LabeledInstance> source,
                                                  const SynthesisParams& params);

struct RefinementInput {
    ConstraintKind kind = ConstraintKind::Typing;
    Relation relation = Relation::xWant;
    double f1_with = 0;
    double f1_baseline = 0;
    bool keep_flag = false;  // prior-knowledge override
};

struct RefinementDecision {
    RefinementInput input;
    bool kept = false;
};

struct RefinementResult {
    RuleSet ruleset;
    std::vector<RefinementDecision> decisions;
};

// Drops every (constraint, relation) pair that did not beat the baseline F1
// unless its keep flag is set. Every pair in the rule set needs a score.
RefinementResult pilot_refine(const RuleSet& ruleset, std::span<const RefinementInput> scores);

std::vector<RefinementInput> load_refinement_scores(const std::string& path);

// Dataset files: UTF-8 CSV, header "id,head,relation,tail,label,split",
// blank label for unlabeled rows.
std::vector<LabeledInstance> load_dataset_csv(const std::string& path);
void save_dataset_csv(const std::string& path, std::span<const LabeledInstance> dataset);
std::vector<LabeledInstance> parse_dataset_csv(std::string_view text, std::string_view origin);
std::string dataset_to_csv(std::span<const LabeledInstance> dataset);

}  // namespace cskbr
