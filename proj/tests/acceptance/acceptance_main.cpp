// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Oracles here are deliberately naive re-implementations kept
// independent of the library code paths they check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <unordered_set>

#include "cskbr/checker.hpp"
#include "cskbr/evalbench.hpp"
#include "cskbr/experiment.hpp"
#include "cskbr/selection.hpp"
#include "../golden_corpus.hpp"

using namespace cskbr;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int number;
    std::string name;
    double time_limit_sec;
    std::function<void()> body;
};

struct Failure : std::runtime_error {
    explicit Failure(const std::string& what) : std::runtime_error(what) {}
};

void require(bool condition, const std::string& what) {
    if (!condition) throw Failure(what);
}

std::string repo_dir() { return CSKBR_REPO_DIR; }

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "cskbr_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

// ---------------------------------------------------------------- criterion 1
void rule_table_fidelity() {
    const std::string dir = repo_dir() + "/tests/fixtures/";
    require(serialize_rules(post_pilot_rules()) ==
                testing::normalize_newlines(testing::read_file(dir + "rules_postpilot.rules")),
            "post-pilot serialization differs from the transcribed fixture");
    require(serialize_rules(pre_pilot_rules()) ==
                testing::normalize_newlines(testing::read_file(dir + "rules_prepilot.rules")),
            "pre-pilot serialization differs from the transcribed fixture");
    for (const RuleSet& rules : {post_pilot_rules(), pre_pilot_rules()}) {
        require(rules.rules.size() == 15, "rule set must cover all 15 relations");
        validate(rules);
    }
}

// ---------------------------------------------------------------- criterion 2
void prompt_golden_suite() {
    const std::string dir = repo_dir() + "/tests/golden/";
    auto corpus = testing::golden_corpus();
    require(corpus.size() >= 25, "golden corpus must hold at least 25 files");
    for (const auto& golden : corpus) {
        std::string expected = testing::normalize_newlines(testing::read_file(dir + golden.file));
        if (golden.render() + "\n" != expected) throw Failure("golden mismatch: " + golden.file);
    }
    const KnowledgeTriple worked =
        make_triple("PersonX prepare for the competition", Relation::xReact, "PersonX win");
    require(render_main_prompt({MainFamily::ZeroShot, 1}, worked, {}) ==
                "Answer whether the following statement is plausible. Answer with only Yes or No: "
                "PersonX prepare for the competition, as a result, PersonX feels PersonX win.",
            "the worked zero-shot example string must match exactly");
}

// ---------------------------------------------------------------- criterion 3
void conjunction_monotonicity() {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        int tp_before = 0, fp_before = 0, tp_after = 0, fp_after = 0, positives = 0;
        const int n = 20 + static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i) {
            int gold = static_cast<int>(rng() % 2);
            Prediction main{static_cast<int>(rng() % 2), "raw", true};
            std::vector<ConstraintVerdict> verdicts;
            auto n_verdicts = rng() % 4;
            for (std::uint64_t v = 0; v < n_verdicts; ++v) {
                verdicts.push_back({AmbiguityConstraint{}, (rng() % 3) != 0, "raw", true});
            }
            Prediction final = aggregate(main, verdicts);
            require(!(main.verdict == 0 && final.verdict == 1),
                    "aggregate flipped a negative to a positive");
            require(final.verdict <= main.verdict, "aggregate must be a restriction");
            positives += gold;
            tp_before += (gold == 1 && main.verdict == 1);
            fp_before += (gold == 0 && main.verdict == 1);
            tp_after += (gold == 1 && final.verdict == 1);
            fp_after += (gold == 0 && final.verdict == 1);
        }
        require(tp_after <= tp_before, "TP grew under conjunction");
        require(fp_after <= fp_before, "FP grew under conjunction");
        if (positives > 0) {
            double recall_before = static_cast<double>(tp_before) / positives;
            double recall_after = static_cast<double>(tp_after) / positives;
            require(recall_after <= recall_before + 1e-12, "recall grew under conjunction");
        }
    }
}

// ---------------------------------------------------------------- criterion 4
void conversion_snippet_oracles() {
    // temporal: enumerated 4-case table (answer 0 asserts head-after-tail)
    const TemporalOrder orders[] = {TemporalOrder::HeadAfterTail, TemporalOrder::HeadBeforeTail};
    for (TemporalOrder required : orders) {
        for (int answer : {0, 1}) {
            bool expected = (answer == 0) == (required == TemporalOrder::HeadAfterTail);
            auto outcome = convert_constraint_answer(TemporalConstraint{required}, 1,
                                                     std::to_string(answer));
            require(outcome.parsed_ok, "temporal conversion failed to parse a digit");
            require(outcome.satisfied == expected, "temporal conversion truth table mismatch");
        }
    }
    // typing: 3 parsed x 3 required
    const EventType types[] = {EventType::Activity, EventType::Persona, EventType::MentalState};
    const char* answers[] = {"1. event/activity", "2. persona", "3. mental state"};
    for (EventType required : types) {
        for (int a = 0; a < 3; ++a) {
            auto outcome = convert_constraint_answer(TypingConstraint{required}, 1, answers[a]);
            require(outcome.parsed_ok, "typing conversion failed to parse an option");
            require(outcome.satisfied == (types[a] == required),
                    "typing conversion truth table mismatch");
        }
    }
}

// ---------------------------------------------------------------- criterion 5
void metrics_oracle() {
    std::mt19937_64 rng(271828);
    std::map<std::int64_t, int> predictions, golds;
    std::map<std::int64_t, Relation> relations;
    for (int i = 0; i < 1000; ++i) {
        predictions[i] = static_cast<int>(rng() % 2);
        golds[i] = static_cast<int>(rng() % 2);
        relations[i] = all_relations()[rng() % 15];
    }
    MetricsReport report = compute_metrics(predictions, golds, relations);
    int tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& [id, predicted] : predictions) {
        int gold = golds[id];
        tp += (gold == 1 && predicted == 1);
        fp += (gold == 0 && predicted == 1);
        tn += (gold == 0 && predicted == 0);
        fn += (gold == 1 && predicted == 0);
    }
    require(report.tp == tp && report.fp == fp && report.tn == tn && report.fn == fn,
            "confusion counts differ from the naive loop");
    double precision = tp + fp > 0 ? 100.0 * tp / (tp + fp) : 0.0;
    double recall = tp + fn > 0 ? 100.0 * tp / (tp + fn) : 0.0;
    require(report.precision == precision && report.recall == recall,
            "precision/recall differ from the naive loop");
    double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    require(report.f1 == f1, "f1 differs from the naive loop");
    require(report.accuracy == 100.0 * (tp + tn) / 1000.0, "accuracy differs from the naive loop");

    // published arithmetic: P=20, R=50 -> exactly 28.57 at two decimals
    std::map<std::int64_t, int> p2, g2;
    std::map<std::int64_t, Relation> r2;
    auto put = [&](std::int64_t id, int gold, int predicted) {
        p2[id] = predicted;
        g2[id] = gold;
        r2[id] = Relation::xWant;
    };
    put(0, 1, 1);
    for (int i = 1; i <= 4; ++i) put(i, 0, 1);
    put(5, 1, 0);
    MetricsReport random_row = compute_metrics(p2, g2, r2);
    require(random_row.precision == 20.0 && random_row.recall == 50.0,
            "random-baseline confusion construction is off");
    require(round2(random_row.f1) == 28.57, "F1(20, 50) must round to 28.57");

    double human_f1 = 2 * 94.37 * 88.22 / (94.37 + 88.22);
    require(std::abs(human_f1 - 91.17) <= 0.05, "F1(94.37, 88.22) must land within 0.05 of 91.17");
}

// ---------------------------------------------------------------- criterion 6
void pilot_refinement_reproduction() {
    auto scores = load_refinement_scores(repo_dir() + "/tests/fixtures/pilot_scores.json");
    RefinementResult result = pilot_refine(pre_pilot_rules(), scores);
    require(serialize_rules(result.ruleset) == serialize_rules(post_pilot_rules()),
            "refining the pre-pilot rules with the pilot scores must yield the post-pilot table");
}

// ---------------------------------------------------------------- criterion 7
void synthesis_properties() {
    // toy source: 1200 distinct heads x 8 triples each, constrained relations only
    std::vector<LabeledInstance> source;
    std::int64_t id = 0;
    const Relation constrained[] = {Relation::xReact, Relation::oReact, Relation::xAttr,
                                    Relation::xIntent, Relation::xNeed};
    for (int h = 0; h < 1200; ++h) {
        for (int t = 0; t < 8; ++t) {
            source.push_back({id++, make_triple("head event " + std::to_string(h),
                                                constrained[(h + t) % 5],
                                                "tail event " + std::to_string(h) + "/" +
                                                    std::to_string(t)),
                              std::nullopt, "test"});
        }
    }
    SynthesisParams params;
    params.seed = 17;
    auto benchmark = synthesize_sd_atomic(source, params);
    require(benchmark.size() == 1000, "default synthesis must produce 1000 instances");

    std::unordered_set<std::string> source_keys;
    for (const LabeledInstance& instance : source) {
        source_keys.insert(instance.triple.head + "\x1f" +
                           std::string(to_string(instance.triple.relation)) + "\x1f" +
                           instance.triple.tail);
    }
    std::set<std::string> heads;
    std::size_t positives = 0, negatives = 0;
    for (const LabeledInstance& instance : benchmark) {
        heads.insert(instance.triple.head);
        std::string key = instance.triple.head + "\x1f" +
                          std::string(to_string(instance.triple.relation)) + "\x1f" +
                          instance.triple.tail;
        if (*instance.label == 1) {
            ++positives;
            require(source_keys.contains(key), "an intact instance must exist in the source");
        } else {
            ++negatives;
            require(!source_keys.contains(key), "a corrupted instance leaked from the source set");
        }
    }
    require(positives == 500 && negatives == 500, "labels must split exactly 500/500");
    require(heads.size() == 1000, "selected heads must be pairwise distinct");
}

// ---------------------------------------------------------------- criterion 8
void stratified_sampling_properties() {
    std::vector<LabeledInstance> dataset;
    std::int64_t id = 0;
    struct Spec {
        Relation relation;
        int label;
        std::size_t count;
    };
    const Spec specs[] = {{Relation::xWant, 1, 37},  {Relation::xWant, 0, 101},
                          {Relation::xReact, 1, 12}, {Relation::xReact, 0, 8},
                          {Relation::Causes, 0, 3},  {Relation::isAfter, 1, 57}};
    for (const Spec& spec : specs) {
        for (std::size_t i = 0; i < spec.count; ++i) {
            dataset.push_back({id++, make_triple("h" + std::to_string(id), spec.relation,
                                                 "t" + std::to_string(id)),
                               spec.label, "test"});
        }
    }
    const double factor = 4.0;
    auto sampled = stratified_downsample(dataset, factor, 99);
    std::map<std::pair<Relation, int>, std::size_t> taken;
    for (const LabeledInstance& instance : sampled) {
        taken[{instance.triple.relation, *instance.label}]++;
    }
    for (const Spec& spec : specs) {
        double expected = static_cast<double>(spec.count) / factor;
        double got = static_cast<double>(taken[{spec.relation, spec.label}]);
        require(std::abs(got - expected) <= 1.0,
                "stratum share deviates by more than one instance");
    }
    auto replay = stratified_downsample(dataset, factor, 99);
    require(replay.size() == sampled.size(), "seeded downsampling must be deterministic");
    for (std::size_t i = 0; i < replay.size(); ++i) {
        require(replay[i].id == sampled[i].id, "seeded downsampling must be deterministic");
    }
}

// ---------------------------------------------------------------- criterion 9
void kate_oracle() {
    std::mt19937_64 rng(424242);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t dim = 16, k = 5;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t pool_size = 12 + rng() % 20;
        std::vector<LabeledInstance> pool;
        EmbeddingStore store(dim);
        for (std::size_t i = 0; i < pool_size; ++i) {
            Relation relation = (i % 2 == 0) ? Relation::xReact : Relation::xWant;
            pool.push_back({static_cast<std::int64_t>(i),
                            make_triple("h" + std::to_string(i), relation, "t" + std::to_string(i)),
                            1, "train"});
            std::vector<double> vector(dim);
            for (double& v : vector) v = gauss(rng);
            store.add(static_cast<std::int64_t>(i), std::move(vector));
        }
        std::vector<double> query_vec(dim);
        for (double& v : query_vec) v = gauss(rng);
        double norm = 0;
        for (double v : query_vec) norm += v * v;
        for (double& v : query_vec) v /= std::sqrt(norm);

        // brute force: all cosines, full sort, most similar first
        std::vector<std::pair<double, std::int64_t>> scored;
        for (const LabeledInstance& instance : pool) {
            scored.emplace_back(cosine_similarity(query_vec, store.vector_for(instance.id)),
                                instance.id);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        auto selected = select_kate(pool, query_vec, store, k);
        require(selected.size() == k, "kate must return k exemplars");
        for (std::size_t i = 0; i < k; ++i) {
            require(selected[k - 1 - i].instance.id == scored[i].second,
                    "kate disagrees with the exhaustive-scan oracle");
        }

        // kate-s == kate on the same-relation sub-pool
        LabeledInstance query{9999, make_triple("qh", Relation::xReact, "qt"), 1, "test"};
        std::vector<LabeledInstance> filtered;
        for (const LabeledInstance& instance : pool) {
            if (instance.triple.relation == Relation::xReact) filtered.push_back(instance);
        }
        if (filtered.size() >= k) {
            auto via_s = select_kate_s(pool, query, query_vec, store, k);
            auto via_filter = select_kate(filtered, query_vec, store, k);
            for (std::size_t i = 0; i < k; ++i) {
                require(via_s[i].instance.id == via_filter[i].instance.id,
                        "kate-s differs from kate on the filtered pool");
            }
        }
    }
}

// --------------------------------------------------------------- criterion 10
void replay_closure_end_to_end() {
    auto dir = scratch_dir("replay_closure");
    ExperimentConfig config;
    config.name = "replay-closure";
    config.dataset_path = repo_dir() + "/tests/fixtures/fixture50.csv";
    config.family = MainFamily::ZeroShot;
    config.designs = {1, 2, 3};
    config.model = "mock-model";
    config.cache_path = (dir / "cache.jsonl").string();
    config.parallelism = 4;

    auto dataset = load_dataset_csv(config.dataset_path);
    const RuleSet rules = post_pilot_rules();

    // deterministic mock: main says yes for gold positives and for ids
    // divisible by 4 (fabricated false positives); constraints veto even ids
    auto main_yes = [](std::int64_t id) { return id % 3 == 0 || id % 4 == 0; };
    auto violated = [](std::int64_t id) { return id % 2 == 0; };

    {
        auto inner = std::make_unique<ScriptedProvider>();
        for (const LabeledInstance& instance : dataset) {
            for (int seed : {1, 2, 3}) {
                std::string prompt =
                    render_main_prompt({MainFamily::ZeroShot, seed}, instance.triple, {});
                bool yes = main_yes(instance.id);
                inner->add_response(prompt, seed == 3 ? (yes ? "True" : "False")
                                                      : (yes ? "Yes" : "No"));
            }
            for (const Constraint& constraint :
                 relation_constraints(instance.triple.relation, rules)) {
                std::string prompt = render_constraint_prompt(constraint, instance.triple, 1);
                std::string answer;
                if (kind_of(constraint) == ConstraintKind::Typing) {
                    EventType required = std::get<TypingConstraint>(constraint).required;
                    answer = violated(instance.id)
                                 ? "1. event/activity"
                                 : (required == EventType::Persona ? "2. persona"
                                                                   : "3. mental state");
                } else {
                    answer = violated(instance.id) ? "1" : "0";
                }
                inner->add_response(prompt, answer);
            }
        }
        CachingProvider recording("scripted", std::move(inner), config.cache_path,
                                  CacheMode::Record);
        config.cache_mode = CacheMode::Record;
        config.output_dir = (dir / "record").string();
        run_experiment(config, recording);
    }

    config.cache_mode = CacheMode::StrictReplay;
    ExperimentResult result;
    for (const char* out : {"replay_a", "replay_b"}) {
        CachingProvider replay("scripted", nullptr, config.cache_path, CacheMode::StrictReplay);
        config.output_dir = (dir / out).string();
        result = run_experiment(config, replay);
        require(replay.inner_calls() == 0, "strict replay must perform zero backend calls");
    }
    for (const char* file :
         {"report.txt", "verdicts.jsonl", "ledger.jsonl", "per_design/design_1.csv",
          "per_design/design_2.csv", "per_design/design_3.csv"}) {
        require(testing::read_file((dir / "replay_a" / file).string()) ==
                    testing::read_file((dir / "replay_b" / file).string()),
                std::string("replayed runs differ in ") + file);
    }

    // independent confusion-matrix oracle over the scripted scheme
    auto f1_of = [](int tp, int fp, int fn) {
        double precision = tp + fp > 0 ? 100.0 * tp / (tp + fp) : 0.0;
        double recall = tp + fn > 0 ? 100.0 * tp / (tp + fn) : 0.0;
        return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    };
    int tp_b = 0, fp_b = 0, fn_b = 0, tp_a = 0, fp_a = 0, fn_a = 0;
    for (const LabeledInstance& instance : dataset) {
        bool gold = *instance.label == 1;
        bool baseline = main_yes(instance.id);
        bool constrained = !relation_constraints(instance.triple.relation, rules).empty();
        bool final = baseline && !(constrained && violated(instance.id));
        tp_b += gold && baseline;
        fp_b += !gold && baseline;
        fn_b += gold && !baseline;
        tp_a += gold && final;
        fp_a += !gold && final;
        fn_a += gold && !final;
    }
    double expected_delta = f1_of(tp_a, fp_a, fn_a) - f1_of(tp_b, fp_b, fn_b);
    double reported_delta = result.plugin_average.f1 - result.baseline_average.f1;
    require(std::abs(reported_delta - expected_delta) < 1e-9,
            "reported F1 delta differs from the independent oracle");

    char formatted[32];
    std::snprintf(formatted, sizeof formatted, "%+.2f", reported_delta);
    require(result.report_text.find(std::string("(") + formatted + ")") != std::string::npos,
            "report text must carry the F1 delta annotation");
}

// --------------------------------------------------------------- criterion 11
void cost_accounting() {
    auto record = [](std::size_t in, std::size_t out) {
        CompletionRecord r;
        r.input_words = in;
        r.output_words = out;
        return r;
    };
    std::vector<LedgerEntry> single{{1, "main", record(10, 1)}};
    require(estimate_cost(single) == 11.0, "single-record cost must be the exact word sum");
    std::vector<LedgerEntry> two{{1, "main", record(12, 8)}, {2, "main", record(30, 10)}};
    require(estimate_cost(two) == 30.0, "two-instance mean must be exact");
    std::vector<LedgerEntry> grouped{{1, "main", record(10, 1)}, {1, "c", record(5, 1)},
                                     {2, "main", record(20, 3)}};
    require(estimate_cost(grouped) == 20.0, "per-instance grouping must sum before averaging");

    const KnowledgeTriple worked =
        make_triple("PersonX prepare for the competition", Relation::xReact, "PersonX win");
    std::string prompt = render_main_prompt({MainFamily::ZeroShot, 1}, worked, {});
    double words = static_cast<double>(count_words(prompt)) + 1.0;  // one-word answer
    require(words >= 28.0 * 0.6 && words <= 28.0 * 1.4,
            "zero-shot word cost strayed outside 40% of the reference average");
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "rule-table fidelity", 1.0, rule_table_fidelity},
        {2, "prompt golden suite", 1.0, prompt_golden_suite},
        {3, "conjunction monotonicity", 5.0, conjunction_monotonicity},
        {4, "conversion-snippet oracles", 1.0, conversion_snippet_oracles},
        {5, "metrics oracle", 2.0, metrics_oracle},
        {6, "pilot refinement reproduction", 1.0, pilot_refinement_reproduction},
        {7, "synthesis properties", 10.0, synthesis_properties},
        {8, "stratified sampling", 2.0, stratified_sampling_properties},
        {9, "kate oracle", 5.0, kate_oracle},
        {10, "replay closure end-to-end", 10.0, replay_closure_end_to_end},
        {11, "cost accounting", 1.0, cost_accounting},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string error;
        try {
            criterion.body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (error.empty() && elapsed > criterion.time_limit_sec) {
            error = "exceeded the " + std::to_string(criterion.time_limit_sec) + "s budget";
        }
        if (error.empty()) {
            std::printf("[%2d] PASS %s (%.3fs)\n", criterion.number, criterion.name.c_str(),
                        elapsed);
        } else {
            std::printf("[%2d] FAIL %s (%.3fs): %s\n", criterion.number, criterion.name.c_str(),
                        elapsed, error.c_str());
            ++failures;
        }
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
