#include "cskbr/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cskbr/selection.hpp"

namespace cskbr {

namespace {

using nlohmann::json;

MainFamily parse_family(std::string_view name) {
    if (name == "zero-shot") return MainFamily::ZeroShot;
    if (name == "few-shot") return MainFamily::FewShot;
    if (name == "zero-shot-cot") return MainFamily::ZeroShotCoT;
    if (name == "few-shot-cot") return MainFamily::FewShotCoT;
    if (name == "constraint-l2m") return MainFamily::ConstraintL2M;
    throw std::invalid_argument("unknown baseline family: " + std::string(name));
}

bool cot_like(MainFamily family) {
    return family == MainFamily::ZeroShotCoT || family == MainFamily::FewShotCoT ||
           family == MainFamily::ConstraintL2M;
}

std::string two_decimals(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.2f", value);
    return buffer;
}

std::string signed_two_decimals(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%+.2f", value);
    return buffer;
}

std::string metrics_line(const MetricsReport& report) {
    return "acc=" + two_decimals(report.accuracy) + " pre=" + two_decimals(report.precision) +
           " rec=" + two_decimals(report.recall) + " f1=" + two_decimals(report.f1) +
           " [tp=" + two_decimals(report.tp) + " fp=" + two_decimals(report.fp) +
           " tn=" + two_decimals(report.tn) + " fn=" + two_decimals(report.fn) + "]";
}

// Exemplar pool with rationales, one JSON object per line:
// {"id":..,"head":..,"relation":..,"tail":..,"label":..,"rationale":..}
std::vector<Exemplar> load_rationale_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rationale pool: " + path);
    std::vector<Exemplar> pool;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        Exemplar exemplar;
        exemplar.instance.id = j.at("id").get<std::int64_t>();
        exemplar.instance.triple = make_triple(j.at("head").get<std::string>(),
                                               parse_relation(j.at("relation").get<std::string>()),
                                               j.at("tail").get<std::string>());
        exemplar.instance.label = j.at("label").get<int>();
        exemplar.instance.split = j.value("split", "train");
        exemplar.rationale = j.at("rationale").get<std::string>();
        pool.push_back(std::move(exemplar));
    }
    return pool;
}

int constraint_variant(const ExperimentConfig& config, const Constraint& constraint) {
    switch (kind_of(constraint)) {
        case ConstraintKind::Typing: return config.typing_variant;
        case ConstraintKind::Temporal: return config.temporal_variant;
        case ConstraintKind::Ambiguity: return config.ambiguity_variant;
    }
    throw std::logic_error("bad ConstraintKind");
}

struct InstanceWork {
    LabeledInstance instance;
    std::map<int, Prediction> main_by_design;
    std::vector<ConstraintVerdict> verdicts;
    std::vector<LedgerEntry> ledger;
};

class ExemplarSource {
  public:
    ExemplarSource(const ExperimentConfig& config) : config_(config) {
        if (config.family == MainFamily::FewShot) {
            if (!config.exemplar_pool_path.empty()) {
                shared_pool_ = load_dataset_csv(config.exemplar_pool_path);
            } else {
                for (int seed = 1; seed <= 3; ++seed) {
                    for (const Exemplar& exemplar : fewshot_fixture_exemplars(seed)) {
                        fixture_pools_[static_cast<std::size_t>(seed - 1)].push_back(
                            exemplar.instance);
                    }
                }
            }
            if (config.exemplar_strategy == "kate" || config.exemplar_strategy == "kate-s") {
                if (config.exemplar_pool_path.empty()) {
                    throw std::invalid_argument("kate selection needs an exemplar pool file");
                }
                train_store_ = load_embeddings_file(config.train_embeddings_path);
                query_store_ = load_embeddings_file(config.test_embeddings_path);
            }
        } else if (config.family == MainFamily::FewShotCoT) {
            cot_pool_ = config.cot_pool_path.empty() ? fewshot_cot_fixture_exemplars()
                                                     : load_rationale_pool(config.cot_pool_path);
        } else if (config.family == MainFamily::ConstraintL2M) {
            if (config.exemplar_count > 3) {
                throw std::invalid_argument("constraint-l2m ships 3 worked exemplars at most");
            }
        }
    }

    std::vector<Exemplar> exemplars_for(const LabeledInstance& query, int design_seed) const {
        switch (config_.family) {
            case MainFamily::ZeroShot:
            case MainFamily::ZeroShotCoT:
                return {};
            case MainFamily::FewShot: {
                if (config_.exemplar_strategy == "random") {
                    const auto& pool =
                        shared_pool_.empty() ? fixture_pool(design_seed) : shared_pool_;
                    return select_random(pool, config_.exemplar_count,
                                         mix_seed(config_.seed, query.id));
                }
                const auto& query_vec = query_store_->vector_for(query.id);
                if (config_.exemplar_strategy == "kate") {
                    return select_kate(shared_pool_, query_vec, *train_store_,
                                       config_.exemplar_count);
                }
                if (config_.exemplar_strategy == "kate-s") {
                    return select_kate_s(shared_pool_, query, query_vec, *train_store_,
                                         config_.exemplar_count);
                }
                throw std::invalid_argument("unknown exemplar strategy: " +
                                            config_.exemplar_strategy);
            }
            case MainFamily::FewShotCoT: {
                std::vector<LabeledInstance> instances;
                instances.reserve(cot_pool_.size());
                for (const Exemplar& exemplar : cot_pool_) instances.push_back(exemplar.instance);
                auto drawn = select_random(instances, config_.exemplar_count,
                                           mix_seed(config_.seed, query.id));
                for (Exemplar& exemplar : drawn) {
                    exemplar.rationale = rationale_for(exemplar.instance.id);
                }
                return drawn;
            }
            case MainFamily::ConstraintL2M: {
                auto fixture = l2m_fixture_exemplars();
                fixture.resize(std::min(config_.exemplar_count, fixture.size()));
                return fixture;
            }
        }
        throw std::logic_error("bad MainFamily");
    }

  private:
    const std::vector<LabeledInstance>& fixture_pool(int design_seed) const {
        if (design_seed < 1 || design_seed > 3) {
            throw UndefinedDesign("no fixture pool for seed " + std::to_string(design_seed));
        }
        return fixture_pools_[static_cast<std::size_t>(design_seed - 1)];
    }

    std::string rationale_for(std::int64_t id) const {
        for (const Exemplar& exemplar : cot_pool_) {
            if (exemplar.instance.id == id) return exemplar.rationale.value();
        }
        throw std::logic_error("rationale pool lost instance " + std::to_string(id));
    }

    const ExperimentConfig& config_;
    std::vector<LabeledInstance> shared_pool_;
    std::vector<Exemplar> cot_pool_;
    std::optional<EmbeddingStore> train_store_;
    std::optional<EmbeddingStore> query_store_;
    std::array<std::vector<LabeledInstance>, 3> fixture_pools_;
};

void process_instance(const ExperimentConfig& config, const RuleSet& ruleset,
                      const ExemplarSource& exemplars, Provider& provider, InstanceWork& work) {
    const LabeledInstance& instance = work.instance;
    ProviderParams main_params{config.model, config.temperature,
                               cot_like(config.family) ? config.max_output_tokens_cot
                                                       : config.max_output_tokens};
    ProviderParams constraint_params{config.model, config.temperature, config.max_output_tokens};

    auto constraints = relation_constraints(instance.triple.relation, ruleset);

    for (int design_seed : config.designs) {
        MainDesign design{config.family, design_seed};
        std::string prompt;
        MainDesign parse_as = design;
        if (config.family == MainFamily::ConstraintL2M) {
            if (constraints.empty()) {
                // nothing to decompose; fall back to the plain zero-shot question
                parse_as = MainDesign{MainFamily::ZeroShot, design_seed};
                prompt = render_main_prompt(parse_as, instance.triple, {});
            } else {
                auto blocks = exemplars.exemplars_for(instance, design_seed);
                prompt = render_constraint_l2m(instance.triple, constraints, blocks);
            }
        } else {
            auto selected = exemplars.exemplars_for(instance, design_seed);
            prompt = render_main_prompt(design, instance.triple, selected);
        }
        CompletionRecord record = provider.complete(prompt, main_params);
        work.ledger.push_back(
            {instance.id, "main:design-" + std::to_string(design_seed), record});
        work.main_by_design[design_seed] = parse_main_answer(record.response, parse_as);
    }

    if (config.apply_plugin) {
        for (const Constraint& constraint : constraints) {
            const std::string prompt = render_constraint_prompt(
                constraint, instance.triple, constraint_variant(config, constraint));
            CompletionRecord record = provider.complete(prompt, constraint_params);
            work.ledger.push_back({instance.id, "constraint:" + to_string(constraint), record});
            ConversionOutcome outcome = convert_constraint_answer(
                constraint, constraint_variant(config, constraint), record.response);
            work.verdicts.push_back(
                {constraint, outcome.satisfied, record.response, outcome.parsed_ok});
        }
    }
}

std::string build_report(const ExperimentConfig& config, const RuleSet& ruleset,
                         const ExperimentResult& result, std::size_t n_instances,
                         std::size_t n_positive) {
    std::ostringstream out;
    out << "== cskbr run report ==\n";
    out << "experiment: " << config.name << "\n";
    out << "dataset: " << config.dataset_path << " (" << n_instances << " instances, " << n_positive
        << " positive)\n";
    out << "family: " << to_string(config.family) << " | strategy: " << config.exemplar_strategy
        << " | k: " << config.exemplar_count << " | seed: " << config.seed << " | designs:";
    for (int design : config.designs) out << " " << design;
    out << "\n";
    out << "ruleset: " << to_string(ruleset.name) << " | variants: typing=" << config.typing_variant
        << " temporal=" << config.temporal_variant << " ambiguity=" << config.ambiguity_variant
        << " | plugin: " << (config.apply_plugin ? "on" : "off") << "\n";
    out << "provider: " << config.provider_kind << " | model: " << config.model
        << " | temperature: " << config.temperature << " | cache: " << to_string(config.cache_mode)
        << "\n\n";

    out << "-- per-design --\n";
    for (const DesignOutcome& design : result.designs) {
        out << "design " << design.design_seed << " baseline: " << metrics_line(design.baseline)
            << "\n";
        if (config.apply_plugin) {
            out << "design " << design.design_seed << " +plugin:  "
                << metrics_line(design.with_plugin) << " ("
                << signed_two_decimals(design.with_plugin.f1 - design.baseline.f1) << ")\n";
        }
    }
    out << "\n-- averaged over " << result.designs.size() << " design(s) --\n";
    out << "baseline: " << metrics_line(result.baseline_average) << "\n";
    if (config.apply_plugin) {
        out << "+plugin:  " << metrics_line(result.plugin_average) << " ("
            << signed_two_decimals(result.plugin_average.f1 - result.baseline_average.f1) << ")\n";
    }

    out << "\n-- per-relation F1 (averaged) --\n";
    out << "relation      baseline";
    if (config.apply_plugin) out << "  +plugin";
    out << "\n";
    for (const auto& [relation, f1] : result.baseline_average.per_relation_f1) {
        out << to_string(relation);
        for (std::size_t pad = to_string(relation).size(); pad < 14; ++pad) out << ' ';
        out << two_decimals(f1);
        if (config.apply_plugin) {
            auto it = result.plugin_average.per_relation_f1.find(relation);
            out << "     "
                << (it != result.plugin_average.per_relation_f1.end() ? two_decimals(it->second)
                                                                      : std::string("-"));
        }
        out << "\n";
    }

    out << "\n-- cost (per-instance average words) --\n";
    for (const DesignOutcome& design : result.designs) {
        std::vector<LedgerEntry> subset;
        for (const LedgerEntry& entry : result.ledger) {
            if (entry.purpose == "main:design-" + std::to_string(design.design_seed)) {
                subset.push_back(entry);
            }
        }
        if (!subset.empty()) {
            out << "main design " << design.design_seed << ": " << two_decimals(estimate_cost(subset))
                << "\n";
        }
    }
    std::vector<LedgerEntry> constraint_entries;
    std::size_t cache_hits = 0;
    for (const LedgerEntry& entry : result.ledger) {
        if (entry.purpose.rfind("constraint:", 0) == 0) constraint_entries.push_back(entry);
        if (entry.record.cache_hit) ++cache_hits;
    }
    if (!constraint_entries.empty()) {
        out << "constraint overhead (over checked instances): "
            << two_decimals(estimate_cost(constraint_entries)) << "\n";
    }
    out << "total completions: " << result.ledger.size() << " (cache hits: " << cache_hits << ")\n";
    return out.str();
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                   const std::vector<InstanceWork>& work_items) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    fs::create_directories(fs::path(config.output_dir) / "per_design");

    {
        std::ofstream out(fs::path(config.output_dir) / "report.txt", std::ios::binary);
        out << result.report_text;
    }
    std::map<std::int64_t, const InstanceWork*> by_id;
    for (const InstanceWork& item : work_items) by_id[item.instance.id] = &item;
    for (const DesignOutcome& design : result.designs) {
        std::ofstream out(fs::path(config.output_dir) / "per_design" /
                              ("design_" + std::to_string(design.design_seed) + ".csv"),
                          std::ios::binary);
        out << "id,relation,gold,baseline,final\n";
        for (const auto& [id, baseline] : design.baseline_predictions) {
            const InstanceWork* item = by_id.at(id);
            out << id << "," << to_string(item->instance.triple.relation) << ","
                << item->instance.label.value_or(-1) << "," << baseline << ","
                << design.final_predictions.at(id) << "\n";
        }
    }
    {
        std::ofstream out(fs::path(config.output_dir) / "verdicts.jsonl", std::ios::binary);
        for (const InstanceVerdicts& row : result.verdicts) {
            for (const ConstraintVerdict& verdict : row.verdicts) {
                json j = {{"instance_id", row.instance_id},
                          {"constraint", to_string(verdict.constraint)},
                          {"satisfied", verdict.satisfied},
                          {"parsed_ok", verdict.parsed_ok},
                          {"raw", verdict.raw}};
                out << j.dump() << "\n";
            }
        }
    }
    {
        std::ofstream out(fs::path(config.output_dir) / "ledger.jsonl", std::ios::binary);
        for (const LedgerEntry& entry : result.ledger) {
            out << ledger_entry_to_json(entry) << "\n";
        }
    }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::int64_t instance_id) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(instance_id));
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RuleSet resolve_ruleset(const std::string& spec) {
    if (spec == "post-pilot" || spec.empty()) return post_pilot_rules();
    if (spec == "pre-pilot") return pre_pilot_rules();
    return load_rules_file(spec);
}

ExperimentConfig config_from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(origin + ": " + e.what());
    }
    ExperimentConfig config;
    config.name = j.value("name", config.name);
    config.dataset_path = j.value("dataset", "");
    if (j.contains("baseline")) {
        const json& baseline = j.at("baseline");
        config.family = parse_family(baseline.value("family", "zero-shot"));
        if (baseline.contains("designs")) {
            config.designs = baseline.at("designs").get<std::vector<int>>();
        }
    }
    if (j.contains("exemplars")) {
        const json& exemplars = j.at("exemplars");
        config.exemplar_strategy = exemplars.value("strategy", config.exemplar_strategy);
        config.exemplar_count = exemplars.value("k", config.exemplar_count);
        config.exemplar_pool_path = exemplars.value("pool", "");
        config.cot_pool_path = exemplars.value("cot_pool", "");
    }
    config.seed = j.value("seed", config.seed);
    config.ruleset = j.value("ruleset", config.ruleset);
    if (j.contains("plugin")) {
        const json& plugin = j.at("plugin");
        config.apply_plugin = plugin.value("apply", config.apply_plugin);
        config.typing_variant = plugin.value("typing_variant", config.typing_variant);
        config.temporal_variant = plugin.value("temporal_variant", config.temporal_variant);
        config.ambiguity_variant = plugin.value("ambiguity_variant", config.ambiguity_variant);
    }
    if (j.contains("provider")) {
        const json& provider = j.at("provider");
        config.provider_kind = provider.value("kind", config.provider_kind);
        config.model = provider.value("model", config.model);
        config.temperature = provider.value("temperature", config.temperature);
        config.max_output_tokens = provider.value("max_output_tokens", config.max_output_tokens);
        config.max_output_tokens_cot =
            provider.value("max_output_tokens_cot", config.max_output_tokens_cot);
        config.scripted_responses_path = provider.value("responses", "");
        config.http.base_url = provider.value("base_url", config.http.base_url);
        config.http.path = provider.value("path", config.http.path);
        config.http.api_key_env = provider.value("api_key_env", config.http.api_key_env);
        config.http.max_retries = provider.value("max_retries", config.http.max_retries);
        config.http.backoff_ms = provider.value("backoff_ms", config.http.backoff_ms);
    }
    if (j.contains("embeddings")) {
        config.train_embeddings_path = j.at("embeddings").value("train", "");
        config.test_embeddings_path = j.at("embeddings").value("test", "");
    }
    if (j.contains("cache")) {
        config.cache_path = j.at("cache").value("path", "");
        config.cache_mode = parse_cache_mode(j.at("cache").value("mode", "off"));
    }
    config.output_dir = j.value("output_dir", config.output_dir);
    config.parallelism = j.value("parallelism", config.parallelism);
    if (config.parallelism == 0) config.parallelism = 1;
    return config;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str(), path);
}

std::unique_ptr<Provider> make_provider(const ExperimentConfig& config) {
    auto backend = [&config]() -> std::unique_ptr<Provider> {
        if (config.provider_kind == "scripted") {
            if (config.scripted_responses_path.empty()) {
                throw std::invalid_argument("scripted provider needs provider.responses");
            }
            return std::make_unique<ScriptedProvider>(
                ScriptedProvider::from_json_file(config.scripted_responses_path));
        }
        if (config.provider_kind == "http") return std::make_unique<HttpProvider>(config.http);
        throw std::invalid_argument("unknown provider kind: " + config.provider_kind);
    };

    if (config.cache_mode == CacheMode::Off) return backend();
    if (config.cache_path.empty()) throw std::invalid_argument("cache mode set but cache.path empty");
    if (config.cache_mode == CacheMode::StrictReplay) {
        return std::make_unique<CachingProvider>(config.provider_kind, nullptr, config.cache_path,
                                                 CacheMode::StrictReplay);
    }
    return std::make_unique<CachingProvider>(config.provider_kind, backend(), config.cache_path,
                                             config.cache_mode);
}

ExperimentResult run_experiment(const ExperimentConfig& config, Provider& provider) {
    if (config.designs.empty()) throw std::invalid_argument("design list is empty");
    if (config.family == MainFamily::ConstraintL2M) {
        for (int design : config.designs) {
            if (design != 1) throw UndefinedDesign("constraint-l2m is defined only for seed 1");
        }
    }

    std::vector<LabeledInstance> dataset = load_dataset_csv(config.dataset_path);
    std::sort(dataset.begin(), dataset.end(),
              [](const LabeledInstance& a, const LabeledInstance& b) { return a.id < b.id; });
    std::size_t n_positive = 0;
    for (const LabeledInstance& instance : dataset) {
        if (!instance.label.has_value()) throw UnlabeledInstance(instance.id);
        n_positive += static_cast<std::size_t>(*instance.label == 1);
    }

    RuleSet ruleset = resolve_ruleset(config.ruleset);
    validate(ruleset);
    ExemplarSource exemplars(config);

    std::vector<InstanceWork> work_items(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) work_items[i].instance = dataset[i];

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::string first_error;
    auto worker = [&] {
        while (true) {
            std::size_t index = next.fetch_add(1);
            if (index >= work_items.size()) return;
            {
                std::lock_guard lock(error_mutex);
                if (!first_error.empty()) return;
            }
            try {
                process_instance(config, ruleset, exemplars, provider, work_items[index]);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (first_error.empty()) {
                    first_error = "instance " + std::to_string(work_items[index].instance.id) +
                                  ": " + e.what();
                }
                return;
            }
        }
    };
    std::size_t n_threads = std::min(config.parallelism, work_items.size());
    n_threads = std::max<std::size_t>(n_threads, 1);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
        for (std::thread& thread : threads) thread.join();
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);

    ExperimentResult result;
    std::map<std::int64_t, int> golds;
    std::map<std::int64_t, Relation> relations;
    for (const InstanceWork& work : work_items) {
        golds[work.instance.id] = work.instance.label.value();
        relations[work.instance.id] = work.instance.triple.relation;
        result.verdicts.push_back({work.instance.id, work.verdicts});
        for (const LedgerEntry& entry : work.ledger) result.ledger.push_back(entry);
    }

    std::vector<MetricsReport> baseline_reports;
    std::vector<MetricsReport> plugin_reports;
    for (int design_seed : config.designs) {
        DesignOutcome outcome;
        outcome.design_seed = design_seed;
        for (const InstanceWork& work : work_items) {
            const Prediction& main = work.main_by_design.at(design_seed);
            outcome.baseline_predictions[work.instance.id] = main.verdict;
            Prediction final = aggregate(main, work.verdicts);
            outcome.final_predictions[work.instance.id] = final.verdict;
        }
        outcome.baseline = compute_metrics(outcome.baseline_predictions, golds, relations);
        outcome.with_plugin = compute_metrics(outcome.final_predictions, golds, relations);
        baseline_reports.push_back(outcome.baseline);
        plugin_reports.push_back(outcome.with_plugin);
        result.designs.push_back(std::move(outcome));
    }
    result.baseline_average = average_over_designs(baseline_reports);
    result.plugin_average = average_over_designs(plugin_reports);
    result.report_text = build_report(config, ruleset, result, dataset.size(), n_positive);

    write_outputs(config, result, work_items);
    return result;
}

PilotOutcome run_pilot(const ExperimentConfig& config, Provider& provider,
                       const std::vector<std::pair<ConstraintKind, Relation>>& keep_pairs) {
    std::vector<LabeledInstance> dataset = load_dataset_csv(config.dataset_path);
    std::sort(dataset.begin(), dataset.end(),
              [](const LabeledInstance& a, const LabeledInstance& b) { return a.id < b.id; });

    const RuleSet prepilot = pre_pilot_rules();
    const MainDesign design{MainFamily::ZeroShot, 3};
    ProviderParams main_params{config.model, config.temperature, config.max_output_tokens};
    ProviderParams constraint_params = main_params;

    std::map<std::int64_t, int> golds;
    std::map<std::int64_t, Relation> relations;
    std::map<std::int64_t, int> baseline_predictions;
    std::map<std::int64_t, std::map<ConstraintKind, bool>> satisfied;

    for (const LabeledInstance& instance : dataset) {
        if (!instance.label.has_value()) throw UnlabeledInstance(instance.id);
        golds[instance.id] = *instance.label;
        relations[instance.id] = instance.triple.relation;
        const std::string prompt = render_main_prompt(design, instance.triple, {});
        CompletionRecord record = provider.complete(prompt, main_params);
        baseline_predictions[instance.id] = parse_main_answer(record.response, design).verdict;
        for (const Constraint& constraint :
             relation_constraints(instance.triple.relation, prepilot)) {
            ConstraintVerdict verdict =
                check_constraint(instance, constraint, constraint_variant(config, constraint),
                                 provider, constraint_params);
            satisfied[instance.id][kind_of(constraint)] = verdict.satisfied;
        }
    }

    MetricsReport baseline = compute_metrics(baseline_predictions, golds, relations);

    PilotOutcome outcome;
    auto keep_flag_for = [&keep_pairs](ConstraintKind kind, Relation relation) {
        for (const auto& [flag_kind, flag_relation] : keep_pairs) {
            if (flag_kind == kind && flag_relation == relation) return true;
        }
        return false;
    };

    for (Relation relation : all_relations()) {
        for (const Constraint& constraint : relation_constraints(relation, prepilot)) {
            ConstraintKind kind = kind_of(constraint);
            std::map<std::int64_t, int> with_constraint = baseline_predictions;
            for (auto& [id, prediction] : with_constraint) {
                if (relations.at(id) != relation) continue;
                auto it = satisfied.find(id);
                if (it != satisfied.end() && it->second.count(kind) && !it->second.at(kind)) {
                    prediction = 0;
                }
            }
            MetricsReport adjusted = compute_metrics(with_constraint, golds, relations);
            RefinementInput input;
            input.kind = kind;
            input.relation = relation;
            input.f1_with = adjusted.per_relation_f1.count(relation)
                                ? adjusted.per_relation_f1.at(relation)
                                : 0.0;
            input.f1_baseline = baseline.per_relation_f1.count(relation)
                                    ? baseline.per_relation_f1.at(relation)
                                    : 0.0;
            input.keep_flag = keep_flag_for(kind, relation);
            outcome.scores.push_back(input);
        }
    }
    outcome.refinement = pilot_refine(prepilot, outcome.scores);
    return outcome;
}

std::string format_refinement_table(const PilotOutcome& outcome) {
    std::ostringstream out;
    out << "constraint  relation      f1_with  f1_base  keep_flag  kept\n";
    for (const RefinementDecision& decision : outcome.refinement.decisions) {
        std::string kind(to_string(decision.input.kind));
        std::string relation(to_string(decision.input.relation));
        out << kind;
        for (std::size_t pad = kind.size(); pad < 12; ++pad) out << ' ';
        out << relation;
        for (std::size_t pad = relation.size(); pad < 14; ++pad) out << ' ';
        out << two_decimals(decision.input.f1_with) << "    " << two_decimals(decision.input.f1_baseline)
            << "    " << (decision.input.keep_flag ? "yes" : "no ") << "        "
            << (decision.kept ? "yes" : "no") << "\n";
    }
    return out.str();
}

}  // namespace cskbr
