#include "cskbr/evalbench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace cskbr {

namespace {

using nlohmann::json;

double percent(double numerator, double denominator) {
    return denominator > 0 ? 100.0 * numerator / denominator : 0.0;
}

double f1_from(double precision, double recall) {
    double denom = precision + recall;
    return denom > 0 ? 2.0 * precision * recall / denom : 0.0;
}

std::string triple_key(const KnowledgeTriple& triple) {
    std::string key = triple.head;
    key += '\x1f';
    key += to_string(triple.relation);
    key += '\x1f';
    key += triple.tail;
    return key;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += "\"";
    return quoted;
}

// RFC-4180-ish record split: quoted fields may contain commas, escaped
// quotes, and newlines.
std::vector<std::vector<std::string>> split_csv_records(std::string_view text,
                                                        std::string_view origin) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    std::size_t line_no = 1;
    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        // skip records that are a single empty field (blank lines)
        if (fields.size() != 1 || !fields[0].empty()) records.push_back(std::move(fields));
        fields.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field += c;
            }
        } else if (c == '"') {
            if (!field.empty()) {
                throw std::runtime_error(std::string(origin) + ":" + std::to_string(line_no) +
                                         ": stray quote in field");
            }
            quoted = true;
            field_was_quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_record();
            ++line_no;
        } else {
            field += c;
        }
    }
    if (quoted) {
        throw std::runtime_error(std::string(origin) + ":" + std::to_string(line_no) +
                                 ": unterminated quoted field");
    }
    if (!field.empty() || fields.size() > 0 || field_was_quoted) end_record();
    return records;
}

}  // namespace

MetricsReport compute_metrics(const std::map<std::int64_t, int>& predictions,
                              const std::map<std::int64_t, int>& golds,
                              const std::map<std::int64_t, Relation>& relations) {
    auto same_keys = [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return false;
        auto it = b.begin();
        for (const auto& [key, value] : a) {
            if (it->first != key) return false;
            ++it;
        }
        return true;
    };
    if (!same_keys(predictions, golds) || !same_keys(predictions, relations)) {
        throw KeyMismatch("predictions, golds, and relations must share one id set");
    }

    MetricsReport report;
    std::map<Relation, std::array<double, 3>> per_relation;  // tp, fp, fn
    for (const auto& [id, predicted] : predictions) {
        int gold = golds.at(id);
        Relation relation = relations.at(id);
        auto& counts = per_relation[relation];
        if (predicted == 1 && gold == 1) {
            report.tp += 1;
            counts[0] += 1;
        } else if (predicted == 1 && gold == 0) {
            report.fp += 1;
            counts[1] += 1;
        } else if (predicted == 0 && gold == 0) {
            report.tn += 1;
        } else {
            report.fn += 1;
            counts[2] += 1;
        }
    }
    double total = report.tp + report.fp + report.tn + report.fn;
    report.accuracy = percent(report.tp + report.tn, total);
    report.precision = percent(report.tp, report.tp + report.fp);
    report.recall = percent(report.tp, report.tp + report.fn);
    report.f1 = f1_from(report.precision, report.recall);
    for (const auto& [relation, counts] : per_relation) {
        double precision = percent(counts[0], counts[0] + counts[1]);
        double recall = percent(counts[0], counts[0] + counts[2]);
        report.per_relation_f1[relation] = f1_from(precision, recall);
    }
    return report;
}

MetricsReport average_over_designs(std::span<const MetricsReport> reports) {
    if (reports.empty()) throw std::invalid_argument("cannot average zero reports");
    MetricsReport mean;
    std::map<Relation, std::pair<double, std::size_t>> relation_sums;
    for (const MetricsReport& report : reports) {
        mean.tp += report.tp;
        mean.fp += report.fp;
        mean.tn += report.tn;
        mean.fn += report.fn;
        mean.accuracy += report.accuracy;
        mean.precision += report.precision;
        mean.recall += report.recall;
        mean.f1 += report.f1;
        for (const auto& [relation, f1] : report.per_relation_f1) {
            relation_sums[relation].first += f1;
            relation_sums[relation].second += 1;
        }
    }
    auto n = static_cast<double>(reports.size());
    mean.tp /= n;
    mean.fp /= n;
    mean.tn /= n;
    mean.fn /= n;
    mean.accuracy /= n;
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    for (const auto& [relation, sum] : relation_sums) {
        mean.per_relation_f1[relation] = sum.first / static_cast<double>(sum.second);
    }
    return mean;
}

std::vector<LabeledInstance> stratified_downsample(std::span<const LabeledInstance> dataset,
                                                   double factor, std::uint64_t seed,
                                                   std::optional<std::size_t> target_size,
                                                   StrataKey strata_key) {
    if (factor <= 0) throw std::invalid_argument("downsampling factor must be positive");
    std::map<std::pair<Relation, int>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const LabeledInstance& instance = dataset[i];
        int label_key = 0;
        if (strata_key == StrataKey::RelationAndLabel) {
            if (!instance.label.has_value()) throw UnlabeledInstance(instance.id);
            label_key = *instance.label;
        }
        strata[{instance.triple.relation, label_key}].push_back(i);
    }

    struct Stratum {
        std::vector<std::size_t> indices;
        std::size_t take = 0;
    };
    std::vector<Stratum> plan;
    std::mt19937_64 rng(seed);
    for (auto& [key, indices] : strata) {
        Stratum stratum;
        stratum.indices = std::move(indices);
        double exact = static_cast<double>(stratum.indices.size()) / factor;
        stratum.take = static_cast<std::size_t>(std::floor(exact + 0.5));
        stratum.take = std::min(stratum.take, stratum.indices.size());
        std::shuffle(stratum.indices.begin(), stratum.indices.end(), rng);
        plan.push_back(std::move(stratum));
    }

    if (target_size.has_value()) {
        auto current = [&plan] {
            std::size_t sum = 0;
            for (const Stratum& s : plan) sum += s.take;
            return sum;
        };
        // order of adjustment: biggest strata first, deterministic
        std::vector<std::size_t> order(plan.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&plan](std::size_t a, std::size_t b) {
            return plan[a].indices.size() > plan[b].indices.size();
        });
        std::size_t guard = 0;
        while (current() != *target_size && guard++ < 10000) {
            bool grow = current() < *target_size;
            bool changed = false;
            for (std::size_t idx : order) {
                Stratum& stratum = plan[idx];
                if (grow && stratum.take < stratum.indices.size()) {
                    ++stratum.take;
                    changed = true;
                } else if (!grow && stratum.take > 0) {
                    --stratum.take;
                    changed = true;
                }
                if (current() == *target_size) break;
            }
            if (!changed) throw std::invalid_argument("target size unreachable for these strata");
        }
    }

    std::vector<bool> keep(dataset.size(), false);
    for (const Stratum& stratum : plan) {
        for (std::size_t i = 0; i < stratum.take; ++i) keep[stratum.indices[i]] = true;
    }
    std::vector<LabeledInstance> sampled;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (keep[i]) sampled.push_back(dataset[i]);
    }
    return sampled;
}

std::vector<LabeledInstance> synthesize_sd_atomic(std::span<const LabeledInstance> source,
                                                  const SynthesisParams& params) {
    if (params.n_relation_negatives + params.n_tail_negatives > params.n_heads) {
        throw std::invalid_argument("more negatives requested than selected triples");
    }
    if (params.relations.size() < 2 && params.n_relation_negatives > 0) {
        throw std::invalid_argument("relation corruption needs at least two relations");
    }

    std::unordered_set<std::string> source_triples;
    for (const LabeledInstance& instance : source) {
        source_triples.insert(triple_key(instance.triple));
    }

    auto allowed = [&params](Relation relation) {
        return std::find(params.relations.begin(), params.relations.end(), relation) !=
               params.relations.end();
    };

    // one candidate list per distinct head, in first-appearance order
    std::vector<std::string> head_order;
    std::map<std::string, std::vector<std::size_t>> by_head;
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (!allowed(source[i].triple.relation)) continue;
        auto [it, inserted] = by_head.try_emplace(source[i].triple.head);
        if (inserted) head_order.push_back(source[i].triple.head);
        it->second.push_back(i);
    }
    if (head_order.size() < params.n_heads) {
        throw InsufficientHeads(head_order.size(), params.n_heads);
    }

    std::mt19937_64 rng(params.seed);
    std::shuffle(head_order.begin(), head_order.end(), rng);

    std::vector<KnowledgeTriple> selected;
    selected.reserve(params.n_heads);
    for (std::size_t i = 0; i < params.n_heads; ++i) {
        const auto& candidates = by_head[head_order[i]];
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        selected.push_back(source[candidates[pick(rng)]].triple);
    }

    // disjoint corruption targets: first n_rel get a new relation, next n_tail a new tail
    std::vector<std::size_t> positions(params.n_heads);
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    std::shuffle(positions.begin(), positions.end(), rng);

    std::vector<std::string> tail_pool;
    tail_pool.reserve(selected.size());
    for (const KnowledgeTriple& triple : selected) tail_pool.push_back(triple.tail);

    std::vector<int> labels(params.n_heads, 1);
    for (std::size_t i = 0; i < params.n_relation_negatives; ++i) {
        std::size_t pos = positions[i];
        KnowledgeTriple& triple = selected[pos];
        std::vector<Relation> candidates;
        for (Relation relation : params.relations) {
            if (relation != triple.relation) candidates.push_back(relation);
        }
        std::shuffle(candidates.begin(), candidates.end(), rng);
        bool replaced = false;
        for (Relation relation : candidates) {
            KnowledgeTriple corrupted = triple;
            corrupted.relation = relation;
            if (!source_triples.contains(triple_key(corrupted))) {
                triple = corrupted;
                replaced = true;
                break;
            }
        }
        if (!replaced) {
            throw ExhaustedResampling("no unseen relation replacement for head '" + triple.head +
                                      "'");
        }
        labels[pos] = 0;
    }
    for (std::size_t i = 0; i < params.n_tail_negatives; ++i) {
        std::size_t pos = positions[params.n_relation_negatives + i];
        KnowledgeTriple& triple = selected[pos];
        std::vector<std::size_t> candidates;
        candidates.reserve(tail_pool.size());
        for (std::size_t t = 0; t < tail_pool.size(); ++t) {
            if (t != pos) candidates.push_back(t);
        }
        std::shuffle(candidates.begin(), candidates.end(), rng);
        bool replaced = false;
        for (std::size_t t : candidates) {
            KnowledgeTriple corrupted = triple;
            corrupted.tail = tail_pool[t];
            if (!source_triples.contains(triple_key(corrupted))) {
                triple = corrupted;
                replaced = true;
                break;
            }
        }
        if (!replaced) {
            throw ExhaustedResampling("no unseen tail replacement for head '" + triple.head + "'");
        }
        labels[pos] = 0;
    }

    std::vector<LabeledInstance> benchmark;
    benchmark.reserve(params.n_heads);
    for (std::size_t i = 0; i < params.n_heads; ++i) {
        benchmark.push_back(
            LabeledInstance{static_cast<std::int64_t>(i), selected[i], labels[i], "test"});
    }
    return benchmark;
}

RefinementResult pilot_refine(const RuleSet& ruleset, std::span<const RefinementInput> scores) {
    auto score_for = [&scores](ConstraintKind kind, Relation relation) -> const RefinementInput& {
        for (const RefinementInput& score : scores) {
            if (score.kind == kind && score.relation == relation) return score;
        }
        throw MissingScore(kind, relation);
    };

    RefinementResult result;
    result.ruleset.name = RuleSet::Name::Custom;
    for (Relation relation : all_relations()) {
        std::vector<Constraint> kept;
        for (const Constraint& constraint : relation_constraints(relation, ruleset)) {
            const RefinementInput& score = score_for(kind_of(constraint), relation);
            bool keep = score.f1_with > score.f1_baseline || score.keep_flag;
            result.decisions.push_back(RefinementDecision{score, keep});
            if (keep) kept.push_back(constraint);
        }
        result.ruleset.rules[relation] = std::move(kept);
    }
    return result;
}

std::vector<RefinementInput> load_refinement_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pilot score file: " + path);
    json j = json::parse(in);
    std::vector<RefinementInput> scores;
    for (const json& row : j.at("scores")) {
        RefinementInput input;
        std::string kind = row.at("constraint").get<std::string>();
        if (kind == "typing") input.kind = ConstraintKind::Typing;
        else if (kind == "temporal") input.kind = ConstraintKind::Temporal;
        else if (kind == "ambiguity") input.kind = ConstraintKind::Ambiguity;
        else throw std::invalid_argument("unknown constraint kind in scores: " + kind);
        input.relation = parse_relation(row.at("relation").get<std::string>());
        input.f1_with = row.at("f1_with").get<double>();
        input.f1_baseline = row.at("f1_baseline").get<double>();
        input.keep_flag = row.value("keep", false);
        scores.push_back(input);
    }
    return scores;
}

std::vector<LabeledInstance> parse_dataset_csv(std::string_view text, std::string_view origin) {
    auto records = split_csv_records(text, origin);
    if (records.empty()) throw std::runtime_error(std::string(origin) + ": empty dataset file");
    const std::vector<std::string> header = {"id", "head", "relation", "tail", "label", "split"};
    if (records.front() != header) {
        throw std::runtime_error(std::string(origin) +
                                 ": expected header 'id,head,relation,tail,label,split'");
    }
    std::vector<LabeledInstance> dataset;
    for (std::size_t row = 1; row < records.size(); ++row) {
        const auto& fields = records[row];
        std::string where = std::string(origin) + ": record " + std::to_string(row);
        if (fields.size() != 6) {
            throw std::runtime_error(where + ": expected 6 fields, got " +
                                     std::to_string(fields.size()));
        }
        LabeledInstance instance;
        try {
            instance.id = std::stoll(fields[0]);
        } catch (const std::exception&) {
            throw std::runtime_error(where + ": id must be an integer, got '" + fields[0] + "'");
        }
        instance.triple = make_triple(fields[1], parse_relation(fields[2]), fields[3]);
        if (!fields[4].empty()) {
            if (fields[4] != "0" && fields[4] != "1") {
                throw std::runtime_error(where + ": label must be 0, 1, or blank");
            }
            instance.label = fields[4] == "1" ? 1 : 0;
        }
        instance.split = fields[5];
        dataset.push_back(std::move(instance));
    }
    return dataset;
}

std::vector<LabeledInstance> load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset_csv(buffer.str(), path);
}

std::string dataset_to_csv(std::span<const LabeledInstance> dataset) {
    std::string out = "id,head,relation,tail,label,split\n";
    for (const LabeledInstance& instance : dataset) {
        out += std::to_string(instance.id);
        out += ',';
        out += csv_field(instance.triple.head);
        out += ',';
        out += to_string(instance.triple.relation);
        out += ',';
        out += csv_field(instance.triple.tail);
        out += ',';
        if (instance.label.has_value()) out += std::to_string(*instance.label);
        out += ',';
        out += csv_field(instance.split);
        out += '\n';
    }
    return out;
}

void save_dataset_csv(const std::string& path, std::span<const LabeledInstance> dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << dataset_to_csv(dataset);
}

}  // namespace cskbr
