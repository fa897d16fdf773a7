#include "cskbr/checker.hpp"

#include <algorithm>
#include <cctype>

namespace cskbr {

namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Maximal alphabetic runs, lowercased.
std::vector<std::string> letter_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_letter(text[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && is_letter(text[i])) ++i;
        tokens.push_back(lower(text.substr(start, i - start)));
    }
    return tokens;
}

std::optional<int> token_verdict(const std::string& token, bool yes_no, bool true_false) {
    if (yes_no) {
        if (token == "yes") return 1;
        if (token == "no") return 0;
    }
    if (true_false) {
        if (token == "true") return 1;
        if (token == "false") return 0;
    }
    return std::nullopt;
}

bool is_cot_like(MainFamily family) {
    return family == MainFamily::ZeroShotCoT || family == MainFamily::FewShotCoT ||
           family == MainFamily::ConstraintL2M;
}

}  // namespace

Prediction parse_main_answer(std::string_view raw, const MainDesign& design) {
    Prediction prediction;
    prediction.raw = std::string(raw);
    prediction.verdict = 0;
    prediction.parsed_ok = false;

    const auto tokens = letter_tokens(raw);
    if (is_cot_like(design.family)) {
        // the conclusion comes last; accept either answer vocabulary
        for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
            if (auto verdict = token_verdict(*it, true, true); verdict.has_value()) {
                prediction.verdict = *verdict;
                prediction.parsed_ok = true;
                break;
            }
        }
        return prediction;
    }

    if (!tokens.empty()) {
        bool yes_no = design.seed != 3;
        if (auto verdict = token_verdict(tokens.front(), yes_no, !yes_no); verdict.has_value()) {
            prediction.verdict = *verdict;
            prediction.parsed_ok = true;
        }
    }
    return prediction;
}

std::optional<EventType> parse_typing_answer(std::string_view raw) {
    for (char c : raw) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        if (c == '1') return EventType::Activity;
        if (c == '2') return EventType::Persona;
        if (c == '3') return EventType::MentalState;
        break;
    }
    const std::string text = lower(raw);
    struct Keyword {
        std::string_view word;
        EventType type;
    };
    static constexpr Keyword kKeywords[] = {
        {"event", EventType::Activity},   {"activity", EventType::Activity},
        {"persona", EventType::Persona},  {"mental", EventType::MentalState},
    };
    auto find_word = [&text](std::string_view word) {
        std::size_t pos = 0;
        while ((pos = text.find(word, pos)) != std::string::npos) {
            bool left_ok = pos == 0 || !is_letter(text[pos - 1]);
            bool right_ok = pos + word.size() == text.size() || !is_letter(text[pos + word.size()]);
            if (left_ok && right_ok) return pos;
            ++pos;
        }
        return std::string::npos;
    };
    std::size_t best_pos = std::string::npos;
    std::optional<EventType> best;
    for (const Keyword& keyword : kKeywords) {
        auto pos = find_word(keyword.word);
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = keyword.type;
        }
    }
    return best;
}

std::optional<int> parse_temporal_answer(std::string_view raw) {
    auto is_alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '0' && raw[i] != '1') continue;
        bool left_ok = i == 0 || !is_alnum(raw[i - 1]);
        bool right_ok = i + 1 == raw.size() || !is_alnum(raw[i + 1]);
        if (left_ok && right_ok) return raw[i] - '0';
    }
    return std::nullopt;
}

std::optional<bool> parse_yes_no(std::string_view raw) {
    for (const std::string& token : letter_tokens(raw)) {
        if (token == "yes") return true;
        if (token == "no") return false;
    }
    return std::nullopt;
}

ConversionOutcome convert_constraint_answer(const Constraint& constraint, int variant,
                                            std::string_view raw) {
    ConversionOutcome outcome;
    if (const auto* typing = std::get_if<TypingConstraint>(&constraint)) {
        if (variant == 1) {
            auto parsed = parse_typing_answer(raw);
            if (!parsed.has_value()) return {true, false};
            return {*parsed == typing->required, true};
        }
        auto answer = parse_yes_no(raw);
        if (!answer.has_value()) return {true, false};
        return {*answer == (typing->required == EventType::Activity), true};
    }
    if (const auto* temporal = std::get_if<TemporalConstraint>(&constraint)) {
        if (variant == 1) {
            auto answer = parse_temporal_answer(raw);
            if (!answer.has_value()) return {true, false};
            // 0 asserts "tail before head", i.e. the head comes after the tail
            bool head_after_tail = *answer == 0;
            return {head_after_tail == (temporal->required == TemporalOrder::HeadAfterTail), true};
        }
        auto answer = parse_yes_no(raw);
        if (!answer.has_value()) return {true, false};
        // Yes asserts "tail occurs after head", i.e. the head comes before the tail
        return {*answer == (temporal->required == TemporalOrder::HeadBeforeTail), true};
    }
    if (variant == 1) {
        auto answer = parse_temporal_answer(raw);
        if (!answer.has_value()) return {true, false};
        return {*answer == 0, true};
    }
    auto answer = parse_yes_no(raw);
    if (!answer.has_value()) return {true, false};
    return {*answer, true};
}

ConstraintVerdict check_constraint(const LabeledInstance& instance, const Constraint& constraint,
                                   int variant, Provider& provider, const ProviderParams& params,
                                   RunLedger* ledger) {
    const std::string prompt = render_constraint_prompt(constraint, instance.triple, variant);
    CompletionRecord record = provider.complete(prompt, params);
    if (ledger != nullptr) {
        ledger->append(instance.id, "constraint:" + to_string(constraint), record);
    }
    ConversionOutcome outcome = convert_constraint_answer(constraint, variant, record.response);
    return ConstraintVerdict{constraint, outcome.satisfied, record.response, outcome.parsed_ok};
}

Prediction aggregate(const Prediction& main, std::span<const ConstraintVerdict> verdicts) {
    Prediction final = main;
    for (const ConstraintVerdict& verdict : verdicts) {
        if (!verdict.satisfied) {
            final.verdict = 0;
            break;
        }
    }
    return final;
}

}  // namespace cskbr
