#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowpick/clients.hpp"
#include "flowpick/prompts.hpp"

namespace flowpick {

/// Closed set of prompt categories.
class LabelVocabulary {
public:
    explicit LabelVocabulary(std::vector<std::string> labels);

    /// The 20 categories derived from the reference prompt corpus.
    static LabelVocabulary standard();

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::optional<std::size_t> index_of(std::string_view label) const;
    /// Case-insensitive lookup returning the vocabulary spelling.
    std::optional<std::string> canonical(std::string_view text) const;

private:
    std::vector<std::string> labels_;
};

struct LabelAssignment {
    std::string prompt_id;
    std::vector<std::string> labels;

    friend bool operator==(const LabelAssignment&, const LabelAssignment&) = default;
};

/// Produces the raw comma-separated label text for one prompt.
class LabelerClient {
public:
    virtual ~LabelerClient() = default;
    virtual std::string raw_labels(const PromptRecord& prompt, const LabelVocabulary& vocabulary) = 0;
};

/// Request text sent to an LLM labeler.
std::string labeling_request(std::string_view prompt_text, const LabelVocabulary& vocabulary);

class LlmLabeler final : public LabelerClient {
public:
    explicit LlmLabeler(LlmClient& llm) : llm_(llm) {}
    std::string raw_labels(const PromptRecord& prompt, const LabelVocabulary& vocabulary) override;

private:
    LlmClient& llm_;
};

/// Offline labeler: a keyword -> label map matched on whole words of the
/// lowercased prompt. Labels come back in vocabulary order.
class KeywordLabeler final : public LabelerClient {
public:
    using KeywordMap = std::map<std::string, std::vector<std::string>>;  // label -> keywords

    KeywordLabeler() : KeywordLabeler(default_keywords()) {}
    explicit KeywordLabeler(KeywordMap keywords) : keywords_(std::move(keywords)) {}

    static KeywordMap default_keywords();

    std::vector<std::string> match(std::string_view prompt_text, const LabelVocabulary& vocabulary) const;
    std::string raw_labels(const PromptRecord& prompt, const LabelVocabulary& vocabulary) override;

    const KeywordMap& keywords() const noexcept { return keywords_; }

private:
    KeywordMap keywords_;
};

/// Splits on commas and newlines, trims quotes and punctuation, keeps
/// vocabulary members (case-insensitive), drops duplicates, caps at
/// `max_labels`.
std::vector<std::string> parse_label_text(std::string_view text, const LabelVocabulary& vocabulary,
                                          std::size_t max_labels);

/// Errors: NoLabelsAssigned (the prompt is to be discarded, not fatal).
LabelAssignment assign_labels(const PromptRecord& prompt, LabelerClient& labeler, const LabelVocabulary& vocabulary,
                              std::size_t max_labels = 10);

struct LabelStats {
    std::size_t labeled = 0;
    std::size_t discarded = 0;
    double mean_labels = 0.0;
    double std_labels = 0.0;  // population
    std::size_t max_labels = 0;
    double discard_rate = 0.0;
};

LabelStats label_statistics(const std::vector<LabelAssignment>& assignments, std::size_t discarded);

void save_assignments(const std::filesystem::path& path, const std::vector<LabelAssignment>& assignments);
std::vector<LabelAssignment> load_assignments(const std::filesystem::path& path);

}  // namespace flowpick
