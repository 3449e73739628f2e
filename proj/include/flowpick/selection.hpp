#pragma once

#include <atomic>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowpick/clients.hpp"
#include "flowpick/labels.hpp"
#include "flowpick/score_table.hpp"
#include "flowpick/similarity.hpp"

namespace flowpick {

enum class SelectionMethod { InContext, FineTuned, Fallback };

const char* method_name(SelectionMethod m) noexcept;

struct SelectionResult {
    std::string prompt_id;
    FlowId flow_id;
    SelectionMethod method = SelectionMethod::Fallback;
    std::optional<std::string> explanation;
    std::optional<double> target_score;
    WorkflowGraph graph;           // as chosen or emitted, before prompt binding
    WorkflowGraph resolved_graph;  // with the prompt bound
    std::optional<NearestMatch> neighbor;

    Json to_json() const;
};

/// JSONL rows of SelectionResult::to_json plus the unbound "graph".
void save_selections(const std::filesystem::path& path, const std::vector<SelectionResult>& selections);
std::vector<SelectionResult> load_selections(const std::filesystem::path& path);

struct SelectionOptions {
    std::string negative_default;
    std::size_t max_labels = 10;
    int ic_reprompts = 3;
    int ft_retries = 3;
    int max_tokens = 4096;
    double temperature = 0.0;
};

// ---------------------------------------------------------------------------
// In-context

/// Full user message: the rendered table, then the classification request.
std::string ic_request(std::string_view prompt_text, std::string_view context);

struct IcParse {
    std::optional<FlowId> flow_id;
    std::string explanation;
};

/// Looks for "Flow ID: <id>" first, then for a single allowed id mentioned
/// anywhere. Ids outside `allowed` are rejected.
IcParse parse_ic_response(std::string_view text, const std::set<FlowId>& allowed);

/// Never returns a flow the table's filter discarded. LLM outages and
/// unparseable answers (after reprompts) fall back to select_fallback.
SelectionResult select_in_context(const PromptRecord& prompt, const std::string& context, const ScoreTable& table,
                                  const Corpus& corpus, LlmClient& llm, LabelerClient& fallback_labeler,
                                  const LabelVocabulary& vocabulary, const SelectionOptions& options = {});

// ---------------------------------------------------------------------------
// Fallback

/// Kept flow with the highest mean over `labels` (absent cells skipped), or
/// the highest overall mean when `labels` hit no present cell. Ties go to
/// the smallest FlowId. Errors: EmptyDataset when no kept row has a cell.
FlowId fallback_choice(const ScoreTable& table, const std::vector<std::string>& labels);

SelectionResult select_fallback(const PromptRecord& prompt, const ScoreTable& table, const Corpus& corpus,
                                LabelerClient& labeler, const LabelVocabulary& vocabulary,
                                const SelectionOptions& options = {});

// ---------------------------------------------------------------------------
// Fine-tuned

const std::string& default_ft_template();

/// Substitutes [prompt] and the 3-decimal [score]. Errors: InvalidArgument
/// on a non-finite score.
std::string render_ft_instruction(const std::string& tmpl, std::string_view prompt_text, double score);

struct FtExample {
    std::string instruction;
    std::string completion;

    Json to_json() const { return {{"instruction", instruction}, {"completion", completion}}; }
};

enum class FtExportMode { AllTriplets, PredictBest };

/// One example per triplet sorted by (prompt_id, flow_id, seed), or one per
/// prompt (its best triplet, ties to the smallest FlowId) in PredictBest.
/// Errors: MissingFlow, InvalidArgument for an unknown prompt id.
std::vector<FtExample> export_ft_dataset(const std::vector<ScoredTriplet>& triplets, const Corpus& corpus,
                                         const std::vector<PromptRecord>& prompts, const std::string& tmpl,
                                         FtExportMode mode = FtExportMode::AllTriplets);

void save_ft_dataset(const std::filesystem::path& path, const std::vector<FtExample>& examples);

std::string build_ft_request(const PromptRecord& prompt, double target, const std::string& tmpl);

/// Warning text when `target` lies outside the observed ensemble range.
std::optional<std::string> target_warning(double target, const std::vector<ScoredTriplet>& triplets);

/// Text of the first balanced JSON object in `text` that parses.
/// Errors: NoJsonFound.
std::string extract_json_object(std::string_view text);

/// Errors: NoJsonFound, InvalidFlow.
SelectionResult parse_ft_response(std::string_view text, const SimilarityIndex& index);

/// Requests, parses and binds, retrying NoJsonFound/InvalidFlow up to
/// `options.ft_retries` times before rethrowing.
SelectionResult select_fine_tuned(const PromptRecord& prompt, double target, LlmClient& llm, const std::string& tmpl,
                                  const SimilarityIndex& index, const SelectionOptions& options = {});

struct SweepRow {
    double target = 0.0;
    std::optional<double> mean_score;
    std::size_t evaluated = 0;
    std::size_t failures = 0;
};

/// For each target, selects a flow per prompt with the FT path, renders it,
/// and averages a held-out evaluator's score.
std::vector<SweepRow> score_sweep(const std::vector<PromptRecord>& prompts, const std::vector<double>& targets,
                                  LlmClient& llm, const std::string& tmpl, const SimilarityIndex& index,
                                  ExecutorClient& executor, ScorerClient& evaluator, std::uint64_t seed,
                                  const SelectionOptions& options = {});

// ---------------------------------------------------------------------------

/// Deterministic LLM stand-in recognising the labeling, in-context and
/// fine-tuned request shapes. In-context answers pick the best kept row for
/// the keyword labels; fine-tuned answers echo a corpus flow chosen by hash.
class MockLlm final : public LlmClient {
public:
    explicit MockLlm(Corpus corpus = {}, std::uint64_t seed = 0) : corpus_(std::move(corpus)), seed_(seed) {}
    std::string complete(const LlmRequest& request) override;
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    Corpus corpus_;
    std::uint64_t seed_;
    KeywordLabeler labeler_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace flowpick
