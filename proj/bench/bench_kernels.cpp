// Serial reference vs OpenMP kernel timings on synthetic inputs.
#include <benchmark/benchmark.h>

#include <random>

#include "flowpick/analysis.hpp"
#include "flowpick/augment.hpp"
#include "flowpick/score_table.hpp"
#include "flowpick/scoring.hpp"
#include "flowpick/similarity.hpp"

using namespace flowpick;

namespace {

WorkflowGraph chain_flow(std::mt19937_64& rng, int extra) {
    WorkflowGraph::NodeMap nodes;
    nodes["1"] = {"CheckpointLoaderSimple", {{"ckpt_name", Literal{std::string("model-") + std::to_string(rng() % 20)}}}, {}};
    nodes["2"] = {"CLIPTextEncode", {{"text", Literal{std::string()}}, {"clip", LinkRef{"1", 1}}}, {}};
    nodes["3"] = {"CLIPTextEncode", {{"text", Literal{std::string()}}, {"clip", LinkRef{"1", 1}}}, {}};
    nodes["4"] = {"EmptyLatentImage", {{"width", Literal{std::int64_t{1024}}}, {"height", Literal{std::int64_t{1024}}}}, {}};
    nodes["5"] = {"KSampler",
                  {{"model", LinkRef{"1", 0}},
                   {"positive", LinkRef{"2", 0}},
                   {"negative", LinkRef{"3", 0}},
                   {"latent_image", LinkRef{"4", 0}},
                   {"steps", Literal{static_cast<std::int64_t>(15 + rng() % 35)}},
                   {"cfg", Literal{3.0 + static_cast<double>(rng() % 90) / 10.0}}},
                  {}};
    std::string prev = "5";
    for (int i = 0; i < extra; ++i) {
        auto id = std::to_string(10 + i);
        nodes[id] = {"LatentUpscaleBy", {{"samples", LinkRef{prev, 0}}, {"scale_by", Literal{1.5}}}, {}};
        prev = id;
    }
    nodes["6"] = {"VAEDecode", {{"samples", LinkRef{prev, 0}}, {"vae", LinkRef{"1", 2}}}, {}};
    nodes["7"] = {"SaveImage", {{"images", LinkRef{"6", 0}}}, {}};
    return WorkflowGraph::from_nodes(std::move(nodes));
}

Corpus synthetic_corpus(std::size_t n) {
    std::mt19937_64 rng(1);
    Corpus c;
    for (std::size_t i = 0; i < n; ++i) {
        c.push_back({FlowId("f" + std::to_string(i)), chain_flow(rng, static_cast<int>(rng() % 8)), {}});
    }
    return c;
}

std::vector<RawScoreVector> synthetic_raw(std::size_t n) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RawScoreVector> out(n);
    for (auto& v : out) {
        for (int s = 0; s < 16; ++s) v["scorer" + std::to_string(s)] = u(rng);
    }
    return out;
}

struct TableInput {
    std::vector<ScoredTriplet> triplets;
    std::vector<LabelAssignment> assignments;
    std::vector<std::string> labels;
};

TableInput synthetic_table(std::size_t prompts, std::size_t flows) {
    std::mt19937_64 rng(3);
    TableInput in;
    in.labels = LabelVocabulary::standard().labels();
    for (std::size_t p = 0; p < prompts; ++p) {
        LabelAssignment a{"p" + std::to_string(p), {}};
        for (const auto& l : in.labels) {
            if (rng() % 5 == 0) a.labels.push_back(l);
        }
        if (a.labels.empty()) a.labels.push_back(in.labels[p % in.labels.size()]);
        in.assignments.push_back(a);
        for (std::size_t f = 0; f < flows; ++f) {
            in.triplets.push_back({a.prompt_id, FlowId("f" + std::to_string(f)), 0, {}, (rng() % 1000) / 1000.0, ""});
        }
    }
    return in;
}

std::vector<LabelDocument> synthetic_docs(std::size_t docs, std::size_t terms) {
    std::mt19937_64 rng(4);
    std::vector<LabelDocument> out;
    for (std::size_t d = 0; d < docs; ++d) {
        LabelDocument doc{"L" + std::to_string(d), {}};
        for (std::size_t t = 0; t < terms; ++t) {
            if (rng() % 3 == 0) doc.terms[{"t" + std::to_string(t), kTermCategories[t % kTermCategories.size()]}] = 1 + rng() % 9;
        }
        out.push_back(doc);
    }
    return out;
}

void BM_nearest_serial(benchmark::State& state) {
    auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
    SimilarityIndex index(corpus);
    const auto& query = corpus[corpus.size() / 2].graph;
    for (auto _ : state) benchmark::DoNotOptimize(index.nearest_serial(query));
}

void BM_nearest_parallel(benchmark::State& state) {
    auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
    SimilarityIndex index(corpus);
    const auto& query = corpus[corpus.size() / 2].graph;
    for (auto _ : state) benchmark::DoNotOptimize(index.nearest(query));
}

void BM_fit_serial(benchmark::State& state) {
    auto raw = synthetic_raw(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::fit_standardization(raw));
}

void BM_fit_parallel(benchmark::State& state) {
    auto raw = synthetic_raw(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fit_standardization(raw));
}

void BM_table_serial(benchmark::State& state) {
    auto in = synthetic_table(static_cast<std::size_t>(state.range(0)), 310);
    for (auto _ : state) benchmark::DoNotOptimize(serial::build_table(in.triplets, in.assignments, in.labels));
}

void BM_table_parallel(benchmark::State& state) {
    auto in = synthetic_table(static_cast<std::size_t>(state.range(0)), 310);
    for (auto _ : state) benchmark::DoNotOptimize(build_table(in.triplets, in.assignments, in.labels));
}

void BM_tfidf_serial(benchmark::State& state) {
    auto docs = synthetic_docs(20, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::tfidf_rank(docs));
}

void BM_tfidf_parallel(benchmark::State& state) {
    auto docs = synthetic_docs(20, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tfidf_rank(docs));
}

}  // namespace

BENCHMARK(BM_nearest_serial)->Arg(310)->Arg(2000);
BENCHMARK(BM_nearest_parallel)->Arg(310)->Arg(2000);
BENCHMARK(BM_fit_serial)->Arg(1000)->Arg(155000);
BENCHMARK(BM_fit_parallel)->Arg(1000)->Arg(155000);
BENCHMARK(BM_table_serial)->Arg(50)->Arg(500);
BENCHMARK(BM_table_parallel)->Arg(50)->Arg(500);
BENCHMARK(BM_tfidf_serial)->Arg(200)->Arg(2000);
BENCHMARK(BM_tfidf_parallel)->Arg(200)->Arg(2000);

BENCHMARK_MAIN();
