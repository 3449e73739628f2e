#include "flowpick/labels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "flowpick/error.hpp"
#include "flowpick/io.hpp"

namespace flowpick {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool contains_word(const std::string& haystack, const std::string& needle) {
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
        bool left = pos == 0 || !word_char(haystack[pos - 1]);
        auto end = pos + needle.size();
        bool right = end == haystack.size() || !word_char(haystack[end]);
        if (left && right) return true;
    }
    return false;
}

std::string_view trim(std::string_view s) {
    auto strip = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == '\'' || c == '"' || c == '.' || c == '*' ||
               c == '-' || c == '[' || c == ']';
    };
    while (!s.empty() && strip(s.front())) s.remove_prefix(1);
    while (!s.empty() && strip(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

LabelVocabulary::LabelVocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw Error(Errc::Config, "label vocabulary is empty");
    std::set<std::string> seen;
    for (const auto& l : labels_) {
        if (l.empty() || !seen.insert(lower(l)).second) {
            throw Error(Errc::Config, "label vocabulary has an empty or duplicate label '" + l + "'", l);
        }
    }
}

LabelVocabulary LabelVocabulary::standard() {
    return LabelVocabulary({"People", "Photo-realistic", "Photo-artistic", "Fantasy", "Sci-fi", "Horror", "Anime",
                            "Abstract", "Surreal", "Cyberpunk", "Steampunk", "Gothic", "Digital art", "Portrait",
                            "Nature", "Landscape", "Wildlife", "Urban", "Cosmic", "Underwater"});
}

std::optional<std::size_t> LabelVocabulary::index_of(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

std::optional<std::string> LabelVocabulary::canonical(std::string_view text) const {
    const auto key = lower(text);
    for (const auto& l : labels_) {
        if (lower(l) == key) return l;
    }
    return std::nullopt;
}

std::string labeling_request(std::string_view prompt_text, const LabelVocabulary& vocabulary) {
    std::string labels;
    for (const auto& l : vocabulary.labels()) {
        if (!labels.empty()) labels += ", ";
        labels += l;
    }
    return "Given the following image prompt and list of labels, select the most relevant labels that describe the "
           "key elements, styles, or themes of the image this prompt might produce. Provide only the selected labels, "
           "separated by commas.\n\nImage prompt: " +
           std::string(prompt_text) + "\n\nAvailable labels: " + labels + "\n\nSelected labels:";
}

std::string LlmLabeler::raw_labels(const PromptRecord& prompt, const LabelVocabulary& vocabulary) {
    return llm_.complete({std::nullopt, labeling_request(prompt.text, vocabulary), 256, 0.0});
}

KeywordLabeler::KeywordMap KeywordLabeler::default_keywords() {
    return {
        {"People", {"person", "people", "man", "men", "woman", "women", "girl", "boy", "child", "lady", "adventurer",
                    "warrior", "knight", "queen", "king", "princess", "soldier", "character", "silhouette of a woman"}},
        {"Photo-realistic", {"photorealistic", "photo-realistic", "hyper realistic", "hyperrealistic", "realistic",
                             "photography", "photograph", "photo", "raw photo", "dslr", "35mm"}},
        {"Photo-artistic", {"cinematic", "film still", "bokeh", "dramatic light", "dramatic lighting", "analog",
                            "long exposure", "artistic photo"}},
        {"Fantasy", {"fantasy", "dragon", "elf", "wizard", "magic", "magical", "fairy", "fairycore", "mythical",
                     "medieval", "enchanted"}},
        {"Sci-fi", {"sci-fi", "scifi", "science fiction", "futuristic", "spaceship", "robot", "alien", "mech",
                    "space station"}},
        {"Horror", {"horror", "creepy", "scary", "zombie", "blood", "skull", "demon", "eerie"}},
        {"Anime", {"anime", "manga", "chibi", "ghibli", "cel shaded", "waifu"}},
        {"Abstract", {"abstract", "geometric", "fractal", "pattern", "shapes"}},
        {"Surreal", {"surreal", "surrealism", "dreamlike", "dreamy", "psychedelic", "labyrinth", "bioluminescent"}},
        {"Cyberpunk", {"cyberpunk", "neon", "neon-lit", "blade runner"}},
        {"Steampunk", {"steampunk", "clockwork", "gears", "brass", "victorian"}},
        {"Gothic", {"gothic", "cathedral", "vampire", "castle"}},
        {"Digital art", {"digital art", "digital painting", "concept art", "illustration", "artstation", "3d render",
                         "octane render", "8k digital"}},
        {"Portrait", {"portrait", "close-up", "closeup", "headshot", "face"}},
        {"Nature", {"nature", "forest", "flower", "flowers", "tree", "trees", "garden", "cherry blossoms", "lush",
                    "jungle", "carrot", "plants"}},
        {"Landscape", {"landscape", "scenery", "vista", "valley", "mountains", "panorama", "steppe", "wilderness",
                       "idyllic"}},
        {"Wildlife", {"cat", "cats", "dog", "dogs", "bird", "birds", "animal", "animals", "wildlife", "fish", "tiger",
                      "lion", "wolf", "fox", "horse", "deer", "owl", "bear", "elephant", "tabby"}},
        {"Urban", {"city", "cityscape", "street", "urban", "building", "buildings", "skyscraper", "alley", "town"}},
        {"Cosmic", {"cosmic", "galaxy", "nebula", "stars", "universe", "outer space", "planet", "planets"}},
        {"Underwater", {"underwater", "ocean", "coral", "mermaid", "seabed", "under the sea"}},
    };
}

std::vector<std::string> KeywordLabeler::match(std::string_view prompt_text, const LabelVocabulary& vocabulary) const {
    const auto text = lower(prompt_text);
    std::vector<std::string> out;
    for (const auto& label : vocabulary.labels()) {
        auto it = keywords_.find(label);
        if (it == keywords_.end()) continue;
        for (const auto& kw : it->second) {
            if (contains_word(text, lower(kw))) {
                out.push_back(label);
                break;
            }
        }
    }
    return out;
}

std::string KeywordLabeler::raw_labels(const PromptRecord& prompt, const LabelVocabulary& vocabulary) {
    std::string out;
    for (const auto& l : match(prompt.text, vocabulary)) {
        if (!out.empty()) out += ", ";
        out += l;
    }
    return out;
}

std::vector<std::string> parse_label_text(std::string_view text, const LabelVocabulary& vocabulary,
                                          std::size_t max_labels) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size() && out.size() < max_labels) {
        auto end = text.find_first_of(",\n", start);
        if (end == std::string_view::npos) end = text.size();
        if (auto label = vocabulary.canonical(trim(text.substr(start, end - start)))) {
            if (std::find(out.begin(), out.end(), *label) == out.end()) out.push_back(*label);
        }
        start = end + 1;
    }
    return out;
}

LabelAssignment assign_labels(const PromptRecord& prompt, LabelerClient& labeler, const LabelVocabulary& vocabulary,
                              std::size_t max_labels) {
    auto labels = parse_label_text(labeler.raw_labels(prompt, vocabulary), vocabulary, max_labels);
    if (labels.empty()) {
        throw Error(Errc::NoLabelsAssigned, "no vocabulary label assigned to prompt " + prompt.prompt_id,
                    prompt.prompt_id);
    }
    return {prompt.prompt_id, std::move(labels)};
}

LabelStats label_statistics(const std::vector<LabelAssignment>& assignments, std::size_t discarded) {
    LabelStats s;
    s.labeled = assignments.size();
    s.discarded = discarded;
    const auto total = s.labeled + s.discarded;
    s.discard_rate = total ? static_cast<double>(discarded) / static_cast<double>(total) : 0.0;
    if (assignments.empty()) return s;
    double sum = 0.0;
    for (const auto& a : assignments) {
        sum += static_cast<double>(a.labels.size());
        s.max_labels = std::max(s.max_labels, a.labels.size());
    }
    s.mean_labels = sum / static_cast<double>(s.labeled);
    double sq = 0.0;
    for (const auto& a : assignments) {
        double d = static_cast<double>(a.labels.size()) - s.mean_labels;
        sq += d * d;
    }
    s.std_labels = std::sqrt(sq / static_cast<double>(s.labeled));
    return s;
}

void save_assignments(const std::filesystem::path& path, const std::vector<LabelAssignment>& assignments) {
    std::string text;
    for (const auto& a : assignments) text += Json{{"prompt_id", a.prompt_id}, {"labels", a.labels}}.dump() + "\n";
    write_text_file(path, text);
}

std::vector<LabelAssignment> load_assignments(const std::filesystem::path& path) {
    std::vector<LabelAssignment> out;
    for (const auto& line : read_lines(path)) {
        try {
            auto row = Json::parse(line);
            out.push_back({row.at("prompt_id").get<std::string>(), row.at("labels").get<std::vector<std::string>>()});
        } catch (const Json::exception& e) {
            throw Error(Errc::InvalidArgument, "bad assignment line in " + path.string() + ": " + e.what(),
                        path.string());
        }
    }
    return out;
}

}  // namespace flowpick
