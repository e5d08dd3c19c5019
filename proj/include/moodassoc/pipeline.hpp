#pragma once

// Subcommand orchestration shared by the CLI binary and the test suite.
// Every run resolves its configuration (flags > file > defaults), writes its
// artifacts under the configured output directory only, and records a
// manifest with the config hash, seed, and input digests. Outputs are
// reproducible byte for byte from (inputs, config, seed).

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moodassoc/annotation.hpp"
#include "moodassoc/association.hpp"
#include "moodassoc/evaluation.hpp"
#include "moodassoc/features.hpp"
#include "moodassoc/ingest.hpp"
#include "moodassoc/models.hpp"
#include "moodassoc/parallel.hpp"
#include "moodassoc/simulate.hpp"

namespace moodassoc {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct PipelineConfig {
    // inputs
    std::string playlists_path;
    std::string songs_path;
    std::string lexicon_path;
    std::string embeddings_path;
    std::string annotations_path;
    std::string scores_path;
    std::string models_dir;
    std::string predictions_path;
    std::string truth_path;
    std::string output_dir = "out";

    // shared parameters
    double tau = 0.1;
    double train_fraction = 0.75;
    uint64_t seed = 42;
    uint64_t min_df = 2;
    size_t histogram_bins = 40;
    size_t top_k = 20;
    int threads = 1;
    bool strict_parse = false;
    bool include_zero_joint = false;
    std::string model_format = "json";  // or "binary"
    std::string kinds = "bow,acoustic,hybrid_bow,hybrid_embed";
    std::string subset = "test";  // predict/evaluate subset: train|test|all
    double sweep_start = 0.02;
    double sweep_stop = 0.50;
    double sweep_step = 0.02;

    TrainConfig train;
    SimConfig sim;

    void validate_common() const {
        if (!(tau > 0.0 && tau < 1.0))
            throw ConfigError("tau must be in (0,1), got " + std::to_string(tau));
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw ConfigError("train_fraction must be in (0,1)");
        if (threads < 1) throw ConfigError("threads must be at least 1");
        if (model_format != "json" && model_format != "binary")
            throw ConfigError("model_format must be json or binary");
        if (subset != "train" && subset != "test" && subset != "all")
            throw ConfigError("subset must be train, test, or all");
        train.validate();
    }

    std::map<std::string, std::string> to_kv() const {
        std::map<std::string, std::string> kv;
        kv["playlists"] = playlists_path;
        kv["songs"] = songs_path;
        kv["lexicon"] = lexicon_path;
        kv["embeddings"] = embeddings_path;
        kv["annotations"] = annotations_path;
        kv["scores"] = scores_path;
        kv["models"] = models_dir;
        kv["predictions"] = predictions_path;
        kv["truth"] = truth_path;
        kv["output_dir"] = output_dir;
        kv["tau"] = format_sig9(tau);
        kv["train_fraction"] = format_sig9(train_fraction);
        kv["seed"] = std::to_string(seed);
        kv["min_df"] = std::to_string(min_df);
        kv["histogram_bins"] = std::to_string(histogram_bins);
        kv["top_k"] = std::to_string(top_k);
        kv["threads"] = std::to_string(threads);
        kv["strict_parse"] = strict_parse ? "true" : "false";
        kv["include_zero_joint"] = include_zero_joint ? "true" : "false";
        kv["model_format"] = model_format;
        kv["kinds"] = kinds;
        kv["subset"] = subset;
        kv["sweep_start"] = format_sig9(sweep_start);
        kv["sweep_stop"] = format_sig9(sweep_stop);
        kv["sweep_step"] = format_sig9(sweep_step);
        kv["train.l2_lambda"] = format_sig9(train.l2_lambda);
        kv["train.max_iters"] = std::to_string(train.max_iters);
        kv["train.tol"] = format_sig9(train.tol);
        kv["train.init_step"] = format_sig9(train.init_step);
        kv["train.backtrack_factor"] = format_sig9(train.backtrack_factor);
        kv["train.armijo_c"] = format_sig9(train.armijo_c);
        kv["train.hidden_width"] = std::to_string(train.hidden_width);
        kv["train.class_weighting"] = train.class_weighting ? "true" : "false";
        kv["sim.n_songs"] = std::to_string(sim.n_songs);
        kv["sim.n_moods"] = std::to_string(sim.n_moods);
        kv["sim.n_playlists"] = std::to_string(sim.n_playlists);
        kv["sim.tracks_min"] = std::to_string(sim.tracks_min);
        kv["sim.tracks_max"] = std::to_string(sim.tracks_max);
        kv["sim.mood_title_probability"] = format_sig9(sim.mood_title_probability);
        kv["sim.affinity_concentration"] = format_sig9(sim.affinity_concentration);
        kv["sim.noise_playlist_fraction"] = format_sig9(sim.noise_playlist_fraction);
        kv["sim.lyric_vocab_size"] = std::to_string(sim.lyric_vocab_size);
        kv["sim.embedding_dim"] = std::to_string(sim.embedding_dim);
        return kv;
    }
};

// key=value configuration lines; '#' starts a comment.
inline void apply_config_kv(PipelineConfig& cfg, const std::string& key,
                            const std::string& value) {
    auto as_u64 = [&](const std::string& v) -> uint64_t {
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw ConfigError("bad integer for " + key + ": \"" + v + "\"");
        }
    };
    auto as_double = [&](const std::string& v) -> double {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ConfigError("bad number for " + key + ": \"" + v + "\"");
        }
    };
    auto as_bool = [&](const std::string& v) -> bool {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("bad boolean for " + key + ": \"" + v + "\"");
    };

    if (key == "playlists") cfg.playlists_path = value;
    else if (key == "songs") cfg.songs_path = value;
    else if (key == "lexicon") cfg.lexicon_path = value;
    else if (key == "embeddings") cfg.embeddings_path = value;
    else if (key == "annotations") cfg.annotations_path = value;
    else if (key == "scores") cfg.scores_path = value;
    else if (key == "models") cfg.models_dir = value;
    else if (key == "predictions") cfg.predictions_path = value;
    else if (key == "truth") cfg.truth_path = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "tau") cfg.tau = as_double(value);
    else if (key == "train_fraction") cfg.train_fraction = as_double(value);
    else if (key == "seed") cfg.seed = as_u64(value);
    else if (key == "min_df") cfg.min_df = as_u64(value);
    else if (key == "histogram_bins") cfg.histogram_bins = as_u64(value);
    else if (key == "top_k") cfg.top_k = as_u64(value);
    else if (key == "threads") cfg.threads = static_cast<int>(as_u64(value));
    else if (key == "strict_parse") cfg.strict_parse = as_bool(value);
    else if (key == "include_zero_joint") cfg.include_zero_joint = as_bool(value);
    else if (key == "model_format") cfg.model_format = value;
    else if (key == "kinds") cfg.kinds = value;
    else if (key == "subset") cfg.subset = value;
    else if (key == "sweep_start") cfg.sweep_start = as_double(value);
    else if (key == "sweep_stop") cfg.sweep_stop = as_double(value);
    else if (key == "sweep_step") cfg.sweep_step = as_double(value);
    else if (key == "train.l2_lambda") cfg.train.l2_lambda = as_double(value);
    else if (key == "train.max_iters") cfg.train.max_iters = as_u64(value);
    else if (key == "train.tol") cfg.train.tol = as_double(value);
    else if (key == "train.init_step") cfg.train.init_step = as_double(value);
    else if (key == "train.backtrack_factor") cfg.train.backtrack_factor = as_double(value);
    else if (key == "train.armijo_c") cfg.train.armijo_c = as_double(value);
    else if (key == "train.hidden_width") cfg.train.hidden_width = as_u64(value);
    else if (key == "train.class_weighting") cfg.train.class_weighting = as_bool(value);
    else if (key == "sim.n_songs") cfg.sim.n_songs = as_u64(value);
    else if (key == "sim.n_moods") cfg.sim.n_moods = as_u64(value);
    else if (key == "sim.n_playlists") cfg.sim.n_playlists = as_u64(value);
    else if (key == "sim.tracks_min") cfg.sim.tracks_min = as_u64(value);
    else if (key == "sim.tracks_max") cfg.sim.tracks_max = as_u64(value);
    else if (key == "sim.mood_title_probability") cfg.sim.mood_title_probability = as_double(value);
    else if (key == "sim.affinity_concentration") cfg.sim.affinity_concentration = as_double(value);
    else if (key == "sim.noise_playlist_fraction") cfg.sim.noise_playlist_fraction = as_double(value);
    else if (key == "sim.lyric_vocab_size") cfg.sim.lyric_vocab_size = as_u64(value);
    else if (key == "sim.embedding_dim") cfg.sim.embedding_dim = as_u64(value);
    else throw ConfigError("unknown config key: \"" + key + "\"");
}

inline void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        size_t eq = line.find('=', start);
        if (eq == std::string::npos)
            throw ConfigError(path.string() + " line " + std::to_string(line_no) +
                              ": expected key=value");
        std::string key = line.substr(start, eq - start);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string value = line.substr(eq + 1);
        size_t vstart = value.find_first_not_of(" \t");
        value = vstart == std::string::npos ? "" : value.substr(vstart);
        apply_config_kv(cfg, key, value);
    }
}

// ---------------------------------------------------------------------------
// Manifest

inline void write_manifest(const PipelineConfig& cfg, const std::string& subcommand,
                           const std::vector<std::string>& input_paths,
                           const std::filesystem::path& out_path) {
    nlohmann::json manifest;
    manifest["subcommand"] = subcommand;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["formats"] = {{"counts_snapshot", kCountsSnapshotVersion},
                           {"model", kModelFormatVersion}};
    manifest["seed"] = cfg.seed;
    nlohmann::json config_json;
    std::string canonical;
    for (const auto& [k, v] : cfg.to_kv()) {
        config_json[k] = v;
        canonical += k + "=" + v + "\n";
    }
    manifest["config"] = config_json;
    char hashbuf[32];
    std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                  static_cast<unsigned long long>(string_hash64(canonical)));
    manifest["config_hash"] = hashbuf;
    nlohmann::json inputs;
    for (const std::string& p : input_paths) {
        if (p.empty()) continue;
        std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                      static_cast<unsigned long long>(content_hash64(p)));
        inputs[p] = hashbuf;
    }
    manifest["inputs"] = inputs;
    std::ofstream out = open_output(out_path);
    out << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Shared loading helpers

namespace detail {

inline std::vector<PlaylistRecord> load_playlists(const PipelineConfig& cfg,
                                                  ParseReport* report) {
    if (cfg.playlists_path.empty()) throw ConfigError("playlists path is required");
    std::ifstream in = open_input(cfg.playlists_path);
    return parse_playlists(in, report, cfg.strict_parse);
}

inline std::vector<SongRecord> load_songs_deduped(const PipelineConfig& cfg,
                                                  ParseReport* report,
                                                  size_t* duplicates_removed = nullptr) {
    if (cfg.songs_path.empty()) throw ConfigError("songs path is required");
    std::ifstream in = open_input(cfg.songs_path);
    std::vector<SongRecord> songs = parse_songs(in, report, cfg.strict_parse);
    size_t before = songs.size();
    songs = dedupe_songs(std::move(songs));
    if (duplicates_removed) *duplicates_removed = before - songs.size();
    return songs;
}

inline std::vector<std::string> song_ids_of(std::span<const SongRecord> songs) {
    std::vector<std::string> ids;
    ids.reserve(songs.size());
    for (const SongRecord& s : songs) ids.push_back(s.song_id);
    return ids;
}

inline std::string sanitize_term(const std::string& term) {
    std::string out;
    for (char c : term) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out += c;
        else out += '_';
    }
    return out;
}

inline bool in_subset(const CorpusSplit& split, const std::string& subset,
                      const std::string& id) {
    if (subset == "all") return true;
    if (subset == "train") return split.is_train(id);
    return split.is_test(id);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ingest: parse + dedupe + split

inline void run_ingest(const PipelineConfig& cfg) {
    cfg.validate_common();
    std::filesystem::path out_dir(cfg.output_dir);
    ParseReport playlist_report, song_report;
    std::vector<PlaylistRecord> playlists = detail::load_playlists(cfg, &playlist_report);
    size_t duplicates_removed = 0;
    std::vector<SongRecord> songs =
        detail::load_songs_deduped(cfg, &song_report, &duplicates_removed);
    if (songs.empty()) throw DataError("no songs parsed from " + cfg.songs_path);

    CorpusSplit split =
        split_train_test(detail::song_ids_of(songs), cfg.train_fraction, cfg.seed);

    {
        std::ofstream out = open_output(out_dir / "split.csv");
        write_split_csv(out, split);
    }
    {
        std::ofstream out = open_output(out_dir / "playlist_errors.csv");
        write_error_report(out, playlist_report);
    }
    {
        std::ofstream out = open_output(out_dir / "song_errors.csv");
        write_error_report(out, song_report);
    }
    {
        nlohmann::json summary;
        summary["n_playlists"] = playlists.size();
        summary["n_playlist_errors"] = playlist_report.issues.size();
        summary["n_songs"] = songs.size();
        summary["n_song_errors"] = song_report.issues.size();
        summary["n_duplicate_songs_removed"] = duplicates_removed;
        summary["n_train"] = split.train_ids.size();
        summary["n_test"] = split.test_ids.size();
        std::ofstream out = open_output(out_dir / "ingest_summary.json");
        out << summary.dump(2) << '\n';
    }
    write_manifest(cfg, "ingest", {cfg.playlists_path, cfg.songs_path},
                   out_dir / "manifest_ingest.json");
}

// ---------------------------------------------------------------------------
// score: count -> priors -> BNPMI -> bin

inline std::vector<AssociationScore> run_score(const PipelineConfig& cfg) {
    cfg.validate_common();
    if (cfg.lexicon_path.empty()) throw ConfigError("lexicon path is required");
    std::filesystem::path out_dir(cfg.output_dir);

    MoodLexicon lexicon = load_lexicon(std::filesystem::path(cfg.lexicon_path));
    ParseReport playlist_report, song_report;
    std::vector<PlaylistRecord> playlists = detail::load_playlists(cfg, &playlist_report);
    std::vector<SongRecord> songs = detail::load_songs_deduped(cfg, &song_report);
    if (songs.empty()) throw DataError("no songs parsed from " + cfg.songs_path);

    CooccurrenceCounts counts = count(playlists, lexicon);
    counts.validate();

    ScoreOptions options;
    options.binning.tau = cfg.tau;
    options.include_zero_joint = cfg.include_zero_joint;
    options.threads = cfg.threads;
    ScoreDiagnostics diagnostics;
    std::vector<std::string> universe = detail::song_ids_of(songs);
    std::vector<AssociationScore> scores =
        score_all(counts, universe, lexicon, options, &diagnostics);

    {
        std::ofstream out = open_output(out_dir / "scores.csv");
        write_scores_csv(out, scores);
    }
    {
        std::ofstream out = open_output(out_dir / "counts.jsonl");
        write_counts_snapshot(out, counts);
    }
    if (scores.size() >= 2) {
        std::vector<double> bnpmi_values;
        bnpmi_values.reserve(scores.size());
        for (const AssociationScore& s : scores) bnpmi_values.push_back(s.bnpmi);
        DistributionStats stats = distribution_stats(bnpmi_values, cfg.histogram_bins);
        nlohmann::json j;
        j["mean"] = stats.mean;
        j["stddev"] = stats.stddev;
        j["n"] = stats.n;
        j["bins"] = stats.histogram;
        j["lo"] = -1.0;
        j["hi"] = 1.0;
        std::ofstream out = open_output(out_dir / "score_stats.json");
        out << j.dump(2) << '\n';
    }
    {
        auto top = top_positive_moods(scores, cfg.top_k);
        std::ofstream out = open_output(out_dir / "top_moods.csv");
        out << "mood,positive_count\n";
        for (const auto& [mood, n] : top) out << csv_quote(mood) << ',' << n << '\n';
    }
    {
        nlohmann::json j;
        j["clamped_pairs"] = diagnostics.clamped_pairs;
        j["degenerate_pairs"] = diagnostics.degenerate_pairs;
        j["playlist_parse_errors"] = playlist_report.issues.size();
        j["song_parse_errors"] = song_report.issues.size();
        std::ofstream out = open_output(out_dir / "score_diagnostics.json");
        out << j.dump(2) << '\n';
    }
    write_manifest(cfg, "score", {cfg.playlists_path, cfg.songs_path, cfg.lexicon_path},
                   out_dir / "manifest_score.json");
    return scores;
}

// ---------------------------------------------------------------------------
// train: per-mood models over the training split

namespace detail {

struct TrainingPairs {
    // per mood: (song index into songs vector, label)
    std::map<std::string, std::vector<std::pair<size_t, int>>> by_mood;
};

inline TrainingPairs collect_training_pairs(std::span<const AssociationScore> scores,
                                            std::span<const SongRecord> songs,
                                            const CorpusSplit& split,
                                            const std::string& subset) {
    std::map<std::string, size_t> song_index;
    for (size_t i = 0; i < songs.size(); ++i) song_index[songs[i].song_id] = i;
    TrainingPairs pairs;
    for (const AssociationScore& s : scores) {
        if (s.label == AssociationLabel::Neutral) continue;  // positives and negatives only
        auto it = song_index.find(s.song_id);
        if (it == song_index.end()) continue;
        if (!in_subset(split, subset, s.song_id)) continue;
        pairs.by_mood[s.mood_term].emplace_back(
            it->second, s.label == AssociationLabel::Positive ? 1 : 0);
    }
    return pairs;
}

struct TrainReportRow {
    std::string kind;
    std::string mood;
    std::string status;  // "ok" or a skip reason
    uint64_t n_pos = 0;
    uint64_t n_neg = 0;
    double final_loss = 0;
    uint64_t n_iters = 0;
};

inline void write_train_report(std::ostream& out, std::span<const TrainReportRow> rows) {
    out << "kind,mood,status,n_pos,n_neg,final_loss,n_iters\n";
    for (const auto& r : rows) {
        out << r.kind << ',' << csv_quote(r.mood) << ',' << csv_quote(r.status) << ','
            << r.n_pos << ',' << r.n_neg << ',' << format_sig9(r.final_loss) << ','
            << r.n_iters << '\n';
    }
}

inline void write_scaler_json(const std::filesystem::path& path, const Scaler& scaler) {
    nlohmann::json j;
    j["mean"] = scaler.mean;
    j["stddev"] = scaler.stddev;
    std::vector<int> pt;
    pt.reserve(scaler.passthrough.size());
    for (bool b : scaler.passthrough) pt.push_back(b ? 1 : 0);
    j["passthrough"] = pt;
    std::ofstream out = open_output(path);
    out << j.dump(2) << '\n';
}

inline Scaler read_scaler_json(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    Scaler s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    for (int b : j.at("passthrough").get<std::vector<int>>()) s.passthrough.push_back(b != 0);
    if (s.mean.size() != s.stddev.size() || s.mean.size() != s.passthrough.size())
        throw DataError("scaler file: inconsistent dimensions");
    return s;
}

}  // namespace detail

inline void run_train(const PipelineConfig& cfg) {
    cfg.validate_common();
    if (cfg.scores_path.empty()) throw ConfigError("scores path is required");
    std::filesystem::path models_root =
        cfg.models_dir.empty() ? std::filesystem::path(cfg.output_dir) / "models"
                               : std::filesystem::path(cfg.models_dir);

    ParseReport song_report;
    std::vector<SongRecord> songs = detail::load_songs_deduped(cfg, &song_report);
    if (songs.empty()) throw DataError("no songs parsed from " + cfg.songs_path);
    std::vector<AssociationScore> scores;
    {
        std::ifstream in = open_input(cfg.scores_path);
        scores = read_scores_csv(in);
    }
    CorpusSplit split =
        split_train_test(detail::song_ids_of(songs), cfg.train_fraction, cfg.seed);
    detail::TrainingPairs pairs =
        detail::collect_training_pairs(scores, songs, split, "train");

    std::vector<std::string> kinds;
    {
        std::stringstream ss(cfg.kinds);
        std::string kind;
        while (std::getline(ss, kind, ',')) {
            if (!kind.empty()) kinds.push_back(kind);
        }
    }

    // train-side features, fit on the training split only
    std::vector<const SongRecord*> train_songs;
    for (const SongRecord& s : songs) {
        if (split.is_train(s.song_id)) train_songs.push_back(&s);
    }
    if (train_songs.empty()) throw DataError("training split is empty");

    std::optional<Vocabulary> vocab;
    std::optional<Scaler> scaler;
    std::optional<EmbeddingTable> embeddings;

    auto need_vocab = [&] {
        if (vocab) return;
        std::vector<std::string> lyrics;
        std::vector<std::string> ids;
        for (const SongRecord* s : train_songs) {
            lyrics.push_back(s->lyrics);
            ids.push_back(s->song_id);
        }
        detail::guard_train_only(ids, &split, "vocabulary");
        vocab = fit_vocabulary(lyrics, cfg.min_df);
    };
    auto need_scaler = [&] {
        if (scaler) return;
        std::vector<DenseVector> acoustic;
        std::vector<std::string> ids;
        for (const SongRecord* s : train_songs) {
            if (!s->acoustic) continue;
            DenseVector v;
            auto a = s->acoustic->as_array();
            v.values.assign(a.begin(), a.end());
            acoustic.push_back(std::move(v));
            ids.push_back(s->song_id);
        }
        if (acoustic.size() < 2)
            throw DataError("need at least 2 train songs with acoustic features");
        scaler = fit_scaler(acoustic, ids, &split);
    };
    auto need_embeddings = [&] {
        if (embeddings) return;
        if (cfg.embeddings_path.empty())
            throw ConfigError("embeddings path is required for hybrid_embed");
        std::ifstream in = open_input(cfg.embeddings_path);
        embeddings = load_embeddings(in);
    };

    // per-song feature caches, built lazily per kind
    std::vector<detail::TrainReportRow> report_rows;
    for (const std::string& kind : kinds) {
        if (kind != "bow" && kind != "acoustic" && kind != "hybrid_bow" &&
            kind != "hybrid_embed") {
            throw ConfigError("unknown model kind: \"" + kind + "\"");
        }
        std::filesystem::path kind_dir = models_root / kind;
        std::filesystem::create_directories(kind_dir);

        bool uses_bow = kind == "bow" || kind == "hybrid_bow";
        bool uses_acoustic = kind != "bow";
        bool uses_embeddings = kind == "hybrid_embed";
        if (uses_bow) need_vocab();
        if (uses_acoustic) need_scaler();
        if (uses_embeddings) need_embeddings();

        if (uses_bow) {
            std::ofstream out = open_output(kind_dir / "vocab.csv");
            write_vocabulary(out, *vocab);
        }
        if (uses_acoustic) detail::write_scaler_json(kind_dir / "scaler.json", *scaler);

        // resolve features per song index, lazily and only once per kind
        std::vector<std::optional<SparseVector>> sparse_cache(songs.size());
        std::vector<std::optional<DenseVector>> acoustic_cache(songs.size());
        auto sparse_feature = [&](size_t idx) -> const SparseVector* {
            auto& slot = sparse_cache[idx];
            if (!slot) {
                SparseVector lyric = tfidf_transform(*vocab, songs[idx].lyrics);
                if (kind == "hybrid_bow") {
                    if (!acoustic_cache[idx]) return nullptr;
                    slot = hybrid_concat(lyric, *acoustic_cache[idx]);
                } else {
                    slot = std::move(lyric);
                }
            }
            return &*slot;
        };
        auto acoustic_feature = [&](size_t idx) -> const DenseVector* {
            auto& slot = acoustic_cache[idx];
            if (!slot) {
                if (!songs[idx].acoustic) return nullptr;
                DenseVector raw;
                auto a = songs[idx].acoustic->as_array();
                raw.values.assign(a.begin(), a.end());
                slot = scale(*scaler, raw);
            }
            return &*slot;
        };

        std::vector<std::pair<std::string, const std::vector<std::pair<size_t, int>>*>>
            mood_list;
        for (const auto& [mood, mood_pairs] : pairs.by_mood) {
            mood_list.emplace_back(mood, &mood_pairs);
        }
        std::vector<detail::TrainReportRow> kind_rows(mood_list.size());
        std::vector<std::optional<AnyModel>> models(mood_list.size());

        // pre-resolve acoustic features serially (cache is shared state)
        if (uses_acoustic) {
            for (const auto& [mood, mood_pairs] : mood_list) {
                for (const auto& [idx, label] : *mood_pairs) acoustic_feature(idx);
            }
        }
        if (uses_bow) {
            for (const auto& [mood, mood_pairs] : mood_list) {
                for (const auto& [idx, label] : *mood_pairs) sparse_feature(idx);
            }
        }

        parallel_for(mood_list.size(), cfg.threads, [&](size_t mi) {
            const auto& [mood, mood_pairs] = mood_list[mi];
            detail::TrainReportRow row;
            row.kind = kind;
            row.mood = mood;
            TrainConfig train_cfg = cfg.train;
            train_cfg.seed = cfg.seed ^ stable_hash64(mood, 0x7261696e);
            try {
                if (kind == "hybrid_embed") {
                    std::vector<DenseVector> emb, ac;
                    std::vector<int> y;
                    for (const auto& [idx, label] : *mood_pairs) {
                        const DenseVector* e = embeddings->find(songs[idx].song_id);
                        const DenseVector* a = acoustic_feature(idx);
                        if (!e || !a) continue;
                        emb.push_back(*e);
                        ac.push_back(*a);
                        y.push_back(label);
                    }
                    if (emb.empty()) throw DataError("no usable examples");
                    HybridHead model = train_hybrid_head(emb, ac, y, train_cfg, mood);
                    row.n_pos = model.train_meta.n_pos;
                    row.n_neg = model.train_meta.n_neg;
                    row.final_loss = model.train_meta.final_loss;
                    row.n_iters = model.train_meta.n_iters;
                    models[mi] = AnyModel(std::move(model));
                } else if (kind == "acoustic") {
                    std::vector<DenseVector> X;
                    std::vector<int> y;
                    for (const auto& [idx, label] : *mood_pairs) {
                        const DenseVector* a = acoustic_feature(idx);
                        if (!a) continue;
                        X.push_back(*a);
                        y.push_back(label);
                    }
                    if (X.empty()) throw DataError("no usable examples");
                    LogisticModel model = train_logistic<DenseVector>(X, y, train_cfg, mood);
                    row.n_pos = model.train_meta.n_pos;
                    row.n_neg = model.train_meta.n_neg;
                    row.final_loss = model.train_meta.final_loss;
                    row.n_iters = model.train_meta.n_iters;
                    models[mi] = AnyModel(std::move(model));
                } else {
                    std::vector<SparseVector> X;
                    std::vector<int> y;
                    for (const auto& [idx, label] : *mood_pairs) {
                        const SparseVector* v = sparse_feature(idx);
                        if (!v) continue;
                        X.push_back(*v);
                        y.push_back(label);
                    }
                    if (X.empty()) throw DataError("no usable examples");
                    LogisticModel model = train_logistic<SparseVector>(X, y, train_cfg, mood);
                    row.n_pos = model.train_meta.n_pos;
                    row.n_neg = model.train_meta.n_neg;
                    row.final_loss = model.train_meta.final_loss;
                    row.n_iters = model.train_meta.n_iters;
                    models[mi] = AnyModel(std::move(model));
                }
                row.status = "ok";
            } catch (const DataError& e) {
                row.status = std::string("skipped: ") + e.what();
            }
            kind_rows[mi] = std::move(row);
        });

        ModelFormat format =
            cfg.model_format == "binary" ? ModelFormat::Binary : ModelFormat::Json;
        const char* ext = cfg.model_format == "binary" ? ".bin" : ".json";
        for (size_t mi = 0; mi < mood_list.size(); ++mi) {
            if (!models[mi]) continue;
            std::filesystem::path path =
                kind_dir / (detail::sanitize_term(mood_list[mi].first) + ext);
            save_model(path, *models[mi], format);
        }
        report_rows.insert(report_rows.end(), kind_rows.begin(), kind_rows.end());
    }

    {
        std::ofstream out =
            open_output(std::filesystem::path(cfg.output_dir) / "train_report.csv");
        detail::write_train_report(out, report_rows);
    }
    write_manifest(cfg, "train",
                   {cfg.songs_path, cfg.scores_path, cfg.embeddings_path},
                   std::filesystem::path(cfg.output_dir) / "manifest_train.json");
}

// ---------------------------------------------------------------------------
// predict: apply saved models to a subset of songs

inline void run_predict(const PipelineConfig& cfg) {
    cfg.validate_common();
    std::filesystem::path models_root =
        cfg.models_dir.empty() ? std::filesystem::path(cfg.output_dir) / "models"
                               : std::filesystem::path(cfg.models_dir);
    if (!std::filesystem::is_directory(models_root))
        throw ConfigError("models directory not found: " + models_root.string());

    ParseReport song_report;
    std::vector<SongRecord> songs = detail::load_songs_deduped(cfg, &song_report);
    if (songs.empty()) throw DataError("no songs parsed from " + cfg.songs_path);
    CorpusSplit split =
        split_train_test(detail::song_ids_of(songs), cfg.train_fraction, cfg.seed);

    std::optional<EmbeddingTable> embeddings;
    if (!cfg.embeddings_path.empty()) {
        std::ifstream in = open_input(cfg.embeddings_path);
        embeddings = load_embeddings(in);
    }

    std::vector<std::string> coverage_notes;
    for (const auto& kind_entry : std::filesystem::directory_iterator(models_root)) {
        if (!kind_entry.is_directory()) continue;
        std::string kind = kind_entry.path().filename().string();
        bool uses_bow = kind == "bow" || kind == "hybrid_bow";
        bool uses_acoustic = kind != "bow";
        bool uses_embeddings = kind == "hybrid_embed";
        if (kind != "bow" && kind != "acoustic" && kind != "hybrid_bow" &&
            kind != "hybrid_embed") {
            continue;  // not a model kind directory
        }
        if (uses_embeddings && !embeddings)
            throw ConfigError("embeddings path is required to predict with hybrid_embed");

        std::optional<Vocabulary> vocab;
        if (uses_bow) {
            std::ifstream in = open_input(kind_entry.path() / "vocab.csv");
            vocab = read_vocabulary(in);
        }
        std::optional<Scaler> scaler;
        if (uses_acoustic) {
            scaler = detail::read_scaler_json(kind_entry.path() / "scaler.json");
        }

        std::vector<AnyModel> models;
        std::vector<std::filesystem::path> model_files;
        for (const auto& f : std::filesystem::directory_iterator(kind_entry.path())) {
            if (!f.is_regular_file()) continue;
            std::string ext = f.path().extension().string();
            std::string name = f.path().filename().string();
            if (name == "vocab.csv" || name == "scaler.json") continue;
            if (ext != ".json" && ext != ".bin") continue;
            model_files.push_back(f.path());
        }
        std::sort(model_files.begin(), model_files.end());
        for (const auto& path : model_files) models.push_back(load_model(path));

        struct PredRow {
            std::string song_id;
            std::string mood;
            double probability;
        };
        std::vector<PredRow> rows;
        for (const SongRecord& song : songs) {
            if (!detail::in_subset(split, cfg.subset, song.song_id)) continue;
            std::optional<SparseVector> lyric_vec;
            std::optional<DenseVector> acoustic_vec;
            if (uses_bow) lyric_vec = tfidf_transform(*vocab, song.lyrics);
            if (uses_acoustic) {
                if (!song.acoustic) {
                    coverage_notes.push_back(kind + ": song " + song.song_id +
                                             " skipped (no acoustic features)");
                    continue;
                }
                DenseVector raw;
                auto a = song.acoustic->as_array();
                raw.values.assign(a.begin(), a.end());
                acoustic_vec = scale(*scaler, raw);
            }
            const DenseVector* embed = nullptr;
            if (uses_embeddings) {
                embed = embeddings->find(song.song_id);
                if (!embed) {
                    coverage_notes.push_back(kind + ": song " + song.song_id +
                                             " skipped (no embedding)");
                    continue;
                }
            }
            for (const AnyModel& any : models) {
                PredRow row;
                row.song_id = song.song_id;
                if (const auto* logistic = std::get_if<LogisticModel>(&any)) {
                    row.mood = logistic->mood_term;
                    if (kind == "bow") {
                        row.probability = predict(*logistic, *lyric_vec);
                    } else if (kind == "acoustic") {
                        row.probability = predict(*logistic, *acoustic_vec);
                    } else {
                        SparseVector combined = hybrid_concat(*lyric_vec, *acoustic_vec);
                        row.probability = predict(*logistic, combined);
                    }
                } else {
                    const auto& head = std::get<HybridHead>(any);
                    row.mood = head.mood_term;
                    row.probability = predict(head, *embed, *acoustic_vec);
                }
                rows.push_back(std::move(row));
            }
        }
        std::sort(rows.begin(), rows.end(), [](const PredRow& a, const PredRow& b) {
            if (a.song_id != b.song_id) return a.song_id < b.song_id;
            return a.mood < b.mood;
        });
        std::ofstream out = open_output(std::filesystem::path(cfg.output_dir) /
                                        ("predictions_" + kind + ".csv"));
        out << "song_id,mood,probability,decision\n";
        for (const PredRow& r : rows) {
            out << csv_quote(r.song_id) << ',' << csv_quote(r.mood) << ','
                << format_sig9(r.probability) << ',' << to_string(classify(r.probability))
                << '\n';
        }
    }
    {
        nlohmann::json j;
        std::sort(coverage_notes.begin(), coverage_notes.end());
        j["skipped"] = coverage_notes;
        std::ofstream out =
            open_output(std::filesystem::path(cfg.output_dir) / "predict_coverage.json");
        out << j.dump(2) << '\n';
    }
    write_manifest(cfg, "predict", {cfg.songs_path, cfg.embeddings_path},
                   std::filesystem::path(cfg.output_dir) / "manifest_predict.json");
}

// ---------------------------------------------------------------------------
// evaluate: predictions against binned-score truth

inline std::map<PairKey, Decision> read_predictions_csv(std::istream& in) {
    std::map<PairKey, Decision> pred;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "song_id,mood,probability,decision")
                throw DataError("predictions CSV: unexpected header");
            continue;
        }
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 4)
            throw DataError("predictions CSV line " + std::to_string(line_no) + ": bad row");
        pred[{fields[0], fields[1]}] =
            fields[3] == "Positive" ? Decision::Positive : Decision::Negative;
    }
    return pred;
}

inline void run_evaluate(const PipelineConfig& cfg) {
    cfg.validate_common();
    if (cfg.scores_path.empty()) throw ConfigError("scores path is required");
    if (cfg.predictions_path.empty()) throw ConfigError("predictions path is required");

    std::vector<AssociationScore> scores;
    {
        std::ifstream in = open_input(cfg.scores_path);
        scores = read_scores_csv(in);
    }
    std::map<PairKey, Decision> predictions;
    {
        std::ifstream in = open_input(cfg.predictions_path);
        predictions = read_predictions_csv(in);
    }

    // truth: binned labels, positives and negatives only, limited to pairs
    // that actually have predictions' subset coverage
    std::map<PairKey, TruthLabel> truth;
    std::set<std::string> moods;
    for (const AssociationScore& s : scores) {
        if (s.label == AssociationLabel::Neutral) continue;
        PairKey key{s.song_id, s.mood_term};
        if (!predictions.count(key)) continue;  // outside predicted subset
        truth[key] = s.label == AssociationLabel::Positive ? TruthLabel::Positive
                                                           : TruthLabel::Negative;
        moods.insert(s.mood_term);
    }
    if (truth.empty()) throw DataError("no evaluable pairs: predictions and scores do not overlap");

    std::vector<std::string> mood_list(moods.begin(), moods.end());
    std::vector<MoodReportRow> rows = per_mood_report(predictions, truth, mood_list);
    std::string stem = std::filesystem::path(cfg.predictions_path).stem().string();
    if (stem.rfind("predictions_", 0) == 0) stem = stem.substr(12);
    std::ofstream out = open_output(std::filesystem::path(cfg.output_dir) /
                                    ("metrics_" + stem + ".csv"));
    write_metrics_csv(out, rows);
    write_manifest(cfg, "evaluate", {cfg.scores_path, cfg.predictions_path},
                   std::filesystem::path(cfg.output_dir) /
                       ("manifest_evaluate_" + stem + ".json"));
}

// ---------------------------------------------------------------------------
// sweep: precision/recall vs threshold for BNPMI scores

inline void run_sweep(const PipelineConfig& cfg) {
    cfg.validate_common();
    if (cfg.scores_path.empty()) throw ConfigError("scores path is required");
    if (cfg.truth_path.empty()) throw ConfigError("truth path is required");
    if (!(cfg.sweep_step > 0)) throw ConfigError("sweep_step must be positive");

    std::vector<AssociationScore> scores;
    {
        std::ifstream in = open_input(cfg.scores_path);
        scores = read_scores_csv(in);
    }
    std::map<PairKey, TruthLabel> truth;
    {
        std::ifstream in = open_input(cfg.truth_path);
        truth = read_truth_csv(in);
    }
    std::map<PairKey, double> score_map;
    for (const AssociationScore& s : scores) score_map[{s.song_id, s.mood_term}] = s.bnpmi;

    // keep only truth pairs with a score; missing pairs are a data error the
    // confusion pass would also catch, but the sweep reports them up front
    std::map<PairKey, TruthLabel> covered;
    std::vector<std::string> missing;
    for (const auto& [key, label] : truth) {
        if (score_map.count(key)) {
            covered[key] = label;
        } else {
            missing.push_back("(" + key.first + ", " + key.second + ")");
        }
    }
    if (covered.empty()) throw DataError("no truth pairs have scores");

    std::vector<double> taus;
    for (double t = cfg.sweep_start; t <= cfg.sweep_stop + 1e-12; t += cfg.sweep_step) {
        taus.push_back(t);
    }
    std::vector<SweepPoint> points = threshold_sweep(score_map, covered, taus);
    {
        std::ofstream out = open_output(std::filesystem::path(cfg.output_dir) / "sweep.csv");
        write_sweep_csv(out, points);
    }
    {
        double best_f1 = -1, best_tau = taus.empty() ? 0 : taus.front();
        for (const SweepPoint& p : points) {
            double f1 = (p.precision + p.recall) > 0
                            ? 2 * p.precision * p.recall / (p.precision + p.recall)
                            : 0;
            if (f1 > best_f1) {
                best_f1 = f1;
                best_tau = p.tau;
            }
        }
        nlohmann::json j;
        j["best_tau"] = best_tau;
        j["best_f1"] = best_f1;
        j["n_pairs"] = covered.size();
        j["n_missing_scores"] = missing.size();
        std::ofstream out =
            open_output(std::filesystem::path(cfg.output_dir) / "sweep_summary.json");
        out << j.dump(2) << '\n';
    }
    write_manifest(cfg, "sweep", {cfg.scores_path, cfg.truth_path},
                   std::filesystem::path(cfg.output_dir) / "manifest_sweep.json");
}

// ---------------------------------------------------------------------------
// agree: kappa, verdicts, consensus, and BNPMI vs annotation

inline void run_agree(const PipelineConfig& cfg) {
    cfg.validate_common();
    if (cfg.annotations_path.empty()) throw ConfigError("annotations path is required");

    std::vector<AnnotationRecord> records;
    {
        std::ifstream in = open_input(cfg.annotations_path);
        records = load_annotations_csv(in);
    }
    if (records.empty()) throw DataError("no annotation records in " + cfg.annotations_path);

    std::vector<AnnotationRecord> lyrics_records, acoustics_records;
    for (const AnnotationRecord& r : records) {
        (r.source == AnnotationSource::Lyrics ? lyrics_records : acoustics_records)
            .push_back(r);
    }

    std::vector<std::pair<std::string, AgreementReport>> agreement;
    if (lyrics_records.size() >= 2)
        agreement.emplace_back("lyrics", fleiss_kappa_judgments(lyrics_records));
    if (acoustics_records.size() >= 2)
        agreement.emplace_back("acoustics", fleiss_kappa_judgments(acoustics_records));
    {
        std::ofstream out =
            open_output(std::filesystem::path(cfg.output_dir) / "agreement.csv");
        write_agreement_csv(out, agreement);
    }

    VerdictTable verdicts = resolve_verdicts(records);
    {
        std::ofstream out =
            open_output(std::filesystem::path(cfg.output_dir) / "verdicts.csv");
        write_verdicts_csv(out, verdicts);
    }

    // BNPMI-vs-annotation evaluation, one row per ground-truth source
    if (!cfg.scores_path.empty()) {
        std::vector<AssociationScore> scores;
        std::ifstream in = open_input(cfg.scores_path);
        scores = read_scores_csv(in);
        std::map<PairKey, double> score_map;
        for (const AssociationScore& s : scores) {
            score_map[{s.song_id, s.mood_term}] = s.bnpmi;
        }
        auto bnpmi_predictions =
            [&](const std::map<PairKey, Judgment>& pairs) -> std::map<PairKey, Decision> {
            std::map<PairKey, Decision> pred;
            for (const auto& [key, verdict] : pairs) {
                auto it = score_map.find(key);
                if (it == score_map.end()) continue;  // confusion() reports the gap
                pred[key] = it->second >= cfg.tau ? Decision::Positive : Decision::Negative;
            }
            return pred;
        };
        auto truth_of = [](const std::map<PairKey, Judgment>& pairs) {
            std::map<PairKey, TruthLabel> truth;
            for (const auto& [key, verdict] : pairs) truth[key] = truth_from_judgment(verdict);
            return truth;
        };
        std::vector<MoodReportRow> rows;
        auto add_row = [&](const std::string& scope,
                           const std::map<PairKey, Judgment>& pairs) {
            if (pairs.empty()) return;
            MoodReportRow row;
            row.scope = scope;
            row.counts = confusion(bnpmi_predictions(pairs), truth_of(pairs));
            row.metrics = metrics(row.counts);
            rows.push_back(std::move(row));
        };
        add_row("lyrics", verdicts.lyrics);
        add_row("acoustics", verdicts.acoustics);
        add_row("consensus", verdicts.consensus);
        std::ofstream out = open_output(std::filesystem::path(cfg.output_dir) /
                                        "bnpmi_vs_annotation.csv");
        write_metrics_csv(out, rows);
    }
    {
        nlohmann::json j;
        j["unmatched_pairs"] = verdicts.unmatched;
        std::ofstream out =
            open_output(std::filesystem::path(cfg.output_dir) / "agree_diagnostics.json");
        out << j.dump(2) << '\n';
    }
    write_manifest(cfg, "agree", {cfg.annotations_path, cfg.scores_path},
                   std::filesystem::path(cfg.output_dir) / "manifest_agree.json");
}

// ---------------------------------------------------------------------------
// simulate: emit a synthetic corpus in the ingest formats

inline void run_simulate(const PipelineConfig& cfg) {
    cfg.validate_common();
    SimulatedCorpus corpus = generate(cfg.sim);
    std::filesystem::path out_dir(cfg.output_dir);
    {
        std::ofstream out = open_output(out_dir / "playlists.jsonl");
        write_playlists_jsonl(out, corpus.playlists);
    }
    {
        std::ofstream out = open_output(out_dir / "songs.jsonl");
        write_songs_jsonl(out, corpus.songs);
    }
    {
        std::ofstream out = open_output(out_dir / "lexicon.csv");
        write_lexicon(out, corpus.lexicon);
    }
    {
        std::ofstream out = open_output(out_dir / "embeddings.csv");
        write_embeddings(out, corpus.embeddings);
    }
    {
        std::ofstream out = open_output(out_dir / "ground_truth.csv");
        write_ground_truth_csv(out, corpus.truth);
    }
    {
        std::ofstream out = open_output(out_dir / "sim_truth.csv");
        write_truth_csv(out, truth_from_affinity(corpus.truth));
    }
    write_manifest(cfg, "simulate", {}, out_dir / "manifest_simulate.json");
}

// ---------------------------------------------------------------------------
// pipeline: simulate -> score -> train -> predict -> evaluate -> sweep

inline void run_pipeline(const PipelineConfig& cfg) {
    cfg.validate_common();
    std::filesystem::path root(cfg.output_dir);

    PipelineConfig sim_cfg = cfg;
    sim_cfg.output_dir = (root / "corpus").string();
    run_simulate(sim_cfg);

    PipelineConfig score_cfg = cfg;
    score_cfg.playlists_path = (root / "corpus" / "playlists.jsonl").string();
    score_cfg.songs_path = (root / "corpus" / "songs.jsonl").string();
    score_cfg.lexicon_path = (root / "corpus" / "lexicon.csv").string();
    score_cfg.output_dir = (root / "scores").string();
    run_score(score_cfg);

    PipelineConfig train_cfg = score_cfg;
    train_cfg.scores_path = (root / "scores" / "scores.csv").string();
    train_cfg.embeddings_path = (root / "corpus" / "embeddings.csv").string();
    train_cfg.models_dir = (root / "models").string();
    train_cfg.output_dir = (root / "models").string();
    run_train(train_cfg);

    PipelineConfig predict_cfg = train_cfg;
    predict_cfg.output_dir = (root / "predictions").string();
    run_predict(predict_cfg);

    std::vector<std::string> kinds;
    {
        std::stringstream ss(cfg.kinds);
        std::string kind;
        while (std::getline(ss, kind, ',')) {
            if (!kind.empty()) kinds.push_back(kind);
        }
    }
    for (const std::string& kind : kinds) {
        PipelineConfig eval_cfg = predict_cfg;
        eval_cfg.predictions_path =
            (root / "predictions" / ("predictions_" + kind + ".csv")).string();
        eval_cfg.output_dir = (root / "reports").string();
        run_evaluate(eval_cfg);
    }

    PipelineConfig sweep_cfg = cfg;
    sweep_cfg.scores_path = (root / "scores" / "scores.csv").string();
    sweep_cfg.truth_path = (root / "corpus" / "sim_truth.csv").string();
    sweep_cfg.output_dir = (root / "reports").string();
    run_sweep(sweep_cfg);

    write_manifest(cfg, "pipeline", {}, root / "manifest_pipeline.json");
}

// ---------------------------------------------------------------------------

inline void run(const std::string& subcommand, const PipelineConfig& cfg) {
    if (subcommand == "ingest") run_ingest(cfg);
    else if (subcommand == "score") run_score(cfg);
    else if (subcommand == "train") run_train(cfg);
    else if (subcommand == "predict") run_predict(cfg);
    else if (subcommand == "evaluate") run_evaluate(cfg);
    else if (subcommand == "sweep") run_sweep(cfg);
    else if (subcommand == "agree") run_agree(cfg);
    else if (subcommand == "simulate") run_simulate(cfg);
    else if (subcommand == "pipeline") run_pipeline(cfg);
    else throw ConfigError("unknown subcommand: \"" + subcommand + "\"");
}

}  // namespace moodassoc
