#pragma once

// Synthetic corpus generator with a known song-mood affinity ground truth.
// Themed playlists embed a mood term in their title and sample tracks in
// proportion to the affinity column; lyric-driven moods leave indicator
// tokens in lyric bags, acoustic-driven moods shift designated acoustic
// dimensions; embeddings are noisy linear images of the lyric indicators.
// Every playlist and song draws from its own counter-based random stream, so
// generation is deterministic and order-independent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moodassoc/association.hpp"
#include "moodassoc/errors.hpp"
#include "moodassoc/evaluation.hpp"
#include "moodassoc/features.hpp"
#include "moodassoc/ingest.hpp"
#include "moodassoc/io.hpp"
#include "moodassoc/lexicon.hpp"
#include "moodassoc/random.hpp"

namespace moodassoc {

struct SimConfig {
    size_t n_songs = 200;
    size_t n_moods = 10;
    size_t n_playlists = 50000;
    size_t tracks_min = 5;
    size_t tracks_max = 15;
    double mood_title_probability = 0.9;
    double affinity_concentration = 3.0;  // Dirichlet alpha = 1/concentration
    double noise_playlist_fraction = 0.1;
    size_t lyric_vocab_size = 500;
    size_t embedding_dim = 16;
    uint64_t seed = 42;

    void validate() const {
        if (n_songs < 1 || n_moods < 1 || n_playlists < 1)
            throw ConfigError("simulator counts must be at least 1");
        if (tracks_min < 1 || tracks_max < tracks_min)
            throw ConfigError("tracks_per_playlist range is invalid");
        if (tracks_max > n_songs)
            throw ConfigError("tracks_per_playlist exceeds the song count");
        if (!(mood_title_probability > 0.0 && mood_title_probability <= 1.0))
            throw ConfigError("mood_title_probability must be in (0,1]");
        if (!(affinity_concentration > 0.0))
            throw ConfigError("affinity_concentration must be positive");
        if (!(noise_playlist_fraction >= 0.0 && noise_playlist_fraction < 1.0))
            throw ConfigError("noise_playlist_fraction must be in [0,1)");
        if (lyric_vocab_size < 1) throw ConfigError("lyric_vocab_size must be at least 1");
        if (embedding_dim < 1) throw ConfigError("embedding_dim must be at least 1");
    }
};

struct GroundTruth {
    std::vector<std::string> song_ids;
    std::vector<std::string> mood_terms;
    std::vector<std::vector<double>> affinity;  // n_songs x n_moods, rows on the simplex
    std::vector<bool> lyric_driven;             // per mood; false = acoustic-driven

    double affinity_of(size_t song, size_t mood) const { return affinity[song][mood]; }
};

struct SimulatedCorpus {
    std::vector<PlaylistRecord> playlists;
    std::vector<SongRecord> songs;
    MoodLexicon lexicon;
    EmbeddingTable embeddings;
    GroundTruth truth;
};

namespace detail {

inline const std::vector<std::pair<std::string, PartOfSpeech>>& sim_mood_pool() {
    // even indices are lyric-driven, odd acoustic-driven: "love" lands on the
    // lyric side and "chill" on the acoustic side
    static const std::vector<std::pair<std::string, PartOfSpeech>> pool = {
        {"love", PartOfSpeech::Noun},         {"chill", PartOfSpeech::Adjective},
        {"sad", PartOfSpeech::Adjective},     {"upbeat", PartOfSpeech::Adjective},
        {"happy", PartOfSpeech::Adjective},   {"motivation", PartOfSpeech::Noun},
        {"calm", PartOfSpeech::Adjective},    {"energetic", PartOfSpeech::Adjective},
        {"romantic", PartOfSpeech::Adjective},{"gloomy", PartOfSpeech::Adjective},
        {"dreamy", PartOfSpeech::Adjective},  {"reminisce", PartOfSpeech::Verb},
        {"festive", PartOfSpeech::Adjective}, {"sleepy", PartOfSpeech::Adjective},
        {"bittersweet", PartOfSpeech::Adjective}, {"unwind", PartOfSpeech::Verb},
        {"nostalgic", PartOfSpeech::Adjective},   {"hype", PartOfSpeech::Adjective},
        {"angry", PartOfSpeech::Adjective},   {"serene", PartOfSpeech::Adjective},
    };
    return pool;
}

inline std::vector<double> dirichlet_row(Rng& rng, size_t k, double alpha) {
    std::vector<double> row(k);
    double sum = 0;
    for (size_t i = 0; i < k; ++i) {
        row[i] = rng.gamma(alpha);
        sum += row[i];
    }
    if (sum <= 0) {
        // extreme concentration underflowed every gamma draw: one-hot row
        std::fill(row.begin(), row.end(), 0.0);
        row[rng.uniform_int(k)] = 1.0;
        return row;
    }
    for (double& v : row) v /= sum;
    return row;
}

inline size_t sample_cdf(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
    size_t idx = static_cast<size_t>(it - cdf.begin());
    return std::min(idx, cdf.size() - 1);
}

}  // namespace detail

inline SimulatedCorpus generate(const SimConfig& config) {
    config.validate();
    SimulatedCorpus corpus;

    // mood vocabulary; beyond the pool, synthetic terms keep generation total
    const auto& pool = detail::sim_mood_pool();
    for (size_t m = 0; m < config.n_moods; ++m) {
        std::string term;
        PartOfSpeech pos;
        if (m < pool.size()) {
            term = pool[m].first;
            pos = pool[m].second;
        } else {
            term = "mood" + std::to_string(m);
            pos = PartOfSpeech::Adjective;
        }
        corpus.lexicon.moods.push_back(make_mood(term, pos));
        corpus.truth.mood_terms.push_back(corpus.lexicon.moods.back().term);
        corpus.truth.lyric_driven.push_back(m % 2 == 0);
    }
    corpus.lexicon.rebuild_index();

    // affinity rows
    double alpha = 1.0 / config.affinity_concentration;
    corpus.truth.song_ids.reserve(config.n_songs);
    corpus.truth.affinity.reserve(config.n_songs);
    for (size_t s = 0; s < config.n_songs; ++s) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "s%05zu", s);
        corpus.truth.song_ids.emplace_back(buf);
        Rng rng(config.seed, "affinity", s);
        corpus.truth.affinity.push_back(detail::dirichlet_row(rng, config.n_moods, alpha));
    }

    // per-mood cumulative track-sampling distributions
    std::vector<std::vector<double>> mood_cdf(config.n_moods,
                                              std::vector<double>(config.n_songs));
    for (size_t m = 0; m < config.n_moods; ++m) {
        double acc = 0;
        for (size_t s = 0; s < config.n_songs; ++s) {
            acc += corpus.truth.affinity[s][m] + 1e-9;
            mood_cdf[m][s] = acc;
        }
    }

    // playlists
    static const char* kThemedTitles[] = {"%s mix", "best %s songs", "%s essentials",
                                          "totally %s", "the %s collection"};
    static const char* kNeutralTitles[] = {"my playlist %zu", "road tape %zu",
                                           "weekend rotation %zu", "daily driver %zu"};
    corpus.playlists.reserve(config.n_playlists);
    for (size_t i = 0; i < config.n_playlists; ++i) {
        Rng rng(config.seed, "playlist", i);
        PlaylistRecord rec;
        rec.playlist_id = "p" + std::to_string(i);
        bool noise = rng.uniform() < config.noise_playlist_fraction;
        size_t k = config.tracks_min + rng.uniform_int(config.tracks_max - config.tracks_min + 1);
        char title[128];
        if (noise) {
            std::snprintf(title, sizeof(title),
                          kNeutralTitles[rng.uniform_int(4)], i);
            rec.title = title;
            for (size_t t = 0; t < k; ++t) {
                rec.track_ids.push_back(
                    corpus.truth.song_ids[rng.uniform_int(config.n_songs)]);
            }
        } else {
            size_t mood = rng.uniform_int(config.n_moods);
            if (rng.uniform() < config.mood_title_probability) {
                std::snprintf(title, sizeof(title), kThemedTitles[rng.uniform_int(5)],
                              corpus.truth.mood_terms[mood].c_str());
            } else {
                std::snprintf(title, sizeof(title),
                              kNeutralTitles[rng.uniform_int(4)], i);
            }
            rec.title = title;
            if (rng.uniform() < 0.3) rec.description = "all the right tracks";
            for (size_t t = 0; t < k; ++t) {
                size_t s = detail::sample_cdf(mood_cdf[mood], rng.uniform());
                rec.track_ids.push_back(corpus.truth.song_ids[s]);
            }
        }
        corpus.playlists.push_back(std::move(rec));
    }

    // songs: lyric bags, acoustic features, embeddings
    std::vector<size_t> lyric_mood_slots;  // mood index -> slot among lyric-driven moods
    std::vector<size_t> acoustic_mood_slots;
    for (size_t m = 0; m < config.n_moods; ++m) {
        if (corpus.truth.lyric_driven[m]) {
            lyric_mood_slots.push_back(m);
        } else {
            acoustic_mood_slots.push_back(m);
        }
    }

    // fixed projection for embeddings
    size_t indicator_dims = lyric_mood_slots.size();
    std::vector<double> projection(config.embedding_dim * std::max<size_t>(indicator_dims, 1));
    {
        Rng rng(config.seed, "embedding-projection");
        for (double& v : projection) v = rng.normal();
    }

    corpus.songs.reserve(config.n_songs);
    corpus.embeddings.dims = config.embedding_dim;
    for (size_t s = 0; s < config.n_songs; ++s) {
        Rng rng(config.seed, "song", s);
        SongRecord song;
        song.song_id = corpus.truth.song_ids[s];

        // background tokens
        std::string lyrics;
        size_t n_background = 30 + rng.uniform_int(21);
        for (size_t t = 0; t < n_background; ++t) {
            if (t) lyrics += ' ';
            lyrics += 'w' + std::to_string(rng.uniform_int(config.lyric_vocab_size));
        }
        // mood-indicative tokens for lyric-driven moods, rate tied to affinity
        std::vector<double> indicator_counts(std::max<size_t>(indicator_dims, 1), 0.0);
        for (size_t slot = 0; slot < lyric_mood_slots.size(); ++slot) {
            size_t m = lyric_mood_slots[slot];
            double p = std::min(0.95, 2.5 * corpus.truth.affinity[s][m]);
            uint64_t n_tokens = rng.binomial(24, p);
            indicator_counts[slot] = static_cast<double>(n_tokens);
            for (uint64_t t = 0; t < n_tokens; ++t) {
                lyrics += " theme" + std::to_string(m) + static_cast<char>('a' + rng.uniform_int(3));
            }
        }
        song.lyrics = lyrics;

        // acoustic features: per-dimension baselines at different scales;
        // acoustic-driven moods shift their designated pair of dimensions
        AcousticFeatures feats;
        for (size_t d = 0; d < AcousticFeatures::kCount; ++d) {
            double mu = 0.3 * static_cast<double>(d + 1);
            double sigma = 0.05 + 0.01 * static_cast<double>(d);
            feats.at(d) = mu + sigma * rng.normal();
        }
        for (size_t slot = 0; slot < acoustic_mood_slots.size(); ++slot) {
            size_t m = acoustic_mood_slots[slot];
            size_t d0 = (2 * slot) % AcousticFeatures::kCount;
            size_t d1 = (2 * slot + 1) % AcousticFeatures::kCount;
            double sigma0 = 0.05 + 0.01 * static_cast<double>(d0);
            double sigma1 = 0.05 + 0.01 * static_cast<double>(d1);
            feats.at(d0) += 3.0 * sigma0 * corpus.truth.affinity[s][m] * 4.0;
            feats.at(d1) += 3.0 * sigma1 * corpus.truth.affinity[s][m] * 4.0;
        }
        song.acoustic = feats;

        // embedding: noisy linear image of the indicator counts
        DenseVector emb;
        emb.values.resize(config.embedding_dim);
        for (size_t e = 0; e < config.embedding_dim; ++e) {
            double acc = 0;
            for (size_t k = 0; k < indicator_dims; ++k) {
                acc += projection[e * indicator_dims + k] * (indicator_counts[k] / 24.0);
            }
            emb.values[e] = acc + 0.05 * rng.normal();
        }
        corpus.embeddings.by_song[song.song_id] = std::move(emb);
        corpus.songs.push_back(std::move(song));
    }

    return corpus;
}

// ---------------------------------------------------------------------------
// Recovery validation

// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw DataError("spearman needs two equal-length series of at least 2");
    auto ranks = [](std::span<const double> v) {
        std::vector<size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return v[x] < v[y]; });
        std::vector<double> r(v.size());
        size_t i = 0;
        while (i < order.size()) {
            size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    std::vector<double> ra = ranks(a);
    std::vector<double> rb = ranks(b);
    double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double num = 0, da = 0, db = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da <= 0 || db <= 0) return 0.0;
    return num / std::sqrt(da * db);
}

struct RecoveryRow {
    std::string mood;
    double correlation = 0;
    size_t n_songs = 0;
    bool excluded = false;  // fewer than 3 scored songs
};

struct RecoveryReport {
    std::vector<RecoveryRow> per_mood;
    double median_correlation = 0;
    size_t n_excluded = 0;
};

// Per mood, the rank correlation between BNPMI and ground-truth affinity over
// songs that actually co-occurred with the mood (zero-joint rows carry no
// co-occurrence evidence and are skipped).
inline RecoveryReport validate_recovery(std::span<const AssociationScore> scores,
                                        const GroundTruth& truth) {
    std::map<std::string, size_t> song_index;
    for (size_t s = 0; s < truth.song_ids.size(); ++s) song_index[truth.song_ids[s]] = s;
    std::map<std::string, size_t> mood_index;
    for (size_t m = 0; m < truth.mood_terms.size(); ++m) mood_index[truth.mood_terms[m]] = m;

    std::vector<std::vector<double>> bnpmi_per_mood(truth.mood_terms.size());
    std::vector<std::vector<double>> affinity_per_mood(truth.mood_terms.size());
    for (const AssociationScore& row : scores) {
        if (row.pmi == kNegInf) continue;  // zero joint count
        auto sit = song_index.find(row.song_id);
        auto mit = mood_index.find(row.mood_term);
        if (sit == song_index.end() || mit == mood_index.end()) continue;
        bnpmi_per_mood[mit->second].push_back(row.bnpmi);
        affinity_per_mood[mit->second].push_back(truth.affinity[sit->second][mit->second]);
    }

    RecoveryReport report;
    std::vector<double> medians;
    for (size_t m = 0; m < truth.mood_terms.size(); ++m) {
        RecoveryRow row;
        row.mood = truth.mood_terms[m];
        row.n_songs = bnpmi_per_mood[m].size();
        if (row.n_songs < 3) {
            row.excluded = true;
            ++report.n_excluded;
        } else {
            row.correlation = spearman(bnpmi_per_mood[m], affinity_per_mood[m]);
            medians.push_back(row.correlation);
        }
        report.per_mood.push_back(std::move(row));
    }
    if (!medians.empty()) {
        std::sort(medians.begin(), medians.end());
        size_t n = medians.size();
        report.median_correlation =
            n % 2 == 1 ? medians[n / 2] : 0.5 * (medians[n / 2 - 1] + medians[n / 2]);
    }
    return report;
}

// Binary truth from the affinity matrix, for threshold sweeps over simulated
// data: positive when a song's affinity mass for the mood clears a multiple
// of the uniform share.
inline std::map<PairKey, TruthLabel> truth_from_affinity(const GroundTruth& truth,
                                                         double uniform_multiple = 1.5) {
    std::map<PairKey, TruthLabel> labels;
    double threshold = uniform_multiple / static_cast<double>(truth.mood_terms.size());
    for (size_t s = 0; s < truth.song_ids.size(); ++s) {
        for (size_t m = 0; m < truth.mood_terms.size(); ++m) {
            labels[{truth.song_ids[s], truth.mood_terms[m]}] =
                truth.affinity[s][m] >= threshold ? TruthLabel::Positive
                                                  : TruthLabel::Negative;
        }
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Serialization

inline void write_playlists_jsonl(std::ostream& out,
                                  std::span<const PlaylistRecord> playlists) {
    for (const PlaylistRecord& p : playlists) {
        nlohmann::json obj;
        obj["id"] = p.playlist_id;
        obj["title"] = p.title;
        if (p.description) obj["description"] = *p.description;
        obj["tracks"] = p.track_ids;
        out << obj.dump() << '\n';
    }
}

inline void write_songs_jsonl(std::ostream& out, std::span<const SongRecord> songs) {
    for (const SongRecord& s : songs) {
        nlohmann::json obj;
        obj["id"] = s.song_id;
        obj["lyrics"] = s.lyrics;
        if (s.acoustic) obj["acoustic"] = s.acoustic->to_json();
        out << obj.dump() << '\n';
    }
}

inline void write_ground_truth_csv(std::ostream& out, const GroundTruth& truth) {
    out << "song_id,mood,affinity,driver\n";
    for (size_t s = 0; s < truth.song_ids.size(); ++s) {
        for (size_t m = 0; m < truth.mood_terms.size(); ++m) {
            out << csv_quote(truth.song_ids[s]) << ',' << csv_quote(truth.mood_terms[m])
                << ',' << format_sig9(truth.affinity[s][m]) << ','
                << (truth.lyric_driven[m] ? "lyrics" : "acoustics") << '\n';
        }
    }
}

inline GroundTruth read_ground_truth_csv(std::istream& in) {
    GroundTruth truth;
    std::map<std::string, size_t> song_index;
    std::map<std::string, size_t> mood_index;
    std::vector<std::tuple<size_t, size_t, double>> cells;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "song_id,mood,affinity,driver")
                throw DataError("ground truth CSV: unexpected header");
            continue;
        }
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 4)
            throw DataError("ground truth CSV line " + std::to_string(line_no) + ": bad row");
        auto [sit, s_new] = song_index.try_emplace(fields[0], song_index.size());
        if (s_new) truth.song_ids.push_back(fields[0]);
        auto [mit, m_new] = mood_index.try_emplace(fields[1], mood_index.size());
        if (m_new) {
            truth.mood_terms.push_back(fields[1]);
            truth.lyric_driven.push_back(fields[3] == "lyrics");
        }
        cells.emplace_back(sit->second, mit->second, std::stod(fields[2]));
    }
    truth.affinity.assign(truth.song_ids.size(),
                          std::vector<double>(truth.mood_terms.size(), 0.0));
    for (const auto& [s, m, v] : cells) truth.affinity[s][m] = v;
    return truth;
}

}  // namespace moodassoc
