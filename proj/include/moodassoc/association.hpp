#pragma once

// Song-mood association scoring over playlist co-occurrence: PMI, normalized
// PMI, the per-mood Beta prior fit by method of moments, the Bayes-smoothed
// BNPMI score, and label binning.
//
// Probabilities are over playlists. With n = #playlists, M = #playlists
// containing mood m, S = #playlists containing song s, J = #playlists
// containing both:
//
//   PMI(s,m)  = ln( (J/n) / ((S/n)(M/n)) )
//   NPMI(s,m) = (ln p(s) - ln p(s|m)) / (ln p(m) + ln p(s|m)),  p(s|m) = J/M
//   BNPMI     = same form with p(s|m) replaced by the Beta posterior mean
//               (J + alpha) / (M + alpha + beta)
//
// NPMI is implemented in the conditional-probability form; it is identical to
// PMI / (-ln p(s,m)) and hits +1 when song and mood never occur apart, -1 (by
// the limit convention) when they never co-occur, and 0 under independence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "moodassoc/errors.hpp"
#include "moodassoc/ingest.hpp"
#include "moodassoc/io.hpp"
#include "moodassoc/lexicon.hpp"
#include "moodassoc/parallel.hpp"

namespace moodassoc {

// ---------------------------------------------------------------------------
// Counts

struct CooccurrenceCounts {
    uint64_t n_playlists = 0;
    std::unordered_map<std::string, uint64_t> song_playlists;
    std::unordered_map<std::string, uint64_t> mood_playlists;
    // mood term -> song id -> #playlists containing both
    std::unordered_map<std::string, std::unordered_map<std::string, uint64_t>> joint;

    uint64_t song_count(const std::string& song) const {
        auto it = song_playlists.find(song);
        return it == song_playlists.end() ? 0 : it->second;
    }

    uint64_t mood_count(const std::string& mood) const {
        auto it = mood_playlists.find(mood);
        return it == mood_playlists.end() ? 0 : it->second;
    }

    uint64_t joint_count(const std::string& song, const std::string& mood) const {
        auto mit = joint.find(mood);
        if (mit == joint.end()) return 0;
        auto sit = mit->second.find(song);
        return sit == mit->second.end() ? 0 : sit->second;
    }

    void validate() const {
        for (const auto& [song, n] : song_playlists) {
            if (n > n_playlists)
                throw InternalError("song count exceeds playlist count: " + song);
        }
        for (const auto& [mood, n] : mood_playlists) {
            if (n > n_playlists)
                throw InternalError("mood count exceeds playlist count: " + mood);
        }
        for (const auto& [mood, songs] : joint) {
            if (mood_playlists.find(mood) == mood_playlists.end())
                throw InternalError("joint references unknown mood: " + mood);
            for (const auto& [song, n] : songs) {
                auto sit = song_playlists.find(song);
                if (sit == song_playlists.end())
                    throw InternalError("joint references unknown song: " + song);
                if (n > std::min(sit->second, mood_playlists.at(mood)))
                    throw InternalError("joint count exceeds a marginal for (" + song +
                                        ", " + mood + ")");
            }
        }
    }
};

// Single pass over playlists. Within one playlist a track or a mood counts
// once, no matter how often it appears; probabilities are per playlist.
inline CooccurrenceCounts count(std::span<const PlaylistRecord> playlists,
                                const MoodLexicon& lexicon) {
    CooccurrenceCounts counts;
    std::unordered_set<std::string> unique_tracks;
    for (const PlaylistRecord& playlist : playlists) {
        ++counts.n_playlists;
        unique_tracks.clear();
        for (const std::string& track : playlist.track_ids) unique_tracks.insert(track);
        std::vector<const Mood*> moods = match_moods(playlist, lexicon);
        for (const std::string& track : unique_tracks) {
            ++counts.song_playlists[track];
        }
        for (const Mood* mood : moods) {
            ++counts.mood_playlists[mood->term];
            auto& row = counts.joint[mood->term];
            for (const std::string& track : unique_tracks) ++row[track];
        }
    }
    return counts;
}

// Fieldwise sum; commutative monoid with the all-zero counts as identity, so
// sharded counting merges in any order.
inline CooccurrenceCounts merge_counts(CooccurrenceCounts a, const CooccurrenceCounts& b) {
    a.n_playlists += b.n_playlists;
    for (const auto& [song, n] : b.song_playlists) a.song_playlists[song] += n;
    for (const auto& [mood, n] : b.mood_playlists) a.mood_playlists[mood] += n;
    for (const auto& [mood, songs] : b.joint) {
        auto& row = a.joint[mood];
        for (const auto& [song, n] : songs) row[song] += n;
    }
    return a;
}

// ---------------------------------------------------------------------------
// PMI / NPMI

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace detail {

inline void require_marginals(const CooccurrenceCounts& counts, const std::string& song,
                              const std::string& mood) {
    if (counts.n_playlists == 0) throw DataError("no playlists counted");
    if (counts.song_count(song) == 0)
        throw DataError("undefined marginal: song \"" + song + "\" has zero count");
    if (counts.mood_count(mood) == 0)
        throw DataError("undefined marginal: mood \"" + mood + "\" has zero count");
}

}  // namespace detail

// Natural log. Returns -inf when the pair never co-occurs.
inline double pmi(const CooccurrenceCounts& counts, const std::string& song,
                  const std::string& mood) {
    detail::require_marginals(counts, song, mood);
    uint64_t j = counts.joint_count(song, mood);
    if (j == 0) return kNegInf;
    double n = static_cast<double>(counts.n_playlists);
    double p_joint = static_cast<double>(j) / n;
    double p_song = static_cast<double>(counts.song_count(song)) / n;
    double p_mood = static_cast<double>(counts.mood_count(mood)) / n;
    return std::log(p_joint / (p_song * p_mood));
}

// Conditional-probability form; equal to PMI / (-ln p(s,m)). -1 when the pair
// never co-occurs (limit convention), +1 when song and mood only occur
// together.
inline double npmi(const CooccurrenceCounts& counts, const std::string& song,
                   const std::string& mood) {
    detail::require_marginals(counts, song, mood);
    uint64_t j = counts.joint_count(song, mood);
    if (j == 0) return -1.0;
    double n = static_cast<double>(counts.n_playlists);
    double p_song = static_cast<double>(counts.song_count(song)) / n;
    double p_mood = static_cast<double>(counts.mood_count(mood)) / n;
    double p_cond = static_cast<double>(j) / static_cast<double>(counts.mood_count(mood));
    double num = std::log(p_song) - std::log(p_cond);
    double den = std::log(p_mood) + std::log(p_cond);
    if (den == 0.0) return 0.0;  // p(s,m) = 1: exact independence at probability 1
    return num / den;
}

// ---------------------------------------------------------------------------
// Beta prior by method of moments

struct BetaMoments {
    double p_bar = 0;
    double v_bar = 0;
    double alpha = 1;
    double beta = 1;
    bool fallback = false;
};

// Matches sample mean and unbiased sample variance of the per-song empirical
// conditionals to Beta(alpha, beta). Degenerate inputs (zero variance, mean
// at 0 or 1, or moments implying a non-positive shape) fall back to the
// uniform Beta(1,1), flagged.
inline BetaMoments fit_beta_moments(std::span<const double> p) {
    if (p.size() < 2) throw DataError("beta moment fit needs at least 2 values");
    BetaMoments m;
    double n = static_cast<double>(p.size());
    double sum = 0;
    for (double v : p) sum += v;
    m.p_bar = sum / n;
    double ss = 0;
    for (double v : p) ss += (v - m.p_bar) * (v - m.p_bar);
    m.v_bar = ss / (n - 1.0);
    double spread = m.p_bar * (1.0 - m.p_bar);
    if (m.v_bar <= 0.0 || m.p_bar <= 0.0 || m.p_bar >= 1.0 || m.v_bar >= spread) {
        m.alpha = 1.0;
        m.beta = 1.0;
        m.fallback = true;
        return m;
    }
    double scale = spread / m.v_bar - 1.0;
    m.alpha = m.p_bar * scale;
    m.beta = (1.0 - m.p_bar) * scale;
    return m;
}

struct BetaPrior {
    std::string mood;
    double p_bar = 0;
    double v_bar = 0;
    double alpha_hat = 1;
    double beta_hat = 1;
    uint64_t n_songs_used = 0;
    bool fallback = false;
};

// The per-song conditionals p_{s,m} = J(s,m)/M are averaged over the whole
// song universe, zero entries included; the universe is an explicit parameter
// so alternatives stay testable.
inline BetaPrior fit_beta_prior(const CooccurrenceCounts& counts, const std::string& mood,
                                std::span<const std::string> song_universe) {
    uint64_t mood_n = counts.mood_count(mood);
    if (mood_n == 0) throw DataError("cannot fit prior: mood \"" + mood + "\" has zero count");
    if (song_universe.size() < 2)
        throw DataError("cannot fit prior: song universe must have at least 2 songs");
    std::vector<double> p;
    p.reserve(song_universe.size());
    double denom = static_cast<double>(mood_n);
    for (const std::string& song : song_universe) {
        p.push_back(static_cast<double>(counts.joint_count(song, mood)) / denom);
    }
    BetaMoments m = fit_beta_moments(p);
    BetaPrior prior;
    prior.mood = mood;
    prior.p_bar = m.p_bar;
    prior.v_bar = m.v_bar;
    prior.alpha_hat = m.alpha;
    prior.beta_hat = m.beta;
    prior.n_songs_used = song_universe.size();
    prior.fallback = m.fallback;
    return prior;
}

// Posterior mean estimate of p(s|m); strictly positive even at zero joint
// count.
inline double posterior_prob(const CooccurrenceCounts& counts, const BetaPrior& prior,
                             const std::string& song, const std::string& mood) {
    uint64_t mood_n = counts.mood_count(mood);
    if (mood_n == 0) throw DataError("posterior undefined: mood \"" + mood + "\" has zero count");
    uint64_t j = counts.joint_count(song, mood);
    return (static_cast<double>(j) + prior.alpha_hat) /
           (static_cast<double>(mood_n) + prior.alpha_hat + prior.beta_hat);
}

// NPMI with the smoothed conditional. Finite for every pair with nonzero
// marginals. Result is clamped to [-1,1]; any clamp beyond 1e-6 is surfaced
// through clamp_excess so batch callers can report it.
inline double bnpmi(const CooccurrenceCounts& counts, const BetaPrior& prior,
                    const std::string& song, const std::string& mood,
                    double* clamp_excess = nullptr) {
    detail::require_marginals(counts, song, mood);
    double n = static_cast<double>(counts.n_playlists);
    double p_song = static_cast<double>(counts.song_count(song)) / n;
    double p_mood = static_cast<double>(counts.mood_count(mood)) / n;
    double p_cond = posterior_prob(counts, prior, song, mood);
    double num = std::log(p_song) - std::log(p_cond);
    double den = std::log(p_mood) + std::log(p_cond);
    if (std::abs(den) <= 1e-12) {
        throw DataError("degenerate BNPMI denominator for (" + song + ", " + mood + ")");
    }
    double v = num / den;
    double clamped = std::clamp(v, -1.0, 1.0);
    if (clamp_excess) *clamp_excess = std::abs(v - clamped);
    return clamped;
}

// ---------------------------------------------------------------------------
// Binning

enum class AssociationLabel { Negative, Neutral, Positive };

inline std::string to_string(AssociationLabel label) {
    switch (label) {
        case AssociationLabel::Negative: return "Negative";
        case AssociationLabel::Neutral: return "Neutral";
        case AssociationLabel::Positive: return "Positive";
    }
    throw InternalError("unknown association label");
}

inline AssociationLabel parse_association_label(const std::string& s) {
    if (s == "Negative") return AssociationLabel::Negative;
    if (s == "Neutral") return AssociationLabel::Neutral;
    if (s == "Positive") return AssociationLabel::Positive;
    throw DataError("unknown association label: \"" + s + "\"");
}

struct BinningConfig {
    double tau = 0.1;

    void validate() const {
        if (!(tau > 0.0 && tau < 1.0))
            throw ConfigError("tau must be in (0,1), got " + std::to_string(tau));
    }
};

// Closed intervals on the non-neutral sides: score >= tau is Positive,
// score <= -tau is Negative.
inline AssociationLabel bin_label(double score, const BinningConfig& config) {
    config.validate();
    if (score >= config.tau) return AssociationLabel::Positive;
    if (score <= -config.tau) return AssociationLabel::Negative;
    return AssociationLabel::Neutral;
}

// ---------------------------------------------------------------------------
// Batch scoring

struct AssociationScore {
    std::string song_id;
    std::string mood_term;
    double pmi = 0;
    double npmi = 0;
    double bnpmi = 0;
    AssociationLabel label = AssociationLabel::Neutral;
    bool prior_fallback = false;
};

struct ScoreDiagnostics {
    // pairs whose raw BNPMI exceeded [-1,1] by more than 1e-6 before clamping
    std::vector<std::string> clamped_pairs;
    // pairs skipped because the BNPMI denominator was degenerate
    std::vector<std::string> degenerate_pairs;
};

struct ScoreOptions {
    BinningConfig binning;
    bool include_zero_joint = false;
    int threads = 1;
};

// One row per (song, mood) pair with nonzero joint count, plus optionally all
// zero-joint pairs. Priors are fit once per mood over the supplied universe
// and reused. Output is sorted by (song_id, mood_term) so serialization is
// byte-stable run to run.
inline std::vector<AssociationScore> score_all(const CooccurrenceCounts& counts,
                                               std::span<const std::string> song_universe,
                                               const MoodLexicon& lexicon,
                                               const ScoreOptions& options = {},
                                               ScoreDiagnostics* diagnostics = nullptr) {
    options.binning.validate();
    std::vector<std::string> universe(song_universe.begin(), song_universe.end());
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

    std::vector<const Mood*> moods;
    for (const Mood& mood : lexicon.moods) {
        if (counts.mood_count(mood.term) > 0) moods.push_back(&mood);
    }

    std::vector<std::vector<AssociationScore>> per_mood(moods.size());
    std::vector<ScoreDiagnostics> per_mood_diag(moods.size());

    parallel_for(moods.size(), options.threads, [&](size_t mi) {
        const std::string& mood = moods[mi]->term;
        BetaPrior prior = fit_beta_prior(counts, mood, universe);
        auto joint_row = counts.joint.find(mood);
        for (const std::string& song : universe) {
            if (counts.song_count(song) == 0) continue;
            uint64_t j = 0;
            if (joint_row != counts.joint.end()) {
                auto it = joint_row->second.find(song);
                if (it != joint_row->second.end()) j = it->second;
            }
            if (j == 0 && !options.include_zero_joint) continue;
            AssociationScore row;
            row.song_id = song;
            row.mood_term = mood;
            row.prior_fallback = prior.fallback;
            row.pmi = pmi(counts, song, mood);
            row.npmi = npmi(counts, song, mood);
            double excess = 0;
            try {
                row.bnpmi = bnpmi(counts, prior, song, mood, &excess);
            } catch (const DataError&) {
                per_mood_diag[mi].degenerate_pairs.push_back("(" + song + ", " + mood + ")");
                continue;
            }
            if (excess > 1e-6) {
                per_mood_diag[mi].clamped_pairs.push_back("(" + song + ", " + mood + ")");
            }
            row.label = bin_label(row.bnpmi, options.binning);
            per_mood[mi].push_back(std::move(row));
        }
    });

    std::vector<AssociationScore> all;
    for (auto& rows : per_mood) {
        all.insert(all.end(), std::make_move_iterator(rows.begin()),
                   std::make_move_iterator(rows.end()));
    }
    std::sort(all.begin(), all.end(), [](const AssociationScore& a, const AssociationScore& b) {
        if (a.song_id != b.song_id) return a.song_id < b.song_id;
        return a.mood_term < b.mood_term;
    });
    if (diagnostics) {
        for (auto& d : per_mood_diag) {
            diagnostics->clamped_pairs.insert(diagnostics->clamped_pairs.end(),
                                              d.clamped_pairs.begin(), d.clamped_pairs.end());
            diagnostics->degenerate_pairs.insert(diagnostics->degenerate_pairs.end(),
                                                 d.degenerate_pairs.begin(),
                                                 d.degenerate_pairs.end());
        }
    }
    return all;
}

// ---------------------------------------------------------------------------
// Distribution summaries

struct DistributionStats {
    double mean = 0;
    double stddev = 0;  // unbiased
    size_t n = 0;
    std::vector<uint64_t> histogram;  // fixed-width bins over [-1,1]
};

inline DistributionStats distribution_stats(std::span<const double> scores, size_t bins = 40) {
    if (scores.size() < 2) throw DataError("distribution stats need at least 2 scores");
    if (bins == 0) throw ConfigError("histogram needs at least 1 bin");
    DistributionStats stats;
    stats.n = scores.size();
    double sum = 0;
    for (double v : scores) sum += v;
    stats.mean = sum / static_cast<double>(scores.size());
    double ss = 0;
    for (double v : scores) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(scores.size() - 1));
    stats.histogram.assign(bins, 0);
    for (double v : scores) {
        double t = (std::clamp(v, -1.0, 1.0) + 1.0) / 2.0;  // [0,1]
        size_t idx = std::min(bins - 1, static_cast<size_t>(t * static_cast<double>(bins)));
        ++stats.histogram[idx];
    }
    return stats;
}

// Moods ranked by how many songs they are positively associated with.
inline std::vector<std::pair<std::string, uint64_t>> top_positive_moods(
    std::span<const AssociationScore> scores, size_t k) {
    std::map<std::string, uint64_t> counts;
    for (const AssociationScore& s : scores) {
        if (s.label == AssociationLabel::Positive) ++counts[s.mood_term];
    }
    std::vector<std::pair<std::string, uint64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

// ---------------------------------------------------------------------------
// Serialization

// Scores CSV: reals at 9 significant digits; -inf PMI is the explicit string
// "-inf", never a large negative float.
inline void write_scores_csv(std::ostream& out, std::span<const AssociationScore> scores) {
    out << "song_id,mood,pmi,npmi,bnpmi,label,prior_fallback\n";
    for (const AssociationScore& s : scores) {
        out << csv_quote(s.song_id) << ',' << csv_quote(s.mood_term) << ',';
        if (s.pmi == kNegInf) {
            out << "-inf";
        } else {
            out << format_sig9(s.pmi);
        }
        out << ',' << format_sig9(s.npmi) << ',' << format_sig9(s.bnpmi) << ','
            << to_string(s.label) << ',' << (s.prior_fallback ? "true" : "false") << '\n';
    }
}

inline std::vector<AssociationScore> read_scores_csv(std::istream& in) {
    std::vector<AssociationScore> scores;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "song_id,mood,pmi,npmi,bnpmi,label,prior_fallback")
                throw DataError("scores CSV: unexpected header");
            continue;
        }
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 7)
            throw DataError("scores CSV line " + std::to_string(line_no) + ": bad row");
        AssociationScore s;
        s.song_id = fields[0];
        s.mood_term = fields[1];
        s.pmi = fields[2] == "-inf" ? kNegInf : std::stod(fields[2]);
        s.npmi = std::stod(fields[3]);
        s.bnpmi = std::stod(fields[4]);
        s.label = parse_association_label(fields[5]);
        s.prior_fallback = fields[6] == "true";
        scores.push_back(std::move(s));
    }
    return scores;
}

inline constexpr int kCountsSnapshotVersion = 1;

// Versioned JSONL sections (meta, song, mood, joint), each sorted, so
// counting pipelines can checkpoint and resume deterministically.
inline void write_counts_snapshot(std::ostream& out, const CooccurrenceCounts& counts) {
    nlohmann::json meta;
    meta["section"] = "meta";
    meta["version"] = kCountsSnapshotVersion;
    meta["n_playlists"] = counts.n_playlists;
    out << meta.dump() << '\n';

    std::vector<std::pair<std::string, uint64_t>> songs(counts.song_playlists.begin(),
                                                        counts.song_playlists.end());
    std::sort(songs.begin(), songs.end());
    for (const auto& [id, n] : songs) {
        nlohmann::json row;
        row["section"] = "song";
        row["id"] = id;
        row["n"] = n;
        out << row.dump() << '\n';
    }

    std::vector<std::pair<std::string, uint64_t>> moods(counts.mood_playlists.begin(),
                                                        counts.mood_playlists.end());
    std::sort(moods.begin(), moods.end());
    for (const auto& [term, n] : moods) {
        nlohmann::json row;
        row["section"] = "mood";
        row["term"] = term;
        row["n"] = n;
        out << row.dump() << '\n';
    }

    std::vector<std::tuple<std::string, std::string, uint64_t>> joints;
    for (const auto& [mood, row] : counts.joint) {
        for (const auto& [song, n] : row) joints.emplace_back(mood, song, n);
    }
    std::sort(joints.begin(), joints.end());
    for (const auto& [mood, song, n] : joints) {
        nlohmann::json row;
        row["section"] = "joint";
        row["mood"] = mood;
        row["song"] = song;
        row["n"] = n;
        out << row.dump() << '\n';
    }
}

inline CooccurrenceCounts read_counts_snapshot(std::istream& in) {
    CooccurrenceCounts counts;
    std::string line;
    size_t line_no = 0;
    bool meta_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object() || !row.contains("section")) {
            throw DataError("counts snapshot line " + std::to_string(line_no) + ": bad row");
        }
        std::string section = row["section"].get<std::string>();
        if (section == "meta") {
            if (row.value("version", -1) != kCountsSnapshotVersion)
                throw DataError("counts snapshot: unsupported version");
            counts.n_playlists = row.at("n_playlists").get<uint64_t>();
            meta_seen = true;
        } else if (section == "song") {
            counts.song_playlists[row.at("id").get<std::string>()] =
                row.at("n").get<uint64_t>();
        } else if (section == "mood") {
            counts.mood_playlists[row.at("term").get<std::string>()] =
                row.at("n").get<uint64_t>();
        } else if (section == "joint") {
            counts.joint[row.at("mood").get<std::string>()]
                        [row.at("song").get<std::string>()] = row.at("n").get<uint64_t>();
        } else {
            throw DataError("counts snapshot line " + std::to_string(line_no) +
                            ": unknown section \"" + section + "\"");
        }
    }
    if (!meta_seen) throw DataError("counts snapshot: missing meta section");
    counts.validate();
    return counts;
}

}  // namespace moodassoc
