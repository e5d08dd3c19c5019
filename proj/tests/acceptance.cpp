// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "moodassoc/annotation.hpp"
#include "moodassoc/association.hpp"
#include "moodassoc/evaluation.hpp"
#include "moodassoc/features.hpp"
#include "moodassoc/models.hpp"
#include "moodassoc/pipeline.hpp"
#include "moodassoc/simulate.hpp"

using namespace moodassoc;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Failure(msg);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// shared corpus helpers

struct CountsTable {
    CooccurrenceCounts counts;
    std::vector<std::string> songs;
    std::vector<std::string> moods;
};

CountsTable random_counts_table(Rng& rng) {
    CountsTable t;
    uint64_t n = 20 + rng.uniform_int(500);
    t.counts.n_playlists = n;
    size_t n_songs = 2 + rng.uniform_int(6);
    size_t n_moods = 1 + rng.uniform_int(4);
    for (size_t s = 0; s < n_songs; ++s) {
        std::string id = "s" + std::to_string(s);
        t.songs.push_back(id);
        t.counts.song_playlists[id] = 1 + rng.uniform_int(n - 1);
    }
    for (size_t m = 0; m < n_moods; ++m) {
        std::string term = "m" + std::to_string(m);
        t.moods.push_back(term);
        t.counts.mood_playlists[term] = 1 + rng.uniform_int(n - 1);
        for (const std::string& id : t.songs) {
            uint64_t S = t.counts.song_playlists[id];
            uint64_t M = t.counts.mood_playlists[term];
            uint64_t lo = S + M > n ? S + M - n : 0;
            uint64_t hi = std::min(S, M);
            uint64_t j = lo + rng.uniform_int(hi - lo + 1);
            if (j > 0) t.counts.joint[term][id] = j;
        }
    }
    t.counts.validate();
    return t;
}

double f1_of_counts(uint64_t tp, uint64_t fp, uint64_t fn) {
    double p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    double r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

// ---------------------------------------------------------------------------
// criterion 1: metric arithmetic against the published confusion row

void criterion_metric_arithmetic() {
    ConfusionCounts c;
    c.tp = 90;
    c.fp = 34;
    c.fn = 42;
    c.tn = 102;
    Metrics m = metrics(c);
    require(std::abs(m.precision * 100 - 72.58) <= 0.01,
            "precision " + fmt(m.precision * 100) + " != 72.58 +- 0.01");
    require(std::abs(m.recall * 100 - 68.18) <= 0.01,
            "recall " + fmt(m.recall * 100) + " != 68.18 +- 0.01");
    require(std::abs(m.f1 * 100 - 70.31) <= 0.01,
            "f1 " + fmt(m.f1 * 100) + " != 70.31 +- 0.01");
}

// ---------------------------------------------------------------------------
// criteria 2 + 3: NPMI endpoints, bounds, and formulation equivalence

// each round draws from its own counter-based substream, so criteria 2 and 3
// iterate identical corpora
CountsTable npmi_corpus_for_round(int round) {
    Rng rng(424242, "acceptance-npmi", static_cast<uint64_t>(round));
    return random_counts_table(rng);
}

void criterion_npmi_bounds() {
    for (int round = 0; round < 1000; ++round) {
        CountsTable t = npmi_corpus_for_round(round);
        for (const std::string& m : t.moods) {
            for (const std::string& s : t.songs) {
                uint64_t j = t.counts.joint_count(s, m);
                if (j == 0) {
                    require(npmi(t.counts, s, m) == -1.0, "zero joint must give -1");
                    continue;
                }
                double v = npmi(t.counts, s, m);
                require(v >= -1.0 - 1e-9 && v <= 1.0 + 1e-9,
                        "NPMI out of bounds: " + fmt(v));
            }
        }
        Rng extras(424242, "acceptance-npmi-endpoints", static_cast<uint64_t>(round));
        // exact independence: n = a*b, song in a, mood in b, joint 1
        uint64_t a = 2 + extras.uniform_int(39);
        uint64_t b = 2 + extras.uniform_int(39);
        CooccurrenceCounts indep;
        indep.n_playlists = a * b;
        indep.song_playlists["s"] = a;
        indep.mood_playlists["m"] = b;
        indep.joint["m"]["s"] = 1;
        require(std::abs(npmi(indep, "s", "m")) < 1e-9,
                "independence NPMI " + fmt(npmi(indep, "s", "m")));

        // perfect co-occurrence: never apart
        uint64_t n = 5 + extras.uniform_int(200);
        uint64_t k = 1 + extras.uniform_int(n - 1);
        CooccurrenceCounts perfect;
        perfect.n_playlists = n;
        perfect.song_playlists["s"] = k;
        perfect.mood_playlists["m"] = k;
        perfect.joint["m"]["s"] = k;
        require(std::abs(npmi(perfect, "s", "m") - 1.0) <= 1e-9,
                "perfect co-occurrence NPMI " + fmt(npmi(perfect, "s", "m")));
    }
}

void criterion_formulation_equivalence() {
    for (int round = 0; round < 1000; ++round) {
        CountsTable t = npmi_corpus_for_round(round);  // the criterion 2 corpora
        for (const std::string& m : t.moods) {
            for (const std::string& s : t.songs) {
                uint64_t j = t.counts.joint_count(s, m);
                if (j == 0) continue;
                double p_joint =
                    static_cast<double>(j) / static_cast<double>(t.counts.n_playlists);
                double alt = pmi(t.counts, s, m) / -std::log(p_joint);
                double direct = npmi(t.counts, s, m);
                require(std::abs(direct - alt) <= 1e-12,
                        "equivalence gap " + fmt(std::abs(direct - alt)));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 4: method-of-moments brute-force oracle

void criterion_method_of_moments() {
    Rng rng(777, "acceptance-mom");
    for (int round = 0; round < 20; ++round) {
        // counts with an exactly representable conditional vector
        uint64_t M = 5 + rng.uniform_int(46);
        size_t n_songs = 2 + rng.uniform_int(30);
        CooccurrenceCounts counts;
        counts.n_playlists = 10000;
        counts.mood_playlists["m"] = M;
        std::vector<std::string> universe;
        std::vector<double> p;
        for (size_t s = 0; s < n_songs; ++s) {
            std::string id = "s" + std::to_string(s);
            universe.push_back(id);
            uint64_t j = rng.uniform_int(M + 1);
            if (round == 0) j = 3;            // degenerate: zero variance
            if (round == 1) j = s % 2 ? M : 0;  // degenerate: moments inconsistent
            counts.song_playlists[id] = std::max<uint64_t>(j, 1);
            if (j > 0) counts.joint["m"][id] = j;
            p.push_back(static_cast<double>(j) / static_cast<double>(M));
        }
        BetaPrior prior = fit_beta_prior(counts, "m", universe);

        // brute force, straight from the stated formulas
        double n = static_cast<double>(p.size());
        double p_bar = 0;
        for (double v : p) p_bar += v;
        p_bar /= n;
        double v_bar = 0;
        for (double v : p) v_bar += (v - p_bar) * (v - p_bar);
        v_bar /= (n - 1.0);
        require(std::abs(prior.p_bar - p_bar) <= 1e-9, "p_bar mismatch");
        require(std::abs(prior.v_bar - v_bar) <= 1e-9, "v_bar mismatch");
        bool degenerate =
            v_bar <= 0 || p_bar <= 0 || p_bar >= 1 || v_bar >= p_bar * (1 - p_bar);
        require(prior.fallback == degenerate, "fallback flag mismatch");
        if (!degenerate) {
            double scale = p_bar * (1 - p_bar) / v_bar - 1;
            require(std::abs(prior.alpha_hat - p_bar * scale) <= 1e-9, "alpha mismatch");
            require(std::abs(prior.beta_hat - (1 - p_bar) * scale) <= 1e-9, "beta mismatch");
        } else {
            require(prior.alpha_hat == 1.0 && prior.beta_hat == 1.0,
                    "fallback prior must be Beta(1,1)");
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 5: BNPMI -> NPMI consistency under count scaling

void criterion_bnpmi_consistency() {
    Rng rng(31313, "acceptance-scale");
    CountsTable base = random_counts_table(rng);
    double prev = 1e300;
    double at_1000 = 0;
    for (uint64_t k : {1ULL, 10ULL, 100ULL, 1000ULL}) {
        CooccurrenceCounts scaled;
        scaled.n_playlists = base.counts.n_playlists * k;
        for (auto& [s, c] : base.counts.song_playlists) scaled.song_playlists[s] = c * k;
        for (auto& [m, c] : base.counts.mood_playlists) scaled.mood_playlists[m] = c * k;
        for (auto& [m, row] : base.counts.joint) {
            for (auto& [s, c] : row) scaled.joint[m][s] = c * k;
        }
        double max_gap = 0;
        for (const std::string& m : base.moods) {
            BetaPrior prior = fit_beta_prior(scaled, m, base.songs);
            for (const std::string& s : base.songs) {
                if (scaled.joint_count(s, m) == 0) continue;
                double gap = std::abs(bnpmi(scaled, prior, s, m) - npmi(scaled, s, m));
                max_gap = std::max(max_gap, gap);
            }
        }
        require(max_gap <= prev + 1e-12,
                "max gap not decreasing: " + fmt(max_gap) + " after " + fmt(prev));
        prev = max_gap;
        if (k == 1000) at_1000 = max_gap;
    }
    require(at_1000 < 0.01, "max |BNPMI-NPMI| at K=1000 is " + fmt(at_1000));
}

// ---------------------------------------------------------------------------
// criterion 6: directional shrinkage on simulator corpora

void criterion_shrinkage() {
    size_t checked = 0;
    for (uint64_t seed : {101ULL, 102ULL, 103ULL}) {
        SimConfig cfg;
        cfg.n_songs = 150;
        cfg.n_moods = 8;
        cfg.n_playlists = 3000;
        cfg.seed = seed;
        SimulatedCorpus corpus = generate(cfg);
        CooccurrenceCounts counts = count(corpus.playlists, corpus.lexicon);
        for (const std::string& mood : corpus.truth.mood_terms) {
            if (counts.mood_count(mood) == 0) continue;
            BetaPrior prior = fit_beta_prior(counts, mood, corpus.truth.song_ids);
            if (prior.fallback) continue;
            double prior_mean = prior.alpha_hat / (prior.alpha_hat + prior.beta_hat);
            for (const std::string& song : corpus.truth.song_ids) {
                if (counts.joint_count(song, mood) != 1) continue;
                if (counts.song_count(song) == 0) continue;
                double empirical = 1.0 / static_cast<double>(counts.mood_count(mood));
                if (std::abs(prior_mean - empirical) < 1e-12) continue;
                double smoothed = bnpmi(counts, prior, song, mood);
                double raw = npmi(counts, song, mood);
                bool ok = prior_mean > empirical ? smoothed > raw : smoothed < raw;
                require(ok, "shrinkage violated for (" + song + ", " + mood + ")");
                ++checked;
            }
        }
    }
    require(checked >= 100, "too few joint-count-1 pairs exercised: " +
                                std::to_string(checked));
}

// ---------------------------------------------------------------------------
// criterion 7: simulator recovery at the default configuration

void criterion_simulator_recovery() {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        SimConfig cfg;  // defaults: 200 songs x 10 moods x 50000 playlists
        cfg.seed = seed;
        SimulatedCorpus corpus = generate(cfg);
        CooccurrenceCounts counts = count(corpus.playlists, corpus.lexicon);
        ScoreOptions options;
        options.threads = 2;
        auto scores = score_all(counts, corpus.truth.song_ids, corpus.lexicon, options);
        RecoveryReport report = validate_recovery(scores, corpus.truth);
        require(report.median_correlation >= 0.8,
                "seed " + std::to_string(seed) + ": median correlation " +
                    fmt(report.median_correlation) + " < 0.8");
    }
}

// ---------------------------------------------------------------------------
// criterion 8: classifier correctness

void criterion_classifiers() {
    // gradient checks on 10 random parameter points each
    Rng rng(909, "acceptance-grad");
    auto max_rel_err = [](auto&& objective, std::vector<double> theta) {
        std::vector<double> grad;
        objective(theta, &grad);
        double worst = 0;
        const double h = 1e-5;
        for (size_t i = 0; i < theta.size(); ++i) {
            std::vector<double> plus = theta, minus = theta;
            plus[i] += h;
            minus[i] -= h;
            double numeric = (objective(plus, nullptr) - objective(minus, nullptr)) / (2 * h);
            double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
            worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
        }
        return worst;
    };

    for (int point = 0; point < 10; ++point) {
        size_t d = 2 + rng.uniform_int(5);
        size_t n = 5 + rng.uniform_int(10);
        std::vector<DenseVector> X;
        std::vector<int> y;
        for (size_t i = 0; i < n; ++i) {
            DenseVector v;
            for (size_t k = 0; k < d; ++k) v.values.push_back(rng.normal());
            X.push_back(std::move(v));
            y.push_back(static_cast<int>(rng.uniform_int(2)));
        }
        std::vector<double> sw(n, 1.0);
        std::vector<double> theta(d + 1);
        for (double& t : theta) t = rng.normal();
        double err = max_rel_err(
            [&](const std::vector<double>& th, std::vector<double>* g) {
                return logistic_objective<DenseVector>(X, y, sw, th, 1e-3, g);
            },
            theta);
        require(err < 1e-4, "logistic gradient error " + fmt(err));

        size_t ed = 2 + rng.uniform_int(3);
        size_t hidden = 1 + rng.uniform_int(3);
        std::vector<DenseVector> emb;
        for (size_t i = 0; i < n; ++i) {
            DenseVector e;
            for (size_t k = 0; k < ed; ++k) e.values.push_back(rng.normal());
            emb.push_back(std::move(e));
        }
        HybridShape shape{d, ed, hidden};
        std::vector<double> htheta(shape.total());
        for (double& t : htheta) t = 0.5 * rng.normal();
        double herr = max_rel_err(
            [&](const std::vector<double>& th, std::vector<double>* g) {
                return hybrid_objective(emb, X, y, sw, shape, th, 1e-3, g);
            },
            htheta);
        require(herr < 1e-4, "hybrid gradient error " + fmt(herr));
    }

    // separable toy data trains to F1 = 1.0
    std::vector<DenseVector> X;
    std::vector<int> y;
    Rng toy(11, "toy");
    for (int i = 0; i < 50; ++i) {
        double cls = i % 2 ? 1.0 : -1.0;
        DenseVector v;
        v.values = {cls * (1.5 + toy.uniform()), toy.normal()};
        X.push_back(std::move(v));
        y.push_back(i % 2);
    }
    TrainConfig config;
    config.l2_lambda = 1e-6;
    config.max_iters = 2000;
    LogisticModel model = train_logistic<DenseVector>(X, y, config, "toy");
    uint64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < X.size(); ++i) {
        bool pos = classify(predict(model, X[i])) == Decision::Positive;
        if (pos && y[i]) ++tp;
        if (pos && !y[i]) ++fp;
        if (!pos && y[i]) ++fn;
    }
    double f1 = f1_of_counts(tp, fp, fn);
    require(f1 == 1.0, "separable toy train F1 " + fmt(f1));

    // large lambda drives the weights to zero
    TrainConfig heavy;
    heavy.l2_lambda = 1e6;
    heavy.max_iters = 2000;
    LogisticModel shrunk = train_logistic<DenseVector>(X, y, heavy);
    double norm = 0;
    for (double w : shrunk.weights) norm += w * w;
    require(std::sqrt(norm) < 1e-3, "||w|| = " + fmt(std::sqrt(norm)) + " under heavy L2");
}

// ---------------------------------------------------------------------------
// criterion 9: directional echo of the per-mood modality comparison

struct MoodScores {
    double bow = 0;
    double acoustic = 0;
    double hybrid_bow = 0;
    double hybrid_embed = 0;
};

MoodScores echo_scores_for_mood(const SimulatedCorpus& corpus,
                                std::span<const AssociationScore> scores,
                                const CorpusSplit& split, const std::string& mood,
                                const Vocabulary& vocab, const Scaler& scaler,
                                uint64_t seed) {
    std::map<std::string, const SongRecord*> by_id;
    for (const SongRecord& s : corpus.songs) by_id[s.song_id] = &s;

    struct Pair {
        const SongRecord* song;
        int label;
        bool train;
    };
    std::vector<Pair> pairs;
    for (const AssociationScore& s : scores) {
        if (s.mood_term != mood) continue;
        if (s.label == AssociationLabel::Neutral) continue;
        auto it = by_id.find(s.song_id);
        if (it == by_id.end()) continue;
        pairs.push_back({it->second, s.label == AssociationLabel::Positive ? 1 : 0,
                         split.is_train(s.song_id)});
    }

    std::vector<SparseVector> bow_train, bow_test, hb_train, hb_test;
    std::vector<DenseVector> ac_train, ac_test, emb_train, emb_test;
    std::vector<DenseVector> ac_for_emb_train, ac_for_emb_test;
    std::vector<int> y_train, y_test, y_emb_train, y_emb_test;
    for (const Pair& p : pairs) {
        SparseVector lyric = tfidf_transform(vocab, p.song->lyrics);
        DenseVector raw;
        auto arr = p.song->acoustic->as_array();
        raw.values.assign(arr.begin(), arr.end());
        DenseVector ac = scale(scaler, raw);
        SparseVector hybrid = hybrid_concat(lyric, ac);
        const DenseVector* emb = corpus.embeddings.find(p.song->song_id);
        if (p.train) {
            bow_train.push_back(std::move(lyric));
            ac_train.push_back(ac);
            hb_train.push_back(std::move(hybrid));
            y_train.push_back(p.label);
            if (emb) {
                emb_train.push_back(*emb);
                ac_for_emb_train.push_back(ac);
                y_emb_train.push_back(p.label);
            }
        } else {
            bow_test.push_back(std::move(lyric));
            ac_test.push_back(ac);
            hb_test.push_back(std::move(hybrid));
            y_test.push_back(p.label);
            if (emb) {
                emb_test.push_back(*emb);
                ac_for_emb_test.push_back(ac);
                y_emb_test.push_back(p.label);
            }
        }
    }
    require(!y_train.empty() && !y_test.empty(),
            "mood " + mood + " has empty train or test pairs");

    TrainConfig config;
    config.seed = seed;
    config.hidden_width = 16;
    config.l2_lambda = 1e-3;

    auto f1_dense = [&](const LogisticModel& m, std::span<const DenseVector> X,
                        std::span<const int> y) {
        uint64_t tp = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < X.size(); ++i) {
            bool pos = predict(m, X[i]) >= 0.5;
            if (pos && y[i]) ++tp;
            if (pos && !y[i]) ++fp;
            if (!pos && y[i]) ++fn;
        }
        return f1_of_counts(tp, fp, fn);
    };
    auto f1_sparse = [&](const LogisticModel& m, std::span<const SparseVector> X,
                         std::span<const int> y) {
        uint64_t tp = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < X.size(); ++i) {
            bool pos = predict(m, X[i]) >= 0.5;
            if (pos && y[i]) ++tp;
            if (pos && !y[i]) ++fp;
            if (!pos && y[i]) ++fn;
        }
        return f1_of_counts(tp, fp, fn);
    };

    MoodScores out;
    LogisticModel bow = train_logistic<SparseVector>(bow_train, y_train, config, mood);
    out.bow = f1_sparse(bow, bow_test, y_test);
    LogisticModel ac = train_logistic<DenseVector>(ac_train, y_train, config, mood);
    out.acoustic = f1_dense(ac, ac_test, y_test);
    LogisticModel hb = train_logistic<SparseVector>(hb_train, y_train, config, mood);
    out.hybrid_bow = f1_sparse(hb, hb_test, y_test);
    HybridHead he = train_hybrid_head(emb_train, ac_for_emb_train, y_emb_train, config, mood);
    uint64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < emb_test.size(); ++i) {
        bool pos = predict(he, emb_test[i], ac_for_emb_test[i]) >= 0.5;
        if (pos && y_emb_test[i]) ++tp;
        if (pos && !y_emb_test[i]) ++fp;
        if (!pos && y_emb_test[i]) ++fn;
    }
    out.hybrid_embed = f1_of_counts(tp, fp, fn);
    return out;
}

void criterion_directional_echo() {
    for (uint64_t seed : {21ULL, 22ULL, 23ULL, 24ULL, 25ULL}) {
        SimConfig cfg;
        cfg.n_songs = 1000;
        cfg.n_moods = 6;
        cfg.n_playlists = 50000;
        cfg.seed = seed;
        SimulatedCorpus corpus = generate(cfg);
        CooccurrenceCounts counts = count(corpus.playlists, corpus.lexicon);
        auto scores = score_all(counts, corpus.truth.song_ids, corpus.lexicon);
        CorpusSplit split = split_train_test(corpus.truth.song_ids, 0.75, seed);

        std::vector<std::string> train_lyrics;
        std::vector<DenseVector> train_acoustics;
        for (const SongRecord& s : corpus.songs) {
            if (!split.is_train(s.song_id)) continue;
            train_lyrics.push_back(s.lyrics);
            DenseVector v;
            auto arr = s.acoustic->as_array();
            v.values.assign(arr.begin(), arr.end());
            train_acoustics.push_back(std::move(v));
        }
        Vocabulary vocab = fit_vocabulary(train_lyrics, 2);
        Scaler scaler = fit_scaler(train_acoustics);

        const std::string& lyric_mood = corpus.truth.mood_terms[0];     // lyric-driven
        const std::string& acoustic_mood = corpus.truth.mood_terms[1];  // acoustic-driven
        require(corpus.truth.lyric_driven[0] && !corpus.truth.lyric_driven[1],
                "driver layout changed");

        MoodScores lyric = echo_scores_for_mood(corpus, scores, split, lyric_mood, vocab,
                                                scaler, seed);
        MoodScores acoustic = echo_scores_for_mood(corpus, scores, split, acoustic_mood,
                                                   vocab, scaler, seed);
        std::string tag = " (seed " + std::to_string(seed) + ")";
        require(lyric.bow > lyric.acoustic,
                "lyric-driven mood: bow F1 " + fmt(lyric.bow) + " <= acoustic F1 " +
                    fmt(lyric.acoustic) + tag);
        require(acoustic.acoustic > acoustic.bow,
                "acoustic-driven mood: acoustic F1 " + fmt(acoustic.acoustic) +
                    " <= bow F1 " + fmt(acoustic.bow) + tag);
        for (bool is_lyric : {true, false}) {
            const MoodScores& ms = is_lyric ? lyric : acoustic;
            const char* which = is_lyric ? " [lyric-driven: " : " [acoustic-driven: ";
            std::string detail = which + std::string("bow ") + fmt(ms.bow) + " ac " +
                                 fmt(ms.acoustic) + " hb " + fmt(ms.hybrid_bow) + " he " +
                                 fmt(ms.hybrid_embed) + "]";
            double best_single = std::max(ms.bow, ms.acoustic);
            require(ms.hybrid_bow >= best_single - 0.01,
                    "hybrid_bow F1 " + fmt(ms.hybrid_bow) + " < max single " +
                        fmt(best_single) + " - 1pp" + tag + detail);
            require(ms.hybrid_embed >= best_single - 0.01,
                    "hybrid_embed F1 " + fmt(ms.hybrid_embed) + " < max single " +
                        fmt(best_single) + " - 1pp" + tag + detail);
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 10: annotation machinery

void criterion_annotation() {
    constexpr Judgment Y = Judgment::Yes;
    constexpr Judgment N = Judgment::No;
    constexpr Judgment U = Judgment::Uninformative;

    // consensus truth table, all 9 combinations
    const Judgment all[3] = {Y, N, U};
    for (Judgment a : all) {
        for (Judgment b : all) {
            Judgment expect;
            if (a == Y || b == Y) expect = Y;
            else if (a == N || b == N) expect = N;
            else expect = U;
            require(consensus(a, b) == expect, "consensus truth table mismatch");
        }
    }

    // majority vote on all 27 triples; tiebreak cases via all 4th values
    for (Judgment a : all) {
        for (Judgment b : all) {
            for (Judgment c : all) {
                AnnotationRecord rec;
                rec.song_id = "s";
                rec.mood_term = "m";
                rec.judgments = {a, b, c};
                bool distinct = a != b && b != c && a != c;
                if (distinct) {
                    bool threw = false;
                    try {
                        majority_vote(rec);
                    } catch (const DataError&) {
                        threw = true;
                    }
                    require(threw, "three-way disagreement without tiebreak must error");
                    for (Judgment tb : all) {
                        rec.tiebreak = tb;
                        require(majority_vote(rec) == tb, "tiebreak must decide");
                    }
                } else {
                    Judgment v = majority_vote(rec);
                    int count = (v == a) + (v == b) + (v == c);
                    require(count >= 2, "majority verdict must occur at least twice");
                }
            }
        }
    }

    // Fleiss kappa: perfect agreement
    std::vector<std::vector<int>> perfect = {{0, 0, 0}, {2, 2, 2}, {1, 1, 1}};
    require(fleiss_kappa(perfect, 3).kappa == 1.0, "perfect agreement kappa != 1");

    // 10,000 independent uniform items: |kappa| < 0.05
    Rng rng(31337, "acceptance-kappa");
    std::vector<std::vector<int>> uniform;
    uniform.reserve(10000);
    for (int i = 0; i < 10000; ++i) {
        uniform.push_back({static_cast<int>(rng.uniform_int(3)),
                           static_cast<int>(rng.uniform_int(3)),
                           static_cast<int>(rng.uniform_int(3))});
    }
    double k_uniform = fleiss_kappa(uniform, 3).kappa;
    require(std::abs(k_uniform) < 0.05, "uniform kappa " + fmt(k_uniform));

    // fixed 4x3 matrix against the hand-computed oracle 11/47
    std::vector<std::vector<int>> fixed = {{0, 0, 1}, {1, 1, 1}, {0, 2, 2}, {2, 2, 1}};
    double k_fixed = fleiss_kappa(fixed, 3).kappa;
    require(std::abs(k_fixed - 11.0 / 47.0) <= 1e-9,
            "fixed matrix kappa " + fmt(k_fixed) + " != 11/47");

    require(interpret_kappa(0.2846).label == "Fair agreement",
            "interpret_kappa(0.2846) mismatch");
}

// ---------------------------------------------------------------------------
// criterion 11: sweep recall monotonicity on simulated data

void criterion_sweep_monotonicity() {
    SimConfig cfg;
    cfg.n_songs = 120;
    cfg.n_moods = 6;
    cfg.n_playlists = 8000;
    cfg.seed = 60;
    SimulatedCorpus corpus = generate(cfg);
    CooccurrenceCounts counts = count(corpus.playlists, corpus.lexicon);
    auto scores = score_all(counts, corpus.truth.song_ids, corpus.lexicon);

    std::map<PairKey, double> score_map;
    for (const AssociationScore& s : scores) score_map[{s.song_id, s.mood_term}] = s.bnpmi;
    std::map<PairKey, TruthLabel> truth;
    for (const auto& [key, label] : truth_from_affinity(corpus.truth)) {
        if (score_map.count(key)) truth[key] = label;
    }
    std::vector<double> taus;
    for (double t = 0.02; t <= 0.6; t += 0.02) taus.push_back(t);
    auto points = threshold_sweep(score_map, truth, taus);
    require(points.size() == taus.size(), "sweep dropped points");
    for (size_t i = 1; i < points.size(); ++i) {
        require(points[i].recall <= points[i - 1].recall + 1e-12,
                "recall increased between tau " + fmt(points[i - 1].tau) + " and " +
                    fmt(points[i].tau));
    }
}

// ---------------------------------------------------------------------------
// criterion 12: end-to-end pipeline determinism

void criterion_pipeline_determinism() {
    fs::path dir = fs::temp_directory_path() / "moodassoc_acceptance" / "pipeline";
    fs::remove_all(dir);

    PipelineConfig cfg;
    cfg.output_dir = dir.string();
    cfg.seed = 4242;
    cfg.sim.seed = 4242;
    cfg.sim.n_songs = 120;
    cfg.sim.n_moods = 6;
    cfg.sim.n_playlists = 8000;
    cfg.train.max_iters = 200;
    cfg.train.hidden_width = 8;
    cfg.threads = 2;

    auto snapshot = [&] {
        std::map<std::string, std::string> tree;
        for (const auto& entry : fs::recursive_directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            tree[fs::relative(entry.path(), dir).string()] = read_file(entry.path());
        }
        return tree;
    };

    run_pipeline(cfg);
    auto first = snapshot();
    fs::remove_all(dir);
    run_pipeline(cfg);
    auto second = snapshot();

    require(first.size() == second.size(),
            "tree size changed: " + std::to_string(first.size()) + " vs " +
                std::to_string(second.size()));
    for (const auto& [path, bytes] : first) {
        auto it = second.find(path);
        require(it != second.end(), "missing file on rerun: " + path);
        require(bytes == it->second, "file differs across reruns: " + path);
    }
    fs::remove_all(dir);
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void()> fn;
    };
    std::vector<Criterion> criteria = {
        {1, "metric arithmetic reproduces the published confusion row", criterion_metric_arithmetic},
        {2, "NPMI endpoints and bounds on 1000 random corpora", criterion_npmi_bounds},
        {3, "NPMI formulation equivalence to 1e-12", criterion_formulation_equivalence},
        {4, "method-of-moments matches brute force on 20 vectors", criterion_method_of_moments},
        {5, "BNPMI converges to NPMI under count scaling", criterion_bnpmi_consistency},
        {6, "directional shrinkage on every simulator corpus", criterion_shrinkage},
        {7, "simulator recovery >= 0.8 on the default config, 5 seeds", criterion_simulator_recovery},
        {8, "classifier gradients, separable fit, and regularization limit", criterion_classifiers},
        {9, "directional modality echo with hybrid floors, 5 seeds", criterion_directional_echo},
        {10, "annotation consensus, majority vote, and Fleiss kappa", criterion_annotation},
        {11, "sweep recall monotonicity on simulated data", criterion_sweep_monotonicity},
        {12, "pipeline reruns are byte-identical", criterion_pipeline_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string verdict = "PASS";
        std::string detail;
        try {
            c.fn();
        } catch (const std::exception& e) {
            verdict = "FAIL";
            detail = e.what();
            ++failures;
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        std::printf("[%s] criterion %2d: %s (%lld ms)%s%s\n", verdict.c_str(), c.id,
                    c.name, static_cast<long long>(ms), detail.empty() ? "" : " -- ",
                    detail.c_str());
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures;
}
