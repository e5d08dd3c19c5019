#pragma once

// Song representations: sparse tf.idf bags of unigrams, dense acoustic
// vectors, hybrid concatenations, and ingestion of precomputed lyric
// embeddings. Vocabulary and scaler fitting refuses test-split ids outright
// when a split is supplied.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "moodassoc/acoustic.hpp"
#include "moodassoc/errors.hpp"
#include "moodassoc/ingest.hpp"
#include "moodassoc/io.hpp"
#include "moodassoc/text.hpp"

namespace moodassoc {

// ---------------------------------------------------------------------------
// Vectors

struct DenseVector {
    std::vector<double> values;

    size_t dims() const { return values.size(); }
    size_t dim_count() const { return values.size(); }

    double dot(std::span<const double> w) const {
        if (w.size() != values.size()) throw DataError("dense vector dimension mismatch");
        double acc = 0;
        for (size_t i = 0; i < values.size(); ++i) acc += values[i] * w[i];
        return acc;
    }

    void add_scaled_to(std::span<double> out, double c) const {
        if (out.size() != values.size()) throw DataError("dense vector dimension mismatch");
        for (size_t i = 0; i < values.size(); ++i) out[i] += c * values[i];
    }

    bool finite() const {
        for (double v : values) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

// Sorted (index, value) pairs; indices strictly increasing, values nonzero.
struct SparseVector {
    size_t dims = 0;
    std::vector<std::pair<uint32_t, double>> entries;

    size_t dim_count() const { return dims; }

    double dot(std::span<const double> w) const {
        if (w.size() != dims) throw DataError("sparse vector dimension mismatch");
        double acc = 0;
        for (const auto& [i, v] : entries) acc += v * w[i];
        return acc;
    }

    void add_scaled_to(std::span<double> out, double c) const {
        if (out.size() != dims) throw DataError("sparse vector dimension mismatch");
        for (const auto& [i, v] : entries) out[i] += c * v;
    }

    double l2_norm() const {
        double acc = 0;
        for (const auto& [i, v] : entries) acc += v * v;
        return std::sqrt(acc);
    }

    bool finite() const {
        for (const auto& [i, v] : entries) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

// ---------------------------------------------------------------------------
// Vocabulary and tf.idf

struct Vocabulary {
    std::map<std::string, uint32_t> term_index;  // dense 0..V-1, lexicographic
    std::unordered_map<std::string, uint64_t> doc_freq;
    uint64_t n_docs = 0;
    std::string fitted_on = "train";

    size_t size() const { return term_index.size(); }
};

namespace detail {

inline void guard_train_only(std::span<const std::string> ids, const CorpusSplit* split,
                             const char* what) {
    if (!split) return;
    for (const std::string& id : ids) {
        if (split->is_test(id)) {
            throw DataError(std::string(what) + " fit would leak test id \"" + id + "\"");
        }
    }
}

}  // namespace detail

// Unigram vocabulary over the training lyrics; document frequency threshold
// min_df bounds its size. Index assignment is lexicographic for determinism.
inline Vocabulary fit_vocabulary(std::span<const std::string> train_lyrics, uint64_t min_df = 2,
                                 std::string fitted_on = "train") {
    if (train_lyrics.empty()) throw DataError("cannot fit vocabulary on an empty corpus");
    std::unordered_map<std::string, uint64_t> df;
    std::unordered_set<std::string> in_doc;
    for (const std::string& doc : train_lyrics) {
        in_doc.clear();
        for (std::string& tok : tokenize(doc)) in_doc.insert(std::move(tok));
        for (const std::string& tok : in_doc) ++df[tok];
    }
    Vocabulary vocab;
    vocab.n_docs = train_lyrics.size();
    vocab.fitted_on = std::move(fitted_on);
    for (auto& [term, n] : df) {
        if (n >= min_df) vocab.term_index[term] = 0;
    }
    uint32_t next = 0;
    for (auto& [term, idx] : vocab.term_index) {
        idx = next++;
        vocab.doc_freq[term] = df[term];
    }
    return vocab;
}

// Split-guarded variant: refuses to fit on any song in the test split.
inline Vocabulary fit_vocabulary(std::span<const SongRecord> train_songs,
                                 const CorpusSplit* split, uint64_t min_df = 2) {
    std::vector<std::string> ids;
    std::vector<std::string> lyrics;
    ids.reserve(train_songs.size());
    lyrics.reserve(train_songs.size());
    for (const SongRecord& s : train_songs) {
        ids.push_back(s.song_id);
        lyrics.push_back(s.lyrics);
    }
    detail::guard_train_only(ids, split, "vocabulary");
    return fit_vocabulary(lyrics, min_df);
}

// Raw-count tf times smoothed idf, ln((1+n)/(1+df)) + 1, then L2-normalized.
// Out-of-vocabulary terms drop; empty lyrics give the zero vector.
inline SparseVector tfidf_transform(const Vocabulary& vocab, const std::string& lyrics) {
    std::unordered_map<std::string, double> tf;
    for (std::string& tok : tokenize(lyrics)) {
        if (vocab.term_index.count(tok)) tf[std::move(tok)] += 1.0;
    }
    SparseVector vec;
    vec.dims = vocab.size();
    vec.entries.reserve(tf.size());
    double n = static_cast<double>(vocab.n_docs);
    for (const auto& [term, count] : tf) {
        double df = static_cast<double>(vocab.doc_freq.at(term));
        double idf = std::log((1.0 + n) / (1.0 + df)) + 1.0;
        vec.entries.emplace_back(vocab.term_index.at(term), count * idf);
    }
    std::sort(vec.entries.begin(), vec.entries.end());
    double norm = vec.l2_norm();
    if (norm > 0) {
        for (auto& [i, v] : vec.entries) v /= norm;
    }
    return vec;
}

// ---------------------------------------------------------------------------
// Standardization

struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;       // 1.0 where passthrough
    std::vector<bool> passthrough;    // zero-variance dimensions, left unscaled

    size_t dims() const { return mean.size(); }
};

inline Scaler fit_scaler(std::span<const DenseVector> train_vectors,
                         std::span<const std::string> ids = {},
                         const CorpusSplit* split = nullptr) {
    if (train_vectors.size() < 2) throw DataError("scaler fit needs at least 2 vectors");
    detail::guard_train_only(ids, split, "scaler");
    size_t d = train_vectors[0].dims();
    for (const DenseVector& v : train_vectors) {
        if (v.dims() != d) throw DataError("scaler fit: inconsistent dimensions");
        if (!v.finite()) throw DataError("scaler fit: non-finite input");
    }
    Scaler s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 1.0);
    s.passthrough.assign(d, false);
    double n = static_cast<double>(train_vectors.size());
    for (const DenseVector& v : train_vectors) {
        for (size_t i = 0; i < d; ++i) s.mean[i] += v.values[i];
    }
    for (size_t i = 0; i < d; ++i) s.mean[i] /= n;
    std::vector<double> ss(d, 0.0);
    for (const DenseVector& v : train_vectors) {
        for (size_t i = 0; i < d; ++i) {
            double c = v.values[i] - s.mean[i];
            ss[i] += c * c;
        }
    }
    for (size_t i = 0; i < d; ++i) {
        double var = ss[i] / (n - 1.0);
        if (var > 0) {
            s.stddev[i] = std::sqrt(var);
        } else {
            s.passthrough[i] = true;  // constant dimension: flag, pass through
            s.stddev[i] = 1.0;
            s.mean[i] = 0.0;
        }
    }
    return s;
}

inline DenseVector scale(const Scaler& scaler, const DenseVector& v) {
    if (v.dims() != scaler.dims()) throw DataError("scale: dimension mismatch");
    DenseVector out;
    out.values.resize(v.dims());
    for (size_t i = 0; i < v.dims(); ++i) {
        out.values[i] = scaler.passthrough[i]
                            ? v.values[i]
                            : (v.values[i] - scaler.mean[i]) / scaler.stddev[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hybrid concatenation: acoustic dimensions appended after lyric dimensions.

inline SparseVector hybrid_concat(const SparseVector& lyric_part,
                                  const DenseVector& acoustic_part) {
    SparseVector out = lyric_part;
    out.dims = lyric_part.dims + acoustic_part.dims();
    for (size_t i = 0; i < acoustic_part.dims(); ++i) {
        double v = acoustic_part.values[i];
        if (v != 0.0) {
            out.entries.emplace_back(static_cast<uint32_t>(lyric_part.dims + i), v);
        }
    }
    return out;
}

inline DenseVector hybrid_concat(const DenseVector& lyric_part,
                                 const DenseVector& acoustic_part) {
    DenseVector out = lyric_part;
    out.values.insert(out.values.end(), acoustic_part.values.begin(),
                      acoustic_part.values.end());
    return out;
}

// ---------------------------------------------------------------------------
// Precomputed lyric embeddings

struct EmbeddingTable {
    size_t dims = 0;
    std::unordered_map<std::string, DenseVector> by_song;

    const DenseVector* find(const std::string& song_id) const {
        auto it = by_song.find(song_id);
        return it == by_song.end() ? nullptr : &it->second;
    }
};

// CSV song_id,v0,v1,...; the header declares the dimensionality and every row
// must match it.
inline EmbeddingTable load_embeddings(std::istream& in) {
    EmbeddingTable table;
    std::string line;
    size_t line_no = 0;
    size_t expected_fields = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (line_no == 1) {
            if (fields.size() < 2 || fields[0] != "song_id" || fields[1] != "v0")
                throw DataError("embeddings CSV: unexpected header");
            expected_fields = fields.size();
            table.dims = fields.size() - 1;
            continue;
        }
        if (fields.size() != expected_fields) {
            throw DataError("embeddings CSV: ragged row for song \"" + fields[0] +
                            "\" (line " + std::to_string(line_no) + ")");
        }
        DenseVector v;
        v.values.reserve(table.dims);
        for (size_t i = 1; i < fields.size(); ++i) {
            try {
                v.values.push_back(std::stod(fields[i]));
            } catch (const std::exception&) {
                throw DataError("embeddings CSV line " + std::to_string(line_no) +
                                ": bad number \"" + fields[i] + "\"");
            }
        }
        if (!v.finite())
            throw DataError("embeddings CSV: non-finite value for song \"" + fields[0] + "\"");
        table.by_song[fields[0]] = std::move(v);
    }
    if (table.dims == 0) throw DataError("embeddings CSV is empty");
    return table;
}

inline void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
    out << "song_id";
    for (size_t i = 0; i < table.dims; ++i) out << ",v" << i;
    out << '\n';
    std::vector<std::string> ids;
    ids.reserve(table.by_song.size());
    for (const auto& [id, v] : table.by_song) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (const std::string& id : ids) {
        out << csv_quote(id);
        for (double v : table.by_song.at(id).values) out << ',' << format_sig9(v);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Vocabulary snapshot: a meta comment line, then term,index,df rows.

inline void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
    out << "# n_docs=" << vocab.n_docs << " fitted_on=" << vocab.fitted_on << '\n';
    out << "term,index,df\n";
    for (const auto& [term, idx] : vocab.term_index) {
        out << csv_quote(term) << ',' << idx << ',' << vocab.doc_freq.at(term) << '\n';
    }
}

inline Vocabulary read_vocabulary(std::istream& in) {
    Vocabulary vocab;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line.rfind("# n_docs=", 0) != 0)
                throw DataError("vocabulary file: missing meta line");
            size_t sp = line.find(' ', 9);
            vocab.n_docs = std::stoull(line.substr(9, sp - 9));
            size_t fo = line.find("fitted_on=");
            if (fo != std::string::npos) vocab.fitted_on = line.substr(fo + 10);
            continue;
        }
        if (line_no == 2) {
            if (line != "term,index,df") throw DataError("vocabulary file: bad header");
            continue;
        }
        auto fields = csv_split(line);
        if (fields.size() != 3)
            throw DataError("vocabulary file line " + std::to_string(line_no) + ": bad row");
        vocab.term_index[fields[0]] = static_cast<uint32_t>(std::stoul(fields[1]));
        vocab.doc_freq[fields[0]] = std::stoull(fields[2]);
    }
    if (vocab.term_index.empty()) throw DataError("vocabulary file has no terms");
    return vocab;
}

}  // namespace moodassoc
