#pragma once

// Human-judgment machinery: majority vote with fourth-annotator tie-break,
// the lyrics/acoustics consensus rule, Fleiss kappa, and its interpretation
// bands.

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "moodassoc/errors.hpp"
#include "moodassoc/evaluation.hpp"
#include "moodassoc/io.hpp"

namespace moodassoc {

enum class Judgment { Yes, No, Uninformative };

inline std::string to_string(Judgment j) {
    switch (j) {
        case Judgment::Yes: return "Y";
        case Judgment::No: return "N";
        case Judgment::Uninformative: return "U";
    }
    throw InternalError("unknown judgment");
}

inline Judgment parse_judgment(const std::string& s) {
    if (s == "Y" || s == "y") return Judgment::Yes;
    if (s == "N" || s == "n") return Judgment::No;
    if (s == "U" || s == "u") return Judgment::Uninformative;
    throw DataError("unknown judgment: \"" + s + "\"");
}

enum class AnnotationSource { Lyrics, Acoustics };

inline std::string to_string(AnnotationSource s) {
    return s == AnnotationSource::Lyrics ? "lyrics" : "acoustics";
}

inline AnnotationSource parse_annotation_source(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "lyrics") return AnnotationSource::Lyrics;
    if (s == "acoustics") return AnnotationSource::Acoustics;
    throw DataError("unknown annotation source: \"" + s + "\"");
}

struct AnnotationRecord {
    std::string song_id;
    std::string mood_term;
    AnnotationSource source = AnnotationSource::Lyrics;
    std::array<Judgment, 3> judgments{};
    std::optional<Judgment> tiebreak;  // present only when all three differ
};

// Any value held by at least 2 of the 3 primary judgments wins; a three-way
// disagreement falls to the fourth annotator.
inline Judgment majority_vote(const AnnotationRecord& record) {
    std::array<int, 3> tally{};  // Yes, No, Uninformative
    for (Judgment j : record.judgments) ++tally[static_cast<size_t>(j)];
    for (size_t i = 0; i < 3; ++i) {
        if (tally[i] >= 2) return static_cast<Judgment>(i);
    }
    if (!record.tiebreak) {
        throw DataError("unresolved disagreement for (" + record.song_id + ", " +
                        record.mood_term + ", " + to_string(record.source) +
                        "): all three judgments differ and no tiebreak is present");
    }
    return *record.tiebreak;
}

// Any Yes wins; otherwise any No wins; only (U,U) stays uninformative.
// Symmetric in its arguments.
inline Judgment consensus(Judgment lyrics_verdict, Judgment acoustics_verdict) {
    if (lyrics_verdict == Judgment::Yes || acoustics_verdict == Judgment::Yes)
        return Judgment::Yes;
    if (lyrics_verdict == Judgment::No || acoustics_verdict == Judgment::No)
        return Judgment::No;
    return Judgment::Uninformative;
}

// ---------------------------------------------------------------------------
// Fleiss kappa

struct AgreementReport {
    double kappa = 0;
    std::string interpretation;
    bool interpretation_gap = false;  // kappa fell in the table's uncovered [0, 0.01]
    size_t n_items = 0;
    size_t n_raters = 0;
    size_t n_categories = 0;
};

struct KappaBand {
    std::string label;
    bool gap = false;
};

// Bands exactly as tabulated. The table leaves [0, 0.01] uncovered; values
// there map to "Slight agreement" with the gap flagged rather than erroring.
inline KappaBand interpret_kappa(double kappa) {
    if (!(kappa >= -1.0 - 1e-12 && kappa <= 1.0 + 1e-12))
        throw DataError("kappa out of [-1,1]: " + std::to_string(kappa));
    if (kappa < 0.0) return {"Poor agreement", false};
    if (kappa <= 0.01) return {"Slight agreement", kappa >= 0.0};
    if (kappa <= 0.20) return {"Slight agreement", false};
    if (kappa <= 0.40) return {"Fair agreement", false};
    if (kappa <= 0.60) return {"Moderate agreement", false};
    if (kappa <= 0.80) return {"Substantial agreement", false};
    return {"Almost perfect agreement", false};
}

// Fixed-rater-count Fleiss kappa. ratings[i] holds the category index each of
// the n raters assigned to item i; every item needs the same rater count.
inline AgreementReport fleiss_kappa(const std::vector<std::vector<int>>& ratings,
                                    size_t n_categories) {
    if (ratings.size() < 2) throw DataError("Fleiss kappa needs at least 2 items");
    size_t n_raters = ratings[0].size();
    if (n_raters < 2) throw DataError("Fleiss kappa needs at least 2 raters per item");
    if (n_categories < 1) throw DataError("Fleiss kappa needs at least 1 category");
    for (size_t i = 0; i < ratings.size(); ++i) {
        if (ratings[i].size() != n_raters) {
            throw DataError("Fleiss kappa: item " + std::to_string(i) + " has " +
                            std::to_string(ratings[i].size()) + " ratings, expected " +
                            std::to_string(n_raters));
        }
        for (int c : ratings[i]) {
            if (c < 0 || static_cast<size_t>(c) >= n_categories)
                throw DataError("Fleiss kappa: category index out of range at item " +
                                std::to_string(i));
        }
    }

    double n = static_cast<double>(n_raters);
    double n_items = static_cast<double>(ratings.size());
    std::vector<double> category_totals(n_categories, 0.0);
    double p_bar = 0;
    std::vector<double> item_counts(n_categories);
    for (const auto& item : ratings) {
        std::fill(item_counts.begin(), item_counts.end(), 0.0);
        for (int c : item) {
            item_counts[static_cast<size_t>(c)] += 1.0;
            category_totals[static_cast<size_t>(c)] += 1.0;
        }
        double ss = 0;
        for (double c : item_counts) ss += c * c;
        p_bar += (ss - n) / (n * (n - 1.0));
    }
    p_bar /= n_items;

    double pe = 0;
    for (double t : category_totals) {
        double pj = t / (n_items * n);
        pe += pj * pj;
    }

    AgreementReport report;
    report.n_items = ratings.size();
    report.n_raters = n_raters;
    report.n_categories = n_categories;
    if (pe >= 1.0) {
        // every rating in one category: perfect agreement by construction
        report.kappa = p_bar >= 1.0 ? 1.0 : 0.0;
    } else {
        report.kappa = (p_bar - pe) / (1.0 - pe);
    }
    KappaBand band = interpret_kappa(report.kappa);
    report.interpretation = band.label;
    report.interpretation_gap = band.gap;
    return report;
}

inline AgreementReport fleiss_kappa_judgments(std::span<const AnnotationRecord> records) {
    std::vector<std::vector<int>> ratings;
    ratings.reserve(records.size());
    for (const AnnotationRecord& r : records) {
        std::vector<int> item;
        item.reserve(3);
        for (Judgment j : r.judgments) item.push_back(static_cast<int>(j));
        ratings.push_back(std::move(item));
    }
    return fleiss_kappa(ratings, 3);
}

// ---------------------------------------------------------------------------
// Annotation CSV: song_id,mood,source,judge1,judge2,judge3,judge4 with
// judge values in {Y,N,U}; judge4 may be empty.

inline std::vector<AnnotationRecord> load_annotations_csv(std::istream& in) {
    std::vector<AnnotationRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "song_id,mood,source,judge1,judge2,judge3,judge4")
                throw DataError("annotation CSV: unexpected header \"" + line + "\"");
            continue;
        }
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 7)
            throw DataError("annotation CSV line " + std::to_string(line_no) + ": bad row");
        AnnotationRecord rec;
        rec.song_id = fields[0];
        rec.mood_term = fields[1];
        try {
            rec.source = parse_annotation_source(fields[2]);
            for (size_t i = 0; i < 3; ++i) rec.judgments[i] = parse_judgment(fields[3 + i]);
            if (!fields[6].empty()) rec.tiebreak = parse_judgment(fields[6]);
        } catch (const DataError& e) {
            throw DataError("annotation CSV line " + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

inline void write_annotations_csv(std::ostream& out,
                                  std::span<const AnnotationRecord> records) {
    out << "song_id,mood,source,judge1,judge2,judge3,judge4\n";
    for (const AnnotationRecord& r : records) {
        out << csv_quote(r.song_id) << ',' << csv_quote(r.mood_term) << ','
            << to_string(r.source) << ',' << to_string(r.judgments[0]) << ','
            << to_string(r.judgments[1]) << ',' << to_string(r.judgments[2]) << ','
            << (r.tiebreak ? to_string(*r.tiebreak) : "") << '\n';
    }
}

// Per-pair verdicts resolved by source, then combined into the consensus.
// Pairs that only one source annotated are dropped from the consensus with a
// diagnostic entry.
struct VerdictTable {
    std::map<PairKey, Judgment> lyrics;
    std::map<PairKey, Judgment> acoustics;
    std::map<PairKey, Judgment> consensus;
    std::vector<std::string> unmatched;  // pairs missing one source
};

inline VerdictTable resolve_verdicts(std::span<const AnnotationRecord> records) {
    VerdictTable table;
    for (const AnnotationRecord& r : records) {
        PairKey key{r.song_id, r.mood_term};
        Judgment verdict = majority_vote(r);
        auto& side = r.source == AnnotationSource::Lyrics ? table.lyrics : table.acoustics;
        if (side.count(key)) {
            throw DataError("duplicate annotation for (" + r.song_id + ", " + r.mood_term +
                            ", " + to_string(r.source) + ")");
        }
        side[key] = verdict;
    }
    for (const auto& [key, lyr] : table.lyrics) {
        auto it = table.acoustics.find(key);
        if (it == table.acoustics.end()) {
            table.unmatched.push_back("(" + key.first + ", " + key.second + "): acoustics missing");
            continue;
        }
        table.consensus[key] = consensus(lyr, it->second);
    }
    for (const auto& [key, ac] : table.acoustics) {
        if (!table.lyrics.count(key)) {
            table.unmatched.push_back("(" + key.first + ", " + key.second + "): lyrics missing");
        }
    }
    return table;
}

inline TruthLabel truth_from_judgment(Judgment j) {
    switch (j) {
        case Judgment::Yes: return TruthLabel::Positive;
        case Judgment::No: return TruthLabel::Negative;
        case Judgment::Uninformative: return TruthLabel::Uninformative;
    }
    throw InternalError("unknown judgment");
}

inline void write_verdicts_csv(std::ostream& out, const VerdictTable& table) {
    out << "song_id,mood,lyrics_verdict,acoustics_verdict,consensus\n";
    for (const auto& [key, cons] : table.consensus) {
        out << csv_quote(key.first) << ',' << csv_quote(key.second) << ','
            << to_string(table.lyrics.at(key)) << ',' << to_string(table.acoustics.at(key))
            << ',' << to_string(cons) << '\n';
    }
}

inline void write_agreement_csv(std::ostream& out,
                                std::span<const std::pair<std::string, AgreementReport>> rows) {
    out << "annotation,kappa,interpretation,n_items,n_raters,n_categories,gap_flag\n";
    for (const auto& [name, report] : rows) {
        out << csv_quote(name) << ',' << format_sig9(report.kappa) << ','
            << csv_quote(report.interpretation) << ',' << report.n_items << ','
            << report.n_raters << ',' << report.n_categories << ','
            << (report.interpretation_gap ? "true" : "false") << '\n';
    }
}

}  // namespace moodassoc
