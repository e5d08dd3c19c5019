#pragma once

// Confusion counting, precision/recall/F1, per-mood reports, and the
// precision-recall-vs-threshold sweep. Ground truth may mark pairs as
// Uninformative; those are excluded from the 2x2 table but reported in their
// own column.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "moodassoc/errors.hpp"
#include "moodassoc/io.hpp"
#include "moodassoc/models.hpp"

namespace moodassoc {

using PairKey = std::pair<std::string, std::string>;  // (song_id, mood_term)

enum class TruthLabel { Positive, Negative, Uninformative };

inline std::string to_string(TruthLabel t) {
    switch (t) {
        case TruthLabel::Positive: return "Positive";
        case TruthLabel::Negative: return "Negative";
        case TruthLabel::Uninformative: return "Uninformative";
    }
    throw InternalError("unknown truth label");
}

inline TruthLabel parse_truth_label(const std::string& s) {
    if (s == "Positive") return TruthLabel::Positive;
    if (s == "Negative") return TruthLabel::Negative;
    if (s == "Uninformative") return TruthLabel::Uninformative;
    throw DataError("unknown truth label: \"" + s + "\"");
}

struct ConfusionCounts {
    uint64_t tp = 0;
    uint64_t tn = 0;
    uint64_t fp = 0;
    uint64_t fn = 0;
    uint64_t uninformative = 0;

    uint64_t total() const { return tp + tn + fp + fn + uninformative; }

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        tn += o.tn;
        fp += o.fp;
        fn += o.fn;
        uninformative += o.uninformative;
        return *this;
    }
};

// Requires a prediction for every truth pair; the error lists what is
// missing. Uninformative truth only increments its own counter.
inline ConfusionCounts confusion(const std::map<PairKey, Decision>& predictions,
                                 const std::map<PairKey, TruthLabel>& truth) {
    std::vector<std::string> missing;
    for (const auto& [pair, label] : truth) {
        if (!predictions.count(pair)) {
            missing.push_back("(" + pair.first + ", " + pair.second + ")");
        }
    }
    if (!missing.empty()) {
        std::string joined;
        for (size_t i = 0; i < missing.size() && i < 10; ++i) {
            if (i) joined += ", ";
            joined += missing[i];
        }
        if (missing.size() > 10) joined += ", ...";
        throw DataError("missing predictions for " + std::to_string(missing.size()) +
                        " truth pairs: " + joined);
    }
    ConfusionCounts c;
    for (const auto& [pair, label] : truth) {
        if (label == TruthLabel::Uninformative) {
            ++c.uninformative;
            continue;
        }
        bool predicted_pos = predictions.at(pair) == Decision::Positive;
        bool truth_pos = label == TruthLabel::Positive;
        if (predicted_pos && truth_pos) ++c.tp;
        else if (predicted_pos && !truth_pos) ++c.fp;
        else if (!predicted_pos && truth_pos) ++c.fn;
        else ++c.tn;
    }
    return c;
}

struct Metrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

// Zero denominators map to 0 by convention.
inline Metrics metrics(const ConfusionCounts& c) {
    Metrics m;
    uint64_t pred_pos = c.tp + c.fp;
    uint64_t truth_pos = c.tp + c.fn;
    m.precision = pred_pos > 0 ? static_cast<double>(c.tp) / static_cast<double>(pred_pos) : 0.0;
    m.recall = truth_pos > 0 ? static_cast<double>(c.tp) / static_cast<double>(truth_pos) : 0.0;
    m.f1 = (m.precision + m.recall) > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

struct MoodReportRow {
    std::string scope;  // mood term, or "total" for the micro-average
    Metrics metrics;
    ConfusionCounts counts;
    bool empty = false;  // no pairs for this mood
};

// Per-mood metrics over that mood's pairs only, plus a micro-averaged total
// row over the requested moods.
inline std::vector<MoodReportRow> per_mood_report(
    const std::map<PairKey, Decision>& predictions,
    const std::map<PairKey, TruthLabel>& truth, std::span<const std::string> moods) {
    std::vector<MoodReportRow> rows;
    ConfusionCounts total;
    for (const std::string& mood : moods) {
        std::map<PairKey, Decision> mood_pred;
        std::map<PairKey, TruthLabel> mood_truth;
        for (const auto& [pair, label] : truth) {
            if (pair.second != mood) continue;
            mood_truth[pair] = label;
            auto it = predictions.find(pair);
            if (it != predictions.end()) mood_pred[pair] = it->second;
        }
        MoodReportRow row;
        row.scope = mood;
        if (mood_truth.empty()) {
            row.empty = true;
        } else {
            row.counts = confusion(mood_pred, mood_truth);
            row.metrics = metrics(row.counts);
            total += row.counts;
        }
        rows.push_back(std::move(row));
    }
    MoodReportRow total_row;
    total_row.scope = "total";
    total_row.counts = total;
    total_row.metrics = metrics(total);
    total_row.empty = total.total() == 0;
    rows.push_back(std::move(total_row));
    return rows;
}

struct SweepPoint {
    double tau = 0;
    double precision = 0;
    double recall = 0;
};

// At each tau the prediction is Positive iff score >= tau. Recall is monotone
// non-increasing in tau; precision carries no such guarantee.
inline std::vector<SweepPoint> threshold_sweep(const std::map<PairKey, double>& scores,
                                               const std::map<PairKey, TruthLabel>& truth,
                                               std::span<const double> taus) {
    for (size_t i = 1; i < taus.size(); ++i) {
        if (!(taus[i] > taus[i - 1]))
            throw ConfigError("sweep thresholds must be strictly increasing");
    }
    for (double t : taus) {
        if (!(t > 0.0 && t < 1.0))
            throw ConfigError("sweep thresholds must lie in (0,1)");
    }
    std::vector<SweepPoint> points;
    points.reserve(taus.size());
    for (double tau : taus) {
        std::map<PairKey, Decision> pred;
        for (const auto& [pair, score] : scores) {
            pred[pair] = score >= tau ? Decision::Positive : Decision::Negative;
        }
        Metrics m = metrics(confusion(pred, truth));
        points.push_back({tau, m.precision, m.recall});
    }
    return points;
}

// ---------------------------------------------------------------------------
// Serialization

// Percentages at 2 decimals, as in the reference tables; the zero-denominator
// convention is recorded so reports are self-describing.
inline void write_metrics_csv(std::ostream& out, std::span<const MoodReportRow> rows) {
    out << "# zero_denominator_convention=0\n";
    out << "scope,precision,recall,f1,tp,tn,fp,fn,uninformative\n";
    for (const MoodReportRow& r : rows) {
        out << csv_quote(r.scope) << ',' << format_pct(r.metrics.precision) << ','
            << format_pct(r.metrics.recall) << ',' << format_pct(r.metrics.f1) << ','
            << r.counts.tp << ',' << r.counts.tn << ',' << r.counts.fp << ','
            << r.counts.fn << ',' << r.counts.uninformative;
        if (r.empty) out << ",empty";
        out << '\n';
    }
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
    out << "tau,precision,recall\n";
    for (const SweepPoint& p : points) {
        out << format_sig9(p.tau) << ',' << format_sig9(p.precision) << ','
            << format_sig9(p.recall) << '\n';
    }
}

// Truth CSV: song_id,mood,label with Positive/Negative/Uninformative.
inline std::map<PairKey, TruthLabel> read_truth_csv(std::istream& in) {
    std::map<PairKey, TruthLabel> truth;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "song_id,mood,label")
                throw DataError("truth CSV: unexpected header \"" + line + "\"");
            continue;
        }
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 3)
            throw DataError("truth CSV line " + std::to_string(line_no) + ": bad row");
        truth[{fields[0], fields[1]}] = parse_truth_label(fields[2]);
    }
    return truth;
}

inline void write_truth_csv(std::ostream& out, const std::map<PairKey, TruthLabel>& truth) {
    out << "song_id,mood,label\n";
    for (const auto& [pair, label] : truth) {
        out << csv_quote(pair.first) << ',' << csv_quote(pair.second) << ','
            << to_string(label) << '\n';
    }
}

}  // namespace moodassoc
