#pragma once

// Per-mood binary classifiers: logistic regression over sparse or dense
// feature rows, and the hybrid head (MLP over acoustics concatenated with a
// precomputed lyric embedding, then a classification layer). Both train with
// full-batch gradient descent and backtracking line search: deterministic,
// and loss never increases across accepted steps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "moodassoc/errors.hpp"
#include "moodassoc/features.hpp"
#include "moodassoc/io.hpp"
#include "moodassoc/random.hpp"

namespace moodassoc {

struct TrainConfig {
    double l2_lambda = 1e-4;
    uint64_t max_iters = 500;
    double tol = 1e-7;  // relative loss decrease
    double init_step = 1.0;
    double backtrack_factor = 0.5;
    double armijo_c = 1e-4;
    size_t hidden_width = 32;
    bool class_weighting = false;  // inverse-frequency weights, off by default
    uint64_t seed = 0;

    void validate() const {
        if (l2_lambda < 0) throw ConfigError("l2_lambda must be >= 0");
        if (max_iters == 0) throw ConfigError("max_iters must be positive");
        if (tol <= 0) throw ConfigError("tol must be positive");
        if (init_step <= 0) throw ConfigError("init_step must be positive");
        if (!(backtrack_factor > 0 && backtrack_factor < 1))
            throw ConfigError("backtrack_factor must be in (0,1)");
        if (!(armijo_c > 0 && armijo_c < 1)) throw ConfigError("armijo_c must be in (0,1)");
    }
};

struct TrainMeta {
    uint64_t n_pos = 0;
    uint64_t n_neg = 0;
    double final_loss = 0;
    uint64_t n_iters = 0;
    uint64_t seed = 0;
};

inline double sigmoid(double z) {
    if (z >= 0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

inline double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

namespace detail {

// Full-batch gradient descent with Armijo backtracking. The objective
// callback fills grad only when asked, so rejected line-search probes pay for
// a loss evaluation alone.
struct MinimizeResult {
    double final_loss = 0;
    uint64_t n_iters = 0;
};

inline MinimizeResult minimize(
    std::vector<double>& theta,
    const std::function<double(std::span<const double>, std::vector<double>*)>& objective,
    const TrainConfig& config) {
    std::vector<double> grad(theta.size(), 0.0);
    std::vector<double> candidate(theta.size(), 0.0);
    double loss = objective(theta, &grad);
    double step = config.init_step;
    MinimizeResult result{loss, 0};
    for (uint64_t iter = 0; iter < config.max_iters; ++iter) {
        double gnorm2 = 0;
        for (double g : grad) gnorm2 += g * g;
        if (gnorm2 < 1e-24) break;
        double t = step;
        double new_loss = 0;
        bool accepted = false;
        while (t >= 1e-20) {
            for (size_t i = 0; i < theta.size(); ++i) candidate[i] = theta[i] - t * grad[i];
            new_loss = objective(candidate, nullptr);
            if (new_loss <= loss - config.armijo_c * t * gnorm2) {
                accepted = true;
                break;
            }
            t *= config.backtrack_factor;
        }
        if (!accepted) break;
        theta.swap(candidate);
        double decrease = loss - new_loss;
        loss = new_loss;
        result.n_iters = iter + 1;
        objective(theta, &grad);
        step = std::min(t * 2.0, 1e6);
        if (decrease < config.tol * std::max(std::abs(loss), 1e-12)) break;
    }
    result.final_loss = loss;
    return result;
}

template <class Row>
void check_rows(std::span<const Row> X, std::span<const int> y) {
    if (X.size() != y.size()) throw DataError("feature/label count mismatch");
    if (X.empty()) throw DataError("empty training set");
    size_t d = X[0].dim_count();
    for (size_t i = 0; i < X.size(); ++i) {
        if (X[i].dim_count() != d)
            throw DataError("inconsistent feature dimensions at row " + std::to_string(i));
        if (!X[i].finite())
            throw DataError("non-finite feature at row " + std::to_string(i));
        if (y[i] != 0 && y[i] != 1)
            throw DataError("labels must be 0/1; bad value at row " + std::to_string(i));
    }
}

inline std::pair<uint64_t, uint64_t> class_counts(std::span<const int> y) {
    uint64_t n_pos = 0;
    for (int v : y) n_pos += (v == 1);
    uint64_t n_neg = y.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DataError("degenerate labels: need at least one example of each class");
    return {n_pos, n_neg};
}

inline std::vector<double> sample_weights(std::span<const int> y, uint64_t n_pos,
                                          uint64_t n_neg, bool class_weighting) {
    std::vector<double> w(y.size(), 1.0);
    if (!class_weighting) return w;
    double n = static_cast<double>(y.size());
    double wp = n / (2.0 * static_cast<double>(n_pos));
    double wn = n / (2.0 * static_cast<double>(n_neg));
    for (size_t i = 0; i < y.size(); ++i) w[i] = y[i] == 1 ? wp : wn;
    return w;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticModel {
    std::string mood_term;
    std::vector<double> weights;
    double bias = 0;
    double l2_lambda = 0;
    TrainMeta train_meta;

    size_t dims() const { return weights.size(); }
};

// Mean weighted binary cross-entropy plus (l2/2)||w||^2 with the bias
// unregularized. theta is [w | b]; grad, when non-null, is overwritten.
// Exposed so gradient-check harnesses can probe the exact training loss.
template <class Row>
double logistic_objective(std::span<const Row> X, std::span<const int> y,
                          std::span<const double> sample_weights,
                          std::span<const double> theta, double l2,
                          std::vector<double>* grad) {
    size_t d = theta.size() - 1;
    std::span<const double> w = theta.subspan(0, d);
    double b = theta[d];
    if (grad) {
        grad->assign(theta.size(), 0.0);
    }
    double n = static_cast<double>(X.size());
    double loss = 0;
    for (size_t i = 0; i < X.size(); ++i) {
        double z = X[i].dot(w) + b;
        double yi = static_cast<double>(y[i]);
        loss += sample_weights[i] * (softplus(z) - yi * z);
        if (grad) {
            double dz = sample_weights[i] * (sigmoid(z) - yi) / n;
            X[i].add_scaled_to(std::span<double>(grad->data(), d), dz);
            (*grad)[d] += dz;
        }
    }
    loss /= n;
    for (size_t i = 0; i < d; ++i) {
        loss += 0.5 * l2 * w[i] * w[i];
        if (grad) (*grad)[i] += l2 * w[i];
    }
    return loss;
}

// Deterministic given (X, y, config): full-batch descent from the zero
// vector.
template <class Row>
LogisticModel train_logistic(std::span<const Row> X, std::span<const int> y,
                             const TrainConfig& config, std::string mood_term = "") {
    config.validate();
    detail::check_rows(X, y);
    auto [n_pos, n_neg] = detail::class_counts(y);
    std::vector<double> sw = detail::sample_weights(y, n_pos, n_neg, config.class_weighting);

    size_t d = X[0].dim_count();
    auto objective = [&](std::span<const double> theta, std::vector<double>* grad) {
        return logistic_objective(X, y, sw, theta, config.l2_lambda, grad);
    };

    std::vector<double> theta(d + 1, 0.0);
    detail::MinimizeResult res = detail::minimize(theta, objective, config);

    LogisticModel model;
    model.mood_term = std::move(mood_term);
    model.weights.assign(theta.begin(), theta.begin() + d);
    model.bias = theta[d];
    model.l2_lambda = config.l2_lambda;
    model.train_meta = {n_pos, n_neg, res.final_loss, res.n_iters, config.seed};
    return model;
}

template <class Row>
double predict(const LogisticModel& model, const Row& x) {
    return sigmoid(x.dot(model.weights) + model.bias);
}

enum class Decision { Negative, Positive };

inline std::string to_string(Decision d) {
    return d == Decision::Positive ? "Positive" : "Negative";
}

inline Decision classify(double prob, double threshold = 0.5) {
    if (!(prob >= 0.0 && prob <= 1.0))
        throw DataError("probability out of [0,1]: " + std::to_string(prob));
    return prob >= threshold ? Decision::Positive : Decision::Negative;
}

// ---------------------------------------------------------------------------
// Hybrid head

struct HybridHead {
    std::string mood_term;
    size_t acoustic_dim = 0;
    size_t embedding_dim = 0;
    size_t hidden_width = 0;
    std::vector<double> w1;  // hidden_width x acoustic_dim, row-major
    std::vector<double> b1;  // hidden_width
    std::vector<double> w2;  // embedding_dim + hidden_width
    double b2 = 0;
    double l2_lambda = 0;
    TrainMeta train_meta;

    size_t n_params() const { return w1.size() + b1.size() + w2.size() + 1; }
};

// theta layout: [w1 | b1 | w2 | b2]
struct HybridShape {
    size_t acoustic_dim, embedding_dim, hidden_width;
    size_t w1_size() const { return hidden_width * acoustic_dim; }
    size_t w2_size() const { return embedding_dim + hidden_width; }
    size_t total() const { return w1_size() + hidden_width + w2_size() + 1; }
};

namespace detail {

inline double hybrid_forward(const HybridShape& s, std::span<const double> theta,
                             std::span<const double> embed, std::span<const double> acoustic,
                             std::vector<double>& h_pre) {
    const double* w1 = theta.data();
    const double* b1 = theta.data() + s.w1_size();
    const double* w2 = b1 + s.hidden_width;
    double b2 = theta[s.total() - 1];
    h_pre.resize(s.hidden_width);
    double z = b2;
    for (size_t j = 0; j < s.hidden_width; ++j) {
        double acc = b1[j];
        const double* row = w1 + j * s.acoustic_dim;
        for (size_t i = 0; i < s.acoustic_dim; ++i) acc += row[i] * acoustic[i];
        h_pre[j] = acc;
        if (acc > 0) z += w2[s.embedding_dim + j] * acc;  // relu
    }
    for (size_t i = 0; i < s.embedding_dim; ++i) z += w2[i] * embed[i];
    return z;
}

}  // namespace detail

// Weighted binary cross-entropy over the hybrid architecture, with
// (l2/2)(||w1||^2 + ||w2||^2) and biases unregularized. ReLU backprop uses
// the h_pre > 0 subgradient.
inline double hybrid_objective(std::span<const DenseVector> embeddings,
                               std::span<const DenseVector> acoustics,
                               std::span<const int> y,
                               std::span<const double> sample_weights,
                               const HybridShape& shape, std::span<const double> theta,
                               double l2, std::vector<double>* grad) {
    if (grad) grad->assign(theta.size(), 0.0);
    const double* w2 = theta.data() + shape.w1_size() + shape.hidden_width;
    double n = static_cast<double>(y.size());
    double loss = 0;
    std::vector<double> h_pre;
    for (size_t i = 0; i < y.size(); ++i) {
        double z = detail::hybrid_forward(shape, theta, embeddings[i].values,
                                          acoustics[i].values, h_pre);
        double yi = static_cast<double>(y[i]);
        loss += sample_weights[i] * (softplus(z) - yi * z);
        if (!grad) continue;
        double dz = sample_weights[i] * (sigmoid(z) - yi) / n;
        double* g_w1 = grad->data();
        double* g_b1 = g_w1 + shape.w1_size();
        double* g_w2 = g_b1 + shape.hidden_width;
        double& g_b2 = (*grad)[shape.total() - 1];
        for (size_t k = 0; k < shape.embedding_dim; ++k) {
            g_w2[k] += dz * embeddings[i].values[k];
        }
        for (size_t j = 0; j < shape.hidden_width; ++j) {
            double h = h_pre[j] > 0 ? h_pre[j] : 0.0;
            g_w2[shape.embedding_dim + j] += dz * h;
            if (h_pre[j] > 0) {
                double dh = dz * w2[shape.embedding_dim + j];
                double* g_row = g_w1 + j * shape.acoustic_dim;
                for (size_t k = 0; k < shape.acoustic_dim; ++k) {
                    g_row[k] += dh * acoustics[i].values[k];
                }
                g_b1[j] += dh;
            }
        }
        g_b2 += dz;
    }
    loss /= n;
    for (size_t i = 0; i < shape.w1_size(); ++i) {
        loss += 0.5 * l2 * theta[i] * theta[i];
        if (grad) (*grad)[i] += l2 * theta[i];
    }
    size_t w2_off = shape.w1_size() + shape.hidden_width;
    for (size_t i = 0; i < shape.w2_size(); ++i) {
        loss += 0.5 * l2 * theta[w2_off + i] * theta[w2_off + i];
        if (grad) (*grad)[w2_off + i] += l2 * theta[w2_off + i];
    }
    return loss;
}

// Joint gradient training of the acoustic MLP and the classification layer
// over [embedding ; relu(W1 a + b1)]. Weight init is seeded uniform on
// [-1/sqrt(fan_in), 1/sqrt(fan_in)]; hidden_width 0 reduces the architecture
// to logistic regression on the embedding alone.
inline HybridHead train_hybrid_head(std::span<const DenseVector> embeddings,
                                    std::span<const DenseVector> acoustics,
                                    std::span<const int> y, const TrainConfig& config,
                                    std::string mood_term = "") {
    config.validate();
    if (embeddings.size() != acoustics.size() || embeddings.size() != y.size())
        throw DataError("hybrid training inputs must align");
    detail::check_rows(embeddings, y);
    if (!acoustics.empty()) {
        size_t ad = acoustics[0].dims();
        for (size_t i = 0; i < acoustics.size(); ++i) {
            if (acoustics[i].dims() != ad)
                throw DataError("inconsistent acoustic dimensions at row " + std::to_string(i));
            if (!acoustics[i].finite())
                throw DataError("non-finite acoustic feature at row " + std::to_string(i));
        }
    }
    auto [n_pos, n_neg] = detail::class_counts(y);
    std::vector<double> sw = detail::sample_weights(y, n_pos, n_neg, config.class_weighting);

    HybridShape shape{acoustics[0].dims(), embeddings[0].dims(), config.hidden_width};
    auto objective = [&](std::span<const double> theta, std::vector<double>* grad) {
        return hybrid_objective(embeddings, acoustics, y, sw, shape, theta,
                                config.l2_lambda, grad);
    };

    std::vector<double> theta(shape.total(), 0.0);
    Rng rng(config.seed, "hybrid-init");
    double mlp_bound = shape.acoustic_dim > 0 ? 1.0 / std::sqrt(static_cast<double>(shape.acoustic_dim)) : 0.0;
    for (size_t i = 0; i < shape.w1_size() + shape.hidden_width; ++i) {
        theta[i] = rng.uniform(-mlp_bound, mlp_bound);
    }
    double head_bound = 1.0 / std::sqrt(static_cast<double>(shape.w2_size()));
    for (size_t i = shape.w1_size() + shape.hidden_width; i < shape.total(); ++i) {
        theta[i] = rng.uniform(-head_bound, head_bound);
    }

    detail::MinimizeResult res = detail::minimize(theta, objective, config);

    HybridHead model;
    model.mood_term = std::move(mood_term);
    model.acoustic_dim = shape.acoustic_dim;
    model.embedding_dim = shape.embedding_dim;
    model.hidden_width = shape.hidden_width;
    model.w1.assign(theta.begin(), theta.begin() + shape.w1_size());
    model.b1.assign(theta.begin() + shape.w1_size(),
                    theta.begin() + shape.w1_size() + shape.hidden_width);
    model.w2.assign(theta.begin() + shape.w1_size() + shape.hidden_width,
                    theta.end() - 1);
    model.b2 = theta.back();
    model.l2_lambda = config.l2_lambda;
    model.train_meta = {n_pos, n_neg, res.final_loss, res.n_iters, config.seed};
    return model;
}

inline double predict(const HybridHead& model, const DenseVector& embedding,
                      const DenseVector& acoustic) {
    if (embedding.dims() != model.embedding_dim || acoustic.dims() != model.acoustic_dim)
        throw DataError("hybrid predict: dimension mismatch");
    HybridShape shape{model.acoustic_dim, model.embedding_dim, model.hidden_width};
    std::vector<double> theta;
    theta.reserve(shape.total());
    theta.insert(theta.end(), model.w1.begin(), model.w1.end());
    theta.insert(theta.end(), model.b1.begin(), model.b1.end());
    theta.insert(theta.end(), model.w2.begin(), model.w2.end());
    theta.push_back(model.b2);
    std::vector<double> h_pre;
    return sigmoid(detail::hybrid_forward(shape, theta, embedding.values, acoustic.values, h_pre));
}

// ---------------------------------------------------------------------------
// Serialization: versioned JSON (default) or little-endian binary.

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json meta_to_json(const TrainMeta& m) {
    return {{"n_pos", m.n_pos}, {"n_neg", m.n_neg}, {"final_loss", m.final_loss},
            {"n_iters", m.n_iters}, {"seed", m.seed}};
}

inline TrainMeta meta_from_json(const nlohmann::json& j) {
    TrainMeta m;
    m.n_pos = j.at("n_pos").get<uint64_t>();
    m.n_neg = j.at("n_neg").get<uint64_t>();
    m.final_loss = j.at("final_loss").get<double>();
    m.n_iters = j.at("n_iters").get<uint64_t>();
    m.seed = j.at("seed").get<uint64_t>();
    return m;
}

inline void write_u64(std::ostream& out, uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

inline uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw DataError("model file truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

inline void write_f64(std::ostream& out, double v) {
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

inline double read_f64(std::istream& in) {
    uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void write_str(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_str(std::istream& in) {
    uint64_t n = read_u64(in);
    if (n > (1ULL << 20)) throw DataError("model file: implausible string length");
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw DataError("model file truncated");
    return s;
}

inline constexpr char kBinaryMagic[4] = {'M', 'D', 'L', 'B'};

}  // namespace detail

enum class ModelFormat { Json, Binary };

inline void save_model(std::ostream& out, const LogisticModel& model,
                       ModelFormat format = ModelFormat::Json) {
    if (format == ModelFormat::Json) {
        nlohmann::json j;
        j["format_version"] = kModelFormatVersion;
        j["kind"] = "logistic";
        j["mood"] = model.mood_term;
        j["dims"] = model.dims();
        j["weights"] = model.weights;
        j["bias"] = model.bias;
        j["l2_lambda"] = model.l2_lambda;
        j["train_meta"] = detail::meta_to_json(model.train_meta);
        out << j.dump(2) << '\n';
        return;
    }
    out.write(detail::kBinaryMagic, 4);
    detail::write_u64(out, kModelFormatVersion);
    detail::write_str(out, "logistic");
    detail::write_str(out, model.mood_term);
    detail::write_u64(out, model.dims());
    for (double w : model.weights) detail::write_f64(out, w);
    detail::write_f64(out, model.bias);
    detail::write_f64(out, model.l2_lambda);
    detail::write_u64(out, model.train_meta.n_pos);
    detail::write_u64(out, model.train_meta.n_neg);
    detail::write_f64(out, model.train_meta.final_loss);
    detail::write_u64(out, model.train_meta.n_iters);
    detail::write_u64(out, model.train_meta.seed);
}

inline void save_model(std::ostream& out, const HybridHead& model,
                       ModelFormat format = ModelFormat::Json) {
    if (format == ModelFormat::Json) {
        nlohmann::json j;
        j["format_version"] = kModelFormatVersion;
        j["kind"] = "hybrid_head";
        j["mood"] = model.mood_term;
        j["dims"] = {{"acoustic", model.acoustic_dim},
                     {"embedding", model.embedding_dim},
                     {"hidden", model.hidden_width}};
        j["w1"] = model.w1;
        j["b1"] = model.b1;
        j["w2"] = model.w2;
        j["b2"] = model.b2;
        j["l2_lambda"] = model.l2_lambda;
        j["train_meta"] = detail::meta_to_json(model.train_meta);
        out << j.dump(2) << '\n';
        return;
    }
    out.write(detail::kBinaryMagic, 4);
    detail::write_u64(out, kModelFormatVersion);
    detail::write_str(out, "hybrid_head");
    detail::write_str(out, model.mood_term);
    detail::write_u64(out, model.acoustic_dim);
    detail::write_u64(out, model.embedding_dim);
    detail::write_u64(out, model.hidden_width);
    for (double w : model.w1) detail::write_f64(out, w);
    for (double w : model.b1) detail::write_f64(out, w);
    for (double w : model.w2) detail::write_f64(out, w);
    detail::write_f64(out, model.b2);
    detail::write_f64(out, model.l2_lambda);
    detail::write_u64(out, model.train_meta.n_pos);
    detail::write_u64(out, model.train_meta.n_neg);
    detail::write_f64(out, model.train_meta.final_loss);
    detail::write_u64(out, model.train_meta.n_iters);
    detail::write_u64(out, model.train_meta.seed);
}

using AnyModel = std::variant<LogisticModel, HybridHead>;

inline AnyModel load_model(std::istream& in) {
    int first = in.peek();
    if (first == '{') {
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw DataError("model file: invalid JSON");
        int version = j.value("format_version", -1);
        if (version != kModelFormatVersion)
            throw DataError("unsupported model format version: " + std::to_string(version));
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "logistic") {
            LogisticModel m;
            m.mood_term = j.at("mood").get<std::string>();
            m.weights = j.at("weights").get<std::vector<double>>();
            if (m.weights.size() != j.at("dims").get<size_t>())
                throw DataError("model file: dims header disagrees with weights");
            m.bias = j.at("bias").get<double>();
            m.l2_lambda = j.at("l2_lambda").get<double>();
            m.train_meta = detail::meta_from_json(j.at("train_meta"));
            return m;
        }
        if (kind == "hybrid_head") {
            HybridHead m;
            m.mood_term = j.at("mood").get<std::string>();
            m.acoustic_dim = j.at("dims").at("acoustic").get<size_t>();
            m.embedding_dim = j.at("dims").at("embedding").get<size_t>();
            m.hidden_width = j.at("dims").at("hidden").get<size_t>();
            m.w1 = j.at("w1").get<std::vector<double>>();
            m.b1 = j.at("b1").get<std::vector<double>>();
            m.w2 = j.at("w2").get<std::vector<double>>();
            if (m.w1.size() != m.hidden_width * m.acoustic_dim ||
                m.b1.size() != m.hidden_width ||
                m.w2.size() != m.embedding_dim + m.hidden_width)
                throw DataError("model file: dims header disagrees with parameters");
            m.b2 = j.at("b2").get<double>();
            m.l2_lambda = j.at("l2_lambda").get<double>();
            m.train_meta = detail::meta_from_json(j.at("train_meta"));
            return m;
        }
        throw DataError("model file: unknown kind \"" + kind + "\"");
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::kBinaryMagic, 4) != 0)
        throw DataError("model file: bad magic");
    uint64_t version = detail::read_u64(in);
    if (version != kModelFormatVersion)
        throw DataError("unsupported model format version: " + std::to_string(version));
    std::string kind = detail::read_str(in);
    if (kind == "logistic") {
        LogisticModel m;
        m.mood_term = detail::read_str(in);
        uint64_t d = detail::read_u64(in);
        m.weights.resize(d);
        for (auto& w : m.weights) w = detail::read_f64(in);
        m.bias = detail::read_f64(in);
        m.l2_lambda = detail::read_f64(in);
        m.train_meta.n_pos = detail::read_u64(in);
        m.train_meta.n_neg = detail::read_u64(in);
        m.train_meta.final_loss = detail::read_f64(in);
        m.train_meta.n_iters = detail::read_u64(in);
        m.train_meta.seed = detail::read_u64(in);
        return m;
    }
    if (kind == "hybrid_head") {
        HybridHead m;
        m.mood_term = detail::read_str(in);
        m.acoustic_dim = detail::read_u64(in);
        m.embedding_dim = detail::read_u64(in);
        m.hidden_width = detail::read_u64(in);
        m.w1.resize(m.hidden_width * m.acoustic_dim);
        m.b1.resize(m.hidden_width);
        m.w2.resize(m.embedding_dim + m.hidden_width);
        for (auto& w : m.w1) w = detail::read_f64(in);
        for (auto& w : m.b1) w = detail::read_f64(in);
        for (auto& w : m.w2) w = detail::read_f64(in);
        m.b2 = detail::read_f64(in);
        m.l2_lambda = detail::read_f64(in);
        m.train_meta.n_pos = detail::read_u64(in);
        m.train_meta.n_neg = detail::read_u64(in);
        m.train_meta.final_loss = detail::read_f64(in);
        m.train_meta.n_iters = detail::read_u64(in);
        m.train_meta.seed = detail::read_u64(in);
        return m;
    }
    throw DataError("model file: unknown kind \"" + kind + "\"");
}

inline void save_model(const std::filesystem::path& path, const AnyModel& model,
                       ModelFormat format = ModelFormat::Json) {
    std::ofstream out = open_output(path);
    std::visit([&](const auto& m) { save_model(out, m, format); }, model);
}

inline AnyModel load_model(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    try {
        return load_model(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace moodassoc
