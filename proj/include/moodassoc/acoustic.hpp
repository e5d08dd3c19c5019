#pragma once

// The 17 numerical acoustic descriptors a song arrives with. Field order is
// fixed and is the dimension order of every acoustic feature vector.

#include <array>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "moodassoc/errors.hpp"

namespace moodassoc {

struct AcousticFeatures {
    double acousticness = 0;
    double bounciness = 0;
    double beat_strength = 0;
    double danceability = 0;
    double energy = 0;
    double flatness = 0;
    double instrumentalness = 0;
    double liveness = 0;
    double loudness = 0;
    double longest_silence_ratio = 0;
    double mechanism = 0;
    double organism = 0;
    double runnability = 0;
    double speechiness = 0;
    double tempo = 0;
    double valence = 0;
    double mean_dynamic_range = 0;

    static constexpr size_t kCount = 17;

    static const std::array<std::string, kCount>& names() {
        static const std::array<std::string, kCount> n = {
            "acousticness", "bounciness", "beat_strength", "danceability",
            "energy", "flatness", "instrumentalness", "liveness", "loudness",
            "longest_silence_ratio", "mechanism", "organism", "runnability",
            "speechiness", "tempo", "valence", "mean_dynamic_range"};
        return n;
    }

    std::array<double, kCount> as_array() const {
        return {acousticness, bounciness, beat_strength, danceability, energy,
                flatness, instrumentalness, liveness, loudness,
                longest_silence_ratio, mechanism, organism, runnability,
                speechiness, tempo, valence, mean_dynamic_range};
    }

    double& at(size_t i) {
        double* fields[kCount] = {
            &acousticness, &bounciness, &beat_strength, &danceability, &energy,
            &flatness, &instrumentalness, &liveness, &loudness,
            &longest_silence_ratio, &mechanism, &organism, &runnability,
            &speechiness, &tempo, &valence, &mean_dynamic_range};
        if (i >= kCount) throw InternalError("acoustic feature index out of range");
        return *fields[i];
    }

    void validate() const {
        auto a = as_array();
        for (size_t i = 0; i < kCount; ++i) {
            if (!std::isfinite(a[i]))
                throw DataError("acoustic feature \"" + names()[i] + "\" is not finite");
        }
    }

    static AcousticFeatures from_json(const nlohmann::json& obj) {
        AcousticFeatures f;
        for (size_t i = 0; i < kCount; ++i) {
            auto it = obj.find(names()[i]);
            if (it == obj.end())
                throw DataError("acoustic object missing field \"" + names()[i] + "\"");
            if (!it->is_number())
                throw DataError("acoustic field \"" + names()[i] + "\" is not a number");
            f.at(i) = it->get<double>();
        }
        f.validate();
        return f;
    }

    nlohmann::json to_json() const {
        nlohmann::json obj;
        auto a = as_array();
        for (size_t i = 0; i < kCount; ++i) obj[names()[i]] = a[i];
        return obj;
    }
};

}  // namespace moodassoc
