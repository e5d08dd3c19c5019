// moodassoc CLI: playlist-derived song-mood association scoring, per-mood
// classifier training and evaluation, annotation agreement, and a synthetic
// corpus generator for end-to-end validation.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "moodassoc/pipeline.hpp"

namespace {

struct FlagState {
    std::string config_file;
    // flag values mirror PipelineConfig; CLI11 tracks which were supplied so
    // precedence is flags > config file > defaults
    moodassoc::PipelineConfig flags;
};

void add_common_options(CLI::App* cmd, FlagState& state) {
    cmd->add_option("--config", state.config_file, "key=value config file");
    auto& f = state.flags;
    cmd->add_option("--playlists", f.playlists_path, "playlists JSONL");
    cmd->add_option("--songs", f.songs_path, "songs JSONL");
    cmd->add_option("--lexicon", f.lexicon_path, "mood lexicon CSV");
    cmd->add_option("--embeddings", f.embeddings_path, "precomputed lyric embeddings CSV");
    cmd->add_option("--annotations", f.annotations_path, "annotation CSV");
    cmd->add_option("--scores", f.scores_path, "scores CSV (from the score subcommand)");
    cmd->add_option("--models", f.models_dir, "models directory");
    cmd->add_option("--predictions", f.predictions_path, "predictions CSV");
    cmd->add_option("--truth", f.truth_path, "truth CSV song_id,mood,label");
    cmd->add_option("--out", f.output_dir, "output directory");
    cmd->add_option("--tau", f.tau, "binning threshold in (0,1)");
    cmd->add_option("--train-fraction", f.train_fraction, "train split fraction in (0,1)");
    cmd->add_option("--seed", f.seed, "top-level seed; all randomness derives from it");
    cmd->add_option("--min-df", f.min_df, "vocabulary document-frequency floor");
    cmd->add_option("--histogram-bins", f.histogram_bins, "score histogram bins");
    cmd->add_option("--top-k", f.top_k, "top positive moods to report");
    cmd->add_option("--threads", f.threads, "worker thread bound");
    cmd->add_flag("--strict-parse", f.strict_parse, "fail on the first malformed line");
    cmd->add_flag("--include-zero-joint", f.include_zero_joint,
                  "also score pairs that never co-occur");
    cmd->add_option("--model-format", f.model_format, "model file format: json|binary");
    cmd->add_option("--kinds", f.kinds, "model kinds: bow,acoustic,hybrid_bow,hybrid_embed");
    cmd->add_option("--subset", f.subset, "prediction subset: train|test|all");
    cmd->add_option("--sweep-start", f.sweep_start, "first sweep threshold");
    cmd->add_option("--sweep-stop", f.sweep_stop, "last sweep threshold");
    cmd->add_option("--sweep-step", f.sweep_step, "sweep threshold step");
    cmd->add_option("--l2-lambda", f.train.l2_lambda, "L2 regularization strength");
    cmd->add_option("--max-iters", f.train.max_iters, "gradient descent iteration cap");
    cmd->add_option("--tol", f.train.tol, "relative loss-decrease stopping tolerance");
    cmd->add_option("--hidden-width", f.train.hidden_width, "hybrid head MLP width");
    cmd->add_flag("--class-weighting", f.train.class_weighting,
                  "inverse-frequency class weights");
    cmd->add_option("--sim-songs", f.sim.n_songs, "simulator: song count");
    cmd->add_option("--sim-moods", f.sim.n_moods, "simulator: mood count");
    cmd->add_option("--sim-playlists", f.sim.n_playlists, "simulator: playlist count");
    cmd->add_option("--sim-tracks-min", f.sim.tracks_min, "simulator: min tracks per playlist");
    cmd->add_option("--sim-tracks-max", f.sim.tracks_max, "simulator: max tracks per playlist");
    cmd->add_option("--sim-title-prob", f.sim.mood_title_probability,
                    "simulator: mood term in title probability");
    cmd->add_option("--sim-concentration", f.sim.affinity_concentration,
                    "simulator: affinity concentration (higher = sparser rows)");
    cmd->add_option("--sim-noise", f.sim.noise_playlist_fraction,
                    "simulator: noise playlist fraction");
    cmd->add_option("--sim-vocab", f.sim.lyric_vocab_size, "simulator: lyric vocabulary size");
    cmd->add_option("--sim-embedding-dim", f.sim.embedding_dim,
                    "simulator: embedding dimension");
}

// flags > config file > defaults
moodassoc::PipelineConfig resolve_config(const CLI::App* cmd, const FlagState& state) {
    moodassoc::PipelineConfig cfg;
    if (!state.config_file.empty()) {
        moodassoc::load_config_file(cfg, state.config_file);
    }
    auto take = [&](const char* name, auto member) {
        const CLI::Option* opt = cmd->get_option(name);
        if (opt && opt->count() > 0) cfg.*member = state.flags.*member;
    };
    take("--playlists", &moodassoc::PipelineConfig::playlists_path);
    take("--songs", &moodassoc::PipelineConfig::songs_path);
    take("--lexicon", &moodassoc::PipelineConfig::lexicon_path);
    take("--embeddings", &moodassoc::PipelineConfig::embeddings_path);
    take("--annotations", &moodassoc::PipelineConfig::annotations_path);
    take("--scores", &moodassoc::PipelineConfig::scores_path);
    take("--models", &moodassoc::PipelineConfig::models_dir);
    take("--predictions", &moodassoc::PipelineConfig::predictions_path);
    take("--truth", &moodassoc::PipelineConfig::truth_path);
    take("--out", &moodassoc::PipelineConfig::output_dir);
    take("--tau", &moodassoc::PipelineConfig::tau);
    take("--train-fraction", &moodassoc::PipelineConfig::train_fraction);
    take("--seed", &moodassoc::PipelineConfig::seed);
    take("--min-df", &moodassoc::PipelineConfig::min_df);
    take("--histogram-bins", &moodassoc::PipelineConfig::histogram_bins);
    take("--top-k", &moodassoc::PipelineConfig::top_k);
    take("--threads", &moodassoc::PipelineConfig::threads);
    take("--strict-parse", &moodassoc::PipelineConfig::strict_parse);
    take("--include-zero-joint", &moodassoc::PipelineConfig::include_zero_joint);
    take("--model-format", &moodassoc::PipelineConfig::model_format);
    take("--kinds", &moodassoc::PipelineConfig::kinds);
    take("--subset", &moodassoc::PipelineConfig::subset);
    take("--sweep-start", &moodassoc::PipelineConfig::sweep_start);
    take("--sweep-stop", &moodassoc::PipelineConfig::sweep_stop);
    take("--sweep-step", &moodassoc::PipelineConfig::sweep_step);
    auto take_train = [&](const char* name, auto member) {
        const CLI::Option* opt = cmd->get_option(name);
        if (opt && opt->count() > 0) cfg.train.*member = state.flags.train.*member;
    };
    take_train("--l2-lambda", &moodassoc::TrainConfig::l2_lambda);
    take_train("--max-iters", &moodassoc::TrainConfig::max_iters);
    take_train("--tol", &moodassoc::TrainConfig::tol);
    take_train("--hidden-width", &moodassoc::TrainConfig::hidden_width);
    take_train("--class-weighting", &moodassoc::TrainConfig::class_weighting);
    auto take_sim = [&](const char* name, auto member) {
        const CLI::Option* opt = cmd->get_option(name);
        if (opt && opt->count() > 0) cfg.sim.*member = state.flags.sim.*member;
    };
    take_sim("--sim-songs", &moodassoc::SimConfig::n_songs);
    take_sim("--sim-moods", &moodassoc::SimConfig::n_moods);
    take_sim("--sim-playlists", &moodassoc::SimConfig::n_playlists);
    take_sim("--sim-tracks-min", &moodassoc::SimConfig::tracks_min);
    take_sim("--sim-tracks-max", &moodassoc::SimConfig::tracks_max);
    take_sim("--sim-title-prob", &moodassoc::SimConfig::mood_title_probability);
    take_sim("--sim-concentration", &moodassoc::SimConfig::affinity_concentration);
    take_sim("--sim-noise", &moodassoc::SimConfig::noise_playlist_fraction);
    take_sim("--sim-vocab", &moodassoc::SimConfig::lyric_vocab_size);
    take_sim("--sim-embedding-dim", &moodassoc::SimConfig::embedding_dim);
    cfg.sim.seed = cfg.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"song-mood association pipeline over playlist co-occurrence"};
    app.require_subcommand(1);

    const char* subcommands[] = {"ingest", "score",    "train",    "predict", "evaluate",
                                 "sweep",  "agree",    "simulate", "pipeline"};
    const char* descriptions[] = {
        "parse playlists/songs, dedupe, and write the train/test split",
        "count co-occurrences, fit priors, and write BNPMI scores",
        "train per-mood classifiers on the training split",
        "apply saved models to a corpus subset",
        "score predictions against the binned association labels",
        "precision/recall vs threshold for BNPMI scores",
        "annotation agreement, verdicts, consensus, and BNPMI vs annotation",
        "generate a synthetic corpus with known ground truth",
        "simulate, score, train, predict, evaluate, and sweep end to end"};

    std::map<const CLI::App*, FlagState> states;
    for (size_t i = 0; i < 9; ++i) {
        CLI::App* cmd = app.add_subcommand(subcommands[i], descriptions[i]);
        add_common_options(cmd, states[cmd]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    const CLI::App* cmd = app.get_subcommands().front();
    try {
        moodassoc::PipelineConfig cfg = resolve_config(cmd, states.at(cmd));
        moodassoc::run(cmd->get_name(), cfg);
        return 0;
    } catch (const moodassoc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const moodassoc::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const moodassoc::InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
