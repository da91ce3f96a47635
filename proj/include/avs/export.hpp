// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "avs/model.hpp"
#include "avs/selection.hpp"
#include "avs/training.hpp"

namespace avs {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// One line per frame: "<frame>\t<score>" with six decimals.
inline std::string format_scores(const ImportanceScores& scores) {
  std::string out;
  for (std::size_t t = 0; t < scores.size(); ++t) out += std::to_string(t) + '\t' + fixed6(scores[t]) + '\n';
  return out;
}

// One line per shot: "<begin>\t<end>", end exclusive.
inline std::string format_segmentation(const ShotSegmentation& seg) {
  std::string out;
  for (std::size_t i = 0; i < seg.shot_count(); ++i)
    out += std::to_string(seg.begin(i)) + '\t' + std::to_string(seg.end(i)) + '\n';
  return out;
}

inline std::string format_summary(const Summary& s) {
  const double used = s.frame_count == 0 ? 0.0 : static_cast<double>(s.selected_frames()) / s.frame_count;
  std::string out = "# frames=" + std::to_string(s.frame_count) + " selected=" + std::to_string(s.selected_frames()) +
                    " budget_used=" + fixed6(used) + '\n';
  for (const auto& iv : s.intervals) out += std::to_string(iv.begin) + '\t' + std::to_string(iv.end) + '\n';
  return out;
}

inline Summary parse_summary(const std::string& text, const std::string& source = "summary") {
  std::istringstream in(text);
  std::string line;
  std::size_t frames = 0;
  bool have_header = false;
  std::vector<Interval> intervals;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string where = source + ":" + std::to_string(n) + ": ";
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("frames=");
      require(pos != std::string::npos, where + "header lacks frames=");
      try {
        frames = std::stoull(line.substr(pos + 7));
      } catch (const std::exception&) {
        throw Error(where + "bad frame count");
      }
      have_header = true;
      continue;
    }
    std::istringstream fields(line);
    Interval iv;
    std::string rest;
    require(static_cast<bool>(fields >> iv.begin >> iv.end) && !(fields >> rest), where + "expected '<begin>\\t<end>'");
    intervals.push_back(iv);
  }
  require(have_header, source + ": missing '# frames=' header");
  return Summary::from_intervals(frames, std::move(intervals));
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot write '" + path.string() + "'");
  out << text;
  require(static_cast<bool>(out), "write to '" + path.string() + "' failed");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json to_json(const EvalResult& r) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : r.per_user) users.push_back({{"precision", u.precision}, {"recall", u.recall}, {"f_score", u.f_score}});
  return {{"precision", r.precision},
          {"recall", r.recall},
          {"f_score", r.f_score},
          {"aggregation", to_string(r.mode)},
          {"per_user", users}};
}

// Run summary; wall time is left out so identical runs serialize identically.
inline nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_f_score", e.val_f_score}});
  return {{"epochs", epochs},
          {"stop_epoch", r.stop_epoch},
          {"best_epoch", r.best_epoch},
          {"best_f_score", r.best_f_score},
          {"early_stopped", r.early_stopped}};
}

inline nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j{{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs},
                   {"patience", c.patience},           {"seed", c.seed},
                   {"teacher_forcing", c.teacher_forcing}};
  j["clip_norm"] = c.clip_norm ? nlohmann::json(*c.clip_norm) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"variant", to_string(c.variant)},
          {"input_dim", c.input_dim},
          {"encoder_hidden", c.encoder_hidden},
          {"encoder_layers", c.encoder_layers},
          {"decoder_hidden", c.decoder_hidden},
          {"decoder_layers", c.decoder_layers},
          {"attention_hidden", c.attention_hidden},
          {"attention_scale", c.attention_scale}};
}

}  // namespace avs
