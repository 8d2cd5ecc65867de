#include "common/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace racelab {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// key -> default value; the single source of truth for the config surface.
const std::vector<std::pair<std::string, std::string>>& default_table() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      // run selection
      {"track", "oval"},             // oval | scurve | path to a .meta file
      {"mode", "single"},            // single | multi_static | multi_dynamic
      {"reward_mode", "single"},     // single | multi
      {"progress_mode", "signed_wrapped"},  // signed_wrapped | paper_absolute
      {"random_start", "true"},      // training resets sample random on-track poses

      // vehicle
      {"wheelbase_m", "0.33"},
      {"tau_v_s", "0.5"},
      {"tau_s_s", "0.1"},
      {"dt_s", "0.01"},
      {"max_speed_mps", "5.0"},
      {"max_steer_rad", "0.41887902047863906"},  // 24 degrees

      // sensors
      {"lidar_beams", "1080"},
      {"lidar_range_m", "15.0"},
      {"lidar_fov_deg", "270.0"},
      {"camera_fov_deg", "90.0"},
      {"image_size", "64"},
      {"local_map_extent_m", "8.0"},
      {"lidar_period_ticks", "4"},  // 25 Hz refresh against the 100 Hz tick

      // environment
      {"action_repeat", "4"},
      {"max_steps_train", "2000"},  // simulation ticks per training episode
      {"max_steps_eval", "4000"},
      {"obstacle_count", "5"},
      {"obstacle_gap_m", "2.0"},
      {"obstacle_ego_gap_m", "3.0"},
      {"car_length_m", "0.5"},
      {"car_width_m", "0.3"},
      {"follower_kp", "1.2"},
      {"follower_ki", "0.0"},
      {"follower_kd", "0.1"},
      {"follower_lookahead_m", "1.5"},
      {"follower_speed_mps", "3.0"},
      {"opponent_ahead_m", "3.0"},
      {"centerline_spacing_m", "0.25"},

      // world model
      {"variant", "multimodal_poe"},  // multimodal_poe | multi_rssm_concat | multimodal_map
      {"z_dim", "30"},
      {"h_dim", "200"},
      {"zpi_dim", "1080"},
      {"action_embed_dim", "32"},
      {"lidar_enc_hidden", "400"},
      {"lidar_enc_layers", "2"},
      {"conv_channels", "32,64,128,256"},
      {"conv_kernels", "4,3,3,3"},
      {"reward_head_hidden", "200"},
      {"map_dec_hidden", "512"},
      {"transition_hidden", "200"},
      {"posterior_hidden", "200"},
      {"beta_lidar", "1.0"},
      {"beta_camera", "1.0"},
      {"beta_map", "1.0"},
      {"beta_kl", "1.0"},
      {"poe_mode", "standard"},  // standard | paper_literal
      {"poe_unit_prior", "false"},
      {"zpi_feed", "sample"},  // sample | params
      {"std_floor", "1e-4"},

      // behavior
      {"horizon", "15"},
      {"gamma", "0.99"},
      {"lambda", "0.95"},
      {"actor_hidden", "200"},
      {"actor_layers", "2"},
      {"critic_hidden", "200"},
      {"critic_layers", "2"},
      {"explore_noise", "0.3"},
      {"explore_noise_floor", "0.05"},

      // optimization
      {"lr_model", "6e-4"},
      {"lr_actor", "8e-5"},
      {"lr_critic", "8e-5"},
      {"adam_beta1", "0.9"},
      {"adam_beta2", "0.999"},
      {"adam_eps", "1e-7"},
      {"grad_clip_norm", "100.0"},

      // harness
      {"train_steps", "100000"},  // environment-step budget
      {"prefill_steps", "5000"},
      {"updates_per_episode", "100"},
      {"batch_size", "16"},
      {"seq_len", "50"},
      {"imagine_starts", "0"},  // 0 = imagine from every posterior state
      {"buffer_capacity_steps", "20000"},
      {"checkpoint_every_steps", "10000"},
      {"eval_episodes", "30"},
      {"eval_horizon", "15"},
  };
  return table;
}

}  // namespace

std::map<std::string, std::string> read_kv_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw FormatError("line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return read_kv_text(ss.str());
}

Config::Config() {
  for (const auto& [k, v] : default_table()) values_[k] = v;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  for (const auto& [k, v] : read_kv_text(text)) cfg.set(k, v);
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw FormatError("unknown config key '" + key + "'");
  it->second = value;
}

double Config::get_f(const std::string& key) const {
  const std::string& s = get_s(key);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw FormatError("config key '" + key + "': '" + s + "' is not a number");
  return v;
}

int Config::get_i(const std::string& key) const {
  return static_cast<int>(get_l(key));
}

long Config::get_l(const std::string& key) const {
  const std::string& s = get_s(key);
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw FormatError("config key '" + key + "': '" + s + "' is not an integer");
  return v;
}

bool Config::get_b(const std::string& key) const {
  const std::string& s = get_s(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw FormatError("config key '" + key + "': '" + s + "' is not a bool");
}

const std::string& Config::get_s(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw FormatError("unknown config key '" + key + "'");
  return it->second;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  const std::string& s = get_s(key);
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    char* end = nullptr;
    long v = std::strtol(item.c_str(), &end, 10);
    if (end == item.c_str() || *end != '\0')
      throw FormatError("config key '" + key + "': '" + item + "' is not an integer");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw FormatError("config key '" + key + "': empty list");
  return out;
}

std::string Config::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

}  // namespace racelab
