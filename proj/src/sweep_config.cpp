#include <fstream>
#include <set>
#include <sstream>

#include "hybridest/harness.hpp"

namespace hybridest {

const char* to_string(ChannelModel model) {
  return model == ChannelModel::exponential ? "exp" : "ray";
}

std::optional<ChannelModel> channel_model_from_string(std::string_view s) {
  if (s == "exp") return ChannelModel::exponential;
  if (s == "ray") return ChannelModel::ray;
  return std::nullopt;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("config key '" + key + "': trailing characters in '" + value + "'");
  }
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  const long l = static_cast<long>(v);
  if (static_cast<double>(l) != v) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  return l;
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

}  // namespace

void apply_override(SweepConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "m") {
    cfg.m = static_cast<int>(parse_long(key, value));
  } else if (key == "l") {
    cfg.l = static_cast<int>(parse_long(key, value));
  } else if (key == "t") {
    cfg.t = static_cast<int>(parse_long(key, value));
  } else if (key == "k") {
    cfg.k = static_cast<int>(parse_long(key, value));
  } else if (key == "a") {
    cfg.a = parse_double(key, value);
  } else if (key == "model") {
    const auto model = channel_model_from_string(value);
    if (!model) throw ConfigError("config key 'model': expected exp|ray, got '" + value + "'");
    cfg.model = *model;
  } else if (key == "ray_paths") {
    cfg.ray_paths = static_cast<int>(parse_long(key, value));
  } else if (key == "ray_spread_deg") {
    cfg.ray_spread_deg = parse_double(key, value);
  } else if (key == "ray_mean_deg") {
    cfg.ray_mean_deg = parse_double(key, value);
  } else if (key == "snr_db") {
    cfg.snr_db.clear();
    for (const std::string& part : split_commas(value)) {
      cfg.snr_db.push_back(parse_double(key, part));
    }
  } else if (key == "methods") {
    cfg.methods.clear();
    for (const std::string& part : split_commas(value)) {
      const auto method = design_method_from_string(part);
      if (!method) throw ConfigError("config key 'methods': unknown method '" + part + "'");
      cfg.methods.push_back(*method);
    }
  } else if (key == "phase_mode") {
    const auto mode = phase_mode_from_string(value);
    if (!mode || *mode == PhaseMode::quantized) {
      throw ConfigError(
          "config key 'phase_mode': expected unconstrained|phase_only (set quant_bits "
          "for quantization), got '" + value + "'");
    }
    cfg.phase_mode = *mode;
  } else if (key == "quant_bits") {
    cfg.quant_bits = static_cast<int>(parse_long(key, value));
  } else if (key == "trials") {
    cfg.trials = parse_long(key, value);
  } else if (key == "n_c") {
    cfg.n_c = parse_long(key, value);
  } else if (key == "epsilon") {
    cfg.epsilon = parse_double(key, value);
  } else if (key == "max_iter") {
    cfg.max_iter = static_cast<int>(parse_long(key, value));
  } else if (key == "seed") {
    const long long v = parse_long(key, value);
    if (v < 0) throw ConfigError("config key 'seed': must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

SweepConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  SweepConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
    apply_override(cfg, key, value);
  }
  return cfg;
}

void validate(const SweepConfig& cfg, bool se) {
  if (cfg.m < 1) throw ConfigError("config field 'm': must be >= 1");
  if (cfg.l < 1 || cfg.l > cfg.m) {
    throw ConfigError("config field 'l': must satisfy 1 <= l <= m");
  }
  if (cfg.t < 1) throw ConfigError("config field 't': must be >= 1");
  if (cfg.k < 1) throw ConfigError("config field 'k': must be >= 1");
  if (cfg.model == ChannelModel::exponential && !(cfg.a >= 0.0 && cfg.a < 1.0)) {
    throw ConfigError("config field 'a': must lie in [0, 1)");
  }
  if (cfg.model == ChannelModel::ray && cfg.ray_paths < 1) {
    throw ConfigError("config field 'ray_paths': must be >= 1");
  }
  if (cfg.snr_db.empty()) throw ConfigError("config field 'snr_db': grid is empty");
  if (cfg.methods.empty()) throw ConfigError("config field 'methods': list is empty");
  if (cfg.trials < 1) throw ConfigError("config field 'trials': must be >= 1");
  if (cfg.quant_bits < 0 || cfg.quant_bits > 16) {
    throw ConfigError("config field 'quant_bits': must lie in [0, 16]");
  }
  if (cfg.n_c < 0) throw ConfigError("config field 'n_c': must be >= 0");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("config field 'epsilon': must be positive");
  if (cfg.max_iter < 1) throw ConfigError("config field 'max_iter': must be >= 1");
  for (DesignMethod method : cfg.methods) {
    if (method == DesignMethod::block_selection && cfg.t * cfg.l > cfg.m) {
      throw ConfigError("config: block_selection requires t*l <= m");
    }
  }
  if (se) {
    if (cfg.k > cfg.l) throw ConfigError("config field 'k': SE sweep requires k <= l");
    if (cfg.n_c > 0 && cfg.m % cfg.l != 0) {
      throw ConfigError("config: covariance estimation (n_c > 0) requires l | m");
    }
  }
}

}  // namespace hybridest
