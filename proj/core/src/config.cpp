#include "emv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <cmath>

namespace emv::config {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double to_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(key + ": not a number: '" + text + "'");
  }
  return value;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(key + ": not a non-negative integer: '" + text + "'");
  }
  return value;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = lower(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw std::invalid_argument(key + ": not a boolean: '" + text + "'");
}

std::vector<Method> to_methods(const std::string& text) {
  const std::string t = lower(text);
  if (t == "both" || t == "all") return {Method::Emv, Method::Mle};
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= t.size()) {
    const std::size_t comma = t.find(',', start);
    const std::string item = trim(t.substr(start, comma - start));
    if (!item.empty()) {
      const Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("method: empty list");
  return out;
}

}  // namespace

std::string to_string(Method method) { return method == Method::Emv ? "EMV" : "MLE"; }

Method parse_method(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "emv") return Method::Emv;
  if (t == "mle") return Method::Mle;
  throw std::invalid_argument("unknown method '" + text + "' (expected emv or mle)");
}

learn::SignMode parse_sign(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "+1" || t == "1" || t == "positive" || t == "pos") return learn::SignMode::Positive;
  if (t == "-1" || t == "negative" || t == "neg") return learn::SignMode::Negative;
  if (t == "auto") return learn::SignMode::Auto;
  throw std::invalid_argument("unknown sign '" + text + "' (expected +1, -1 or auto)");
}

std::string to_string(learn::SignMode mode) {
  switch (mode) {
    case learn::SignMode::Positive: return "+1";
    case learn::SignMode::Negative: return "-1";
    case learn::SignMode::Auto: return "auto";
  }
  return "auto";
}

void Scenario::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("Scenario: sigma must be > 0");
  if (factor_delta && !(std::abs(factor_gamma) < 1.0)) {
    throw std::invalid_argument("Scenario: |factor-gamma| must be < 1");
  }
  learner_config().validate();
}

learn::LearnerConfig Scenario::learner_config() const {
  learn::LearnerConfig c;
  c.episodes = episodes;
  c.avg_window = avg_window;
  c.alpha = alpha;
  c.eta_theta = eta_theta;
  c.eta_phi = eta_phi;
  c.lambda0 = lambda0;
  c.anneal = anneal;
  c.horizon = horizon;
  c.dt = dt;
  c.z = z;
  c.x0 = x0;
  c.sign = sign;
  return c;
}

sim::Market Scenario::make_market() const {
  if (factor_delta) {
    sim::FactorState f;
    f.rho = (mu - r) / sigma;
    f.sigma = sigma;
    f.delta = *factor_delta;
    f.gamma = factor_gamma;
    return sim::Market::stochastic_factor(f, r);
  }
  return sim::Market::stationary({mu, sigma, r});
}

std::size_t Scenario::effective_stats_window() const {
  return stats_window == 0 ? stats::default_window(episodes) : stats_window;
}

bool apply_setting(Scenario& s, RunOptions& o, const std::string& raw_key,
                   const std::string& raw_value) {
  std::string key = lower(trim(raw_key));
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string value = trim(raw_value);

  if (key == "id" || key == "scenario-id") s.id = value;
  else if (key == "mu") s.mu = to_double(key, value);
  else if (key == "sigma") s.sigma = to_double(key, value);
  else if (key == "r") s.r = to_double(key, value);
  else if (key == "t") s.horizon = to_double(key, value);
  else if (key == "dt") s.dt = to_double(key, value);
  else if (key == "z") s.z = to_double(key, value);
  else if (key == "x0") s.x0 = to_double(key, value);
  else if (key == "lambda") s.lambda0 = to_double(key, value);
  else if (key == "anneal") s.anneal = to_bool(key, value);
  else if (key == "episodes") s.episodes = to_unsigned(key, value);
  else if (key == "avg-window") s.avg_window = to_unsigned(key, value);
  else if (key == "alpha") s.alpha = to_double(key, value);
  else if (key == "eta-theta") s.eta_theta = to_double(key, value);
  else if (key == "eta-phi") s.eta_phi = to_double(key, value);
  else if (key == "seed") s.seed = to_unsigned(key, value);
  else if (key == "factor-delta") s.factor_delta = to_double(key, value);
  else if (key == "factor-gamma") s.factor_gamma = to_double(key, value);
  else if (key == "sign") s.sign = parse_sign(value);
  else if (key == "stats-window") s.stats_window = to_unsigned(key, value);
  else if (key == "method") o.methods = to_methods(value);
  else if (key == "out") o.out = value;
  else if (key == "threads") o.threads = to_unsigned(key, value);
  else if (key == "bucket") {
    o.bucket = to_unsigned(key, value);
    if (o.bucket == 0) throw std::invalid_argument("bucket must be >= 1");
  } else {
    return false;
  }
  return true;
}

std::vector<Setting> parse_settings(std::istream& in) {
  std::vector<Setting> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(number) + ": expected key = value");
    }
    Setting s{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), number};
    if (s.key.empty()) {
      throw std::invalid_argument("line " + std::to_string(number) + ": empty key");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Setting> read_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  try {
    return parse_settings(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void apply_settings(Scenario& scenario, RunOptions& options,
                    const std::vector<Setting>& settings) {
  for (const auto& s : settings) {
    try {
      if (!apply_setting(scenario, options, s.key, s.value)) {
        throw std::invalid_argument("unknown key '" + s.key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(s.line) + ": " + e.what());
    }
  }
}

}  // namespace emv::config
