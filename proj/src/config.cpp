// SPDX-License-Identifier: Apache-2.0

#include "membrane/config.hpp"
#include "membrane/quadrature.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace membrane {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || !std::isfinite(out))
    throw ConfigError("key '" + key + "': '" + v + "' is not a finite number");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(to_double(key, trim(item)));
  return out;
}

// Applies one key with its value already rendered as text.
void apply(RunConfig& cfg, bool& m_range, const std::string& key, const std::string& v) {
  const auto sweep = [&]() -> SweepRange& {
    if (!cfg.sweep)
      cfg.sweep.emplace();
    return *cfg.sweep;
  };
  if (key == "gamma1") cfg.material.gamma1 = to_double(key, v);
  else if (key == "gamma2") cfg.material.gamma2 = to_double(key, v);
  else if (key == "gamma3") cfg.material.gamma3 = to_double(key, v);
  else if (key == "c") cfg.load.c = to_double(key, v);
  else if (key == "d") cfg.load.d = to_double(key, v);
  else if (key == "family") {
    if (v == "polynomial") cfg.family = BasisFamily::polynomial;
    else if (v == "adaptive") cfg.family = BasisFamily::adaptive;
    else throw ConfigError("key 'family': expected 'polynomial' or 'adaptive', got '" + v + "'");
  }
  else if (key == "m") cfg.m = to_int(key, v);
  else if (key == "m_min") { cfg.m_min = to_int(key, v); m_range = true; }
  else if (key == "m_max") { cfg.m_max = to_int(key, v); m_range = true; }
  else if (key == "n") cfg.n = to_int(key, v);
  else if (key == "p") cfg.p = to_list(key, v);
  else if (key == "quad") {
    if (v == "auto") cfg.quad.reset();
    else cfg.quad = to_int(key, v);
  }
  else if (key == "probes") cfg.probes = to_list(key, v);
  else if (key == "c_start") sweep().c_start = to_double(key, v);
  else if (key == "c_end") sweep().c_end = to_double(key, v);
  else if (key == "c_step") sweep().c_step = to_double(key, v);
  else if (key == "sag_step") sweep().sag_step = to_double(key, v);
  else if (key == "out") cfg.out_dir = v;
  else if (key == "jobs") cfg.jobs = to_int(key, v);
  else throw ConfigError("unknown key '" + key + "'");
}

std::string json_scalar_text(const std::string& key, const nlohmann::json& v) {
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_number_integer())
    return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!item.is_number())
        throw ConfigError("key '" + key + "': list entries must be numbers");
      if (!out.empty())
        out += ',';
      out += json_scalar_text(key, item);
    }
    return out;
  }
  throw ConfigError("key '" + key + "': unsupported JSON value");
}

RunConfig finish(RunConfig cfg, bool m_range) {
  if (!m_range) {
    cfg.m_min = 1;
    cfg.m_max = std::clamp(cfg.m, 1, kMaxConvergenceM);
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON config: ") + e.what());
  }
  if (!doc.is_object())
    throw ConfigError("JSON config must be an object");
  RunConfig cfg;
  bool m_range = false;
  for (const auto& [key, value] : doc.items())
    apply(cfg, m_range, key, json_scalar_text(key, value));
  return finish(std::move(cfg), m_range);
}

RunConfig parse_key_value(std::string_view text) {
  RunConfig cfg;
  bool m_range = false;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string body = trim(line);
    if (body.empty())
      continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (seen[key]++ > 0)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      apply(cfg, m_range, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return finish(std::move(cfg), m_range);
}

} // namespace

void RunConfig::validate() const {
  if (!material.is_finite())
    throw ConfigError("material constants must be finite");
  if (!std::isfinite(load.c) || !std::isfinite(load.d))
    throw ConfigError("load constants must be finite");
  if (load.d < 0.0)
    throw ConfigError("d must be >= 0");
  if (m < 1 || m > kMaxBasisSize)
    throw ConfigError("m must lie in [1, " + std::to_string(kMaxBasisSize) + "]");
  if (m_min < 1 || m_min > m_max || m_max > kMaxConvergenceM)
    throw ConfigError("need 1 <= m_min <= m_max <= " + std::to_string(kMaxConvergenceM));
  if (family == BasisFamily::adaptive) {
    if (!(load.d > 0.0))
      throw ConfigError("the adaptive family needs d > 0; use family = polynomial for d = 0");
    if (n < 1 || n > 4)
      throw ConfigError("n must lie in [1, 4]");
    if (p) {
      if (static_cast<int>(p->size()) != n)
        throw ConfigError("p must list exactly n shape parameters");
      if (!(p->front() >= kMinShapeParameter))
        throw ConfigError("p1 must be >= " + std::to_string(kMinShapeParameter));
    }
  } else if (p) {
    throw ConfigError("p is only meaningful for the adaptive family");
  }
  if (quad && (*quad < kMinGaussNodes || *quad > kMaxGaussNodes))
    throw ConfigError("quad must lie in [" + std::to_string(kMinGaussNodes) + ", " +
                      std::to_string(kMaxGaussNodes) + "]");
  for (double s : probes)
    if (!(s >= 0.0 && s <= 1.0))
      throw ConfigError("probes must lie in [0, 1]");
  if (sweep) {
    if (!std::isfinite(sweep->c_start) || !std::isfinite(sweep->c_end))
      throw ConfigError("sweep limits must be finite");
    if (!(sweep->c_step > 0.0) || !(sweep->sag_step > 0.0))
      throw ConfigError("c_step and sag_step must be > 0");
  }
  if (jobs < 1)
    throw ConfigError("jobs must be >= 1");
  if (out_dir.empty())
    throw ConfigError("out must not be empty");
}

BasisSpec RunConfig::basis(int m_value) const {
  if (family == BasisFamily::polynomial)
    return BasisSpec::polynomial(m_value);
  std::vector<double> seed = p.value_or(std::vector<double>(static_cast<std::size_t>(n), 0.0));
  if (!p)
    seed[0] = std::sqrt(load.d);
  return BasisSpec::adaptive(m_value, std::move(seed));
}

RunConfig parse_config(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{')
    return parse_json(text);
  return parse_key_value(text);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.extension() == ".json")
    return parse_json(text);
  return parse_config(text);
}

} // namespace membrane
