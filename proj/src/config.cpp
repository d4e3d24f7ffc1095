#include "dsmc/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsmc {

ConfigError::ConfigError(int line, const std::string& msg)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::int64_t to_int(const std::string& v, int line, const std::string& key) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError(line, "'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& v, int line, const std::string& key) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(line, "'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_real(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(line, "'" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(line, "'" + key + "' expects true or false, got '" + v + "'");
}

template <class F>
auto wrap(int line, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line, e.what());
  }
}

// Shortest round-trippable decimal.
std::string real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void RunConfig::validate() const {
  network.validate();
  traffic.validate();
  if (cycles < 1) throw std::invalid_argument("run.cycles must be >= 1");
  if (warmup < 0) throw std::invalid_argument("run.warmup must be >= 0");
  if (threads < 0) throw std::invalid_argument("run.threads must be >= 0");
  for (double r : rates) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("sweep rates must lie in [0, 1]");
  }
  // Builds the topology and checks the randomization against it.
  Simulation probe(network, policy, traffic, warmup);
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "unterminated section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      static const char* known[] = {"topology", "slices", "traffic", "randomization", "run", "sweep", "output"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) throw ConfigError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string v = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError(line, "'" + key + "' appears before any [section]");
    if (v.empty() && section != "output") throw ConfigError(line, "'" + key + "' has no value");
    auto bad_key = [&] { return ConfigError(line, "unknown key '" + key + "' in [" + section + "]"); };
    auto as_int = [&] {
      const std::int64_t x = to_int(v, line, key);
      if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(line, "'" + key + "' out of range");
      return static_cast<int>(x);
    };

    if (section == "topology") {
      if (key == "kind") c.network.kind = wrap(line, [&] { return parse_topology_kind(v); });
      else if (key == "n") c.network.n = as_int();
      else if (key == "k") c.network.k = as_int();
      else if (key == "r") c.network.r = as_int();
      else if (key == "buffer_depth") c.network.buffer_depth = as_int();
      else if (key == "bank_latency") c.network.bank_latency = as_int();
      else if (key == "source") c.network.source = wrap(line, [&] { return parse_source_policy(v); });
      else if (key == "read_window") c.network.read_window = as_int();
      else if (key == "hold_burst") c.network.hold_burst = to_bool(v, line, key);
      else throw bad_key();
    } else if (section == "slices") {
      if (key == "all") c.network.slices.all = as_int();
      else if (key == "speedup") c.network.slices.speedup = as_int();
      else if (key.rfind("stage", 0) == 0 && key.size() > 5) {
        const int stage = static_cast<int>(to_int(key.substr(5), line, key));
        const int count = as_int();
        if (count == 0) c.network.slices.after_stage.erase(stage);
        else c.network.slices.after_stage[stage] = count;
      } else {
        throw bad_key();
      }
    } else if (section == "traffic") {
      if (key == "pattern") c.traffic.kind = wrap(line, [&] { return parse_burst_kind(v); });
      else if (key == "read_fraction") c.traffic.read_fraction = to_real(v, line, key);
      else if (key == "injection_rate") c.traffic.injection_rate = to_real(v, line, key);
      else if (key == "address") c.traffic.address = wrap(line, [&] { return parse_address_distribution(v); });
      else throw bad_key();
    } else if (section == "randomization") {
      if (key == "directed") c.policy.directed = to_bool(v, line, key);
      else if (key == "fractal") c.policy.fractal = to_bool(v, line, key);
      else throw bad_key();
    } else if (section == "run") {
      if (key == "cycles") c.cycles = to_int(v, line, key);
      else if (key == "warmup") c.warmup = to_int(v, line, key);
      else if (key == "seed") c.policy.rng_seed = to_uint(v, line, key);
      else if (key == "threads") c.threads = as_int();
      else throw bad_key();
    } else if (section == "sweep") {
      if (key != "rates") throw bad_key();
      c.rates.clear();
      std::istringstream list(v);
      std::string item;
      while (std::getline(list, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(line, "empty entry in rate list");
        c.rates.push_back(to_real(item, line, key));
      }
    } else if (section == "output") {
      if (key == "label") c.label = v;
      else if (key == "csv") c.csv_path = v;
      else if (key == "svg") c.svg_path = v;
      else throw bad_key();
    }
  }
  try {
    c.network.validate();
    c.traffic.validate();
    if (c.cycles < 1) throw std::invalid_argument("run.cycles must be >= 1");
    if (c.warmup < 0) throw std::invalid_argument("run.warmup must be >= 0");
    for (double r : c.rates) {
      if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("sweep rates must lie in [0, 1]");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

namespace {

void write_sim_sections(std::ostream& o, const RunConfig& c) {
  const NetworkConfig& n = c.network;
  o << "[topology]\n"
    << "kind = " << to_string(n.kind) << "\n"
    << "n = " << n.n << "\n"
    << "k = " << n.k << "\n"
    << "r = " << n.r << "\n"
    << "buffer_depth = " << n.buffer_depth << "\n"
    << "bank_latency = " << n.bank_latency << "\n"
    << "source = " << to_string(n.source) << "\n"
    << "read_window = " << n.read_window << "\n"
    << "hold_burst = " << (n.hold_burst ? "true" : "false") << "\n\n";
  o << "[slices]\n"
    << "all = " << n.slices.all << "\n"
    << "speedup = " << n.slices.speedup << "\n";
  for (const auto& [stage, count] : n.slices.after_stage) o << "stage" << stage << " = " << count << "\n";
  o << "\n[traffic]\n"
    << "pattern = " << to_string(c.traffic.kind) << "\n"
    << "read_fraction = " << real(c.traffic.read_fraction) << "\n"
    << "injection_rate = " << real(c.traffic.injection_rate) << "\n"
    << "address = " << to_string(c.traffic.address) << "\n\n";
  o << "[randomization]\n"
    << "directed = " << (c.policy.directed ? "true" : "false") << "\n"
    << "fractal = " << (c.policy.fractal ? "true" : "false") << "\n\n";
  o << "[run]\n"
    << "cycles = " << c.cycles << "\n"
    << "warmup = " << c.warmup << "\n";
}

}  // namespace

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  write_sim_sections(o, c);
  o << "seed = " << c.policy.rng_seed << "\n"
    << "threads = " << c.threads << "\n";
  if (!c.rates.empty()) {
    o << "\n[sweep]\nrates = ";
    for (std::size_t i = 0; i < c.rates.size(); ++i) o << (i ? ", " : "") << real(c.rates[i]);
    o << "\n";
  }
  if (!c.label.empty() || !c.csv_path.empty() || !c.svg_path.empty()) {
    o << "\n[output]\n";
    if (!c.label.empty()) o << "label = " << c.label << "\n";
    if (!c.csv_path.empty()) o << "csv = " << c.csv_path << "\n";
    if (!c.svg_path.empty()) o << "svg = " << c.svg_path << "\n";
  }
  return o.str();
}

std::uint64_t config_hash(const RunConfig& c) {
  std::ostringstream o;
  write_sim_sections(o, c);
  const std::string s = o.str();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dsmc
