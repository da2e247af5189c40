#include "scalelaw/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace scalelaw {

namespace pt = boost::property_tree;

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::simulate: return "simulate";
    case SolverKind::dmft: return "dmft";
    case SolverKind::fourier: return "fourier";
    case SolverKind::sgd: return "sgd";
    case SolverKind::ensemble: return "ensemble";
    case SolverKind::asymptote: return "asymptote";
    case SolverKind::frontier: return "frontier";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Inline comments start at ';' or '#' preceded by whitespace.
std::string strip_comment(const std::string& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if ((v[i] == ';' || v[i] == '#') && (v[i - 1] == ' ' || v[i - 1] == '\t'))
      return trim(v.substr(0, i));
  return trim(v);
}

double parse_number(const std::string& key, const std::string& v) {
  std::string s = trim(v);
  if (s == "inf" || s == "infinity") return kInf;
  try {
    std::size_t used = 0;
    double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
  }
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  double x = parse_number(key, v);
  if (!(x >= 1.0) || x != std::floor(x) || !std::isfinite(x))
    throw ConfigError("key '" + key + "': expected a positive integer, got '" + trim(v) + "'");
  return std::size_t(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string s = trim(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + s + "'");
}

using Handler = void (*)(RunConfig&, const std::string& key, const std::string& value);

const std::map<std::string, std::map<std::string, Handler>>& grammar() {
  static const std::map<std::string, std::map<std::string, Handler>> g = {
      {"run",
       {{"solver",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           static const std::map<std::string, SolverKind> m = {
               {"simulate", SolverKind::simulate}, {"dmft", SolverKind::dmft},
               {"fourier", SolverKind::fourier},   {"sgd", SolverKind::sgd},
               {"ensemble", SolverKind::ensemble}, {"asymptote", SolverKind::asymptote},
               {"frontier", SolverKind::frontier}};
           auto it = m.find(v);
           if (it == m.end()) throw ConfigError("key '" + k + "': unknown solver '" + v + "'");
           c.solver = it->second;
         }},
        {"output", [](RunConfig& c, const std::string&, const std::string& v) { c.output = v; }},
        {"seeds",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           try {
             c.seeds = parse_seeds(v);
           } catch (const ConfigError& e) {
             throw ConfigError("key '" + k + "': " + e.what());
           }
         }},
        {"with_simulation", [](RunConfig& c, const std::string& k, const std::string& v) {
           c.with_simulation = parse_bool(k, v);
         }}}},
      {"spectrum",
       {{"kind",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           if (v == "power_law") c.spectrum.kind = SpectrumSource::Kind::power_law;
           else if (v == "white") c.spectrum.kind = SpectrumSource::Kind::white;
           else if (v == "file") c.spectrum.kind = SpectrumSource::Kind::file;
           else throw ConfigError("key '" + k + "': unknown spectrum kind '" + v + "'");
         }},
        {"a", [](RunConfig& c, const std::string& k, const std::string& v) { c.spectrum.a = parse_number(k, v); }},
        {"b", [](RunConfig& c, const std::string& k, const std::string& v) { c.spectrum.b = parse_number(k, v); }},
        {"M", [](RunConfig& c, const std::string& k, const std::string& v) { c.spectrum.M = parse_count(k, v); }},
        {"path", [](RunConfig& c, const std::string&, const std::string& v) { c.spectrum.path = v; }}}},
      {"shape",
       {{"N", [](RunConfig& c, const std::string& k, const std::string& v) { c.N = parse_number(k, v); }},
        {"P", [](RunConfig& c, const std::string& k, const std::string& v) { c.P = parse_number(k, v); }},
        {"nu", [](RunConfig& c, const std::string& k, const std::string& v) { c.nu = parse_number(k, v); }},
        {"alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.alpha = parse_number(k, v); }},
        {"sigma", [](RunConfig& c, const std::string& k, const std::string& v) { c.sigma = parse_number(k, v); }},
        {"limit", [](RunConfig& c, const std::string& k, const std::string& v) {
           if (v == "proportional") c.limit = Limit::proportional;
           else if (v == "nonproportional") c.limit = Limit::nonproportional;
           else throw ConfigError("key '" + k + "': expected proportional or nonproportional");
         }}}},
      {"optimizer",
       {{"kind",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           if (v != "gd" && v != "momentum" && v != "flow" && v != "sgd")
             throw ConfigError("key '" + k + "': expected gd, momentum, flow or sgd");
           c.optimizer = v;
         }},
        {"eta", [](RunConfig& c, const std::string& k, const std::string& v) { c.eta = parse_number(k, v); }},
        {"mu", [](RunConfig& c, const std::string& k, const std::string& v) { c.mu = parse_number(k, v); }},
        {"batch", [](RunConfig& c, const std::string& k, const std::string& v) { c.batch = parse_count(k, v); }},
        {"steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.steps = parse_count(k, v); }}}},
      {"time",
       {{"t_min", [](RunConfig& c, const std::string& k, const std::string& v) { c.t_min = parse_number(k, v); }},
        {"t_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.t_max = parse_number(k, v); }},
        {"points", [](RunConfig& c, const std::string& k, const std::string& v) { c.t_points = parse_count(k, v); }},
        {"talbot_nodes", [](RunConfig& c, const std::string& k, const std::string& v) {
           c.talbot_nodes = int(parse_count(k, v));
         }}}},
      {"ensemble",
       {{"E", [](RunConfig& c, const std::string& k, const std::string& v) { c.E = parse_number(k, v); }},
        {"bags", [](RunConfig& c, const std::string& k, const std::string& v) { c.bags = parse_number(k, v); }},
        {"width_compute", [](RunConfig& c, const std::string& k, const std::string& v) { c.width_compute = parse_number(k, v); }},
        {"width_E", [](RunConfig& c, const std::string&, const std::string& v) { c.width_E = parse_list(v); }},
        {"width_t", [](RunConfig& c, const std::string& k, const std::string& v) { c.width_t = parse_number(k, v); }}}},
      {"frontier",
       {{"buckets", [](RunConfig& c, const std::string& k, const std::string& v) { c.frontier_buckets = parse_count(k, v); }},
        {"fit_min", [](RunConfig& c, const std::string& k, const std::string& v) { c.fit_min = parse_number(k, v); }},
        {"fit_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.fit_max = parse_number(k, v); }}}},
      {"sweep",
       {{"parameter",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           const auto& p = sweep_parameters();
           if (std::find(p.begin(), p.end(), v) == p.end())
             throw ConfigError("key '" + k + "': '" + v + "' is not a sweepable parameter");
           c.sweep_parameter = v;
         }},
        {"values", [](RunConfig& c, const std::string& k, const std::string& v) {
           try {
             c.sweep_values = parse_list(v);
           } catch (const ConfigError& e) {
             throw ConfigError("key '" + k + "': " + e.what());
           }
         }}}},
  };
  return g;
}

}  // namespace

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number("list", item));
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto dash = item.find('-');
    try {
      if (dash != std::string::npos) {
        std::uint64_t lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw ConfigError("seed range '" + item + "' is reversed");
        for (std::uint64_t x = lo; x <= hi; ++x) out.push_back(x);
      } else {
        out.push_back(std::stoull(item));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("seed list is empty");
  return out;
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> p = {"N", "P", "B", "E", "eta", "a", "b"};
  return p;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  RunConfig c;
  const auto& g = grammar();
  std::set<std::string> spectrum_keys;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' is outside any [section]");
    auto sec = g.find(section);
    if (sec == g.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      auto h = sec->second.find(key);
      if (h == sec->second.end())
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      h->second(c, section + "." + key, strip_comment(node.data()));
      if (section == "spectrum") spectrum_keys.insert(key);
    }
  }
  // Exactly one spectrum source.
  using K = SpectrumSource::Kind;
  if (!spectrum_keys.count("kind")) throw ConfigError("[spectrum] needs 'kind'");
  std::set<std::string> allowed;
  if (c.spectrum.kind == K::power_law) allowed = {"kind", "a", "b", "M"};
  if (c.spectrum.kind == K::white) allowed = {"kind", "M"};
  if (c.spectrum.kind == K::file) allowed = {"kind", "path"};
  for (const auto& k : spectrum_keys)
    if (!allowed.count(k))
      throw ConfigError("key 'spectrum." + k + "' conflicts with spectrum kind; give exactly one source");
  if (c.spectrum.kind == K::file && c.spectrum.path.empty())
    throw ConfigError("[spectrum] kind = file needs 'path'");

  if (c.N && c.nu) throw ConfigError("give either shape.N or shape.nu, not both");
  if (c.P && c.alpha) throw ConfigError("give either shape.P or shape.alpha, not both");
  if (!(c.eta > 0.0)) throw ConfigError("key 'optimizer.eta' must be positive");
  if (!(c.mu >= 0.0 && c.mu < 1.0)) throw ConfigError("key 'optimizer.mu' must be in [0, 1)");
  if (!(c.sigma >= 0.0)) throw ConfigError("key 'shape.sigma' must be nonnegative");
  if (!(c.t_min > 0.0) || !(c.t_max > c.t_min)) throw ConfigError("[time] needs 0 < t_min < t_max");
  if (!(c.E >= 1.0) || !(c.bags >= 1.0)) throw ConfigError("[ensemble] E and bags must be >= 1");
  if (!c.sweep_parameter.empty() && c.sweep_values.empty())
    throw ConfigError("key 'sweep.values': empty value list");
  if (c.sweep_parameter.empty() && !c.sweep_values.empty())
    throw ConfigError("[sweep] values given without 'parameter'");
  c.text = text;
  c.hash = sha256_hex(text);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Spectrum build_spectrum(const RunConfig& cfg) {
  try {
    switch (cfg.spectrum.kind) {
      case SpectrumSource::Kind::power_law:
        return power_law_spectrum(cfg.spectrum.a, cfg.spectrum.b, cfg.spectrum.M);
      case SpectrumSource::Kind::white:
        return white_spectrum(cfg.spectrum.M);
      case SpectrumSource::Kind::file:
        return load_spectrum(cfg.spectrum.path);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[spectrum] ") + e.what());
  }
  throw ConfigError("[spectrum] unknown kind");
}

SystemShape build_shape(const RunConfig& cfg, const Spectrum& spec) {
  const double M = double(spec.size());
  SystemShape s;
  s.M = M;
  s.N = cfg.N ? *cfg.N : cfg.nu ? *cfg.nu * M : kInf;
  s.P = cfg.P ? *cfg.P : cfg.alpha ? *cfg.alpha * M : kInf;
  s.sigma = cfg.sigma;
  s.limit = cfg.limit;
  try {
    validate(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[shape] ") + e.what());
  }
  return s;
}

RunConfig with_parameter(const RunConfig& cfg, const std::string& name, double value) {
  RunConfig c = cfg;
  if (name == "N") {
    c.N = value;
    c.nu.reset();
  } else if (name == "P") {
    c.P = value;
    c.alpha.reset();
  } else if (name == "B") {
    if (!(value >= 1.0) || value != std::floor(value))
      throw ConfigError("sweep value for 'B' must be a positive integer");
    c.batch = std::size_t(value);
  } else if (name == "E") {
    c.E = value;
  } else if (name == "eta") {
    c.eta = value;
  } else if (name == "a" || name == "b") {
    if (c.spectrum.kind != SpectrumSource::Kind::power_law)
      throw ConfigError("sweep parameter '" + name + "' needs a power_law spectrum");
    (name == "a" ? c.spectrum.a : c.spectrum.b) = value;
  } else {
    throw ConfigError("'" + name + "' is not a sweepable parameter");
  }
  return c;
}

std::vector<double> dedup_values(const std::vector<double>& values, std::size_t* removed) {
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  auto end = std::unique(v.begin(), v.end());
  if (removed) *removed = std::size_t(v.end() - end);
  v.erase(end, v.end());
  return v;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

void write_csv(const std::string& path, const Provenance& prov,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "# config_sha256: " << prov.config_hash << "\n# seeds:";
  for (std::size_t i = 0; i < prov.seeds.size(); ++i) out << (i ? "," : " ") << prov.seeds[i];
  out << "\n";
  for (const auto& [k, v] : prov.extra) out << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  char buf[32];
  for (const auto& r : rows) {
    if (r.size() != columns.size()) throw std::logic_error("write_csv: row width mismatch");
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", r[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

CsvData read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  CsvData d;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto colon = line.find(':');
      if (colon != std::string::npos)
        d.header[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (d.columns.empty()) {
      while (std::getline(ss, cell, ',')) d.columns.push_back(trim(cell));
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    d.rows.push_back(std::move(row));
  }
  return d;
}

}  // namespace scalelaw
