#include "fraceig/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "fraceig/error.hpp"

namespace fraceig {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) parts.push_back(trim(part));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double to_double(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    return to_double(trim(text.substr(0, slash))) / to_double(trim(text.substr(slash + 1)));
  }
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) throw ConfigError("expected a number, got '" + text + "'");
  return value;
}

template <class Int>
Int to_integer(const std::string& text) {
  Int value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) throw ConfigError("expected an integer, got '" + text + "'");
  return value;
}

std::vector<double> to_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const std::string& part : split(text, ',')) out.push_back(to_double(part));
  return out;
}

std::string list_text(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

struct Field {
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field size_field(std::string help, T TrainConfig::*member) {
  return {std::move(help), [member](RunConfig& c, const std::string& v) { c.train.*member = to_integer<T>(v); },
          [member](const RunConfig& c) { return std::to_string(c.train.*member); }};
}

Field real_field(std::string help, double TrainConfig::*member) {
  return {std::move(help), [member](RunConfig& c, const std::string& v) { c.train.*member = to_double(v); },
          [member](const RunConfig& c) { return format_double(c.train.*member); }};
}

Field adam_field(std::string help, double AdamConstants::*member) {
  return {std::move(help), [member](RunConfig& c, const std::string& v) { c.train.adam.*member = to_double(v); },
          [member](const RunConfig& c) { return format_double(c.train.adam.*member); }};
}

Field int_field(std::string help, int RunConfig::*member) {
  return {std::move(help), [member](RunConfig& c, const std::string& v) { c.*member = to_integer<int>(v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(std::string help, double RunConfig::*member) {
  return {std::move(help), [member](RunConfig& c, const std::string& v) { c.*member = to_double(v); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

Field string_field(std::string help, std::string RunConfig::*member) {
  return {std::move(help), [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

Field list_field(std::string help, std::vector<double> RunConfig::*member) {
  return {std::move(help), [member](RunConfig& c, const std::string& v) { c.*member = to_list(v); },
          [member](const RunConfig& c) { return list_text(c.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"domain", string_field("interval | box | ball | lshape | drumA | drumB", &RunConfig::domain)},
      {"a", double_field("interval left end", &RunConfig::a)},
      {"b", double_field("interval right end", &RunConfig::b)},
      {"dim", int_field("box/ball dimension (0: from lo or center, else 2 for box, 3 for ball)", &RunConfig::dim)},
      {"lo", list_field("box lower corner, comma separated (default -1,...)", &RunConfig::lo)},
      {"hi", list_field("box upper corner, comma separated (default 1,...)", &RunConfig::hi)},
      {"center", list_field("ball center, comma separated (default origin)", &RunConfig::center)},
      {"radius", double_field("ball radius", &RunConfig::radius)},
      {"drum_scale", double_field("drum grid-cell size (triangle leg length)", &RunConfig::drum_scale)},
      {"s", double_field("fractional order in (0,1)", &RunConfig::s)},
      {"potential", string_field("zero | harmonic | stiff_sine | inverse_square", &RunConfig::potential)},
      {"K", int_field("number of modes", &RunConfig::K)},
      {"boundary_features", int_field("boundary feature count", &RunConfig::boundary_features)},
      {"corner_features", int_field("corner feature count (-1: 20 on lshape/drums, else 0)",
                                    &RunConfig::corner_features)},
      {"boundary_exponents", string_field("boundary exponent interval lo,hi ('s' means the order)",
                                          &RunConfig::boundary_exponents)},
      {"corner_exponents", string_field("corner exponent interval lo,hi", &RunConfig::corner_exponents)},
      {"layers", int_field("hidden layers", &RunConfig::layers)},
      {"preset", {"paper | desk training schedule (applied before other keys)",
                  [](RunConfig& c, const std::string& v) { apply_preset(c, v); },
                  [](const RunConfig& c) { return c.preset; }}},
      {"epochs", size_field("training epochs per mode", &TrainConfig::epochs)},
      {"lr0", real_field("initial learning rate", &TrainConfig::lr0)},
      {"decay_every", size_field("epochs per schedule stage", &TrainConfig::decay_every)},
      {"decay_factor", real_field("learning-rate divisor per stage", &TrainConfig::decay_factor)},
      {"n0", size_field("initial batch size", &TrainConfig::n0)},
      {"n_growth", size_field("batch-size multiplier per stage", &TrainConfig::n_growth)},
      {"beta_factor", real_field("penalty weight over the largest found eigenvalue", &TrainConfig::beta_factor)},
      {"w_c", real_field("radial offset clamp", &TrainConfig::w_c)},
      {"n_final", size_field("samples per final estimation batch", &TrainConfig::n_final)},
      {"n_batches_final", size_field("final estimation batches", &TrainConfig::n_batches_final)},
      {"adam_beta1", adam_field("ADAM first-moment decay", &AdamConstants::beta1)},
      {"adam_beta2", adam_field("ADAM second-moment decay", &AdamConstants::beta2)},
      {"adam_eps", adam_field("ADAM epsilon", &AdamConstants::eps)},
      {"seed", size_field("random seed", &TrainConfig::seed)},
      {"progress_every", size_field("epochs between progress records", &TrainConfig::progress_every)},
      {"output", string_field("output directory", &RunConfig::output)},
      {"s_list", list_field("fractional orders for the isospectral sweep", &RunConfig::s_list)},
      {"drum_a", string_field("first domain of the isospectral sweep", &RunConfig::drum_a)},
      {"drum_b", string_field("second domain of the isospectral sweep", &RunConfig::drum_b)},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return &field;
  }
  return nullptr;
}

struct Entry {
  std::string value;
  std::string where;
};

void apply(RunConfig& config, const std::string& key, const Entry& entry) {
  try {
    find_field(key)->set(config, entry.value);
  } catch (const ConfigError& e) {
    throw ConfigError(entry.where + ": invalid value for '" + key + "': " + e.what());
  }
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, field] : fields()) out.emplace_back(name, field.help);
    return out;
  }();
  return keys;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, ptr};
}

void apply_preset(RunConfig& config, const std::string& preset) {
  TrainConfig fresh;
  if (preset == "paper") {
    fresh = TrainConfig::paper();
  } else if (preset == "desk") {
    fresh = TrainConfig::desk();
  } else {
    throw ConfigError("unknown preset '" + preset + "' (expected paper or desk)");
  }
  fresh.seed = config.train.seed;
  fresh.progress_every = config.train.progress_every;
  config.train = fresh;
  config.preset = preset;
}

RunConfig parse_config(const std::string& text, const std::string& source, const KeyValues& overrides) {
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = source + ":" + std::to_string(number);
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (find_field(key) == nullptr) throw ConfigError(where + ": unknown key '" + key + "'");
    if (entries.count(key) != 0) throw ConfigError(where + ": duplicate key '" + key + "'");
    entries[key] = {trim(body.substr(eq + 1)), where};
    order.push_back(key);
  }
  for (const auto& [key, value] : overrides) {
    if (find_field(key) == nullptr) throw ConfigError("unknown key '" + key + "'");
    if (entries.count(key) == 0) order.push_back(key);
    entries[key] = {value, "--" + key};
  }

  RunConfig config;
  // Seed and progress interval survive a preset, so they may come first too.
  if (entries.count("preset") != 0) apply(config, "preset", entries["preset"]);
  for (const std::string& key : order) {
    if (key != "preset") apply(config, key, entries[key]);
  }
  try {
    validate(config);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path, const KeyValues& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string(), overrides);
}

void validate(const RunConfig& config) {
  if (config.K < 1) throw ConfigError("K must be >= 1");
  auto check_s = [](double s) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional order out of range: s must lie in (0,1)");
  };
  check_s(config.s);
  for (double s : config.s_list) check_s(s);
  if (config.layers < 1) throw ConfigError("layers must be at least 1");
  if (config.boundary_features < 1) throw ConfigError("boundary_features must be at least 1");
  if (config.corner_features < -1) throw ConfigError("corner_features must be -1 or a count");
  parse_potential(config.potential);
  config.train.validate();
  const Domain domain = build_domain(config);
  parse_interval(config.boundary_exponents, config.s);
  parse_interval(config.corner_exponents, config.s);
  if (config.corner_features > 0 && !has_corner_features(domain)) {
    throw ConfigError("corner features are not available on domain " + config.domain);
  }
  for (const std::string& name : {config.drum_a, config.drum_b}) {
    if (name != "drumA" && name != "drumB") throw ConfigError("drum_a/drum_b must name drumA or drumB");
  }
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& [name, field] : fields()) {
    out += name + " = " + field.get(config) + "\n";
  }
  return out;
}

int corner_feature_count(const RunConfig& config, const Domain& domain) {
  if (config.corner_features >= 0) return config.corner_features;
  return has_corner_features(domain) ? 20 : 0;
}

Domain build_domain(const RunConfig& config, const std::string& domain_name) {
  const std::string name = domain_name.empty() ? config.domain : domain_name;
  if (name == "interval") return Domain::interval(config.a, config.b);
  if (name == "box") {
    std::size_t d = config.dim > 0 ? config.dim : (!config.lo.empty() ? config.lo.size() : 2);
    std::vector<double> lo = config.lo.empty() ? std::vector<double>(d, -1.0) : config.lo;
    std::vector<double> hi = config.hi.empty() ? std::vector<double>(d, 1.0) : config.hi;
    if (lo.size() != d || hi.size() != d) throw ConfigError("box lo/hi must have dim entries");
    return Domain::box(std::move(lo), std::move(hi));
  }
  if (name == "ball") {
    std::size_t d = config.dim > 0 ? config.dim : (!config.center.empty() ? config.center.size() : 3);
    std::vector<double> center = config.center.empty() ? std::vector<double>(d, 0.0) : config.center;
    if (center.size() != d) throw ConfigError("ball center must have dim entries");
    return Domain::ball(std::move(center), config.radius);
  }
  if (name == "lshape") return Domain::lshape();
  if (name == "drumA") return Domain::drum(DrumId::kA, config.drum_scale);
  if (name == "drumB") return Domain::drum(DrumId::kB, config.drum_scale);
  throw ConfigError("unknown domain '" + name + "'");
}

std::pair<double, double> parse_interval(const std::string& text, double s) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError("exponent interval must be 'lo,hi', got '" + text + "'");
  auto value = [s](const std::string& t) { return t == "s" ? s : to_double(t); };
  const double lo = value(parts[0]);
  const double hi = value(parts[1]);
  if (!(lo > 0.0 && lo <= hi)) throw ConfigError("exponent interval needs 0 < lo <= hi, got '" + text + "'");
  return {lo, hi};
}

Problem build_problem(const RunConfig& config, double s, const std::string& domain_name) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional order out of range: s must lie in (0,1)");
  Domain domain = build_domain(config, domain_name);
  const auto [blo, bhi] = parse_interval(config.boundary_exponents, s);
  const auto [clo, chi] = parse_interval(config.corner_exponents, s);
  const int corners = corner_feature_count(config, domain);
  FeatureSet features = FeatureSet::standard(domain, config.boundary_features, blo, bhi, corners, clo, chi);
  SamplingRegion region = default_sampling_region(domain);
  Architecture arch{domain.dim(), config.layers, features.size()};
  return Problem{std::move(domain), std::move(region), s, Potential{parse_potential(config.potential)},
                 std::move(features), arch, config.train.w_c};
}

}  // namespace fraceig
