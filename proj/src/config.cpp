#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "pathorder/errors.hpp"
#include "pathorder/experiment.hpp"
#include "text.hpp"

namespace pathorder {
namespace {

// Drops a trailing '#' comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string_view> split_top_level(std::string_view s) {
  std::vector<std::string_view> out;
  bool in_string = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == ',' && !in_string) {
      out.push_back(text::trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  const auto last = text::trim(s.substr(start));
  if (!last.empty()) out.push_back(last);
  return out;
}

std::uint64_t as_count(const ConfigValue& v, const std::string& key) {
  if (v.type == ConfigValue::Type::integer && v.integer >= 0) return static_cast<std::uint64_t>(v.integer);
  if (v.type == ConfigValue::Type::real && v.real >= 0 && std::floor(v.real) == v.real && v.real < 9.2e18) {
    return static_cast<std::uint64_t>(v.real);
  }
  throw UsageError("config field '" + key + "': expected a non-negative integer");
}

double as_real(const ConfigValue& v, const std::string& key) {
  if (v.type == ConfigValue::Type::integer) return static_cast<double>(v.integer);
  if (v.type == ConfigValue::Type::real) return v.real;
  throw UsageError("config field '" + key + "': expected a number");
}

const std::string& as_string(const ConfigValue& v, const std::string& key) {
  if (v.type != ConfigValue::Type::string) throw UsageError("config field '" + key + "': expected a string");
  return v.string;
}

const std::vector<ConfigValue>& as_array(const ConfigValue& v, const std::string& key) {
  if (v.type != ConfigValue::Type::array) throw UsageError("config field '" + key + "': expected an array");
  return v.array;
}

template <typename F>
void with_field(const std::string& key, F&& f) {
  try {
    f();
  } catch (const UsageError& e) {
    const std::string what = e.what();
    if (what.rfind("config field", 0) == 0) throw;
    throw UsageError("config field '" + key + "': " + what);
  }
}

}  // namespace

ConfigValue ConfigValue::parse(std::string_view raw) {
  const auto s = text::trim(raw);
  ConfigValue v;
  if (s.empty()) throw UsageError("empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw UsageError("unterminated string " + std::string(s));
    v.type = Type::string;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) ++i;
      v.string.push_back(s[i]);
    }
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw UsageError("unterminated array " + std::string(s));
    v.type = Type::array;
    for (auto item : split_top_level(s.substr(1, s.size() - 2))) v.array.push_back(parse(item));
    return v;
  }
  if (s == "true" || s == "false") {
    v.type = Type::boolean;
    v.boolean = s == "true";
    return v;
  }
  std::string number;
  for (char c : s) {
    if (c != '_') number.push_back(c);
  }
  const char* begin = number.data();
  const char* end = begin + number.size();
  if (*begin == '+') ++begin;
  const bool is_real = number.find_first_of(".eEn") != std::string::npos;
  if (!is_real) {
    const auto [ptr, ec] = std::from_chars(begin, end, v.integer);
    if (ec == std::errc{} && ptr == end) return v;
  } else {
    const auto [ptr, ec] = std::from_chars(begin, end, v.real);
    if (ec == std::errc{} && ptr == end) {
      v.type = Type::real;
      return v;
    }
  }
  throw UsageError("cannot parse value '" + std::string(s) + "'");
}

std::map<std::string, ConfigValue> parse_toml(std::istream& in) {
  std::map<std::string, ConfigValue> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::trim(strip_comment(line));
    if (content.empty()) continue;
    if (content.front() == '[') throw ParseError("tables are not supported in experiment configs", line_no);
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key(text::trim(content.substr(0, eq)));
    if (key.empty()) throw ParseError("missing key", line_no);
    try {
      values[key] = ConfigValue::parse(content.substr(eq + 1));
    } catch (const UsageError& e) {
      throw ParseError(key + ": " + e.what(), line_no);
    }
  }
  return values;
}

void apply_config_values(ExperimentConfig& c, const std::map<std::string, ConfigValue>& values) {
  std::optional<std::uint64_t> size_min;
  std::optional<std::uint64_t> size_max;
  std::size_t per_decade = 12;
  // prior first: bf methods without an explicit prior inherit it
  if (const auto it = values.find("prior"); it != values.end()) {
    with_field("prior", [&] { c.prior = OrderPrior::parse(as_string(it->second, "prior")); });
  }
  for (const auto& [key, v] : values) {
    with_field(key, [&, &key = key, &v = v] {
      if (key == "n") c.n = as_count(v, key);
      else if (key == "m") c.m = as_count(v, key);
      else if (key == "k_gt") c.k_gt = as_count(v, key);
      else if (key == "k_max") c.k_max = as_count(v, key);
      else if (key == "replications") c.replications = as_count(v, key);
      else if (key == "perturb_extra_m") c.perturb_extra_m = as_count(v, key);
      else if (key == "master_seed") c.master_seed = as_count(v, key);
      else if (key == "alpha0") c.alpha0 = as_real(v, key);
      else if (key == "z") c.z = as_real(v, key);
      else if (key == "prior") {
      } else if (key == "constraint_mode") c.constraint_mode = parse_constraint_mode(as_string(v, key));
      else if (key == "lr_mode") c.lr_mode = parse_lr_mode(as_string(v, key));
      else if (key == "length_law") c.length_law = PathLengthLaw::parse(as_string(v, key));
      else if (key == "data_sizes") {
        c.data_sizes.clear();
        for (const auto& item : as_array(v, key)) c.data_sizes.push_back(as_count(item, key));
      } else if (key == "data_size_min") size_min = as_count(v, key);
      else if (key == "data_size_max") size_max = as_count(v, key);
      else if (key == "points_per_decade") per_decade = as_count(v, key);
      else if (key == "methods") {
        c.methods.clear();
        for (const auto& item : as_array(v, key)) c.methods.push_back(MethodSpec::parse(as_string(item, key), c.prior));
      } else {
        throw UsageError("config field '" + key + "': unknown field");
      }
    });
  }
  if (size_min || size_max) {
    if (!size_min || !size_max) throw UsageError("config field 'data_size_min': needs data_size_max as well");
    if (values.count("data_sizes")) throw UsageError("config field 'data_sizes': conflicts with data_size_min/max");
    c.data_sizes = log_spaced_grid(*size_min, *size_max, per_decade);
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  apply_config_values(config, parse_toml(in));
  return config;
}

ExperimentConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string config_to_toml(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "n = " << c.n << '\n'
      << "m = " << c.m << '\n'
      << "k_gt = " << c.k_gt << '\n'
      << "k_max = " << c.k_max << '\n'
      << "data_sizes = [";
  for (std::size_t i = 0; i < c.data_sizes.size(); ++i) out << (i ? ", " : "") << c.data_sizes[i];
  out << "]\n"
      << "replications = " << c.replications << '\n'
      << "methods = [";
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    const auto& m = c.methods[i];
    out << (i ? ", " : "") << '"';
    switch (m.kind) {
      case MethodSpec::Kind::aic: out << "aic"; break;
      case MethodSpec::Kind::bic: out << "bic"; break;
      case MethodSpec::Kind::edc: out << "edc"; break;
      case MethodSpec::Kind::lr: out << "lr:" << format_double(m.p_thres); break;
      case MethodSpec::Kind::bf: out << "bf:" << m.evidence.name() << ':' << m.prior.name(); break;
    }
    out << '"';
  }
  out << "]\n"
      << "prior = \"" << c.prior.name() << "\"\n"
      << "alpha0 = " << format_double(c.alpha0) << (std::floor(c.alpha0) == c.alpha0 ? ".0" : "") << '\n'
      << "perturb_extra_m = " << c.perturb_extra_m << '\n'
      << "constraint_mode = \"" << to_string(c.constraint_mode) << "\"\n"
      << "length_law = \"" << c.effective_length_law().to_string() << "\"\n"
      << "master_seed = " << c.master_seed << '\n'
      << "lr_mode = \"" << (c.lr_mode == LrMode::all ? "all" : "adjacent") << "\"\n"
      << "z = " << format_double(c.z) << '\n';
  return out.str();
}

std::vector<std::uint64_t> log_spaced_grid(std::uint64_t lo, std::uint64_t hi, std::size_t points_per_decade) {
  if (lo < 1 || hi < lo || points_per_decade < 1) throw UsageError("invalid data size grid");
  std::vector<std::uint64_t> out;
  const double a = std::log10(static_cast<double>(lo));
  const double b = std::log10(static_cast<double>(hi));
  const auto steps = static_cast<std::size_t>(std::ceil((b - a) * static_cast<double>(points_per_decade) - 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) {
    const double e = std::min(b, a + static_cast<double>(i) / static_cast<double>(points_per_decade));
    const auto size = static_cast<std::uint64_t>(std::llround(std::pow(10.0, e)));
    if (out.empty() || size > out.back()) out.push_back(size);
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static constexpr char digits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace pathorder
