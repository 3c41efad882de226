#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "errors.hpp"

namespace translab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kEnvPrefix = "TRANSLAB_";

// ---- configuration ----

enum class KeyType { string, real, integer, boolean };

struct KeyInfo {
  KeyType type;
  std::set<std::string> sections;  // where the key may appear
};

inline const std::map<std::string, KeyInfo>& config_schema() {
  static const std::map<std::string, KeyInfo> s = {
      {"curvature", {KeyType::string, {"global", "bowl", "catenoid", "verify"}}},
      {"seed", {KeyType::integer, {"global"}}},
      {"out", {KeyType::string, {"global"}}},
      {"quiet", {KeyType::boolean, {"global"}}},
      {"plot", {KeyType::boolean, {"global", "bowl", "catenoid"}}},
      {"rel_tol", {KeyType::real, {"global", "bowl", "catenoid", "verify"}}},
      {"abs_tol", {KeyType::real, {"global", "bowl", "catenoid", "verify"}}},
      {"r_max", {KeyType::real, {"bowl", "catenoid", "verify"}}},
      {"eps0", {KeyType::real, {"bowl"}}},
      {"regime", {KeyType::string, {"bowl"}}},
      {"fit_lo", {KeyType::real, {"bowl", "catenoid"}}},
      {"fit_hi", {KeyType::real, {"bowl", "catenoid"}}},
      {"R", {KeyType::real, {"catenoid"}}},
      {"handoff", {KeyType::real, {"catenoid"}}},
      {"suite", {KeyType::string, {"verify"}}},
      {"pairs", {KeyType::integer, {"verify"}}},
      {"samples", {KeyType::integer, {"verify"}}},
  };
  return s;
}

// Flat key = value settings for one command, in order of precedence file < environment < flags.
class RunConfig {
 public:
  explicit RunConfig(std::string command = "") : command_(std::move(command)) {}

  const std::string& command() const { return command_; }

  void set(const std::string& key, const std::string& value, const std::string& origin = "flag") {
    auto it = config_schema().find(key);
    if (it == config_schema().end()) throw ConfigError("unknown config key '" + key + "' (" + origin + ")");
    check_type(key, it->second.type, value);
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& def = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }
  double real(const std::string& key, double def) const { return has(key) ? std::stod(values_.at(key)) : def; }
  long integer(const std::string& key, long def) const { return has(key) ? std::stol(values_.at(key)) : def; }
  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    auto v = values_.at(key);
    return v == "1" || v == "true" || v == "yes" || v == "on";
  }

  // [global] and [<command>] sections are applied; other sections are still validated.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line, section = "global";
    int ln = 0;
    while (std::getline(in, line)) {
      ++ln;
      auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      std::string where = path + ":" + std::to_string(ln);
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("bad section header at " + where);
        section = trim(line.substr(1, line.size() - 2));
        static const std::set<std::string> known = {"global", "bowl", "catenoid", "verify"};
        if (!known.count(section)) throw ConfigError("unknown section [" + section + "] at " + where);
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value at " + where);
      std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      auto it = config_schema().find(key);
      if (it == config_schema().end()) throw ConfigError("unknown config key '" + key + "' at " + where);
      if (!it->second.sections.count(section))
        throw ConfigError("key '" + key + "' not allowed in [" + section + "] at " + where);
      check_type(key, it->second.type, value);
      if (section == "global" || section == command_) values_[key] = value;
    }
  }

  // TRANSLAB_<KEY> with the key upper-cased
  void load_env() {
    for (const auto& [key, info] : config_schema()) {
      std::string name = kEnvPrefix;
      for (char c : key) name += char(std::toupper(static_cast<unsigned char>(c)));
      if (const char* v = std::getenv(name.c_str())) set(key, v, name);
    }
  }

  Json echo() const {
    Json j = Json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static void check_type(const std::string& key, KeyType t, const std::string& v) {
    std::size_t used = 0;
    try {
      switch (t) {
        case KeyType::real:
          std::stod(v, &used);
          break;
        case KeyType::integer:
          std::stol(v, &used);
          break;
        case KeyType::boolean: {
          static const std::set<std::string> ok = {"0", "1", "true", "false", "yes", "no", "on", "off"};
          if (!ok.count(v)) throw std::invalid_argument("bool");
          used = v.size();
          break;
        }
        case KeyType::string:
          used = v.size();
          break;
      }
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != v.size() || v.empty()) throw ConfigError("bad value '" + v + "' for key '" + key + "'");
  }

  std::string command_;
  std::map<std::string, std::string> values_;
};

// ---- output ----

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Column-major CSV at 17 significant digits.
inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<const std::vector<double>*>& cols) {
  if (cols.empty()) throw ParameterError("csv needs at least one column");
  std::size_t n = cols.front()->size();
  for (auto* c : cols)
    if (c->size() != n) throw ParameterError("csv columns differ in length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << header << '\n';
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    line.clear();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) line += ',';
      line += format_double((*cols[j])[i]);
    }
    out << line << '\n';
  }
}

// NaN and inf become null
inline Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
template <class T>
Json num(const std::optional<T>& x) {
  return x ? num(double(*x)) : Json(nullptr);
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline void write_text(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << s;
}

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), std::size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Tool version, config echo, checks and the hashed file inventory.
class RunManifest {
 public:
  RunManifest(std::string command, Json config) : command_(std::move(command)), config_(std::move(config)) {}

  void add_check(const std::string& name, bool pass, const std::string& detail = "") {
    checks_.push_back({name, pass, detail});
  }
  void add_file(const std::filesystem::path& p) { files_.push_back(p); }
  const std::vector<CheckResult>& checks() const { return checks_; }
  const std::vector<std::filesystem::path>& files() const { return files_; }
  bool all_pass() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const CheckResult& c) { return c.pass; });
  }

  Json to_json(double wall_time) const {
    Json j;
    j["tool"] = "translab";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["config"] = config_;
    j["wall_time_s"] = wall_time;
    Json cs = Json::array();
    for (const auto& c : checks_) cs.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["checks"] = cs;
    j["all_pass"] = all_pass();
    Json fs = Json::array();
    for (const auto& p : files_)
      fs.push_back({{"path", p.filename().string()},
                    {"bytes", std::filesystem::file_size(p)},
                    {"sha256", sha256_file(p)}});
    j["files"] = fs;
    return j;
  }

 private:
  std::string command_;
  Json config_;
  std::vector<CheckResult> checks_;
  std::vector<std::filesystem::path> files_;
};

}  // namespace translab
