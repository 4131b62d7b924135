#include "wloo/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wloo/error.hpp"

extern char** environ;

namespace wloo {

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> keys = {
        {"design.source", "file", "file | grid | sobol | packing"},
        {"design.file", "", "CSV with header x1..xd"},
        {"design.d", "2", "dimension for generated designs"},
        {"design.n", "20", "number of points for sobol | packing"},
        {"design.per_axis", "10", "grid points per axis"},
        {"design.seed", "", "scramble / packing seed (empty = run.seed)"},
        {"design.scramble", "false", "digitally shift generated Sobol' designs"},
        {"design.packing_a", "0.2", "relaxation of greedy packing"},
        {"design.candidates", "4096", "Sobol' candidate count for packing"},

        {"measure.source", "sobol", "sobol | file | design"},
        {"measure.file", "", "CSV with header x1..xd and optional weight column"},
        {"measure.N", "1024", "number of Sobol' support points"},

        {"data.source", "file", "file | gp | environmental | piston | zero"},
        {"data.file", "", "CSV with a y column, one row per design point"},
        {"data.seed", "", "seed for gp draws and noise (empty = run.seed)"},
        {"data.noise", "0", "std deviation of added noise"},

        {"predictor.variant", "simple_kriging",
         "simple_kriging | ordinary_kriging | bayes_polynomial | empirical_mean | table"},
        {"predictor.family", "matern52", "kernel family of the predictor"},
        {"predictor.theta", "5", "range parameter, or 'loo'"},
        {"predictor.nugget", "0", "nugget of the predictor kernel"},
        {"predictor.poly_m", "50", "number of Legendre terms"},
        {"predictor.gamma2", "0.1", "noise variance of the polynomial model"},
        {"predictor.weights_file", "", "N x n weight table over the measure support"},
        {"predictor.loo_file", "", "n x n LOO matrix R for table predictors"},

        {"kernel.family", "matern32", "family of K^(e)"},
        {"kernel.theta", "10", "range of K^(e), or 'loo'"},
        {"kernel.nugget", "0", "nugget of K^(e)"},
        {"kernel.theta_min", "0", "lower clamp applied to a LOO-selected theta (0 = none)"},
        {"kernel.theta_max", "0", "upper clamp applied to a LOO-selected theta (0 = none)"},
        {"kernel.mixture_thetas", "", "comma separated ranges for a mixture K^(e)"},
        {"kernel.mixture_weights", "", "comma separated mixture weights"},

        {"sweep.thetas", "", "comma separated theta_BLP grid"},

        {"truth.family", "", "generating kernel family; empty disables oracle columns"},
        {"truth.theta", "10", "generating kernel range"},
        {"truth.nugget", "0", "generating kernel nugget"},
        {"truth.compute_V", "true", "include V_n in exact MSE"},

        {"trend.mode", "zero", "zero | constant"},
        {"estimate.clamp", "true", "clamp pointwise estimates at zero"},

        {"run.seed", "20240101", "base seed for reproduce"},
        {"run.threads", "0", "worker threads (0 = hardware)"},
        {"run.replications", "0", "replication count for reproduce (0 = experiment default)"},
        {"output.dir", ".", "output directory"},
        {"output.format", "json", "csv | json"},
    };
    return keys;
}

bool is_config_key(const std::string& key) {
    const auto& s = config_schema();
    return std::any_of(s.begin(), s.end(), [&](const ConfigKey& k) { return k.name == key; });
}

Config::Config() {
    for (const auto& k : config_schema()) {
        values_[k.name] = k.default_value;
        explicit_[k.name] = false;
    }
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string unquote(const std::string& v, int line) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                out += v[++i];
                continue;
            }
            if (v[i] == '"') throw Error(Errc::ConfigError, "line " + std::to_string(line) + ": stray quote");
            out += v[i];
        }
        return out;
    }
    if (!v.empty() && (v.front() == '"' || v.back() == '"'))
        throw Error(Errc::ConfigError, "line " + std::to_string(line) + ": unbalanced quotes");
    return v;
}

// comments start at a # outside quotes
std::string strip_comment(const std::string& s) {
    bool q = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && q) {
            ++i;
            continue;
        }
        if (s[i] == '"') q = !q;
        if (s[i] == '#' && !q) return s.substr(0, i);
    }
    return s;
}

std::string quote(const std::string& v) {
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw Error(Errc::ConfigError, "line " + std::to_string(no) + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = unquote(trim(s.substr(eq + 1)), no);
        if (!is_config_key(key)) throw Error(Errc::ConfigError, "line " + std::to_string(no) + ": unknown key '" + key + "'");
        c.set(key, val);
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::IoError, "cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string env_name(const std::string& key) {
    std::string out = "WLOO_";
    for (char c : key) out += (c == '.' || c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void Config::apply_env(const std::map<std::string, std::string>& env) {
    for (const auto& k : config_schema()) {
        const auto it = env.find(env_name(k.name));
        if (it != env.end()) set(k.name, it->second);
    }
}

void Config::apply_process_env() {
    std::map<std::string, std::string> env;
    for (char** e = environ; e && *e; ++e) {
        const std::string s(*e);
        if (s.rfind("WLOO_", 0) != 0) continue;
        const auto eq = s.find('=');
        if (eq != std::string::npos) env[s.substr(0, eq)] = s.substr(eq + 1);
    }
    apply_env(env);
}

void Config::set(const std::string& key, const std::string& value) {
    if (!is_config_key(key)) throw Error(Errc::ConfigError, "unknown key '" + key + "'");
    values_[key] = value;
    explicit_[key] = true;
}

const std::string& Config::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw Error(Errc::ConfigError, "unknown key '" + key + "'");
    return it->second;
}

bool Config::is_set(const std::string& key) const {
    const auto it = explicit_.find(key);
    return it != explicit_.end() && it->second;
}

double Config::real(const std::string& key) const {
    const std::string& s = raw(key);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE)
        throw Error(Errc::ConfigError, key + ": expected a number, got '" + s + "'");
    return v;
}

long long Config::integer(const std::string& key) const {
    const std::string& s = raw(key);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno == ERANGE)
        throw Error(Errc::ConfigError, key + ": expected an integer, got '" + s + "'");
    return v;
}

std::uint64_t Config::u64(const std::string& key) const {
    const std::string& s = raw(key);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s.front() == '-' || *end != '\0' || errno == ERANGE)
        throw Error(Errc::ConfigError, key + ": expected an unsigned integer, got '" + s + "'");
    return v;
}

bool Config::flag(const std::string& key) const {
    const std::string& s = raw(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw Error(Errc::ConfigError, key + ": expected a boolean, got '" + s + "'");
}

std::vector<double> Config::reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(raw(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (*end != '\0') throw Error(Errc::ConfigError, key + ": bad list entry '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::string Config::serialize(bool include_defaults) const {
    std::ostringstream out;
    for (const auto& [k, v] : values_)
        if (include_defaults || is_set(k)) out << k << " = " << quote(v) << "\n";
    return out.str();
}

}  // namespace wloo
