#include "infodrift/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "infodrift/error.hpp"
#include "infodrift/io.hpp"

namespace infodrift {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, "key " + key + ": " + what);
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad(key, "expected a number, got '" + s + "'");
    return v;
}

template <class Int>
Int to_integer(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad(key, "expected an integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad(key, "expected true or false, got '" + s + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    if (out.empty()) bad(key, "empty list");
    return out;
}

StepFunction to_step(const std::string& key, const std::string& raw, int n_steps) {
    std::vector<double> v = to_list(key, raw);
    if (v.size() == 1) return StepFunction::constant(v.front(), n_steps);
    if (static_cast<int>(v.size()) != n_steps)
        bad(key, "expected 1 or " + std::to_string(n_steps) + " values, got " + std::to_string(v.size()));
    return StepFunction(std::move(v));
}

QuadratureMode to_mode(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    for (QuadratureMode m : {QuadratureMode::Auto, QuadratureMode::GaussianDecay, QuadratureMode::Periodic})
        if (s == to_string(m)) return m;
    bad(key, "unknown quadrature mode '" + s + "'");
}

// Reads values from one section and remembers which keys were consumed.
class Section {
public:
    Section(const pt::ptree& root, std::string name, bool required) : name_(std::move(name)) {
        const auto it = root.find(name_);
        if (it == root.not_found()) {
            if (required) throw Error(ErrorCode::InvalidConfig, "missing section [" + name_ + "]");
            return;
        }
        tree_ = &it->second;
    }

    std::string key(const std::string& k) const { return name_ + "." + k; }
    bool has(const std::string& k) const { return tree_ && tree_->find(k) != tree_->not_found(); }
    std::string get(const std::string& k) {
        if (!has(k)) throw Error(ErrorCode::InvalidConfig, "missing key " + key(k));
        used_.insert(k);
        return tree_->find(k)->second.data();
    }

    void reject_unknown() const {
        if (!tree_) return;
        for (const auto& [k, v] : *tree_) {
            if (!v.empty()) throw Error(ErrorCode::InvalidConfig, "nested key under " + key(k));
            if (!used_.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown key " + key(k));
        }
    }

private:
    std::string name_;
    const pt::ptree* tree_ = nullptr;
    std::set<std::string> used_;
};

void apply_override(pt::ptree& root, const std::string& ov) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "override '" + ov + "' is not key=value");
    const std::string path = trim(std::string_view(ov).substr(0, eq));
    const std::string value = trim(std::string_view(ov).substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size() || path.find('.', dot + 1) != std::string::npos)
        throw Error(ErrorCode::InvalidConfig, "override key '" + path + "' must be section.key");
    root.put(pt::ptree::path_type(path, '.'), value);
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_double(v[i]);
    }
    return s;
}

std::string step_text(const StepFunction& f) {
    if (f.size() > 0 && f.is_constant()) return format_double(f.at_cell(0));
    return join(f.values());
}

}  // namespace

RunConfig parse_config(std::string_view text, std::span<const std::string> overrides) {
    pt::ptree root;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(e.line()) + ": " + e.message());
    }
    for (const std::string& ov : overrides) apply_override(root, ov);

    const std::set<std::string> known{"grid", "signal", "levy", "market", "quadrature", "mc"};
    for (const auto& [name, sub] : root) {
        if (!known.count(name)) throw Error(ErrorCode::InvalidConfig, "unknown section [" + name + "]");
        if (sub.empty()) throw Error(ErrorCode::InvalidConfig, "key '" + name + "' outside any section");
    }

    RunConfig c;
    Section grid(root, "grid", true);
    const double t0 = to_double(grid.key("T0"), grid.get("T0"));
    const int n = to_integer<int>(grid.key("n_steps"), grid.get("n_steps"));
    grid.reject_unknown();
    c.signal.grid = TimeGrid(t0, n);

    Section levy(root, "levy", false);
    std::vector<LevyMark> marks;
    if (levy.has("zeta") || levy.has("lambda")) {
        const std::vector<double> zeta = to_list(levy.key("zeta"), levy.get("zeta"));
        const std::vector<double> lambda = to_list(levy.key("lambda"), levy.get("lambda"));
        if (zeta.size() != lambda.size())
            bad(levy.key("lambda"), "needs one entry per zeta (" + std::to_string(zeta.size()) + ")");
        for (std::size_t j = 0; j < zeta.size(); ++j) marks.push_back({zeta[j], lambda[j]});
    }
    levy.reject_unknown();
    c.levy = DiscreteLevyMeasure(marks);

    Section signal(root, "signal", true);
    c.signal.sigma_y = to_step(signal.key("sigma_Y"), signal.get("sigma_Y"), n);
    for (std::size_t j = 0; j < marks.size(); ++j) {
        const std::string k = "theta_" + std::to_string(j + 1);
        c.signal.theta.push_back(signal.has(k) ? to_step(signal.key(k), signal.get(k), n)
                                               : StepFunction::constant(marks[j].zeta, n));
    }
    if (signal.has("enlarge")) c.signal.enlarge = to_bool(signal.key("enlarge"), signal.get("enlarge"));
    signal.reject_unknown();

    Section market(root, "market", true);
    c.market.horizon = to_double(market.key("T"), market.get("T"));
    c.market.b = to_step(market.key("b"), market.get("b"), n);
    c.market.sigma = to_step(market.key("sigma"), market.get("sigma"), n);
    for (std::size_t j = 0; j < marks.size(); ++j) {
        const std::string k = "gamma_" + std::to_string(j + 1);
        c.market.gamma.push_back(market.has(k) ? to_step(market.key(k), market.get(k), n)
                                               : StepFunction::constant(0.0, n));
    }
    if (market.has("eps_adm")) c.market.eps_adm = to_double(market.key("eps_adm"), market.get("eps_adm"));
    market.reject_unknown();

    Section quad(root, "quadrature", false);
    if (quad.has("mode")) c.quadrature.mode = to_mode(quad.key("mode"), quad.get("mode"));
    if (quad.has("abs_tol")) c.quadrature.abs_tol = to_double(quad.key("abs_tol"), quad.get("abs_tol"));
    if (quad.has("max_nodes")) c.quadrature.max_nodes = to_integer<int>(quad.key("max_nodes"), quad.get("max_nodes"));
    if (quad.has("envelope_floor"))
        c.quadrature.envelope_floor = to_double(quad.key("envelope_floor"), quad.get("envelope_floor"));
    quad.reject_unknown();
    if (!(c.quadrature.abs_tol > 0.0)) bad("quadrature.abs_tol", "must be positive");
    if (c.quadrature.max_nodes < 33) bad("quadrature.max_nodes", "must be at least 33");
    if (!(c.quadrature.envelope_floor > 0.0 && c.quadrature.envelope_floor < 1.0))
        bad("quadrature.envelope_floor", "must lie in (0, 1)");

    Section mc(root, "mc", false);
    if (mc.has("n_paths")) {
        const auto np = to_integer<long long>(mc.key("n_paths"), mc.get("n_paths"));
        if (np < 1) bad(mc.key("n_paths"), "must be >= 1");
        c.n_paths = static_cast<std::size_t>(np);
    }
    if (mc.has("seed")) c.seed = to_integer<std::uint64_t>(mc.key("seed"), mc.get("seed"));
    if (mc.has("dump_paths")) c.dump_paths = to_integer<std::size_t>(mc.key("dump_paths"), mc.get("dump_paths"));
    mc.reject_unknown();
    return c;
}

RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), overrides);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string to_config_text(const RunConfig& c) {
    std::ostringstream o;
    const auto& marks = c.levy.marks();
    o << "[grid]\n";
    o << "T0 = " << format_double(c.signal.grid.t_end()) << "\n";
    o << "n_steps = " << c.signal.grid.n_steps() << "\n\n";
    o << "[signal]\n";
    o << "sigma_Y = " << step_text(c.signal.sigma_y) << "\n";
    for (std::size_t j = 0; j < c.signal.theta.size(); ++j)
        o << "theta_" << j + 1 << " = " << step_text(c.signal.theta[j]) << "\n";
    o << "enlarge = " << (c.signal.enlarge ? "true" : "false") << "\n\n";
    if (!marks.empty()) {
        std::vector<double> z, l;
        for (const LevyMark& m : marks) {
            z.push_back(m.zeta);
            l.push_back(m.lambda);
        }
        o << "[levy]\n";
        o << "zeta = " << join(z) << "\n";
        o << "lambda = " << join(l) << "\n\n";
    }
    o << "[market]\n";
    o << "T = " << format_double(c.market.horizon) << "\n";
    o << "b = " << step_text(c.market.b) << "\n";
    o << "sigma = " << step_text(c.market.sigma) << "\n";
    for (std::size_t j = 0; j < c.market.gamma.size(); ++j)
        o << "gamma_" << j + 1 << " = " << step_text(c.market.gamma[j]) << "\n";
    o << "eps_adm = " << format_double(c.market.eps_adm) << "\n\n";
    o << "[quadrature]\n";
    o << "mode = " << to_string(c.quadrature.mode) << "\n";
    o << "abs_tol = " << format_double(c.quadrature.abs_tol) << "\n";
    o << "max_nodes = " << c.quadrature.max_nodes << "\n";
    o << "envelope_floor = " << format_double(c.quadrature.envelope_floor) << "\n\n";
    o << "[mc]\n";
    o << "n_paths = " << c.n_paths << "\n";
    o << "seed = " << c.seed << "\n";
    o << "dump_paths = " << c.dump_paths << "\n";
    return o.str();
}

}  // namespace infodrift
