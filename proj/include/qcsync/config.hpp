#pragma once

// YAML run configuration for the command-line front end.
//
//   chain:       theta1, theta2, theta3, phi_a, phi_b (or phi), collisions,
//                optional theta_E | env_mixing, optional markovian
//   system:      n_th, xi, varphi, alpha        (or system_a / system_b)
//   env:         alpha_E
//   sweep:       theta1, axis1 {min, max, steps}, axis2 {min, max, steps}
//   liouvillian: n_max, fit_window [lo, hi], re_tolerance, mode
//   wigner:      snapshots [...], points
//   output:      directory
//
// Angles accept plain numbers or expressions such as "pi/4", "-3*pi/8", "(1/4 - 1/8)*pi".
// alpha accepts a real number or [re, im].

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "qcsync/collision.hpp"

namespace qcsync {

struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    int steps = 2;

    double value(int i) const { return min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1); }
};

/// Grid over (theta2 - theta1, theta3 - theta1) at fixed theta1.
struct SweepSpec {
    double theta1 = 0.0;
    GridAxis axis1;  // theta2 - theta1
    GridAxis axis2;  // theta3 - theta1
};

struct LiouvillianSpec {
    int n_max = 5;
    int fit_lo = 40;
    int fit_hi = 200;
    bool fit_window_given = false;
    double re_tolerance = 1e-10;
    char mode = 'a';
};

struct WignerSpec {
    std::vector<int> snapshots;
    int points = 201;
};

struct RunConfig {
    std::string source;
    ChainConfig chain;
    SystemModeSpec system_a;
    SystemModeSpec system_b;
    EnvModeSpec env;
    std::optional<SweepSpec> sweep;
    LiouvillianSpec liouvillian;
    WignerSpec wigner;
    std::string output;
};

namespace detail {

class ExprParser {
public:
    explicit ExprParser(std::string text) : s_(std::move(text)) {}

    std::optional<double> parse() {
        pos_ = 0;
        ok_ = true;
        const double v = sum();
        skip();
        if (!ok_ || pos_ != s_.size()) return std::nullopt;
        return v;
    }

private:
    void skip() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    double sum() {
        double v = product();
        for (;;) {
            if (eat('+')) v += product();
            else if (eat('-')) v -= product();
            else return v;
        }
    }
    double product() {
        double v = factor();
        for (;;) {
            if (eat('*')) v *= factor();
            else if (eat('/')) v /= factor();
            else return v;
        }
    }
    double factor() {
        if (eat('-')) return -factor();
        if (eat('+')) return factor();
        if (eat('(')) {
            const double v = sum();
            if (!eat(')')) ok_ = false;
            return v;
        }
        skip();
        if (s_.compare(pos_, 2, "pi") == 0) {
            pos_ += 2;
            return kPi;
        }
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc{}) {
            ok_ = false;
            return 0.0;
        }
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }

    std::string s_;
    std::size_t pos_ = 0;
    bool ok_ = true;
};

class ConfigReader {
public:
    explicit ConfigReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void error(const YAML::Node& node, const std::string& msg) const {
        const auto mark = node.Mark();
        std::string where = source_;
        if (mark.line >= 0) where += ":" + std::to_string(mark.line + 1);
        fail(ErrorKind::InvalidArgument, where + ": " + msg);
    }
    [[noreturn]] void error(const std::string& msg) const { fail(ErrorKind::InvalidArgument, source_ + ": " + msg); }

    void require_map(const YAML::Node& node, const std::string& name, const std::set<std::string>& allowed) const {
        if (!node.IsMap()) error(node, "'" + name + "' must be a mapping");
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) error(kv.first, "unknown key '" + name + "." + key + "'");
        }
    }

    double real(const YAML::Node& node, const std::string& name) const {
        if (!node.IsScalar()) error(node, "'" + name + "' must be a number or expression");
        const auto v = ExprParser(node.Scalar()).parse();
        if (!v || !std::isfinite(*v)) error(node, "'" + name + "': cannot parse '" + node.Scalar() + "' as a number");
        return *v;
    }

    double real_in(const YAML::Node& node, const std::string& name, double lo, double hi, const char* range) const {
        const double v = real(node, name);
        if (v < lo - kAngleSlack || v > hi + kAngleSlack)
            error(node, "'" + name + "' must lie in " + range + ", got " + node.Scalar());
        return v;
    }

    int integer(const YAML::Node& node, const std::string& name, int lo) const {
        if (!node.IsScalar()) error(node, "'" + name + "' must be an integer");
        int v = 0;
        const auto& s = node.Scalar();
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) error(node, "'" + name + "' must be an integer, got " + s);
        if (v < lo) error(node, "'" + name + "' must be >= " + std::to_string(lo) + ", got " + s);
        return v;
    }

    bool boolean(const YAML::Node& node, const std::string& name) const {
        bool v = false;
        if (!node.IsScalar() || !YAML::convert<bool>::decode(node, v)) error(node, "'" + name + "' must be true or false");
        return v;
    }

    cplx complex(const YAML::Node& node, const std::string& name) const {
        if (node.IsScalar()) return {real(node, name), 0.0};
        if (node.IsSequence() && node.size() == 2) return {real(node[0], name + "[0]"), real(node[1], name + "[1]")};
        error(node, "'" + name + "' must be a number or [re, im]");
    }

private:
    std::string source_;
};

inline SystemModeSpec read_system(const ConfigReader& r, const YAML::Node& node, const std::string& name) {
    r.require_map(node, name, {"n_th", "xi", "varphi", "alpha"});
    SystemModeSpec s;
    if (node["n_th"]) s.n_th = r.real_in(node["n_th"], name + ".n_th", 0.0, HUGE_VAL, "[0, inf)");
    if (node["xi"]) s.xi = r.real_in(node["xi"], name + ".xi", 0.0, HUGE_VAL, "[0, inf)");
    if (node["varphi"]) s.varphi = r.real(node["varphi"], name + ".varphi");
    if (node["alpha"]) s.alpha = r.complex(node["alpha"], name + ".alpha");
    return s;
}

inline GridAxis read_axis(const ConfigReader& r, const YAML::Node& node, const std::string& name) {
    r.require_map(node, name, {"min", "max", "steps"});
    for (const char* k : {"min", "max", "steps"})
        if (!node[k]) r.error(node, "missing '" + name + "." + k + "'");
    GridAxis a;
    a.min = r.real(node["min"], name + ".min");
    a.max = r.real(node["max"], name + ".max");
    a.steps = r.integer(node["steps"], name + ".steps", 2);
    if (a.max < a.min) r.error(node, "'" + name + "': max must be >= min");
    return a;
}

}  // namespace detail

inline RunConfig parse_config(const YAML::Node& root, const std::string& source = "<config>") {
    const detail::ConfigReader r(source);
    if (!root.IsMap()) r.error(root, "top level must be a mapping");
    r.require_map(root, "config", {"chain", "system", "system_a", "system_b", "env", "sweep", "liouvillian", "wigner",
                                   "output"});
    RunConfig cfg;
    cfg.source = source;

    const auto chain = root["chain"];
    if (!chain) r.error("missing section 'chain'");
    r.require_map(chain, "chain",
                  {"theta1", "theta2", "theta3", "phi", "phi_a", "phi_b", "collisions", "theta_E", "env_mixing",
                   "markovian"});
    for (const char* k : {"theta1", "theta2", "theta3", "collisions"})
        if (!chain[k]) r.error(chain, std::string("missing 'chain.") + k + "'");
    auto& c = cfg.chain;
    c.theta1 = r.real_in(chain["theta1"], "chain.theta1", 0.0, kPi / 2, "[0, pi/2]");
    c.theta2 = r.real_in(chain["theta2"], "chain.theta2", 0.0, kPi / 2, "[0, pi/2]");
    c.theta3 = r.real_in(chain["theta3"], "chain.theta3", 0.0, kPi / 2, "[0, pi/2]");
    if (chain["phi"]) {
        if (chain["phi_a"] || chain["phi_b"]) r.error(chain["phi"], "give either 'chain.phi' or 'chain.phi_a'/'chain.phi_b'");
        c.phi_a = c.phi_b = r.real(chain["phi"], "chain.phi");
    } else {
        if (!chain["phi_a"] || !chain["phi_b"]) r.error(chain, "missing 'chain.phi' or 'chain.phi_a'/'chain.phi_b'");
        c.phi_a = r.real(chain["phi_a"], "chain.phi_a");
        c.phi_b = r.real(chain["phi_b"], "chain.phi_b");
    }
    c.collisions = r.integer(chain["collisions"], "chain.collisions", 1);
    if (chain["theta_E"] && chain["env_mixing"]) r.error(chain["env_mixing"], "give either 'chain.theta_E' or 'chain.env_mixing'");
    c.markovian = true;
    if (chain["theta_E"]) {
        c.theta_E = r.real_in(chain["theta_E"], "chain.theta_E", 0.0, kPi / 2, "[0, pi/2]");
        c.markovian = false;
    }
    if (chain["env_mixing"]) {
        c.theta_E = ChainConfig::theta_E_from_mixing(
            r.real_in(chain["env_mixing"], "chain.env_mixing", 0.0, kPi / 2, "[0, pi/2]"));
        c.markovian = false;
    }
    if (chain["markovian"]) c.markovian = r.boolean(chain["markovian"], "chain.markovian");

    if (root["system"]) {
        if (root["system_a"] || root["system_b"]) r.error(root["system"], "give either 'system' or 'system_a'/'system_b'");
        cfg.system_a = cfg.system_b = detail::read_system(r, root["system"], "system");
    } else {
        if (root["system_a"]) cfg.system_a = detail::read_system(r, root["system_a"], "system_a");
        if (root["system_b"]) cfg.system_b = detail::read_system(r, root["system_b"], "system_b");
    }
    if (const auto env = root["env"]) {
        r.require_map(env, "env", {"alpha_E"});
        if (env["alpha_E"]) cfg.env.alpha_E = r.complex(env["alpha_E"], "env.alpha_E");
    }

    if (const auto sw = root["sweep"]) {
        r.require_map(sw, "sweep", {"theta1", "axis1", "axis2"});
        for (const char* k : {"theta1", "axis1", "axis2"})
            if (!sw[k]) r.error(sw, std::string("missing 'sweep.") + k + "'");
        SweepSpec s;
        s.theta1 = r.real_in(sw["theta1"], "sweep.theta1", 0.0, kPi / 2, "[0, pi/2]");
        s.axis1 = detail::read_axis(r, sw["axis1"], "sweep.axis1");
        s.axis2 = detail::read_axis(r, sw["axis2"], "sweep.axis2");
        const auto in_range = [](double v) { return v >= -kAngleSlack && v <= kPi / 2 + kAngleSlack; };
        if (!in_range(s.theta1 + s.axis1.min) || !in_range(s.theta1 + s.axis1.max))
            r.error(sw["axis1"], "'sweep.axis1' puts theta2 outside [0, pi/2]");
        if (!in_range(s.theta1 + s.axis2.min) || !in_range(s.theta1 + s.axis2.max))
            r.error(sw["axis2"], "'sweep.axis2' puts theta3 outside [0, pi/2]");
        cfg.sweep = s;
    }

    if (const auto lv = root["liouvillian"]) {
        r.require_map(lv, "liouvillian", {"n_max", "fit_window", "re_tolerance", "mode"});
        auto& l = cfg.liouvillian;
        if (lv["n_max"]) l.n_max = r.integer(lv["n_max"], "liouvillian.n_max", 2);
        if (lv["fit_window"]) {
            const auto w = lv["fit_window"];
            if (!w.IsSequence() || w.size() != 2) r.error(w, "'liouvillian.fit_window' must be [lo, hi]");
            l.fit_lo = r.integer(w[0], "liouvillian.fit_window[0]", 0);
            l.fit_hi = r.integer(w[1], "liouvillian.fit_window[1]", l.fit_lo + 1);
            if (l.fit_hi > c.collisions) r.error(w, "'liouvillian.fit_window' extends past chain.collisions");
            l.fit_window_given = true;
        }
        if (lv["re_tolerance"]) l.re_tolerance = r.real_in(lv["re_tolerance"], "liouvillian.re_tolerance", 0.0, 1.0, "[0, 1]");
        if (lv["mode"]) {
            const auto m = lv["mode"].as<std::string>();
            if (m != "a" && m != "b") r.error(lv["mode"], "'liouvillian.mode' must be a or b");
            l.mode = m[0];
        }
    }
    if (!cfg.liouvillian.fit_window_given) {
        cfg.liouvillian.fit_hi = std::min(cfg.liouvillian.fit_hi, c.collisions);
        cfg.liouvillian.fit_lo = std::min(cfg.liouvillian.fit_lo, cfg.liouvillian.fit_hi / 5);
    }

    if (const auto wg = root["wigner"]) {
        r.require_map(wg, "wigner", {"snapshots", "points"});
        if (const auto snaps = wg["snapshots"]) {
            if (!snaps.IsSequence()) r.error(snaps, "'wigner.snapshots' must be a list");
            for (std::size_t i = 0; i < snaps.size(); ++i) {
                const int v = r.integer(snaps[i], "wigner.snapshots", 0);
                if (v > c.collisions) r.error(snaps[i], "'wigner.snapshots' entry " + std::to_string(v) + " exceeds chain.collisions");
                cfg.wigner.snapshots.push_back(v);
            }
        }
        if (wg["points"]) cfg.wigner.points = r.integer(wg["points"], "wigner.points", 2);
    }

    if (const auto out = root["output"]) {
        if (!out.IsScalar()) r.error(out, "'output' must be a directory path");
        cfg.output = out.Scalar();
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidArgument, path + ": cannot open config file");
    YAML::Node root;
    try {
        root = YAML::Load(in);
    } catch (const YAML::Exception& e) {
        fail(ErrorKind::InvalidArgument, path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    return parse_config(root, path);
}

inline RunConfig parse_config_string(const std::string& text, const std::string& source = "<string>") {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        fail(ErrorKind::InvalidArgument, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    return parse_config(root, source);
}

}  // namespace qcsync
