#include "dlsq/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace dlsq {

ToyConfig ToySettings::to_toy_config() const {
    ToyConfig cfg;
    cfg.mode = mode;
    cfg.lr = lr;
    cfg.steps = steps;
    cfg.t = t;
    cfg.seed = seed;
    cfg.target = CurveParams{{target[0], target[1]}};
    cfg.points = default_toy_points(cfg.target, seed, points, amplitude);
    return cfg;
}

lane::TrainConfig TrainSettings::for_regime(lane::Regime regime) const {
    lane::TrainConfig cfg = common;
    cfg.lr = regime == lane::Regime::end_to_end ? lr_end2end : lr_xent;
    return cfg;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line = 0;
};

class Parser {
public:
    Parser(const std::string& text, std::string origin) : origin_(std::move(origin)) {
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
                if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
                section = trim(s.substr(1, s.size() - 2));
                if (!kSections.count(section)) fail(line, "unknown section [" + section + "]");
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
            if (section.empty()) fail(line, "key outside of any section");
            const std::string key = section + "." + trim(s.substr(0, eq));
            if (entries_.count(key)) fail(line, "duplicate key '" + key + "'");
            entries_[key] = Entry{trim(s.substr(eq + 1)), line};
        }
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
    }

    /// Applies `set` to the value of `key` when present.
    void take(const std::string& key, const std::function<void(const std::string&, int)>& set) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return;
        set(it->second.value, it->second.line);
        used_.insert(key);
    }

    double number(const std::string& key, const std::string& text, int line) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
            fail(line, key + ": expected a finite number, got '" + text + "'");
        }
        return v;
    }

    std::uint64_t integer(const std::string& key, const std::string& text, int line) const {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            fail(line, key + ": expected a non-negative integer, got '" + text + "'");
        }
        return v;
    }

    std::vector<double> numbers(const std::string& key, const std::string& text, int line) const {
        std::vector<double> out;
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) {
            if (tok.back() == ',') tok.pop_back();
            if (!tok.empty()) out.push_back(number(key, tok, line));
        }
        return out;
    }

    void real(const std::string& key, double& dst, double lo = -INFINITY, bool lo_open = false) {
        take(key, [&](const std::string& v, int line) {
            dst = number(key, v, line);
            if (dst < lo || (lo_open && dst == lo)) {
                fail(line, key + ": must be " + (lo_open ? "> " : ">= ") + format(lo) + ", got " + v);
            }
        });
    }

    template <typename T>
    void count(const std::string& key, T& dst, std::uint64_t lo = 0) {
        take(key, [&](const std::string& v, int line) {
            const std::uint64_t x = integer(key, v, line);
            if (x < lo) fail(line, key + ": must be >= " + std::to_string(lo) + ", got " + v);
            dst = static_cast<T>(x);
        });
    }

    void flag(const std::string& key, bool& dst) {
        take(key, [&](const std::string& v, int line) {
            if (v == "true") dst = true;
            else if (v == "false") dst = false;
            else fail(line, key + ": expected true or false, got '" + v + "'");
        });
    }

    void reject_unused() const {
        for (const auto& [key, e] : entries_) {
            if (!used_.count(key)) fail(e.line, "unknown key '" + key + "'");
        }
    }

    /// Runs a module validator, reporting failures against the section's first line.
    void check(const std::string& section, const std::function<void()>& validate) const {
        try {
            validate();
        } catch (const InvalidConfig& e) {
            int line = 0;
            for (const auto& [key, entry] : entries_) {
                if (key.rfind(section + ".", 0) == 0 && (line == 0 || entry.line < line)) line = entry.line;
            }
            fail(line, "[" + section + "] " + e.what());
        }
    }

    const std::string& origin() const { return origin_; }

private:
    static std::string format(double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    }

    inline static const std::set<std::string> kSections = {
        "toy", "scenes", "scenes.distractor", "homography", "train", "train.end2end", "train.xent", "eval", "output"};

    std::string origin_;
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    Parser p(text, origin);
    ExperimentConfig cfg;

    ToySettings& toy = cfg.toy;
    p.take("toy.mode", [&](const std::string& v, int line) {
        try {
            toy.mode = parse_toy_mode(v);
        } catch (const InvalidConfig&) {
            p.fail(line, "toy.mode: expected coords, weights or both, got '" + v + "'");
        }
    });
    p.real("toy.lr", toy.lr, 0.0);
    p.count("toy.steps", toy.steps);
    p.real("toy.t", toy.t, 0.0, true);
    p.count("toy.seed", toy.seed);
    p.take("toy.target", [&](const std::string& v, int line) {
        const auto xs = p.numbers("toy.target", v, line);
        if (xs.size() != 2) p.fail(line, "toy.target: expected two numbers (intercept, slope)");
        toy.target = {xs[0], xs[1]};
    });
    p.count("toy.points", toy.points, 2);
    p.real("toy.amplitude", toy.amplitude, 0.0);
    p.count("toy.frame_every", toy.frame_every, 1);

    lane::SceneConfig& sc = cfg.scenes.scene;
    p.count("scenes.height", sc.height, 16);
    p.count("scenes.width", sc.width, 16);
    p.count("scenes.curves", sc.curves, 1);
    p.real("scenes.horizon", sc.horizon, 0.0, true);
    p.real("scenes.lane_width", sc.lane_width, 0.0, true);
    p.real("scenes.offset_jitter", sc.offset_jitter, 0.0);
    p.real("scenes.heading_range", sc.heading_range, 0.0);
    p.real("scenes.curvature_range", sc.curvature_range, 0.0);
    p.real("scenes.thickness_px", sc.thickness_px, 0.0, true);
    p.real("scenes.thickness_jitter", sc.thickness_jitter, 0.0);
    p.real("scenes.intensity_min", sc.intensity_min, 0.0, true);
    p.flag("scenes.dashed", sc.dashed);
    p.real("scenes.dash_period", sc.dash_period, 0.0, true);
    p.real("scenes.dash_duty", sc.dash_duty, 0.0, true);
    p.real("scenes.noise", sc.noise, 0.0);
    p.real("scenes.distractor_prob", sc.distractor_prob, 0.0);
    p.count("scenes.distractor_max", sc.distractor_max);
    p.real("scenes.distractor_radius_min", sc.distractor_radius_min, 0.0, true);
    p.real("scenes.distractor_radius_max", sc.distractor_radius_max, 0.0, true);
    p.count("scenes.first_seed", cfg.scenes.first_seed);
    p.count("scenes.train", cfg.scenes.train, 1);
    p.count("scenes.val", cfg.scenes.val, 1);
    p.take("scenes.val_first_seed", [&](const std::string& v, int line) {
        cfg.scenes.val_first_seed = p.integer("scenes.val_first_seed", v, line);
    });
    p.count("scenes.distractor.first_seed", cfg.scenes.distractor_first_seed);
    p.count("scenes.distractor.count", cfg.scenes.distractor_count, 1);
    p.take("homography.image_to_ortho", [&](const std::string& v, int line) {
        const auto xs = p.numbers("homography.image_to_ortho", v, line);
        if (xs.size() != 9) p.fail(line, "homography.image_to_ortho: expected 9 row-major numbers");
        std::array<double, 9> h{};
        std::copy(xs.begin(), xs.end(), h.begin());
        try {
            sc.image_to_ortho = Homography(h);
        } catch (const InvalidConfig& e) {
            p.fail(line, std::string("homography.image_to_ortho: ") + e.what());
        }
    });

    lane::TrainConfig& tc = cfg.train.common;
    p.count("train.epochs", tc.epochs, 1);
    p.count("train.batch_size", tc.batch_size, 1);
    p.take("train.optimizer", [&](const std::string& v, int line) {
        try {
            tc.optimizer = lane::parse_optimizer(v);
        } catch (const InvalidConfig&) {
            p.fail(line, "train.optimizer: expected gd or adam, got '" + v + "'");
        }
    });
    p.count("train.seed", tc.seed);
    p.real("train.t", tc.t, 0.0, true);
    p.real("train.init_scale", tc.init_scale, 0.0);
    p.real("train.label_half_thickness", tc.label_half_thickness, 0.0, true);
    p.real("train.end2end.lr", cfg.train.lr_end2end, 0.0);
    p.real("train.xent.lr", cfg.train.lr_xent, 0.0);

    p.real("eval.t", cfg.eval.t, 0.0, true);
    p.real("eval.error_cap", cfg.eval.error_cap, 0.0, true);
    p.real("eval.threshold", cfg.eval.threshold, 0.0);
    tc.error_cap = cfg.eval.error_cap;

    p.take("output.dir", [&](const std::string& v, int line) {
        if (v.empty()) p.fail(line, "output.dir: must not be empty");
        cfg.output_dir = v;
    });

    p.reject_unused();
    p.check("toy", [&] { toy.to_toy_config().validate(); });
    p.check("scenes", [&] { sc.validate(); });
    p.check("train", [&] {
        cfg.train.for_regime(lane::Regime::end_to_end).validate();
        cfg.train.for_regime(lane::Regime::cross_entropy).validate();
    });
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& dir) {
    const char* root = std::getenv("DLSQ_OUT_ROOT");
    if (root && *root && dir.is_relative()) return std::filesystem::path(root) / dir;
    return dir;
}

}  // namespace dlsq
