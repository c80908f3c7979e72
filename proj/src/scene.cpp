#include "mddpg/scene.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mddpg {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        if (tok[0] == '#') break; // trailing comment
        out.push_back(tok);
    }
    return out;
}

double num(const std::string& tok, long line) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError(line, "expected a number, got '" + tok + "'");
    return v;
}

long integer(const std::string& tok, long line) {
    long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError(line, "expected an integer, got '" + tok + "'");
    return v;
}

void need_args(const std::vector<std::string>& t, size_t n, long line) {
    if (t.size() != n + 1)
        throw ParseError(line, "'" + t[0] + "' takes " + std::to_string(n) +
                                   " value(s)");
}

} // namespace

SceneConfig load_scene(const std::string& text) {
    SceneConfig cfg;
    bool have_bounds = false, have_agent = false, have_target = false;

    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    bool in_dynamic = false;
    DynamicObstacleSpec dyn;
    bool dyn_has_start = false, dyn_has_speed = false, dyn_has_dwell = false;
    double dyn_radius = 12.0;

    auto close_dynamic = [&](long ln) {
        if (!dyn_has_start) throw ParseError(ln, "dynamic block missing 'start'");
        if (!dyn_has_speed) throw ParseError(ln, "dynamic block missing 'speed'");
        if (!dyn_has_dwell) throw ParseError(ln, "dynamic block missing 'dwell'");
        if (dyn.special_locations.empty())
            throw ParseError(ln, "dynamic block needs at least one 'special'");
        dyn.radius = dyn_radius;
        cfg.dynamics.push_back(dyn);
        dyn = DynamicObstacleSpec{};
        dyn_has_start = dyn_has_speed = dyn_has_dwell = false;
        dyn_radius = 12.0;
        in_dynamic = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        auto t = tokenize(line);
        if (t.empty()) continue;
        const std::string& key = t[0];

        if (in_dynamic) {
            if (key == "start") {
                need_args(t, 2, line_no);
                dyn.start = {num(t[1], line_no), num(t[2], line_no)};
                dyn_has_start = true;
            } else if (key == "r") {
                need_args(t, 1, line_no);
                dyn_radius = num(t[1], line_no);
            } else if (key == "special") {
                need_args(t, 2, line_no);
                dyn.special_locations.push_back(
                    {num(t[1], line_no), num(t[2], line_no)});
            } else if (key == "speed") {
                need_args(t, 2, line_no);
                dyn.speed_min = num(t[1], line_no);
                dyn.speed_max = num(t[2], line_no);
                dyn_has_speed = true;
            } else if (key == "dwell") {
                need_args(t, 2, line_no);
                dyn.dwell_min = integer(t[1], line_no);
                dyn.dwell_max = integer(t[2], line_no);
                dyn_has_dwell = true;
            } else if (key == "end") {
                close_dynamic(line_no);
            } else {
                throw ParseError(line_no, "unknown key in dynamic block: '" +
                                              key + "'");
            }
            continue;
        }

        if (key == "bounds") {
            need_args(t, 4, line_no);
            cfg.bounds = {num(t[1], line_no), num(t[2], line_no),
                          num(t[3], line_no), num(t[4], line_no)};
            have_bounds = true;
        } else if (key == "agent") {
            need_args(t, 2, line_no);
            cfg.agent_start = {num(t[1], line_no), num(t[2], line_no)};
            have_agent = true;
        } else if (key == "target") {
            need_args(t, 2, line_no);
            cfg.target = {num(t[1], line_no), num(t[2], line_no)};
            have_target = true;
        } else if (key == "radius.agent") {
            need_args(t, 1, line_no);
            cfg.agent_radius = num(t[1], line_no);
        } else if (key == "radius.goal") {
            need_args(t, 1, line_no);
            cfg.goal_radius = num(t[1], line_no);
        } else if (key == "max_steps") {
            need_args(t, 1, line_no);
            cfg.max_steps = integer(t[1], line_no);
        } else if (key == "k_static") {
            need_args(t, 1, line_no);
            cfg.k_static = integer(t[1], line_no);
        } else if (key == "k_dynamic") {
            need_args(t, 1, line_no);
            cfg.k_dynamic = integer(t[1], line_no);
        } else if (key == "horizon") {
            need_args(t, 1, line_no);
            cfg.horizon = integer(t[1], line_no);
        } else if (key == "static") {
            need_args(t, 3, line_no);
            cfg.statics.push_back({{num(t[1], line_no), num(t[2], line_no)},
                                   num(t[3], line_no)});
        } else if (key == "dynamic") {
            need_args(t, 0, line_no);
            in_dynamic = true;
        } else {
            throw ParseError(line_no, "unknown key: '" + key + "'");
        }
    }
    if (in_dynamic)
        throw ParseError(line_no, "unterminated dynamic block (missing 'end')");
    if (!have_bounds) throw ParseError(line_no, "missing 'bounds'");
    if (!have_agent) throw ParseError(line_no, "missing 'agent'");
    if (!have_target) throw ParseError(line_no, "missing 'target'");

    validate_scene(cfg);
    return cfg;
}

SceneConfig load_scene_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open scene file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_scene(ss.str());
}

void validate_scene(const SceneConfig& cfg) {
    auto fail = [](const std::string& what) { throw ValidationError(what); };

    if (!(cfg.bounds.width() > 0.0) || !(cfg.bounds.height() > 0.0))
        fail("bounds must have positive width and height");
    if (!cfg.bounds.contains(cfg.agent_start))
        fail("agent_start inside bounds violated");
    if (!cfg.bounds.contains(cfg.target)) fail("target inside bounds violated");
    if (!(cfg.agent_radius > 0.0)) fail("agent_radius > 0 violated");
    if (!(cfg.goal_radius > 0.0)) fail("goal_radius > 0 violated");
    if (cfg.max_steps < 1) fail("max_steps >= 1 violated");
    if (cfg.k_static < 0) fail("k_static >= 0 violated");
    if (cfg.k_dynamic < 0) fail("k_dynamic >= 0 violated");
    if (cfg.horizon < 1) fail("horizon >= 1 violated");

    for (size_t i = 0; i < cfg.statics.size(); ++i) {
        const auto& s = cfg.statics[i];
        if (!cfg.bounds.contains(s.center))
            fail("static obstacle " + std::to_string(i) +
                 ": center inside bounds violated");
        if (!(s.radius > 0.0))
            fail("static obstacle " + std::to_string(i) + ": radius > 0 violated");
    }
    for (size_t i = 0; i < cfg.dynamics.size(); ++i) {
        const auto& d = cfg.dynamics[i];
        std::string tag = "dynamic obstacle " + std::to_string(i) + ": ";
        if (!cfg.bounds.contains(d.start)) fail(tag + "start inside bounds violated");
        if (!(d.radius > 0.0)) fail(tag + "radius > 0 violated");
        if (d.special_locations.empty()) fail(tag + "needs >= 1 special location");
        for (const auto& p : d.special_locations)
            if (!cfg.bounds.contains(p))
                fail(tag + "special location inside bounds violated");
        if (!(d.speed_min > 0.0 && d.speed_min <= d.speed_max))
            fail(tag + "0 < v_min <= v_max violated");
        if (!(d.dwell_min >= 0 && d.dwell_min <= d.dwell_max))
            fail(tag + "0 <= t_min <= t_max violated");
    }
}

} // namespace mddpg
