#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "forge/dataset.hpp"
#include "forge/error.hpp"

namespace forge {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in{std::string(s)};
    while (std::getline(in, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

double parse_double(const std::string& v) {
    double d = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(d)) throw Error("not a number: '" + v + "'");
    return d;
}

long long parse_int(const std::string& v) {
    long long i = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
    if (ec != std::errc() || p != v.data() + v.size()) throw Error("not an integer: '" + v + "'");
    return i;
}

std::uint64_t parse_u64(const std::string& v) {
    std::uint64_t i = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
    if (ec != std::errc() || p != v.data() + v.size()) throw Error("not an unsigned integer: '" + v + "'");
    return i;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error("not a boolean: '" + v + "'");
}

// Shortest text that reads back to the same double.
std::string format_double(double d) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, p);
}

std::optional<SplitMembership> membership_from_string(std::string_view s) {
    for (auto m : {SplitMembership::Seen, SplitMembership::Unseen, SplitMembership::Mixed, SplitMembership::Any})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

struct NumericField {
    const char* key;
    std::function<double&(RunConfig&)> real;
    std::function<int&(RunConfig&)> integer;
};

// Every numeric key, in the order to_config_text writes them.
const std::vector<NumericField>& numeric_fields() {
    static const std::vector<NumericField> fields = [] {
        std::vector<NumericField> f;
        auto real = [&f](const char* k, double& (*get)(RunConfig&)) { f.push_back({k, get, nullptr}); };
        auto integer = [&f](const char* k, int& (*get)(RunConfig&)) { f.push_back({k, nullptr, get}); };
        integer("render.width", [](RunConfig& c) -> int& { return c.render.resolution.width; });
        integer("render.height", [](RunConfig& c) -> int& { return c.render.resolution.height; });
        integer("render.spp", [](RunConfig& c) -> int& { return c.render.samples_per_pixel; });
        real("render.gamma", [](RunConfig& c) -> double& { return c.render.gamma; });
        real("render.background_r", [](RunConfig& c) -> double& { return c.render.background.x; });
        real("render.background_g", [](RunConfig& c) -> double& { return c.render.background.y; });
        real("render.background_b", [](RunConfig& c) -> double& { return c.render.background.z; });
        real("sampler.elevation_min", [](RunConfig& c) -> double& { return c.sampler.elevation_min_deg; });
        real("sampler.elevation_max", [](RunConfig& c) -> double& { return c.sampler.elevation_max_deg; });
        real("sampler.azimuth_min", [](RunConfig& c) -> double& { return c.sampler.azimuth_min_deg; });
        real("sampler.azimuth_max", [](RunConfig& c) -> double& { return c.sampler.azimuth_max_deg; });
        real("sampler.distance_min", [](RunConfig& c) -> double& { return c.sampler.distance_min; });
        real("sampler.distance_max", [](RunConfig& c) -> double& { return c.sampler.distance_max; });
        real("sampler.fov", [](RunConfig& c) -> double& { return c.sampler.fov_deg; });
        real("sampler.light_cone", [](RunConfig& c) -> double& { return c.sampler.light_cone_deg; });
        real("sampler.directional_min", [](RunConfig& c) -> double& { return c.sampler.directional_min; });
        real("sampler.directional_max", [](RunConfig& c) -> double& { return c.sampler.directional_max; });
        real("sampler.key_azimuth", [](RunConfig& c) -> double& { return c.sampler.rig.key_azimuth_deg; });
        real("sampler.key_elevation", [](RunConfig& c) -> double& { return c.sampler.rig.key_elevation_deg; });
        real("sampler.key_intensity", [](RunConfig& c) -> double& { return c.sampler.rig.key_intensity; });
        real("sampler.fill_azimuth", [](RunConfig& c) -> double& { return c.sampler.rig.fill_azimuth_deg; });
        real("sampler.fill_elevation", [](RunConfig& c) -> double& { return c.sampler.rig.fill_elevation_deg; });
        real("sampler.fill_ratio", [](RunConfig& c) -> double& { return c.sampler.rig.fill_ratio; });
        real("sampler.back_azimuth", [](RunConfig& c) -> double& { return c.sampler.rig.back_azimuth_deg; });
        real("sampler.back_elevation", [](RunConfig& c) -> double& { return c.sampler.rig.back_elevation_deg; });
        real("sampler.back_ratio", [](RunConfig& c) -> double& { return c.sampler.rig.back_ratio; });
        integer("sampler.min_objects", [](RunConfig& c) -> int& { return c.sampler.min_objects; });
        integer("sampler.max_objects", [](RunConfig& c) -> int& { return c.sampler.max_objects; });
        real("sampler.min_size_ratio", [](RunConfig& c) -> double& { return c.sampler.min_size_ratio; });
        real("sampler.placement_half_extent",
             [](RunConfig& c) -> double& { return c.sampler.placement_half_extent; });
        real("sampler.plane_half_extent", [](RunConfig& c) -> double& { return c.sampler.plane_half_extent; });
        real("sampler.scale_min", [](RunConfig& c) -> double& { return c.sampler.scale_min; });
        real("sampler.scale_max", [](RunConfig& c) -> double& { return c.sampler.scale_max; });
        integer("sampler.max_attempts", [](RunConfig& c) -> int& { return c.sampler.max_attempts; });
        real("sampler.visibility_fraction", [](RunConfig& c) -> double& { return c.sampler.visibility_fraction; });
        real("sampler.visibility_min_pixels",
             [](RunConfig& c) -> double& { return c.sampler.visibility_min_pixels; });
        real("sampler.pullback_factor", [](RunConfig& c) -> double& { return c.sampler.pullback_factor; });
        integer("sampler.max_pullback_steps", [](RunConfig& c) -> int& { return c.sampler.max_pullback_steps; });
        real("edit.angle_min", [](RunConfig& c) -> double& { return c.edit.angle_min_deg; });
        real("edit.angle_max", [](RunConfig& c) -> double& { return c.edit.angle_max_deg; });
        integer("max_salts", [](RunConfig& c) -> int& { return c.max_salts; });
        return f;
    }();
    return fields;
}

// Derived settings that follow the primary keys.
void sync(RunConfig& c) {
    c.sampler.resolution = c.render.resolution;
    const double lo = c.edit.angle_min_deg, hi = c.edit.angle_max_deg;
    c.edit = EditConfig::from_sampler(c.sampler);
    c.edit.angle_min_deg = lo;
    c.edit.angle_max_deg = hi;
}

}  // namespace

std::string_view to_string(SplitMembership m) noexcept {
    switch (m) {
        case SplitMembership::Seen: return "seen";
        case SplitMembership::Unseen: return "unseen";
        case SplitMembership::Mixed: return "mixed";
        case SplitMembership::Any: return "any";
    }
    return "?";
}

int RunConfig::count_for(const std::string& split, TaskKind task) const {
    if (auto it = task_counts.find(task); it != task_counts.end()) return it->second;
    if (auto it = split_counts.find(split); it != split_counts.end()) return it->second;
    return 0;
}

void RunConfig::validate() const {
    sampler.validate();
    render.validate();
    if (sampler.resolution != render.resolution) throw Error("run config: sampler and render resolution differ");
    if (tasks.empty()) throw Error("run config: no tasks");
    if (splits.empty()) throw Error("run config: no splits");
    for (const auto& s : splits) {
        if (!membership.count(s)) throw Error("run config: split '" + s + "' has no membership rule");
        for (TaskKind t : tasks)
            if (count_for(s, t) < 1)
                throw Error("run config: count for " + s + "/" + std::string(to_string(t)) + " must be >= 1");
    }
    if (!(edit.angle_min_deg > 0 && edit.angle_max_deg < 360 && edit.angle_min_deg <= edit.angle_max_deg))
        throw Error("run config: edit angle range must lie in (0, 360)");
    if (max_salts < 0) throw Error("run config: max_salts must be >= 0");
    if (threads < 0) throw Error("run config: threads must be >= 0");
    if (angle_edges.size() < 2 || !std::is_sorted(angle_edges.begin(), angle_edges.end()) ||
        std::adjacent_find(angle_edges.begin(), angle_edges.end()) != angle_edges.end())
        throw Error("run config: angle_edges must be strictly increasing with at least two entries");
    if (output_root.empty()) throw Error("run config: output root is empty");
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
    RunConfig c;
    std::map<std::string, std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        auto where = [&] { return "config line " + std::to_string(line_no) + ": "; };
        if (eq == std::string::npos) throw Error(where() + "expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (!seen.emplace(key, value).second) throw Error(where() + "duplicate key '" + key + "'");
        try {
            bool handled = false;
            for (const auto& f : numeric_fields()) {
                if (key != f.key) continue;
                if (f.real)
                    f.real(c) = parse_double(value);
                else
                    f.integer(c) = static_cast<int>(parse_int(value));
                handled = true;
                break;
            }
            if (handled) continue;
            if (key == "output") {
                c.output_root = base_dir / value;
            } else if (key == "catalog") {
                c.catalog = value == "builtin" ? value : (base_dir / value).lexically_normal().string();
            } else if (key == "seed") {
                c.seed = parse_u64(value);
            } else if (key == "n_unseen") {
                c.n_unseen = static_cast<std::size_t>(parse_u64(value));
            } else if (key == "threads") {
                c.threads = static_cast<int>(parse_int(value));
            } else if (key == "tasks") {
                c.tasks.clear();
                for (const auto& t : split_list(value)) {
                    auto k = task_kind_from_string(t);
                    if (!k) throw Error("unknown task '" + t + "'");
                    if (std::find(c.tasks.begin(), c.tasks.end(), *k) != c.tasks.end())
                        throw Error("task '" + t + "' listed twice");
                    c.tasks.push_back(*k);
                }
            } else if (key == "splits") {
                c.splits = split_list(value);
            } else if (key == "count") {
                parse_int(value);  // applied after all keys are known
            } else if (key.rfind("count.", 0) == 0) {
                const std::string what = key.substr(6);
                const int n = static_cast<int>(parse_int(value));
                if (auto t = task_kind_from_string(what))
                    c.task_counts[*t] = n;
                else
                    c.split_counts[what] = n;
            } else if (key.rfind("membership.", 0) == 0) {
                auto m = membership_from_string(value);
                if (!m) throw Error("membership must be seen, unseen, mixed or any");
                c.membership[key.substr(11)] = *m;
            } else if (key == "angle_edges") {
                c.angle_edges.clear();
                for (const auto& e : split_list(value)) c.angle_edges.push_back(parse_double(e));
            } else if (key == "render.shadows") {
                c.render.shadows = parse_bool(value);
            } else if (key == "render.jitter") {
                c.render.jitter = parse_bool(value);
            } else {
                throw Error("unknown key '" + key + "'");
            }
        } catch (const Error& e) {
            const std::string msg = e.what();
            if (msg.rfind("config line", 0) == 0) throw;
            throw Error(where() + msg);
        }
    }
    // A bare count covers every split without its own count.<split>.
    if (auto it = seen.find("count"); it != seen.end()) {
        const int n = static_cast<int>(parse_int(it->second));
        for (const auto& s : c.splits)
            if (!seen.count("count." + s)) c.split_counts[s] = n;
    }
    sync(c);
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path.parent_path());
}

std::string to_config_text(const RunConfig& config) {
    RunConfig c = config;
    std::ostringstream out;
    out << "# forge run configuration\n";
    out << "output = .\n";
    // Catalog paths are stored relative to the run root so the tree does
    // not depend on where it was generated.
    out << "catalog = "
        << (c.catalog == "builtin" ? c.catalog
                                   : std::filesystem::proximate(c.catalog, c.output_root).generic_string())
        << "\n";
    out << "seed = " << c.seed << "\n";
    out << "n_unseen = " << c.n_unseen << "\n";
    out << "tasks = ";
    for (std::size_t i = 0; i < c.tasks.size(); ++i) out << (i ? "," : "") << to_string(c.tasks[i]);
    out << "\nsplits = ";
    for (std::size_t i = 0; i < c.splits.size(); ++i) out << (i ? "," : "") << c.splits[i];
    out << "\n";
    for (const auto& [s, n] : c.split_counts) out << "count." << s << " = " << n << "\n";
    for (const auto& [t, n] : c.task_counts) out << "count." << to_string(t) << " = " << n << "\n";
    for (const auto& [s, m] : c.membership) out << "membership." << s << " = " << to_string(m) << "\n";
    out << "angle_edges = ";
    for (std::size_t i = 0; i < c.angle_edges.size(); ++i) out << (i ? "," : "") << format_double(c.angle_edges[i]);
    out << "\nrender.shadows = " << (c.render.shadows ? "true" : "false") << "\n";
    out << "render.jitter = " << (c.render.jitter ? "true" : "false") << "\n";
    for (const auto& f : numeric_fields()) {
        out << f.key << " = ";
        if (f.real)
            out << format_double(f.real(c));
        else
            out << f.integer(c);
        out << "\n";
    }
    return out.str();
}

}  // namespace forge
