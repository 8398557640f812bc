#include "swarm/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace swarm {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// An object node that knows where it sits in the file and rejects keys
// nobody asked about, so typos surface instead of silently using defaults.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const json& raw(const std::string& key) const {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return join(path_, key); }
  Section sub(const std::string& key) const { return Section(raw(key), path(key)); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path(key), "must be finite");
    return x;
  }
  double positive(const std::string& key, double fallback) const {
    const double x = number(key, fallback);
    if (!(x > 0.0)) fail(path(key), "must be positive");
    return x;
  }
  double non_negative(const std::string& key, double fallback) const {
    const double x = number(key, fallback);
    if (x < 0.0) fail(path(key), "must not be negative");
    return x;
  }
  long integer(const std::string& key, long fallback, long lowest) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    const long x = v.get<long>();
    if (x < lowest) fail(path(key), "must be at least " + std::to_string(lowest));
    return x;
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_string()) fail(path(key), "expected a string");
    return raw(key).get<std::string>();
  }
  Vec3 vec(const std::string& key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    return to_vec(raw(key), path(key));
  }

  static Vec3 to_vec(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) fail(where, "expected [x, y, z]");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) fail(where, "expected [x, y, z]");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

AlignedBox read_box(const Section& s) {
  AlignedBox b{s.vec("min", Vec3::Zero()), s.vec("max", Vec3::Zero())};
  if (!s.has("min") || !s.has("max")) fail(s.path("min"), "a box needs min and max");
  if ((b.min.array() > b.max.array()).any()) fail(s.path("max"), "below min");
  s.done();
  return b;
}

std::pair<AgentId, AgentId> read_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    fail(where, "expected [a, b]");
  const int a = v[0].get<int>(), b = v[1].get<int>();
  if (a == b || a < 0 || b < 0) fail(where, "expected two distinct agent ids");
  return {std::min(a, b), std::max(a, b)};
}

void read_agents(const Section& s, ScenarioConfig& c) {
  if (s.has("circle") == s.has("list")) fail(s.path("circle"), "give exactly one of circle or list");
  if (s.has("circle")) {
    const Section cs = s.sub("circle");
    CircleSpec spec;
    spec.count = static_cast<int>(cs.integer("count", spec.count, 1));
    spec.radius = cs.positive("radius", spec.radius);
    spec.center = cs.vec("center", spec.center);
    spec.jitter = cs.non_negative("jitter", spec.jitter);
    cs.done();
    c.circle = spec;
  } else {
    const json& list = s.raw("list");
    if (!list.is_array() || list.empty()) fail(s.path("list"), "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Section a(list[i], s.path("list") + "[" + std::to_string(i) + "]");
      if (!a.has("start") || !a.has("goal")) fail(a.path("start"), "an agent needs start and goal");
      c.agents.push_back({a.vec("start", Vec3::Zero()), a.vec("goal", Vec3::Zero())});
      a.done();
    }
  }
  s.done();
}

void read_world(const Section& s, ScenarioConfig& c) {
  if (s.has("bounds")) c.bounds = read_box(s.sub("bounds"));
  if (s.has("boxes")) {
    const json& list = s.raw("boxes");
    if (!list.is_array()) fail(s.path("boxes"), "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = s.path("boxes") + "[" + std::to_string(i) + "]";
      const AlignedBox b = read_box(Section(list[i], where));
      if (!c.bounds.contains(b.min) || !c.bounds.contains(b.max)) fail(where, "outside the world bounds");
      c.boxes.push_back(b);
    }
  }
  if (s.has("random")) {
    const Section r = s.sub("random");
    ObstacleSpec o;
    o.count = static_cast<int>(r.integer("count", 0, 0));
    o.size = r.vec("size", o.size);
    if ((o.size.array() <= 0.0).any()) fail(r.path("size"), "must be positive");
    if (!r.has("region")) fail(r.path("region"), "required");
    o.region = read_box(r.sub("region"));
    o.clearance = r.non_negative("clearance", o.clearance);
    r.done();
    const Vec3 half(0.5 * o.size.x(), 0.5 * o.size.y(), 0.0);
    const AlignedBox reach{o.region.min - half,
                           Vec3(o.region.max.x() + half.x(), o.region.max.y() + half.y(), o.region.min.z() + o.size.z())};
    if (!c.bounds.contains(reach.min) || !c.bounds.contains(reach.max))
      fail(r.path("region"), "obstacles could fall outside the world bounds");
    c.obstacles = o;
  }
  s.done();
}

void read_network(const Section& s, ScenarioConfig& c) {
  NetworkModel& n = c.network;
  n.latency = s.non_negative("latency_ms", 0.0) / 1000.0;
  if (s.has("pairs")) {
    const json& list = s.raw("pairs");
    if (!list.is_array()) fail(s.path("pairs"), "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Section p(list[i], s.path("pairs") + "[" + std::to_string(i) + "]");
      if (!p.has("agents")) fail(p.path("agents"), "required");
      n.pair_latency[read_pair(p.raw("agents"), p.path("agents"))] = p.non_negative("latency_ms", 0.0) / 1000.0;
      p.done();
    }
  }
  if (s.has("unlinked")) {
    const json& list = s.raw("unlinked");
    if (!list.is_array()) fail(s.path("unlinked"), "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i)
      n.unlinked.insert(read_pair(list[i], s.path("unlinked") + "[" + std::to_string(i) + "]"));
  }
  n.comm_range = s.positive("comm_range", n.comm_range);
  s.done();
}

void read_compute(const Section& s, ScenarioConfig& c) {
  const std::string mode = s.text("mode", "synthetic");
  if (mode == "synthetic") c.compute.mode = ComputeMode::Synthetic;
  else if (mode == "measured") c.compute.mode = ComputeMode::Measured;
  else fail(s.path("mode"), "expected synthetic or measured");
  if (s.has("duration_ms")) {
    const json& d = s.raw("duration_ms");
    if (d.is_number()) {
      c.compute.min = c.compute.max = s.non_negative("duration_ms", 0.0) / 1000.0;
    } else if (d.is_array() && d.size() == 2 && d[0].is_number() && d[1].is_number()) {
      c.compute.min = d[0].get<double>() / 1000.0;
      c.compute.max = d[1].get<double>() / 1000.0;
      if (c.compute.min < 0.0 || c.compute.max < c.compute.min) fail(s.path("duration_ms"), "expected 0 <= min <= max");
    } else {
      fail(s.path("duration_ms"), "expected a number or [min, max]");
    }
  }
  s.done();
}

void read_planner(const Section& s, PlannerParams& p) {
  p.N = static_cast<int>(s.integer("N", p.N, 1));
  p.h = s.positive("h", p.h);
  p.v_samp = s.positive("v_samp", p.v_samp);
  p.P_hor = static_cast<int>(s.integer("P_hor", p.P_hor, 1));
  p.d_thresh = s.positive("d_thresh", p.d_thresh);
  p.ref_brake = s.non_negative("ref_brake", p.ref_brake);
  p.stall_advance = s.non_negative("stall_advance", p.stall_advance);
  p.limits.v_max = s.positive("v_max", p.limits.v_max);
  p.limits.a_max = s.positive("a_max", p.limits.a_max);
  p.limits.j_max = s.positive("j_max", p.limits.j_max);
  p.weights.q_ref = s.positive("q_ref", p.weights.q_ref);
  p.weights.r_jerk = s.non_negative("r_jerk", p.weights.r_jerk);
  p.d_rad = s.positive("d_rad", p.d_rad);
  p.c = s.non_negative("c", p.c);
  p.m_amp = s.non_negative("m_amp", p.m_amp);
  p.K = static_cast<int>(s.integer("K", p.K, 1));
  p.grid_extent = s.vec("grid_extent", p.grid_extent);
  if ((p.grid_extent.array() <= 0.0).any()) fail(s.path("grid_extent"), "must be positive");
  p.voxel_size = s.positive("voxel_size", p.voxel_size);
  if (s.has("agent_margin")) {
    if (s.raw("agent_margin").is_string() && s.raw("agent_margin") == "auto") p.agent_margin = -1.0;
    else p.agent_margin = s.non_negative("agent_margin", 0.0);
  }
  p.obstacle_margin = s.non_negative("obstacle_margin", p.obstacle_margin);
  if (s.has("push_away")) {
    const Section d = s.sub("push_away");
    p.push_away.influence_radius = d.positive("influence_radius", p.push_away.influence_radius);
    p.push_away.step_gain = d.positive("step_gain", p.push_away.step_gain);
    p.push_away.sweeps = static_cast<int>(d.integer("sweeps", p.push_away.sweeps, 0));
    d.done();
  }
  p.max_qp_solves = static_cast<int>(s.integer("max_qp_solves", p.max_qp_solves, 1));
  s.done();
}

void read_sim(const Section& s, SimParams& p, double h) {
  p.timeout = s.positive("timeout", p.timeout);
  p.goal_tolerance = s.positive("goal_tolerance", p.goal_tolerance);
  p.v_stop = s.positive("v_stop", p.v_stop);
  p.min_dwell = static_cast<int>(s.integer("min_dwell", p.min_dwell, 1));
  p.substeps = static_cast<int>(s.integer("substeps", p.substeps, 1));
  const long h_us = std::lround(h * 1e6);
  if (std::abs(h * 1e6 - static_cast<double>(h_us)) > 1e-6 || h_us % p.substeps != 0)
    fail(s.path("substeps"), "the period must split into whole microseconds per substep");
  s.done();
}

std::string where_in_text(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Uniform in [0, 1) from the top 53 bits, so runs do not depend on how the
// standard library implements its distributions.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

double footprint_distance(const AlignedBox& b, const Vec3& p) {
  const double dx = std::max({b.min.x() - p.x(), 0.0, p.x() - b.max.x()});
  const double dy = std::max({b.min.y() - p.y(), 0.0, p.y() - b.max.y()});
  return std::hypot(dx, dy);
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("syntax error at " + where_in_text(text, e.byte) + ": " + e.what());
  }
  const Section root(j, "");
  ScenarioConfig c;
  c.name = root.text("name", c.name);
  c.runs = static_cast<int>(root.integer("runs", c.runs, 1));
  if (root.has("seed")) {
    if (!root.raw("seed").is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = root.raw("seed").get<std::uint64_t>();
  }
  c.output_dir = root.text("output_dir", c.output_dir);
  if (!root.has("agents")) fail("agents", "required");
  read_agents(root.sub("agents"), c);
  if (root.has("world")) read_world(root.sub("world"), c);
  if (root.has("network")) read_network(root.sub("network"), c);
  if (root.has("compute")) read_compute(root.sub("compute"), c);
  if (root.has("planner")) read_planner(root.sub("planner"), c.planner);
  if (root.has("sim")) read_sim(root.sub("sim"), c.sim, c.planner.h);
  else read_sim(Section(json::object(), "sim"), c.sim, c.planner.h);
  root.done();

  const int n = c.circle ? c.circle->count : static_cast<int>(c.agents.size());
  for (const auto& [pair, latency] : c.network.pair_latency)
    if (pair.second >= n) fail("network.pairs", "agent id " + std::to_string(pair.second) + " does not exist");
  for (const auto& pair : c.network.unlinked)
    if (pair.second >= n) fail("network.unlinked", "agent id " + std::to_string(pair.second) + " does not exist");
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::uint64_t run_seed(std::uint64_t master, int run) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(run) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Scenario make_scenario(const ScenarioConfig& config, int run) {
  std::mt19937_64 rng(run_seed(config.seed, run));
  Scenario sc;
  sc.network = config.network;
  sc.planner = config.planner;
  sc.sim = config.sim;
  sc.world.bounds = config.bounds;
  sc.world.obstacles = config.boxes;

  if (config.circle) {
    const CircleSpec& cs = *config.circle;
    for (int i = 0; i < cs.count; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / cs.count;
      const Vec3 offset(cs.radius * std::cos(angle), cs.radius * std::sin(angle), 0.0);
      Vec3 jitter = Vec3::Zero();
      if (cs.jitter > 0.0) jitter = Vec3(uniform(rng, -cs.jitter, cs.jitter), uniform(rng, -cs.jitter, cs.jitter), 0.0);
      sc.agents.push_back({cs.center + offset + jitter, cs.center - offset + jitter});
    }
  } else {
    sc.agents = config.agents;
  }

  if (config.obstacles) {
    const ObstacleSpec& o = *config.obstacles;
    const Vec3 half(0.5 * o.size.x(), 0.5 * o.size.y(), 0.0);
    for (int i = 0; i < o.count; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
        const Vec3 c(uniform(rng, o.region.min.x(), o.region.max.x()), uniform(rng, o.region.min.y(), o.region.max.y()),
                     o.region.min.z());
        const AlignedBox box{c - half, c + half + Vec3(0, 0, o.size.z())};
        placed = true;
        for (const auto& a : sc.agents)
          if (footprint_distance(box, a.start) < o.clearance || footprint_distance(box, a.goal) < o.clearance)
            placed = false;
        if (placed) sc.world.obstacles.push_back(box);
      }
      if (!placed) throw ConfigError("world.random: cannot place obstacle " + std::to_string(i) + " clear of the agents");
    }
  }

  sc.compute.mode = config.compute.mode;
  if (config.compute.mode == ComputeMode::Synthetic)
    for (std::size_t i = 0; i < sc.agents.size(); ++i)
      sc.compute.durations.push_back(uniform(rng, config.compute.min, config.compute.max));
  return sc;
}

}  // namespace swarm
