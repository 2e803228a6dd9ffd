#pragma once

// Dataset rows for the three tasks, their JSONL serialization, and the
// generators that extract them from expert traces. Every row embeds the
// structured environment text, so a dataset file is self-contained: scoring
// reconstructs the world from the row alone.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "textgrid/bot.hpp"
#include "textgrid/format.hpp"
#include "textgrid/levels.hpp"
#include "textgrid/rng.hpp"

namespace textgrid {

enum class Task { Predict, Plan, Decompose };

inline constexpr const char* kTaskName[] = {"predict", "plan", "decompose"};

inline const char* to_string(Task t) { return kTaskName[static_cast<int>(t)]; }

inline std::optional<Task> task_from_name(const std::string& s) {
    for (int i = 0; i < 3; ++i)
        if (s == kTaskName[i]) return static_cast<Task>(i);
    return std::nullopt;
}

struct Pose {
    Coord pos;
    int dir = 0;
};

struct PredictRow {
    std::string level_name;
    std::uint64_t seed = 0;
    std::string env_description;
    Pose initial_state;
    std::vector<Action> action_sequence;
    Pose target_state;
};

struct PlanRow {
    std::string level_name;
    std::uint64_t seed = 0;
    std::string env_description;
    Pose initial_state;
    Coord target_subgoal;
    std::vector<Action> expert_action_sequence;
};

struct DecomposeRow {
    std::string level_name;
    std::uint64_t seed = 0;
    std::string env_description;
    Pose initial_state;
    std::string mission;
    int help_count = 0;
};

// ============================================================ serialization

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace ds_detail {

inline json pose_json(const Pose& p) {
    return json{{"position", json::array({p.pos.x, p.pos.y})}, {"direction", p.dir}};
}

inline void expect_fields(const json& j, std::initializer_list<const char*> fields,
                          std::size_t row) {
    for (const char* f : fields)
        if (!j.contains(f))
            throw SchemaError("row " + std::to_string(row) + ": missing field '" + f +
                              "'");
}

inline Coord coord_field(const json& j, std::size_t row, const char* name) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
        !j[1].is_number_integer())
        throw SchemaError("row " + std::to_string(row) + ": field '" + name +
                          "' is not an [x, y] pair");
    return Coord{j[0].get<int>(), j[1].get<int>()};
}

inline Pose pose_field(const json& j, std::size_t row, const char* name) {
    if (!j.is_object() || !j.contains("position") || !j.contains("direction"))
        throw SchemaError("row " + std::to_string(row) + ": field '" + name +
                          "' is not a {position, direction} state");
    Pose p;
    p.pos = coord_field(j.at("position"), row, name);
    p.dir = j.at("direction").get<int>();
    if (p.dir < 0 || p.dir >= kDirCount)
        throw SchemaError("row " + std::to_string(row) + ": field '" + name +
                          "' has an out-of-range direction");
    return p;
}

inline std::vector<Action> actions_field(const json& j, std::size_t row,
                                         const char* name) {
    try {
        return actions_from_json(j);
    } catch (const std::exception& e) {
        throw SchemaError("row " + std::to_string(row) + ": field '" + name +
                          "': " + e.what());
    }
}

}  // namespace ds_detail

inline json to_json(const PredictRow& r) {
    return json{{"level_name", r.level_name},
                {"seed", r.seed},
                {"env_description", r.env_description},
                {"initial_state", ds_detail::pose_json(r.initial_state)},
                {"action_sequence", actions_json(r.action_sequence)},
                {"target_state", ds_detail::pose_json(r.target_state)}};
}

inline json to_json(const PlanRow& r) {
    return json{{"level_name", r.level_name},
                {"seed", r.seed},
                {"env_description", r.env_description},
                {"initial_state", ds_detail::pose_json(r.initial_state)},
                {"target_subgoal", json::array({r.target_subgoal.x, r.target_subgoal.y})},
                {"expert_action_sequence", actions_json(r.expert_action_sequence)}};
}

inline json to_json(const DecomposeRow& r) {
    return json{{"level_name", r.level_name},
                {"seed", r.seed},
                {"env_description", r.env_description},
                {"initial_state", ds_detail::pose_json(r.initial_state)},
                {"mission", r.mission},
                {"help_count", r.help_count}};
}

inline void row_from_json(const json& j, std::size_t row_no, PredictRow& out) {
    using namespace ds_detail;
    expect_fields(j,
                  {"level_name", "seed", "env_description", "initial_state",
                   "action_sequence", "target_state"},
                  row_no);
    out.level_name = j.at("level_name").get<std::string>();
    out.seed = j.at("seed").get<std::uint64_t>();
    out.env_description = j.at("env_description").get<std::string>();
    out.initial_state = pose_field(j.at("initial_state"), row_no, "initial_state");
    out.action_sequence = actions_field(j.at("action_sequence"), row_no, "action_sequence");
    out.target_state = pose_field(j.at("target_state"), row_no, "target_state");
}

inline void row_from_json(const json& j, std::size_t row_no, PlanRow& out) {
    using namespace ds_detail;
    expect_fields(j,
                  {"level_name", "seed", "env_description", "initial_state",
                   "target_subgoal", "expert_action_sequence"},
                  row_no);
    out.level_name = j.at("level_name").get<std::string>();
    out.seed = j.at("seed").get<std::uint64_t>();
    out.env_description = j.at("env_description").get<std::string>();
    out.initial_state = pose_field(j.at("initial_state"), row_no, "initial_state");
    out.target_subgoal = coord_field(j.at("target_subgoal"), row_no, "target_subgoal");
    out.expert_action_sequence =
        actions_field(j.at("expert_action_sequence"), row_no, "expert_action_sequence");
}

inline void row_from_json(const json& j, std::size_t row_no, DecomposeRow& out) {
    using namespace ds_detail;
    expect_fields(j,
                  {"level_name", "seed", "env_description", "initial_state", "mission",
                   "help_count"},
                  row_no);
    out.level_name = j.at("level_name").get<std::string>();
    out.seed = j.at("seed").get<std::uint64_t>();
    out.env_description = j.at("env_description").get<std::string>();
    out.initial_state = ds_detail::pose_field(j.at("initial_state"), row_no, "initial_state");
    out.mission = j.at("mission").get<std::string>();
    out.help_count = j.at("help_count").get<int>();
    if (out.help_count < 0)
        throw SchemaError("row " + std::to_string(row_no) + ": negative help_count");
}

template <class Row>
void write_jsonl(const std::string& path, const std::vector<Row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const Row& r : rows) out << to_json(r).dump() << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

template <class Row>
std::vector<Row> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<Row> rows;
    std::string line;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError("row " + std::to_string(row_no) + ": " + e.what());
        }
        Row r;
        row_from_json(j, row_no, r);
        rows.push_back(std::move(r));
        ++row_no;
    }
    return rows;
}

// ============================================================ generation

struct PrefixPolicy {
    double full_prob = 0.2;  // otherwise uniform over [1, trace length]
};

inline Pose agent_pose(const World& w) { return Pose{w.agent.pos, w.agent.dir}; }

inline Pose replay_pose(const World& start, const std::vector<Action>& actions) {
    World w = start;
    for (Action a : actions) apply(w, a);
    return agent_pose(w);
}

inline PredictRow gen_predict(LevelId level, std::uint64_t seed,
                              const PrefixPolicy& policy = {}) {
    Instance inst = generate(level, seed);
    Trace trace = solve(inst.world, inst.mission);
    if (!trace.success)
        throw std::logic_error("expert failed on a filtered instance");
    Rng rng = Rng::from(std::string("datagen/predict/") + inst.level_name, seed);
    std::size_t len = trace.actions.size();
    std::size_t cut = 0;
    if (len > 0)
        cut = rng.unit() < policy.full_prob ? len : 1 + rng.below(len);
    PredictRow row;
    row.level_name = gym_name(level);
    row.seed = seed;
    row.env_description =
        format_env(inst.world, inst.mission.surface, FormatStyle::Structured);
    row.initial_state = agent_pose(inst.world);
    row.action_sequence.assign(trace.actions.begin(),
                               trace.actions.begin() + static_cast<long>(cut));
    row.target_state = agent_pose(trace.states[cut]);
    return row;
}

inline PlanRow gen_plan(const PlanEnvSpec& spec, std::uint64_t seed) {
    Instance inst = generate_plan_env(spec, seed);
    Trace trace = solve(inst.world, inst.mission);
    if (!trace.success)
        throw std::logic_error("expert failed on a filtered plan instance");
    Coord ball{-1, -1};
    for (const Obj& o : inst.world.objects)
        if (o.kind == Kind::Ball && o.color == Color::Red) ball = o.pos;
    PlanRow row;
    row.level_name = inst.level_name;
    row.seed = seed;
    row.env_description =
        format_env(inst.world, inst.mission.surface, FormatStyle::Structured);
    row.initial_state = agent_pose(inst.world);
    row.target_subgoal = ball;
    row.expert_action_sequence = trace.actions;
    return row;
}

inline DecomposeRow gen_decompose(LevelId level, std::uint64_t seed) {
    Instance inst = generate(level, seed);
    Trace trace = solve(inst.world, inst.mission);
    if (!trace.success)
        throw std::logic_error("expert failed on a filtered instance");
    DecomposeRow row;
    row.level_name = gym_name(level);
    row.seed = seed;
    row.env_description =
        format_env(inst.world, inst.mission.surface, FormatStyle::Structured);
    row.initial_state = agent_pose(inst.world);
    row.mission = inst.mission.surface;
    row.help_count = trace.added_subgoals;
    return row;
}

// ============================================================ manifest

struct DatasetFileEntry {
    std::string file;
    std::string task;
    std::string level;
    std::uint64_t seed_lo = 0;
    std::uint64_t seed_hi = 0;  // inclusive
    std::size_t rows = 0;
};

// Deterministic by construction: no timestamps, entries sorted by file name.
inline json manifest_json(std::vector<DatasetFileEntry> files,
                          const PrefixPolicy& policy) {
    std::sort(files.begin(), files.end(),
              [](const DatasetFileEntry& a, const DatasetFileEntry& b) {
                  return a.file < b.file;
              });
    json out{{"format", "jsonl"},
             {"generator_version", 1},
             {"prng", "fnv1a64-tagged splitmix64-seeded xoshiro256++ streams"},
             {"predict_prefix_policy",
              {{"full_prob", policy.full_prob}, {"otherwise", "uniform over [1, trace length]"}}},
             {"files", json::array()}};
    for (const DatasetFileEntry& f : files)
        out["files"].push_back(json{{"file", f.file},
                                    {"task", f.task},
                                    {"level", f.level},
                                    {"seeds", json::array({f.seed_lo, f.seed_hi})},
                                    {"rows", f.rows}});
    return out;
}

}  // namespace textgrid
