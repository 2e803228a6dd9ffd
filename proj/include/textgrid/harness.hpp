#pragma once

// Evaluation harness: prompt construction, response parsing, environment-backed
// scoring, aggregation, and report files. Scoring always replays in the
// simulator; nothing is graded by string comparison against the expert.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "textgrid/client.hpp"
#include "textgrid/dataset.hpp"
#include "textgrid/metrics.hpp"

namespace textgrid {

enum class PromptStrategy { ZeroShot, FewShot, Cot, Tot };

inline constexpr const char* kStrategyName[] = {"zero_shot", "few_shot", "cot", "tot"};

inline const char* to_string(PromptStrategy s) {
    return kStrategyName[static_cast<int>(s)];
}

inline std::optional<PromptStrategy> strategy_from_name(const std::string& s) {
    for (int i = 0; i < 4; ++i)
        if (s == kStrategyName[i]) return static_cast<PromptStrategy>(i);
    return std::nullopt;
}

// Exemplar instances for few-shot prompts come from this reserved seed band so
// they never collide with evaluated rows (which use caller-chosen seeds).
inline constexpr std::uint64_t kExemplarSeeds[3] = {9000000000ULL, 9000000001ULL,
                                                    9000000002ULL};

// ============================================================ protocol text

inline std::string pose_text(const Pose& p) {
    return "((" + std::to_string(p.pos.x) + ", " + std::to_string(p.pos.y) + "), " +
           std::to_string(p.dir) + ")";
}

inline std::string subgoal_line(const Subgoal& s) {
    switch (s.kind) {
        case SubKind::Open: return "(OpenSubgoal)";
        case SubKind::Pickup: return "(PickupSubgoal)";
        case SubKind::Drop: return "(DropSubgoal)";
        case SubKind::GoNextTo:
            if (!s.coord)
                throw std::logic_error("protocol subgoals carry coordinates");
            return "(GoNextToSubgoal, (" + std::to_string(s.coord->x) + ", " +
                   std::to_string(s.coord->y) + "))";
    }
    throw std::logic_error("unknown subgoal kind");
}

inline std::string actions_text(const std::vector<Action>& actions) {
    if (actions.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i > 0) out += ", ";
        out += to_string(actions[i]);
    }
    return out;
}

// The answers a perfect model would give; also the few-shot exemplar answers.
inline std::string oracle_answer(const PredictRow& row) {
    return "The agent's final state is: " + pose_text(row.target_state);
}

inline std::string oracle_answer(const PlanRow& row) {
    return actions_text(row.expert_action_sequence);
}

inline std::string oracle_answer(const DecomposeRow& row) {
    World w = parse_structured(row.env_description).world;
    auto mission = parse_mission(row.mission);
    if (!mission) throw std::invalid_argument("row mission does not parse");
    SolveOptions opts;
    opts.record_anticipated = true;
    Trace t = solve(w, *mission, opts);
    if (!t.success) throw std::logic_error("expert failed on a dataset row");
    std::string out = "<START>\n";
    for (const Subgoal& s : t.anticipated) out += subgoal_line(s) + "\n";
    out += "<END>";
    return out;
}

// ============================================================ prompt building

namespace harness_detail {

inline const char* scaffold(PromptStrategy s) {
    switch (s) {
        case PromptStrategy::Cot:
            return "Think step by step: write out your reasoning, tracking the "
                   "agent's state after every action, before giving the final "
                   "answer.\n\n";
        case PromptStrategy::Tot:
            return "Explore at least two candidate solution paths, briefly evaluate "
                   "the promise of each, choose the best one, and only then give the "
                   "final answer.\n\n";
        default: return "";
    }
}

inline std::string question(const PredictRow& row) {
    std::ostringstream out;
    out << row.env_description << "\n\n"
        << "The agent starts at " << pose_text(row.initial_state)
        << ": position first, then the facing-direction index (0=east, 1=south, "
           "2=west, 3=north).\n"
        << "The agent executes this action sequence: "
        << actions_text(row.action_sequence) << "\n"
        << "Actions that cannot be performed leave the state unchanged.\n";
    return out.str();
}

inline std::string answer_format(const PredictRow&) {
    return "Determine the agent's state after the whole sequence. End your reply "
           "with one line in exactly this form:\n"
           "The agent's final state is: ((x, y), d)";
}

inline std::string question(const PlanRow& row) {
    std::ostringstream out;
    out << row.env_description << "\n\n"
        << "Produce a sequence of actions that leaves the agent on a cell cardinally "
           "adjacent to the red ball at ("
        << row.target_subgoal.x << ", " << row.target_subgoal.y << ").\n"
        << "Allowed actions: left, right, forward, pickup, drop, toggle.\n";
    return out.str();
}

inline std::string answer_format(const PlanRow&) {
    return "End your reply with the action sequence as the last line, actions "
           "separated by commas, for example:\n"
           "forward, left, forward";
}

inline std::string question(const DecomposeRow& row) {
    std::ostringstream out;
    out << row.env_description << "\n\n"
        << "The agent's mission is: '" << row.mission << "'.\n"
        << "Decompose the mission into subgoals for an executor agent. Allowed "
           "subgoal forms:\n"
        << "(GoNextToSubgoal, (x, y)) - navigate until the cell (x, y) is directly "
           "in front of the agent\n"
        << "(OpenSubgoal) - open the door in front of the agent\n"
        << "(PickupSubgoal) - pick up the object in front of the agent\n"
        << "(DropSubgoal) - drop the carried object onto the cell in front of the "
           "agent\n";
    return out.str();
}

inline std::string answer_format(const DecomposeRow&) {
    return "Write the final subgoal sequence between <START> and <END> markers, one "
           "subgoal per line; the executor performs the first line first:\n"
           "<START>\n"
           "(GoNextToSubgoal, (x, y))\n"
           "...\n"
           "<END>";
}

inline PredictRow exemplar_row(const PredictRow& row, std::uint64_t seed) {
    auto level = level_from_name(row.level_name);
    if (!level) throw std::invalid_argument("unknown level " + row.level_name);
    return gen_predict(*level, seed);
}

inline PlanRow exemplar_row(const PlanRow& row, std::uint64_t seed) {
    auto spec = parse_plan_env_name(row.level_name);
    if (!spec) throw std::invalid_argument("unknown plan env " + row.level_name);
    return gen_plan(*spec, seed);
}

inline DecomposeRow exemplar_row(const DecomposeRow& row, std::uint64_t seed) {
    auto level = level_from_name(row.level_name);
    if (!level) throw std::invalid_argument("unknown level " + row.level_name);
    return gen_decompose(*level, seed);
}

}  // namespace harness_detail

template <class Row>
std::string build_prompt(const Row& row, PromptStrategy strategy) {
    using namespace harness_detail;
    std::ostringstream out;
    if (strategy == PromptStrategy::FewShot) {
        out << "Here are 3 solved examples.\n\n";
        for (int k = 0; k < 3; ++k) {
            Row ex = exemplar_row(row, kExemplarSeeds[k]);
            out << "=== Example " << (k + 1) << " ===\n"
                << question(ex) << "\n"
                << answer_format(ex) << "\n\n"
                << oracle_answer(ex) << "\n\n";
        }
        out << "=== Now solve this one ===\n";
    }
    out << question(row) << "\n" << scaffold(strategy) << answer_format(row);
    return out.str();
}

// ============================================================ response parsing

inline std::optional<Pose> parse_predict_response(const std::string& text) {
    static const std::regex pat(
        R"(\(\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*,\s*([0-3])\s*\))");
    auto begin = std::sregex_iterator(text.begin(), text.end(), pat);
    auto end = std::sregex_iterator();
    std::optional<Pose> last;
    for (auto it = begin; it != end; ++it) {
        Pose p;
        p.pos = Coord{std::stoi((*it)[1].str()), std::stoi((*it)[2].str())};
        p.dir = std::stoi((*it)[3].str());
        last = p;
    }
    return last;
}

inline std::optional<std::vector<Action>> parse_plan_response(const std::string& text) {
    std::string norm;
    norm.reserve(text.size());
    for (char c : text) norm += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const char* spelled : {"pick up", "pick-up"}) {
        std::size_t at = 0;
        std::string from(spelled);
        while ((at = norm.find(from, at)) != std::string::npos) {
            norm.replace(at, from.size(), "pickup");
            at += 6;
        }
    }

    std::vector<std::string> segments;
    std::string current;
    for (char c : norm) {
        if (c == ',' || c == '\n') {
            segments.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    segments.push_back(current);

    auto clean = [](std::string s) {
        auto colon = s.rfind(':');
        if (colon != std::string::npos) s = s.substr(colon + 1);
        std::string out;
        for (char c : s)
            if (c != '`' && c != '*' && c != '.' && c != '!' && c != '\r') out += c;
        std::size_t a = out.find_first_not_of(" \t");
        if (a == std::string::npos) return std::string();
        std::size_t b = out.find_last_not_of(" \t");
        return out.substr(a, b - a + 1);
    };

    // longest trailing run of action words; blank trailing segments are skipped
    std::vector<Action> reversed;
    bool content_seen = false;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
        std::string word = clean(*it);
        if (word.empty()) {
            if (content_seen) break;
            continue;
        }
        auto act = action_from_string(word);
        if (!act) break;
        reversed.push_back(*act);
        content_seen = true;
    }
    if (reversed.empty()) return std::nullopt;
    return std::vector<Action>(reversed.rbegin(), reversed.rend());
}

// Lines in execution order (first line first); empty block parses as an empty
// plan, which is distinct from a parse failure.
inline std::optional<std::vector<Subgoal>> parse_decompose_response(
    const std::string& text) {
    auto start = text.rfind("<START>");
    if (start == std::string::npos) return std::nullopt;
    auto stop = text.find("<END>", start);
    if (stop == std::string::npos) return std::nullopt;
    std::string block = text.substr(start + 7, stop - start - 7);

    static const std::regex go_pat(
        R"(^\(GoNextToSubgoal,\s*\((-?\d+),\s*(-?\d+)\)\)$)");
    std::vector<Subgoal> lines;
    std::istringstream in(block);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        std::smatch m;
        if (std::regex_match(line, m, go_pat)) {
            lines.push_back(Subgoal::go_coord(
                Coord{std::stoi(m[1].str()), std::stoi(m[2].str())}, NavMode::Face));
        } else if (line == "(OpenSubgoal)") {
            lines.push_back(Subgoal::open());
        } else if (line == "(PickupSubgoal)") {
            lines.push_back(Subgoal::pickup());
        } else if (line == "(DropSubgoal)") {
            lines.push_back(Subgoal::drop());
        } else {
            return std::nullopt;
        }
    }
    return lines;
}

// ============================================================ scoring

inline PredictRecord score_predict(const PredictRow& row, const std::string& response) {
    PredictRecord rec;
    auto pose = parse_predict_response(response);
    if (!pose) return rec;
    rec.parse_ok = true;
    rec.pos_match = pose->pos == row.target_state.pos;
    rec.success = rec.pos_match && pose->dir == row.target_state.dir;
    rec.manhattan = manhattan(pose->pos, row.target_state.pos);
    return rec;
}

inline PlanRecord score_plan(const PlanRow& row, const std::string& response) {
    PlanRecord rec;
    rec.expert_len = row.expert_action_sequence.size();
    auto actions = parse_plan_response(response);
    if (!actions) return rec;
    rec.parse_ok = true;
    rec.llm_len = actions->size();
    World w = parse_structured(row.env_description).world;
    int budget = default_step_budget(w);
    std::size_t n = std::min(actions->size(), static_cast<std::size_t>(budget));
    for (std::size_t i = 0; i < n; ++i) apply(w, (*actions)[i]);
    rec.success = manhattan(w.agent.pos, row.target_subgoal) == 1;
    return rec;
}

inline DecomposeRecord score_decompose(const DecomposeRow& row,
                                       const std::string& response) {
    DecomposeRecord rec;
    rec.limit = row.help_count;
    auto lines = parse_decompose_response(response);
    if (!lines) return rec;
    rec.parse_ok = true;
    World w = parse_structured(row.env_description).world;
    auto mission = parse_mission(row.mission);
    if (!mission) throw std::invalid_argument("row mission does not parse");
    SolveOptions opts;
    opts.init_stack = std::vector<Subgoal>(lines->rbegin(), lines->rend());
    Trace t = solve(w, *mission, opts);
    rec.success = t.success;
    rec.added = t.added_subgoals;
    return rec;
}

// ============================================================ episodes

struct Episode {
    std::string task;
    std::string level_name;
    std::uint64_t seed = 0;
    std::size_t row_id = 0;
    std::string model;
    std::string strategy;
    std::string dataset_fp;
    bool parse_ok = false;
    bool success = false;
    json detail;  // task-specific fields
};

inline json to_json(const Episode& e) {
    json j{{"task", e.task},          {"level_name", e.level_name},
           {"seed", e.seed},          {"row_id", e.row_id},
           {"model", e.model},        {"strategy", e.strategy},
           {"dataset_fp", e.dataset_fp}, {"parse_ok", e.parse_ok},
           {"success", e.success}};
    for (auto it = e.detail.begin(); it != e.detail.end(); ++it) j[it.key()] = *it;
    return j;
}

inline Episode episode_from_json(const json& j) {
    Episode e;
    e.task = j.at("task").get<std::string>();
    e.level_name = j.at("level_name").get<std::string>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.row_id = j.at("row_id").get<std::size_t>();
    e.model = j.at("model").get<std::string>();
    e.strategy = j.at("strategy").get<std::string>();
    e.dataset_fp = j.at("dataset_fp").get<std::string>();
    e.parse_ok = j.at("parse_ok").get<bool>();
    e.success = j.at("success").get<bool>();
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::set<std::string> core{
            "task",  "level_name", "seed",     "row_id", "model",
            "strategy", "dataset_fp", "parse_ok", "success"};
        if (!core.count(it.key())) e.detail[it.key()] = *it;
    }
    return e;
}

template <class Row>
std::string dataset_fingerprint(const std::vector<Row>& rows) {
    std::uint64_t h = fnv1a64("dataset");
    for (const Row& r : rows) {
        std::string line = to_json(r).dump();
        h = fnv1a64(line, h);
        h = fnv1a64("\n", h);
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace harness_detail {

inline Episode make_episode(const PredictRow&, const PredictRecord& rec) {
    Episode e;
    e.task = "predict";
    e.parse_ok = rec.parse_ok;
    e.success = rec.success;
    e.detail = json{{"pos_match", rec.pos_match}, {"manhattan", rec.manhattan}};
    return e;
}

inline Episode make_episode(const PlanRow&, const PlanRecord& rec) {
    Episode e;
    e.task = "plan";
    e.parse_ok = rec.parse_ok;
    e.success = rec.success;
    e.detail = json{{"expert_len", rec.expert_len}, {"llm_len", rec.llm_len}};
    if (auto eff = efficiency_of(rec)) e.detail["efficiency"] = *eff;
    return e;
}

inline Episode make_episode(const DecomposeRow&, const DecomposeRecord& rec) {
    Episode e;
    e.task = "decompose";
    e.parse_ok = rec.parse_ok;
    e.success = rec.success;
    e.detail = json{{"added", rec.added}, {"limit", rec.limit}};
    return e;
}

inline PredictRecord predict_record(const Episode& e) {
    return PredictRecord{e.parse_ok, e.success, e.detail.at("pos_match").get<bool>(),
                         e.detail.at("manhattan").get<int>()};
}

inline PlanRecord plan_record(const Episode& e) {
    return PlanRecord{e.parse_ok, e.success,
                      e.detail.at("expert_len").get<std::size_t>(),
                      e.detail.at("llm_len").get<std::size_t>()};
}

inline DecomposeRecord decompose_record(const Episode& e) {
    return DecomposeRecord{e.parse_ok, e.success, e.detail.at("added").get<int>(),
                           e.detail.at("limit").get<int>()};
}

}  // namespace harness_detail

inline Episode score_episode(const PredictRow& row, const std::string& response) {
    return harness_detail::make_episode(row, score_predict(row, response));
}
inline Episode score_episode(const PlanRow& row, const std::string& response) {
    return harness_detail::make_episode(row, score_plan(row, response));
}
inline Episode score_episode(const DecomposeRow& row, const std::string& response) {
    return harness_detail::make_episode(row, score_decompose(row, response));
}

// ============================================================ aggregation

namespace harness_detail {

inline json aggregate_json(const std::vector<PredictRecord>& records) {
    auto agg = aggregate_predict(records);
    json j{{"n", agg.n},
           {"parse_failures", agg.parse_failures},
           {"success_rate", agg.success_rate},
           {"position_rate", agg.position_rate}};
    if (agg.mean_manhattan) j["mean_manhattan"] = *agg.mean_manhattan;
    if (agg.mean_manhattan_incorrect)
        j["mean_manhattan_incorrect"] = *agg.mean_manhattan_incorrect;
    return j;
}

inline json aggregate_json(const std::vector<PlanRecord>& records) {
    auto agg = aggregate_plan(records);
    json j{{"n", agg.n},
           {"parse_failures", agg.parse_failures},
           {"success_rate", agg.success_rate}};
    if (agg.mean_efficiency) j["mean_efficiency"] = *agg.mean_efficiency;
    return j;
}

inline json aggregate_json(const std::vector<DecomposeRecord>& records) {
    auto agg = aggregate_decompose(records);
    return json{{"n", agg.n},
                {"parse_failures", agg.parse_failures},
                {"cr", agg.cr},
                {"pr", agg.pr},
                {"aci", agg.aci}};
}

template <class Record, class RecordOf>
json sliced_aggregates(const std::vector<Episode>& episodes, RecordOf record_of) {
    json out;
    std::vector<Record> all;
    for (const Episode& e : episodes) all.push_back(record_of(e));
    out["overall"] = aggregate_json(all);

    std::map<std::string, std::vector<Record>> by_level;
    for (const Episode& e : episodes) by_level[e.level_name].push_back(record_of(e));
    for (auto& [name, records] : by_level)
        out["by_level"][name] = aggregate_json(records);

    std::map<std::string, std::vector<Record>> by_difficulty;
    std::map<std::string, std::vector<Record>> by_competency;
    for (const Episode& e : episodes) {
        auto level = level_from_name(e.level_name);
        if (!level) continue;  // custom plan envs carry no difficulty tag
        by_difficulty[kDifficultyName[static_cast<int>(difficulty_of(*level))]]
            .push_back(record_of(e));
        for (int row = 0; row < kCompetencyCount; ++row)
            if (competency_covers(row, *level))
                by_competency[kCompetencyName[row]].push_back(record_of(e));
    }
    for (auto& [name, records] : by_difficulty)
        out["by_difficulty"][name] = aggregate_json(records);
    for (auto& [name, records] : by_competency)
        out["by_competency"][name] = aggregate_json(records);
    return out;
}

}  // namespace harness_detail

inline json aggregate_report(const std::vector<Episode>& episodes) {
    using namespace harness_detail;
    if (episodes.empty()) return json{{"episodes", 0}};
    const std::string& task = episodes.front().task;
    for (const Episode& e : episodes)
        if (e.task != task)
            throw std::invalid_argument("mixed tasks in one aggregation");
    json out;
    if (task == "predict")
        out = sliced_aggregates<PredictRecord>(episodes, predict_record);
    else if (task == "plan")
        out = sliced_aggregates<PlanRecord>(episodes, plan_record);
    else
        out = sliced_aggregates<DecomposeRecord>(episodes, decompose_record);

    if (task == "decompose") {
        std::map<int, std::vector<DecomposeRecord>> buckets;
        for (const Episode& e : episodes)
            buckets[sa_bucket(e.detail.at("limit").get<int>())].push_back(
                harness_detail::decompose_record(e));
        for (auto& [b, records] : buckets)
            out["by_sa_bucket"][kSaBucketName[b]] =
                harness_detail::aggregate_json(records);
    }

    out["task"] = task;
    out["model"] = episodes.front().model;
    out["strategy"] = episodes.front().strategy;
    out["episodes"] = episodes.size();
    return out;
}

// ============================================================ summary table

inline std::string summary_table(const std::vector<Episode>& episodes) {
    if (episodes.empty()) return "no episodes\n";
    json agg = aggregate_report(episodes);
    const std::string task = agg.at("task").get<std::string>();

    std::vector<std::string> metric_keys, metric_heads;
    if (task == "predict") {
        metric_keys = {"success_rate", "position_rate", "mean_manhattan"};
        metric_heads = {"SR", "SR(pos)", "L1"};
    } else if (task == "plan") {
        metric_keys = {"success_rate", "mean_efficiency"};
        metric_heads = {"SR", "Eff"};
    } else {
        metric_keys = {"cr", "pr", "aci"};
        metric_heads = {"CR", "PR", "ACI"};
    }

    std::ostringstream out;
    out << "task: " << task << "   model: " << agg.at("model").get<std::string>()
        << "   strategy: " << agg.at("strategy").get<std::string>()
        << "   episodes: " << agg.at("episodes").get<std::size_t>() << "\n\n";
    out << std::left << std::setw(12) << "difficulty" << std::setw(42) << "level"
        << std::right << std::setw(7) << "n";
    for (const std::string& h : metric_heads) out << std::setw(10) << h;
    out << "\n";

    auto emit_row = [&](const std::string& difficulty, const std::string& level,
                        const json& slice) {
        out << std::left << std::setw(12) << difficulty << std::setw(42) << level
            << std::right << std::setw(7) << slice.at("n").get<std::size_t>();
        out << std::fixed << std::setprecision(3);
        for (const std::string& key : metric_keys) {
            if (slice.contains(key))
                out << std::setw(10) << slice.at(key).get<double>();
            else
                out << std::setw(10) << "-";
        }
        out << "\n";
    };

    // levels in declared difficulty order, then any custom names
    std::set<std::string> seen;
    if (agg.contains("by_level")) {
        for (LevelId id : all_levels()) {
            std::string name = gym_name(id);
            if (agg.at("by_level").contains(name)) {
                emit_row(kDifficultyName[static_cast<int>(difficulty_of(id))], name,
                         agg.at("by_level").at(name));
                seen.insert(name);
            }
        }
        for (auto it = agg.at("by_level").begin(); it != agg.at("by_level").end(); ++it)
            if (!seen.count(it.key())) emit_row("-", it.key(), *it);
    }
    emit_row("", "overall", agg.at("overall"));
    return out.str();
}

// ============================================================ eval driver

struct EvalRunConfig {
    PromptStrategy strategy = PromptStrategy::ZeroShot;
    int parallel = 1;
    std::string out_dir;       // empty: no files written
    bool resume = false;       // reuse episodes already in out_dir
};

struct EvalResult {
    std::vector<Episode> episodes;  // in row order
    json aggregate;
    std::string summary;
};

template <class Row>
EvalResult run_eval(const std::vector<Row>& rows, Model& model,
                    const EvalRunConfig& cfg) {
    namespace fs = std::filesystem;
    std::string fp = dataset_fingerprint(rows);
    std::string episodes_path;
    std::map<std::size_t, Episode> done;

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        episodes_path = (fs::path(cfg.out_dir) / "episodes.jsonl").string();
        if (cfg.resume && fs::exists(episodes_path)) {
            std::ifstream in(episodes_path);
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                Episode e = episode_from_json(json::parse(line));
                if (e.dataset_fp == fp && e.model == model.name() &&
                    e.strategy == to_string(cfg.strategy) && e.row_id < rows.size())
                    done.emplace(e.row_id, std::move(e));
            }
        }
    }

    std::vector<Episode> episodes(rows.size());
    std::ofstream append;
    std::mutex append_mu;
    if (!episodes_path.empty())
        append.open(episodes_path, cfg.resume ? std::ios::app : std::ios::trunc);

    std::exception_ptr first_error;
    std::mutex error_mu;
    for_each_indexed(rows.size(), cfg.parallel, [&](std::size_t i) {
        {
            std::lock_guard<std::mutex> lock(error_mu);
            if (first_error) return;
        }
        auto it = done.find(i);
        if (it != done.end()) {
            episodes[i] = it->second;
            return;
        }
        try {
            std::string prompt = build_prompt(rows[i], cfg.strategy);
            std::string response = model.complete(prompt);
            Episode e = score_episode(rows[i], response);
            e.level_name = rows[i].level_name;
            e.seed = rows[i].seed;
            e.row_id = i;
            e.model = model.name();
            e.strategy = to_string(cfg.strategy);
            e.dataset_fp = fp;
            if (append.is_open()) {
                std::lock_guard<std::mutex> lock(append_mu);
                append << to_json(e).dump() << "\n";
                append.flush();
            }
            episodes[i] = std::move(e);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);

    EvalResult result;
    result.episodes = std::move(episodes);
    result.aggregate = aggregate_report(result.episodes);
    result.summary = summary_table(result.episodes);

    if (!cfg.out_dir.empty()) {
        append.close();
        // rewrite in row order so finished artifacts are deterministic
        std::ofstream out(episodes_path, std::ios::trunc);
        for (const Episode& e : result.episodes) out << to_json(e).dump() << "\n";
        std::ofstream agg((fs::path(cfg.out_dir) / "aggregate.json").string());
        agg << result.aggregate.dump(2) << "\n";
        std::ofstream sum((fs::path(cfg.out_dir) / "summary.txt").string());
        sum << result.summary;
    }
    return result;
}

// The scripted stand-in that answers every row perfectly. Prompts are matched
// back to rows by their embedded env description.
template <class Row>
std::unique_ptr<Model> oracle_model(const std::vector<Row>& rows) {
    auto answers = std::make_shared<std::map<std::string, std::string>>();
    for (const Row& r : rows) (*answers)[r.env_description] = oracle_answer(r);
    return std::make_unique<ScriptedModel>(
        "oracle", [answers](const std::string& prompt) -> std::string {
            // rfind: few-shot prompts contain exemplar descriptions first
            std::string best;
            std::size_t best_at = std::string::npos;
            for (const auto& [env, answer] : *answers) {
                auto at = prompt.rfind(env);
                if (at != std::string::npos &&
                    (best_at == std::string::npos || at > best_at)) {
                    best_at = at;
                    best = answer;
                }
            }
            return best;
        });
}

}  // namespace textgrid
