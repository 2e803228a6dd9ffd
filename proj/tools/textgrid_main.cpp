// Command-line front end: dataset generation, expert traces, and model
// evaluation. Exit codes: 0 success, 1 usage error, 2 I/O or data error,
// 3 provider error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

#include "textgrid/harness.hpp"

namespace fs = std::filesystem;
using namespace textgrid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitProvider = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "a..b" inclusive, or a single number
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    auto parse_num = [&](const std::string& part) {
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
            throw UsageError("bad seed range '" + text + "' (expected a..b)");
        return std::stoull(part);
    };
    auto dots = text.find("..");
    if (dots == std::string::npos) {
        std::uint64_t v = parse_num(text);
        return {v, v};
    }
    std::uint64_t lo = parse_num(text.substr(0, dots));
    std::uint64_t hi = parse_num(text.substr(dots + 2));
    if (hi < lo) throw UsageError("empty seed range '" + text + "'");
    return {lo, hi};
}

std::vector<LevelId> parse_levels(const std::string& text) {
    if (text == "all") return all_levels();
    std::vector<LevelId> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        auto id = level_from_name(part);
        if (!id) throw UsageError("unknown level name '" + part + "'");
        out.push_back(*id);
    }
    if (out.empty()) throw UsageError("no levels named");
    return out;
}

PlanSize parse_plan_size(std::string text) {
    for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (int i = 0; i < 4; ++i) {
        std::string name = kPlanSizeName[i];
        for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (text == name) return static_cast<PlanSize>(i);
    }
    throw UsageError("unknown size '" + text + "' (small|medium|large|ultra)");
}

// ------------------------------------------------------------ generate

struct GenerateArgs {
    std::string task;
    std::string levels = "all";
    std::string seeds = "0..99";
    std::string out_dir = "dataset";
    std::string size = "small";
    int dists = 7;
    double full_prob = 0.2;
};

int cmd_generate(const GenerateArgs& args) {
    auto task = task_from_name(args.task);
    if (!task) throw UsageError("unknown task '" + args.task + "'");
    auto [lo, hi] = parse_seed_range(args.seeds);
    fs::create_directories(args.out_dir);

    PrefixPolicy policy{args.full_prob};
    std::vector<DatasetFileEntry> entries;
    std::map<int, std::size_t> help_census;

    auto emit = [&](const std::string& level, const std::string& file_name,
                    std::size_t rows) {
        entries.push_back(DatasetFileEntry{file_name, std::string(kTaskName[static_cast<int>(*task)]),
                                           level, lo, hi, rows});
        std::cout << level << ": " << rows << " rows -> " << file_name << "\n";
    };

    if (*task == Task::Plan) {
        PlanEnvSpec spec{parse_plan_size(args.size), args.dists};
        if (spec.n_distractors < 0 ||
            spec.n_distractors > kPlanDistractorCap[static_cast<int>(spec.size)])
            throw UsageError("distractor count out of range for this size");
        std::vector<PlanRow> rows;
        for (std::uint64_t s = lo; s <= hi; ++s) rows.push_back(gen_plan(spec, s));
        std::string file_name = "plan_" + spec.name() + ".jsonl";
        write_jsonl((fs::path(args.out_dir) / file_name).string(), rows);
        emit(spec.name(), file_name, rows.size());
    } else {
        for (LevelId id : parse_levels(args.levels)) {
            std::string level = gym_name(id);
            std::string file_name =
                std::string(kTaskName[static_cast<int>(*task)]) + "_" +
                kLevelName[static_cast<int>(id)] + ".jsonl";
            std::string path = (fs::path(args.out_dir) / file_name).string();
            if (*task == Task::Predict) {
                std::vector<PredictRow> rows;
                for (std::uint64_t s = lo; s <= hi; ++s)
                    rows.push_back(gen_predict(id, s, policy));
                write_jsonl(path, rows);
                emit(level, file_name, rows.size());
            } else {
                std::vector<DecomposeRow> rows;
                for (std::uint64_t s = lo; s <= hi; ++s) {
                    rows.push_back(gen_decompose(id, s));
                    ++help_census[rows.back().help_count];
                }
                write_jsonl(path, rows);
                emit(level, file_name, rows.size());
            }
        }
    }

    // merge with an existing manifest so one directory can hold several runs
    fs::path mf_path = fs::path(args.out_dir) / "manifest.json";
    if (fs::exists(mf_path)) {
        try {
            std::ifstream in(mf_path);
            json old = json::parse(in);
            for (const json& f : old.at("files")) {
                std::string name = f.at("file").get<std::string>();
                bool replaced = false;
                for (const DatasetFileEntry& e : entries)
                    if (e.file == name) replaced = true;
                if (!replaced && fs::exists(fs::path(args.out_dir) / name))
                    entries.push_back(DatasetFileEntry{
                        name, f.at("task").get<std::string>(),
                        f.at("level").get<std::string>(),
                        f.at("seeds")[0].get<std::uint64_t>(),
                        f.at("seeds")[1].get<std::uint64_t>(),
                        f.at("rows").get<std::size_t>()});
            }
        } catch (const json::exception&) {
            // unreadable manifest: rewrite from this run alone
        }
    }
    std::ofstream mf(mf_path.string());
    if (!mf) throw std::runtime_error("cannot write manifest");
    mf << manifest_json(entries, policy).dump(2) << "\n";
    std::cout << "manifest.json written (" << entries.size() << " files)\n";

    if (*task == Task::Decompose) {
        std::cout << "\nhelp_count census:\n";
        for (const auto& [count, n] : help_census)
            std::cout << "  a=" << count << ": " << n << "\n";
        std::map<int, std::size_t> buckets;
        for (const auto& [count, n] : help_census) buckets[sa_bucket(count)] += n;
        for (const auto& [b, n] : buckets)
            std::cout << "  bucket " << kSaBucketName[b] << ": " << n << "\n";
    }
    return kExitOk;
}

// ------------------------------------------------------------ solve

struct SolveArgs {
    std::string env;
    std::uint64_t seed = 0;
    std::string init_stack;
    bool no_additions = false;
    int addition_budget = -1;
    int max_steps = -1;
    bool show_actions = false;
};

int cmd_solve(const SolveArgs& args) {
    Instance inst;
    try {
        inst = generate_by_name(args.env, args.seed);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    SolveOptions opts;
    opts.record_events = true;
    if (args.no_additions) opts.allow_additions = false;
    if (args.addition_budget >= 0) opts.addition_budget = args.addition_budget;
    if (args.max_steps >= 0) opts.max_steps = args.max_steps;
    if (!args.init_stack.empty()) {
        // protocol-form subgoals in execution order, ';' separated
        std::string block = "<START>\n";
        std::stringstream ss(args.init_stack);
        std::string part;
        while (std::getline(ss, part, ';')) block += part + "\n";
        block += "<END>";
        auto lines = parse_decompose_response(block);
        if (!lines) throw UsageError("cannot parse --init-stack");
        opts.init_stack = std::vector<Subgoal>(lines->rbegin(), lines->rend());
    }

    std::cout << "Environment: " << inst.level_name << "   seed: " << inst.seed << "\n";
    std::cout << "Mission: '" << inst.mission.surface << ".'\n\n";

    Trace t = solve(inst.world, inst.mission, opts);

    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const StackEvent& e = t.events[i];
        if (i == 0)
            std::cout << "Initial stack: " << e.stack << "\n";
        else
            std::cout << "Stack at step " << e.step << ": " << e.stack << "\n";
    }
    if (t.success) {
        std::string last = t.events.empty() ? "[]" : t.events.back().stack;
        std::cout << "Final stack after the success of the mission: " << last << "\n";
    }

    std::cout << "\nsteps: " << t.steps << "   added subgoals: " << t.added_subgoals
              << "   relocation used: " << (t.used_relocation ? "yes" : "no") << "\n";
    if (args.show_actions) std::cout << "actions: " << actions_text(t.actions) << "\n";
    if (!t.success) {
        std::cout << "FAILED: " << t.failure_reason << "\n";
        return kExitIo;
    }
    std::cout << "mission accomplished\n";
    return kExitOk;
}

// ------------------------------------------------------------ eval

struct EvalArgs {
    std::string task;
    std::string data;
    std::string model = "oracle";
    std::string strategy = "zero_shot";
    std::string out_dir;
    bool resume = false;
    int parallel = 1;
};

template <class Row>
int run_eval_rows(const EvalArgs& args, const EvalRunConfig& cfg) {
    std::vector<Row> rows = read_jsonl<Row>(args.data);
    if (rows.empty()) throw std::runtime_error("dataset is empty: " + args.data);

    std::unique_ptr<Model> model;
    if (args.model == "oracle")
        model = oracle_model(rows);
    else if (args.model == "silent")
        model = silent_model();
    else {
        std::ifstream in(args.model);
        if (!in) throw std::runtime_error("cannot read model config " + args.model);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("model config " + args.model + ": " + e.what());
        }
        model = make_model(model_config_from_json(j));
    }

    EvalResult res = run_eval(rows, *model, cfg);
    std::cout << res.summary;
    if (!cfg.out_dir.empty())
        std::cout << "\nreports written to " << cfg.out_dir << "\n";
    return kExitOk;
}

int cmd_eval(const EvalArgs& args) {
    auto task = task_from_name(args.task);
    if (!task) throw UsageError("unknown task '" + args.task + "'");
    auto strategy = strategy_from_name(args.strategy);
    if (!strategy)
        throw UsageError("unknown strategy '" + args.strategy +
                         "' (zero_shot|few_shot|cot|tot)");
    EvalRunConfig cfg;
    cfg.strategy = *strategy;
    cfg.parallel = args.parallel;
    cfg.out_dir = args.out_dir;
    cfg.resume = args.resume;
    switch (*task) {
        case Task::Predict: return run_eval_rows<PredictRow>(args, cfg);
        case Task::Plan: return run_eval_rows<PlanRow>(args, cfg);
        case Task::Decompose: return run_eval_rows<DecomposeRow>(args, cfg);
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"textgrid: grid-world benchmark toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "write dataset files");
    generate->add_option("--task", gen.task, "predict|plan|decompose")->required();
    generate->add_option("--levels", gen.levels, "'all' or comma-separated names");
    generate->add_option("--seeds", gen.seeds, "inclusive range a..b");
    generate->add_option("--out", gen.out_dir, "output directory");
    generate->add_option("--size", gen.size, "plan env size (small|medium|large|ultra)");
    generate->add_option("--dists", gen.dists, "plan env distractor count");
    generate->add_option("--full-prob", gen.full_prob,
                         "probability of a full-trace predict prefix");

    SolveArgs sol;
    CLI::App* solve_cmd = app.add_subcommand("solve", "run the expert and print the trace");
    solve_cmd->add_option("--level", sol.env, "level or custom env name")->required();
    solve_cmd->add_option("--seed", sol.seed, "instance seed");
    solve_cmd->add_option("--init-stack", sol.init_stack,
                          "';'-separated protocol subgoals, first executes first");
    solve_cmd->add_flag("--no-additions", sol.no_additions,
                        "forbid dynamic subgoal insertion");
    solve_cmd->add_option("--addition-budget", sol.addition_budget,
                          "max subgoals the solver may insert");
    solve_cmd->add_option("--max-steps", sol.max_steps, "override the step budget");
    solve_cmd->add_flag("--actions", sol.show_actions, "also print the action sequence");

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score a model on a dataset");
    eval_cmd->add_option("--task", ev.task, "predict|plan|decompose")->required();
    eval_cmd->add_option("--data", ev.data, "dataset .jsonl file")->required();
    eval_cmd->add_option("--model", ev.model,
                         "'oracle', 'silent', or a provider config .json");
    eval_cmd->add_option("--strategy", ev.strategy, "zero_shot|few_shot|cot|tot");
    eval_cmd->add_option("--out", ev.out_dir, "report directory");
    eval_cmd->add_flag("--resume", ev.resume, "reuse finished episodes in --out");
    eval_cmd->add_option("--parallel", ev.parallel, "concurrent model calls");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen);
        if (solve_cmd->parsed()) return cmd_solve(sol);
        if (eval_cmd->parsed()) return cmd_eval(ev);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ModelError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const SchemaError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
