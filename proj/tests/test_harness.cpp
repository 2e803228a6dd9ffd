#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>

#include "textgrid/harness.hpp"

using namespace textgrid;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("textgrid-harness-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

}  // namespace

TEST_CASE("strategy names round trip") {
    for (auto s : {PromptStrategy::ZeroShot, PromptStrategy::FewShot,
                   PromptStrategy::Cot, PromptStrategy::Tot}) {
        auto back = strategy_from_name(to_string(s));
        REQUIRE(back.has_value());
        CHECK(*back == s);
    }
    CHECK(std::string(to_string(PromptStrategy::Tot)) == "tot");
    CHECK_FALSE(strategy_from_name("chain_of_thought").has_value());
}

TEST_CASE("predict responses parse to the last stated pose") {
    auto p = parse_predict_response("The agent's final state is: ((19, 18), 0)");
    REQUIRE(p.has_value());
    CHECK(p->pos == Coord{19, 18});
    CHECK(p->dir == 0);

    // verbose reasoning traces state after every action; the answer is last
    std::string verbose =
        "After forward the agent is at ((4, 6), 1).\n"
        "After right it is at ((4, 6), 2).\n"
        "The agent's final state is: ((20, 18), 1)";
    auto v = parse_predict_response(verbose);
    REQUIRE(v.has_value());
    CHECK(v->pos == Coord{20, 18});
    CHECK(v->dir == 1);

    CHECK_FALSE(parse_predict_response("I cannot determine the state.").has_value());
    // direction outside 0..3 is not a state
    CHECK_FALSE(parse_predict_response("final: ((3, 4), 7)").has_value());
    // whitespace tolerance
    auto w = parse_predict_response("(( 2 , 9 ) , 3)");
    REQUIRE(w.has_value());
    CHECK(w->pos == Coord{2, 9});
    CHECK(w->dir == 3);
}

TEST_CASE("plan responses accept the comma list on the last line") {
    auto a = parse_plan_response("forward, left, forward");
    REQUIRE(a.has_value());
    CHECK(*a == std::vector<Action>{Action::Forward, Action::Left, Action::Forward});

    std::string cot =
        "First I move toward the ball, then turn.\n"
        "So the final plan is:\n"
        "forward, forward, right, forward";
    auto b = parse_plan_response(cot);
    REQUIRE(b.has_value());
    REQUIRE(b->size() == 4);
    CHECK((*b)[2] == Action::Right);

    SECTION("case, synonyms and markdown are normalized") {
        auto c = parse_plan_response("Forward, PICK UP, drop");
        REQUIRE(c.has_value());
        CHECK(*c ==
              std::vector<Action>{Action::Forward, Action::Pickup, Action::Drop});

        auto d = parse_plan_response("plan: `forward`, **left**, pick-up.");
        REQUIRE(d.has_value());
        CHECK(*d ==
              std::vector<Action>{Action::Forward, Action::Left, Action::Pickup});
    }

    SECTION("trailing blanks are skipped, leading prose is dropped") {
        auto e = parse_plan_response("the plan is\nleft, forward,\n\n");
        REQUIRE(e.has_value());
        CHECK(*e == std::vector<Action>{Action::Left, Action::Forward});
    }

    SECTION("no recognizable trailing actions fails the parse") {
        CHECK_FALSE(parse_plan_response("").has_value());
        CHECK_FALSE(parse_plan_response("walk north twice then grab it").has_value());
        // trailing prose breaks the run even when actions appear earlier
        CHECK_FALSE(
            parse_plan_response("forward, left\nthat should do it").has_value());
    }
}

TEST_CASE("decompose responses parse between the final markers") {
    std::string text =
        "<START>\n"
        "(GoNextToSubgoal, (7, 19))\n"
        "(OpenSubgoal)\n"
        "(GoNextToSubgoal, (17, 3))\n"
        "<END>";
    auto lines = parse_decompose_response(text);
    REQUIRE(lines.has_value());
    REQUIRE(lines->size() == 3);
    CHECK((*lines)[0].kind == SubKind::GoNextTo);
    REQUIRE((*lines)[0].coord.has_value());
    CHECK(*(*lines)[0].coord == Coord{7, 19});
    CHECK((*lines)[0].mode == NavMode::Face);
    CHECK((*lines)[1].kind == SubKind::Open);
    CHECK(*(*lines)[2].coord == Coord{17, 3});

    SECTION("the last START block wins") {
        std::string two =
            "Candidate A:\n<START>\n(PickupSubgoal)\n<END>\n"
            "Better:\n<START>\n(DropSubgoal)\n<END>\n";
        auto got = parse_decompose_response(two);
        REQUIRE(got.has_value());
        REQUIRE(got->size() == 1);
        CHECK((*got)[0].kind == SubKind::Drop);
    }

    SECTION("tight coordinate spacing is accepted") {
        auto got = parse_decompose_response("<START>\n(GoNextToSubgoal, (7,19))\n<END>");
        REQUIRE(got.has_value());
        CHECK(*(*got)[0].coord == Coord{7, 19});
    }

    SECTION("an empty block is a successful empty plan") {
        auto got = parse_decompose_response("<START>\n\n<END>");
        REQUIRE(got.has_value());
        CHECK(got->empty());
    }

    SECTION("failures") {
        CHECK_FALSE(parse_decompose_response("(PickupSubgoal)").has_value());
        CHECK_FALSE(parse_decompose_response("<START>\n(PickupSubgoal)\n").has_value());
        CHECK_FALSE(
            parse_decompose_response("<START>\n(TeleportSubgoal)\n<END>").has_value());
        CHECK_FALSE(
            parse_decompose_response("<START>\ngo to the door\n<END>").has_value());
    }
}

TEST_CASE("prompts embed the row verbatim and follow the strategy") {
    PredictRow row = gen_predict(LevelId::GoToLocal, 11);
    std::string zero = build_prompt(row, PromptStrategy::ZeroShot);
    CHECK(zero.find(row.env_description) != std::string::npos);
    CHECK(zero.find(pose_text(row.initial_state)) != std::string::npos);
    CHECK(zero.find("The agent's final state is: ((x, y), d)") != std::string::npos);
    CHECK(zero.find("Example") == std::string::npos);

    std::string cot = build_prompt(row, PromptStrategy::Cot);
    CHECK(cot.find("step by step") != std::string::npos);
    std::string tot = build_prompt(row, PromptStrategy::Tot);
    CHECK(tot.find("candidate solution paths") != std::string::npos);

    std::string few = build_prompt(row, PromptStrategy::FewShot);
    std::size_t count = 0;
    for (std::size_t at = few.find("=== Example"); at != std::string::npos;
         at = few.find("=== Example", at + 1))
        ++count;
    CHECK(count == 3);
    // exemplars are solved: answers from the reserved seed band appear in full
    for (std::uint64_t seed : kExemplarSeeds) {
        PredictRow ex = gen_predict(LevelId::GoToLocal, seed);
        CHECK(few.find(oracle_answer(ex)) != std::string::npos);
        CHECK(ex.seed != row.seed);
    }
    // the question under evaluation comes after all exemplars
    CHECK(few.rfind(row.env_description) > few.rfind("=== Now solve this one ==="));
}

TEST_CASE("decompose prompts state the protocol") {
    DecomposeRow row = gen_decompose(LevelId::SynthLoc, 5);
    std::string p = build_prompt(row, PromptStrategy::ZeroShot);
    CHECK(p.find(row.mission) != std::string::npos);
    CHECK(p.find("<START>") != std::string::npos);
    CHECK(p.find("<END>") != std::string::npos);
    CHECK(p.find("(GoNextToSubgoal, (x, y))") != std::string::npos);
    CHECK(p.find("(OpenSubgoal)") != std::string::npos);
    CHECK(p.find("(PickupSubgoal)") != std::string::npos);
    CHECK(p.find("(DropSubgoal)") != std::string::npos);
    CHECK(p.find("first line first") != std::string::npos);
}

TEST_CASE("plan prompts name the target and the action alphabet") {
    PlanEnvSpec spec{PlanSize::Small, 7};
    PlanRow row = gen_plan(spec, 3);
    std::string p = build_prompt(row, PromptStrategy::ZeroShot);
    std::string target = "(" + std::to_string(row.target_subgoal.x) + ", " +
                         std::to_string(row.target_subgoal.y) + ")";
    CHECK(p.find(target) != std::string::npos);
    CHECK(p.find("left, right, forward, pickup, drop, toggle") != std::string::npos);

    std::string few = build_prompt(row, PromptStrategy::FewShot);
    PlanRow ex = gen_plan(spec, kExemplarSeeds[0]);
    CHECK(few.find(oracle_answer(ex)) != std::string::npos);
}

TEST_CASE("predict scoring compares replayed state") {
    PredictRow row = gen_predict(LevelId::GoToObjMaze, 21);
    PredictRecord good = score_predict(row, oracle_answer(row));
    CHECK(good.parse_ok);
    CHECK(good.success);
    CHECK(good.pos_match);
    CHECK(good.manhattan == 0);

    Pose wrong_dir = row.target_state;
    wrong_dir.dir = (wrong_dir.dir + 1) % 4;
    PredictRecord half =
        score_predict(row, "The agent's final state is: " + pose_text(wrong_dir));
    CHECK(half.parse_ok);
    CHECK(half.pos_match);
    CHECK_FALSE(half.success);
    CHECK(half.manhattan == 0);

    Pose wrong_pos = row.target_state;
    wrong_pos.pos.x += 2;
    wrong_pos.pos.y -= 1;
    PredictRecord off =
        score_predict(row, "The agent's final state is: " + pose_text(wrong_pos));
    CHECK_FALSE(off.success);
    CHECK_FALSE(off.pos_match);
    CHECK(off.manhattan == 3);

    PredictRecord silent = score_predict(row, "");
    CHECK_FALSE(silent.parse_ok);
    CHECK_FALSE(silent.success);
}

TEST_CASE("plan scoring replays actions in the simulator") {
    PlanEnvSpec spec{PlanSize::Small, 7};
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        PlanRow row = gen_plan(spec, seed);
        PlanRecord rec = score_plan(row, oracle_answer(row));
        CHECK(rec.parse_ok);
        CHECK(rec.success);
        CHECK(rec.expert_len == row.expert_action_sequence.size());
        CHECK(rec.llm_len == rec.expert_len);
        auto eff = efficiency_of(rec);
        REQUIRE(eff.has_value());
        CHECK(*eff == 1.0);
    }

    SECTION("longer but valid plans succeed with reduced efficiency") {
        PlanRow row = gen_plan(spec, 9);
        std::string padded = oracle_answer(row) + ", left, right";
        PlanRecord rec = score_plan(row, padded);
        CHECK(rec.success);
        CHECK(rec.llm_len == rec.expert_len + 2);
        auto eff = efficiency_of(rec);
        REQUIRE(eff.has_value());
        CHECK(*eff ==
              Catch::Approx(double(rec.expert_len) / double(rec.expert_len + 2)));
    }

    SECTION("impossible actions no-op instead of derailing the replay") {
        PlanRow row = gen_plan(spec, 12);
        // pickup with nothing ahead and toggle with no door are silent no-ops
        std::string noisy = "toggle, pickup, " + oracle_answer(row);
        PlanRecord rec = score_plan(row, noisy);
        CHECK(rec.success);
        CHECK(rec.llm_len == rec.expert_len + 2);
    }

    SECTION("a plan that stops short fails") {
        PlanRow row = gen_plan(spec, 15);
        REQUIRE(row.expert_action_sequence.size() >= 2);
        std::vector<Action> cut(row.expert_action_sequence.begin(),
                                row.expert_action_sequence.end() - 2);
        // the expert ends facing its goal; dropping the last move and turn
        // leaves the agent short unless the path was already adjacent
        PlanRecord rec = score_plan(row, actions_text(cut));
        CHECK(rec.parse_ok);
        World w = parse_structured(row.env_description).world;
        for (Action a : cut) apply(w, a);
        CHECK(rec.success == (manhattan(w.agent.pos, row.target_subgoal) == 1));
    }

    SECTION("unparseable plans never succeed") {
        PlanRow row = gen_plan(spec, 18);
        PlanRecord rec = score_plan(row, "just wander about");
        CHECK_FALSE(rec.parse_ok);
        CHECK_FALSE(rec.success);
        CHECK_FALSE(efficiency_of(rec).has_value());
    }
}

TEST_CASE("oracle decompositions replay to autonomous success") {
    // the stack a perfect model returns must solve the mission with zero
    // added subgoals, across level shapes and seeds
    struct Probe {
        LevelId level;
        std::uint64_t seed;
    };
    std::vector<Probe> probes;
    for (LevelId id : {LevelId::GoToLocal, LevelId::PutNextLocal, LevelId::Open,
                       LevelId::UnblockPickup, LevelId::Synth, LevelId::SynthLoc,
                       LevelId::GoToSeq, LevelId::BossLevel})
        for (std::uint64_t seed : {31ULL, 32ULL, 33ULL}) probes.push_back({id, seed});

    for (const Probe& p : probes) {
        CAPTURE(gym_name(p.level), p.seed);
        DecomposeRow row = gen_decompose(p.level, p.seed);
        std::string answer = oracle_answer(row);
        DecomposeRecord rec = score_decompose(row, answer);
        CHECK(rec.parse_ok);
        CHECK(rec.success);
        CHECK(rec.added == 0);
        CHECK(rec.limit == row.help_count);
        CHECK(record_aci(rec) == 1.0);
    }
}

TEST_CASE("decompose scoring grants assistance up to the recorded need") {
    DecomposeRow row = gen_decompose(LevelId::Synth, 40);
    // an empty plan forces the executor to re-derive everything itself
    DecomposeRecord empty = score_decompose(row, "<START>\n<END>");
    CHECK(empty.parse_ok);
    CHECK(empty.limit == row.help_count);

    DecomposeRecord silent = score_decompose(row, "no markers here");
    CHECK_FALSE(silent.parse_ok);
    CHECK_FALSE(silent.success);
    CHECK(silent.limit == row.help_count);
    CHECK(record_aci(silent) == 0.0);
}

TEST_CASE("episodes serialize losslessly") {
    PredictRow row = gen_predict(LevelId::GoToLocal, 77);
    Episode e = score_episode(row, oracle_answer(row));
    e.level_name = row.level_name;
    e.seed = row.seed;
    e.row_id = 4;
    e.model = "oracle";
    e.strategy = "zero_shot";
    e.dataset_fp = "0123456789abcdef";
    Episode back = episode_from_json(to_json(e));
    CHECK(back.task == "predict");
    CHECK(back.level_name == e.level_name);
    CHECK(back.seed == 77);
    CHECK(back.row_id == 4);
    CHECK(back.model == "oracle");
    CHECK(back.strategy == "zero_shot");
    CHECK(back.dataset_fp == e.dataset_fp);
    CHECK(back.parse_ok == e.parse_ok);
    CHECK(back.success == e.success);
    CHECK(back.detail.at("pos_match") == e.detail.at("pos_match"));
    CHECK(back.detail.at("manhattan") == e.detail.at("manhattan"));
}

TEST_CASE("dataset fingerprints react to any row change") {
    std::vector<PredictRow> rows;
    for (std::uint64_t seed = 0; seed < 4; ++seed)
        rows.push_back(gen_predict(LevelId::GoToObj, seed));
    std::string fp = dataset_fingerprint(rows);
    CHECK(fp.size() == 16);
    CHECK(fp == dataset_fingerprint(rows));

    auto tampered = rows;
    tampered[2].seed ^= 1;
    CHECK(dataset_fingerprint(tampered) != fp);
    auto shorter = rows;
    shorter.pop_back();
    CHECK(dataset_fingerprint(shorter) != fp);
}

TEST_CASE("oracle eval sweeps to perfect scores and writes reports") {
    std::vector<PredictRow> rows;
    for (std::uint64_t seed = 50; seed < 56; ++seed)
        rows.push_back(gen_predict(LevelId::GoToLocal, seed));
    for (std::uint64_t seed = 50; seed < 53; ++seed)
        rows.push_back(gen_predict(LevelId::GoToObjMaze, seed));

    TempDir tmp;
    auto model = oracle_model(rows);
    EvalRunConfig cfg;
    cfg.strategy = PromptStrategy::ZeroShot;
    cfg.parallel = 4;
    cfg.out_dir = tmp.path.string();
    EvalResult res = run_eval(rows, *model, cfg);

    REQUIRE(res.episodes.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(res.episodes[i].row_id == i);
        CHECK(res.episodes[i].success);
    }
    CHECK(res.aggregate.at("overall").at("success_rate").get<double>() == 1.0);
    CHECK(res.aggregate.at("overall").at("parse_failures").get<int>() == 0);
    CHECK(res.aggregate.at("by_level")
              .at("BabyAI-GoToLocal-v0")
              .at("n")
              .get<int>() == 6);
    CHECK(res.aggregate.at("by_difficulty").contains("Medium"));
    CHECK(res.aggregate.at("by_difficulty").at("Medium").at("n").get<int>() == 9);
    CHECK(res.aggregate.at("by_competency").contains("Room Navigation"));

    CHECK(line_count(tmp.path / "episodes.jsonl") == rows.size());
    json agg = json::parse(slurp(tmp.path / "aggregate.json"));
    CHECK(agg.at("overall").at("success_rate").get<double>() == 1.0);
    std::string summary = slurp(tmp.path / "summary.txt");
    CHECK(summary.find("BabyAI-GoToLocal-v0") != std::string::npos);
    CHECK(summary.find("overall") != std::string::npos);
    CHECK(summary == res.summary);

    // silent model: every row a parse failure, every score zero
    auto quiet = silent_model();
    EvalRunConfig plain;
    EvalResult zero = run_eval(rows, *quiet, plain);
    CHECK(zero.aggregate.at("overall").at("success_rate").get<double>() == 0.0);
    CHECK(zero.aggregate.at("overall").at("parse_failures").get<std::size_t>() ==
          rows.size());
}

TEST_CASE("oracle eval is perfect on plan and decompose tasks") {
    PlanEnvSpec spec{PlanSize::Small, 7};
    std::vector<PlanRow> plan_rows;
    for (std::uint64_t seed = 60; seed < 66; ++seed)
        plan_rows.push_back(gen_plan(spec, seed));
    auto plan_oracle = oracle_model(plan_rows);
    EvalRunConfig cfg;
    cfg.parallel = 3;
    EvalResult plan_res = run_eval(plan_rows, *plan_oracle, cfg);
    CHECK(plan_res.aggregate.at("overall").at("success_rate").get<double>() == 1.0);
    CHECK(plan_res.aggregate.at("overall").at("mean_efficiency").get<double>() == 1.0);

    std::vector<DecomposeRow> dec_rows;
    for (std::uint64_t seed = 70; seed < 76; ++seed)
        dec_rows.push_back(gen_decompose(LevelId::SynthLoc, seed));
    auto dec_oracle = oracle_model(dec_rows);
    EvalResult dec_res = run_eval(dec_rows, *dec_oracle, cfg);
    CHECK(dec_res.aggregate.at("overall").at("cr").get<double>() == 1.0);
    CHECK(dec_res.aggregate.at("overall").at("pr").get<double>() == 1.0);
    CHECK(dec_res.aggregate.at("overall").at("aci").get<double>() == 1.0);
    CHECK(dec_res.aggregate.contains("by_sa_bucket"));
}

TEST_CASE("few-shot oracle eval still resolves the evaluated row") {
    // exemplar descriptions precede the real question; answer matching must
    // key on the last environment block in the prompt
    std::vector<PredictRow> rows;
    for (std::uint64_t seed = 80; seed < 84; ++seed)
        rows.push_back(gen_predict(LevelId::GoToRedBall, seed));
    auto model = oracle_model(rows);
    EvalRunConfig cfg;
    cfg.strategy = PromptStrategy::FewShot;
    EvalResult res = run_eval(rows, *model, cfg);
    CHECK(res.aggregate.at("overall").at("success_rate").get<double>() == 1.0);
}

TEST_CASE("resume reuses finished episodes and fills gaps") {
    std::vector<PredictRow> rows;
    for (std::uint64_t seed = 90; seed < 95; ++seed)
        rows.push_back(gen_predict(LevelId::GoToObj, seed));

    TempDir tmp;
    EvalRunConfig cfg;
    cfg.out_dir = tmp.path.string();
    {
        auto model = oracle_model(rows);
        run_eval(rows, *model, cfg);
    }

    // drop the last two lines to simulate an interrupted run
    std::vector<std::string> lines;
    {
        std::ifstream in(tmp.path / "episodes.jsonl");
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) lines.push_back(line);
    }
    REQUIRE(lines.size() == rows.size());
    {
        std::ofstream out(tmp.path / "episodes.jsonl", std::ios::trunc);
        for (std::size_t i = 0; i + 2 < lines.size(); ++i) out << lines[i] << "\n";
    }

    auto counted = std::make_shared<std::atomic<int>>(0);
    auto answers = oracle_model(rows);
    ScriptedModel counting_oracle("oracle", [&](const std::string& prompt) {
        ++*counted;
        return answers->complete(prompt);
    });

    cfg.resume = true;
    EvalResult res = run_eval(rows, counting_oracle, cfg);
    CHECK(*counted == 2);
    CHECK(res.episodes.size() == rows.size());
    CHECK(res.aggregate.at("overall").at("success_rate").get<double>() == 1.0);
    CHECK(line_count(tmp.path / "episodes.jsonl") == rows.size());

    // a fingerprint mismatch (different dataset) ignores the stale episodes
    std::vector<PredictRow> other;
    for (std::uint64_t seed = 200; seed < 203; ++seed)
        other.push_back(gen_predict(LevelId::GoToObj, seed));
    auto other_answers = oracle_model(other);
    auto fresh = std::make_shared<std::atomic<int>>(0);
    ScriptedModel fresh_oracle("oracle", [&](const std::string& prompt) {
        ++*fresh;
        return other_answers->complete(prompt);
    });
    EvalResult res2 = run_eval(other, fresh_oracle, cfg);
    CHECK(*fresh == 3);
    CHECK(res2.aggregate.at("overall").at("success_rate").get<double>() == 1.0);
}

TEST_CASE("mixed-task aggregation is rejected") {
    PredictRow p = gen_predict(LevelId::GoToObj, 1);
    DecomposeRow d = gen_decompose(LevelId::GoToObj, 1);
    Episode a = score_episode(p, oracle_answer(p));
    a.task = "predict";
    Episode b = score_episode(d, oracle_answer(d));
    b.task = "decompose";
    CHECK_THROWS_AS(aggregate_report({a, b}), std::invalid_argument);
    CHECK(aggregate_report({}).at("episodes").get<int>() == 0);
}
