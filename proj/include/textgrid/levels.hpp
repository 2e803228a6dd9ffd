#pragma once
// levels.hpp - seeded procedural generation of the 16 benchmark levels and
// the custom navigation environments, with an expert-based solvability
// filter. Recipe parameters live in docs/levels.md.
//
// Determinism contract: generate(level, seed) is a pure function. Each
// attempt draws from a stream derived from (level tag, seed, attempt), and a
// failed attempt (cheap checks or the expert filter) moves to the next
// derived stream, bounded at 64 attempts.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "textgrid/bot.hpp"
#include "textgrid/grid.hpp"
#include "textgrid/mission.hpp"
#include "textgrid/rng.hpp"

namespace textgrid {

// ============================================================ catalog

enum class LevelId {
    GoToObj,
    GoToRedBallGrey,
    GoToRedBall,
    GoToLocal,
    PutNextLocal,
    PickupLoc,
    GoToObjMaze,
    GoTo,
    Pickup,
    UnblockPickup,
    Open,
    Synth,
    SynthLoc,
    GoToSeq,
    SynthSeq,
    BossLevel,
};

inline constexpr int kLevelCount = 16;

inline constexpr const char* kLevelName[kLevelCount] = {
    "GoToObj", "GoToRedBallGrey", "GoToRedBall", "GoToLocal",
    "PutNextLocal", "PickupLoc", "GoToObjMaze", "GoTo",
    "Pickup", "UnblockPickup", "Open", "Synth",
    "SynthLoc", "GoToSeq", "SynthSeq", "BossLevel",
};

inline std::vector<LevelId> all_levels() {
    std::vector<LevelId> out;
    for (int i = 0; i < kLevelCount; ++i) out.push_back(static_cast<LevelId>(i));
    return out;
}

inline std::string gym_name(LevelId id) {
    return std::string("BabyAI-") + kLevelName[static_cast<int>(id)] + "-v0";
}

// Accepts both "GoTo" and "BabyAI-GoTo-v0".
inline std::optional<LevelId> level_from_name(std::string_view name) {
    std::string_view core = name;
    if (core.size() > 10 && core.substr(0, 7) == "BabyAI-" &&
        core.substr(core.size() - 3) == "-v0")
        core = core.substr(7, core.size() - 10);
    for (int i = 0; i < kLevelCount; ++i)
        if (core == kLevelName[i]) return static_cast<LevelId>(i);
    return std::nullopt;
}

enum class Difficulty { Easy, Medium, Hard, VeryHard };

inline constexpr const char* kDifficultyName[4] = {"Easy", "Medium", "Hard", "Very Hard"};

inline Difficulty difficulty_of(LevelId id) {
    switch (id) {
        case LevelId::GoToObj:
        case LevelId::GoToRedBallGrey:
            return Difficulty::Easy;
        case LevelId::GoToRedBall:
        case LevelId::GoToLocal:
        case LevelId::PutNextLocal:
        case LevelId::PickupLoc:
        case LevelId::GoToObjMaze:
        case LevelId::GoTo:
        case LevelId::Pickup:
            return Difficulty::Medium;
        case LevelId::UnblockPickup:
        case LevelId::Open:
        case LevelId::Synth:
            return Difficulty::Hard;
        case LevelId::SynthLoc:
        case LevelId::GoToSeq:
        case LevelId::SynthSeq:
        case LevelId::BossLevel:
            return Difficulty::VeryHard;
    }
    return Difficulty::Easy;
}

// Thirteen competencies, each a set of levels designed to exercise it.
inline constexpr int kCompetencyCount = 13;

inline constexpr const char* kCompetencyName[kCompetencyCount] = {
    "Room Navigation",     "Grey Distractors",   "Mixed Distractors",
    "Maze Navigation",     "Unblocking",         "Explicit Unlocking",
    "Implicit Unlocking",  "Go To Instructions", "Open Instructions",
    "Pick Up Instructions", "Put Instructions",  "Location Language",
    "Instruction Sequences",
};

inline bool competency_covers(int competency, LevelId id) {
    auto in = [&](std::initializer_list<LevelId> set) {
        for (LevelId l : set)
            if (l == id) return true;
        return false;
    };
    using L = LevelId;
    switch (competency) {
        case 0:  // navigate a single room
            return true;
        case 1:  // ignore grey distractors
            return id != L::GoToObj && id != L::GoToObjMaze;
        case 2:  // ignore arbitrary distractors
            return id != L::GoToObj && id != L::GoToObjMaze && id != L::GoToRedBallGrey;
        case 3:  // navigate the 3x3 maze
            return in({L::GoToObjMaze, L::GoTo, L::Pickup, L::UnblockPickup, L::Open, L::Synth,
                       L::SynthLoc, L::GoToSeq, L::SynthSeq, L::BossLevel});
        case 4:  // move objects out of the way
            return in({L::UnblockPickup, L::Synth, L::SynthLoc, L::SynthSeq, L::BossLevel});
        case 5:  // unlock doors on explicit instruction
            return in({L::Synth, L::SynthLoc, L::SynthSeq, L::BossLevel});
        case 6:  // unlock doors without being told
            return id == L::BossLevel;
        case 7:  // "go to" instructions
            return in({L::GoToLocal, L::GoTo, L::Synth, L::SynthLoc, L::GoToSeq, L::SynthSeq,
                       L::BossLevel});
        case 8:  // "open" instructions
            return in({L::Open, L::Synth, L::SynthLoc, L::SynthSeq, L::BossLevel});
        case 9:  // "pick up" instructions
            return in({L::PickupLoc, L::Pickup, L::UnblockPickup, L::Synth, L::SynthLoc,
                       L::SynthSeq, L::BossLevel});
        case 10:  // "put next" instructions
            return in({L::PutNextLocal, L::Synth, L::SynthLoc, L::SynthSeq, L::BossLevel});
        case 11:  // relative location language
            return in({L::PickupLoc, L::SynthLoc, L::SynthSeq, L::BossLevel});
        case 12:  // sequenced instructions
            return in({L::GoToSeq, L::SynthSeq, L::BossLevel});
    }
    return false;
}

// ============================================================ custom plan envs

enum class PlanSize { Small, Medium, Large, Ultra };

inline constexpr const char* kPlanSizeName[4] = {"Small", "Medium", "Large", "Ultra"};
inline constexpr int kPlanRoomSize[4] = {8, 16, 24, 32};
inline constexpr int kPlanDistractorCap[4] = {7, 60, 120, 180};

struct PlanEnvSpec {
    PlanSize size = PlanSize::Small;
    int n_distractors = 0;

    std::string name() const {
        return std::string("CustomBabyAI-GoToRedBall-") + kPlanSizeName[static_cast<int>(size)] +
               "-" + std::to_string(n_distractors) + "Dists-v0";
    }
};

inline std::optional<PlanEnvSpec> parse_plan_env_name(std::string_view name) {
    constexpr std::string_view prefix = "CustomBabyAI-GoToRedBall-";
    constexpr std::string_view suffix = "Dists-v0";
    if (name.size() <= prefix.size() + suffix.size()) return std::nullopt;
    if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
    if (name.substr(name.size() - suffix.size()) != suffix) return std::nullopt;
    std::string_view mid = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    auto dash = mid.find('-');
    if (dash == std::string_view::npos) return std::nullopt;
    std::string_view size_part = mid.substr(0, dash);
    std::string_view count_part = mid.substr(dash + 1);
    PlanEnvSpec spec;
    bool size_ok = false;
    for (int i = 0; i < 4; ++i)
        if (size_part == kPlanSizeName[i]) {
            spec.size = static_cast<PlanSize>(i);
            size_ok = true;
        }
    if (!size_ok || count_part.empty()) return std::nullopt;
    int n = 0;
    for (char ch : count_part) {
        if (ch < '0' || ch > '9') return std::nullopt;
        n = n * 10 + (ch - '0');
        if (n > 100000) return std::nullopt;
    }
    spec.n_distractors = n;
    if (spec.n_distractors > kPlanDistractorCap[static_cast<int>(spec.size)]) return std::nullopt;
    return spec;
}

// ============================================================ instance

struct Instance {
    std::string level_name;
    std::uint64_t seed = 0;
    World world;
    Mission mission;
};

struct GenerationExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ============================================================ generation

namespace gen {

inline constexpr int kMaxAttempts = 64;
inline constexpr Kind kPortableKinds[3] = {Kind::Key, Kind::Ball, Kind::Box};

inline Kind random_kind(Rng& rng) { return kPortableKinds[rng.below(3)]; }
inline Color random_color(Rng& rng) { return static_cast<Color>(rng.below(6)); }

// Uniform pick over free cells, excluding the agent cell and any cell whose
// occupation would leave the agent fully enclosed.
inline std::optional<Coord> random_free_cell(const World& w, Rng& rng) {
    std::vector<Coord> cells;
    for (int y = 0; y < w.height; ++y)
        for (int x = 0; x < w.width; ++x) {
            Coord c{x, y};
            if (!w.free_cell(c) || c == w.agent.pos) continue;
            if (is_adjacent(c, w.agent.pos)) {
                int open = 0;
                for (int d = 0; d < kDirCount; ++d) {
                    Coord n{w.agent.pos.x + kDirDx[d], w.agent.pos.y + kDirDy[d]};
                    if (!(n == c) && w.traversable(n)) ++open;
                }
                if (open == 0) continue;
            }
            cells.push_back(c);
        }
    if (cells.empty()) return std::nullopt;
    return cells[rng.below(cells.size())];
}

inline bool place_agent(World& w, Rng& rng) {
    std::vector<Coord> cells;
    for (int y = 0; y < w.height; ++y)
        for (int x = 0; x < w.width; ++x)
            if (w.free_cell(Coord{x, y})) cells.push_back(Coord{x, y});
    if (cells.empty()) return false;
    w.agent.pos = cells[rng.below(cells.size())];
    w.agent.dir = static_cast<int>(rng.below(4));
    return true;
}

inline std::optional<int> place_object(World& w, Rng& rng, Kind k, Color c) {
    auto cell = random_free_cell(w, rng);
    if (!cell) return std::nullopt;
    return w.add_object(k, c, *cell).id;
}

// 3x3 maze doorways: a spanning tree over the rooms guarantees connectivity,
// then each leftover internal wall gets a door with probability 1/2. Door
// cells are uniform over the wall segment interior (never the corners).
inline void carve_maze_doors(World& w, Rng& rng, int lock_num, int lock_den,
                             std::vector<int>* locked_doors) {
    const int s = w.room_size - 1;  // wall stride
    struct Wall {
        int ra, rb;     // room indices (row-major)
        Coord lo;       // first interior cell of the segment
        bool vertical;  // segment runs along y
    };
    std::vector<Wall> walls;
    for (int ry = 0; ry < w.rooms_y; ++ry)
        for (int rx = 0; rx < w.rooms_x; ++rx) {
            int r = ry * w.rooms_x + rx;
            if (rx + 1 < w.rooms_x)
                walls.push_back(Wall{r, r + 1, Coord{(rx + 1) * s, ry * s + 1}, true});
            if (ry + 1 < w.rooms_y)
                walls.push_back(Wall{r, r + w.rooms_x, Coord{rx * s + 1, (ry + 1) * s}, false});
        }
    std::vector<int> order(walls.size());
    for (std::size_t i = 0; i < walls.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);

    std::vector<int> parent(static_cast<std::size_t>(w.rooms_x) * w.rooms_y);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };

    for (int idx : order) {
        const Wall& wall = walls[idx];
        int a = find(wall.ra), b = find(wall.rb);
        bool doorway = a != b;
        if (doorway) parent[a] = b;
        else doorway = rng.chance(1, 2);
        if (!doorway) continue;
        int offset = static_cast<int>(rng.below(w.room_size - 2));
        Coord cell = wall.vertical ? Coord{wall.lo.x, wall.lo.y + offset}
                                   : Coord{wall.lo.x + offset, wall.lo.y};
        DoorState st = DoorState::Closed;
        bool locked = lock_den > 0 && rng.chance(lock_num, lock_den);
        if (locked) st = DoorState::Locked;
        Obj& door = w.add_door(cell, random_color(rng), st);
        if (locked && locked_doors) locked_doors->push_back(door.id);
    }
}

inline Desc desc_of(const Obj& o, bool drop_color) {
    Desc d;
    d.kind = o.kind;
    if (!drop_color) d.color = o.color;
    return d;
}

// A location qualifier the object satisfies from the agent's starting pose,
// uniform among the satisfied ones (an object on a boundary axis may satisfy
// fewer than two).
inline std::optional<Qual> random_qual(const World& w, const Obj& o, Rng& rng) {
    std::vector<Qual> fits;
    for (int q = 0; q < 4; ++q)
        if (in_half_plane(o.pos, w.agent.pos, w.agent.dir, static_cast<Qual>(q)))
            fits.push_back(static_cast<Qual>(q));
    if (fits.empty()) return std::nullopt;
    return fits[rng.below(fits.size())];
}

struct ClausePolicy {
    bool drop_color = false;     // kind-only descriptors, w.p. 1/4
    int qual_num = 0, qual_den = 1;  // qualifier probability
    bool allow_open = true;
    bool allow_put = true;
    bool allow_pickup = true;
    int lock_num = 0, lock_den = 1;  // explicit-open target locked probability
};

inline std::vector<const Obj*> portables(const World& w) {
    std::vector<const Obj*> out;
    for (const Obj& o : w.objects)
        if (o.portable()) out.push_back(&o);
    return out;
}

inline std::vector<const Obj*> doors(const World& w) {
    std::vector<const Obj*> out;
    for (const Obj& o : w.objects)
        if (o.kind == Kind::Door) out.push_back(&o);
    return out;
}

inline Desc build_desc(World& w, const Obj& o, const ClausePolicy& p, Rng& rng) {
    Desc d = desc_of(o, p.drop_color && rng.chance(1, 4));
    if (p.qual_den > 0 && rng.chance(p.qual_num, p.qual_den)) d.qual = random_qual(w, o, rng);
    return d;
}

// One mission clause over the placed objects. Open targets may be locked on
// the spot, with a matching key added at a random free cell (the expert
// filter rejects layouts where that key is out of reach).
inline std::optional<Clause> build_clause(World& w, const ClausePolicy& p, Rng& rng) {
    std::vector<Verb> verbs{Verb::GoTo};
    if (p.allow_open && !doors(w).empty()) verbs.push_back(Verb::Open);
    if (p.allow_pickup && !portables(w).empty()) verbs.push_back(Verb::PickUp);
    if (p.allow_put && portables(w).size() >= 2) verbs.push_back(Verb::PutNext);
    Verb verb = verbs[rng.below(verbs.size())];

    Clause c;
    c.verb = verb;
    switch (verb) {
        case Verb::GoTo: {
            if (w.objects.empty()) return std::nullopt;
            const Obj& o = w.objects[rng.below(w.objects.size())];
            c.a = build_desc(w, o, p, rng);
            break;
        }
        case Verb::Open: {
            auto ds = doors(w);
            const Obj* d = ds[rng.below(ds.size())];
            c.a = build_desc(w, *d, p, rng);
            if (p.lock_den > 0 && rng.chance(p.lock_num, p.lock_den)) {
                w.object_by_id(d->id)->door = DoorState::Locked;
                if (!place_object(w, rng, Kind::Key, d->color)) return std::nullopt;
            }
            break;
        }
        case Verb::PickUp: {
            auto ps = portables(w);
            const Obj& o = *ps[rng.below(ps.size())];
            c.a = build_desc(w, o, p, rng);
            break;
        }
        case Verb::PutNext: {
            auto ps = portables(w);
            const Obj* a = ps[rng.below(ps.size())];
            const Obj* b = nullptr;
            for (int tries = 0; tries < 32 && !b; ++tries) {
                const Obj& cand = w.objects[rng.below(w.objects.size())];
                if (cand.id != a->id && (cand.kind != a->kind || cand.color != a->color))
                    b = &cand;
            }
            if (!b) return std::nullopt;
            Desc da = build_desc(w, *a, p, rng);
            Desc db = build_desc(w, *b, p, rng);
            c.a = da;
            c.b = db;
            break;
        }
    }
    return c;
}

// Sequenced missions: two groups joined by "then" or "after you" (uniform),
// each side a single clause or an "and" pair with probability 3/10.
inline std::optional<Mission> build_sequence(World& w, const ClausePolicy& p, Rng& rng) {
    Mission m;
    int left = rng.chance(3, 10) ? 2 : 1;
    int right = rng.chance(3, 10) ? 2 : 1;
    for (int i = 0; i < left + right; ++i) {
        auto c = build_clause(w, p, rng);
        if (!c) return std::nullopt;
        m.clauses.push_back(*c);
    }
    Conn seq = rng.chance(1, 2) ? Conn::Then : Conn::AfterYou;
    for (int i = 0; i + 1 < left; ++i) m.conns.push_back(Conn::And);
    m.conns.push_back(seq);
    for (int i = 0; i + 1 < right; ++i) m.conns.push_back(Conn::And);
    return m;
}

inline int room_of(const World& w, Coord c) {
    int s = w.room_size - 1;
    int rx = c.x >= w.width - 1 ? w.rooms_x - 1 : c.x / s;
    int ry = c.y >= w.height - 1 ? w.rooms_y - 1 : c.y / s;
    return ry * w.rooms_x + rx;
}

// Cheap pre-filter: the agent can move and every mission descriptor has at
// least one approachable match. The expert run remains the real gate.
inline bool plausible(const World& w, const Mission& m) {
    bool agent_free = false;
    for (int d = 0; d < kDirCount; ++d) {
        Coord n{w.agent.pos.x + kDirDx[d], w.agent.pos.y + kDirDy[d]};
        agent_free = agent_free || w.traversable(n);
    }
    if (!agent_free) return false;
    auto approachable = [&](const Desc& desc) {
        for (int id : match_ids(w, desc)) {
            const Obj* o = w.object_by_id(id);
            for (int d = 0; d < kDirCount; ++d) {
                Coord n{o->pos.x + kDirDx[d], o->pos.y + kDirDy[d]};
                if (w.traversable(n) || n == w.agent.pos) return true;
            }
        }
        return false;
    };
    for (const Clause& c : m.clauses) {
        if (match_ids(w, c.a).empty() || !approachable(c.a)) return false;
        if (c.verb == Verb::PutNext && (match_ids(w, c.b).empty() || !approachable(c.b)))
            return false;
    }
    return true;
}

}  // namespace gen

// Runs the expert with default initialization and unlimited additions;
// success within the step budget is the solvability criterion.
inline bool solvability_check(const Instance& inst) {
    return solve(inst.world, inst.mission).success;
}

namespace gen {

// Per-level single attempt; nullopt when construction itself fails (before
// any expert run).
inline std::optional<Instance> attempt_level(LevelId id, Rng& rng) {
    using L = LevelId;
    Instance inst;
    inst.level_name = gym_name(id);

    bool maze = competency_covers(3, id);
    World& w = inst.world;
    w = maze ? World::rooms(3, 3, 8) : World::rooms(1, 1, 8);

    std::vector<int> locked;
    if (maze)
        carve_maze_doors(w, rng, id == L::BossLevel ? 1 : 0, id == L::BossLevel ? 4 : 1,
                         &locked);
    if (!place_agent(w, rng)) return std::nullopt;

    Mission& m = inst.mission;
    ClausePolicy policy;

    switch (id) {
        case L::GoToObj:
        case L::GoToObjMaze: {
            auto target = place_object(w, rng, random_kind(rng), random_color(rng));
            if (!target) return std::nullopt;
            Clause c;
            c.verb = Verb::GoTo;
            c.a = desc_of(*w.object_by_id(*target), false);
            m.clauses = {c};
            break;
        }
        case L::GoToRedBallGrey:
        case L::GoToRedBall: {
            if (!place_object(w, rng, Kind::Ball, Color::Red)) return std::nullopt;
            for (int i = 0; i < 7; ++i) {
                Kind k = random_kind(rng);
                Color col = id == L::GoToRedBallGrey ? Color::Grey : random_color(rng);
                while (id == L::GoToRedBall && k == Kind::Ball && col == Color::Red) {
                    k = random_kind(rng);
                    col = random_color(rng);
                }
                if (!place_object(w, rng, k, col)) return std::nullopt;
            }
            Clause c;
            c.verb = Verb::GoTo;
            c.a = Desc{Kind::Ball, Color::Red, {}};
            m.clauses = {c};
            break;
        }
        case L::GoToLocal:
        case L::GoTo: {
            int n = id == L::GoToLocal ? 8 : 18;
            std::vector<int> ids;
            for (int i = 0; i < n; ++i) {
                auto placed = place_object(w, rng, random_kind(rng), random_color(rng));
                if (!placed) return std::nullopt;
                ids.push_back(*placed);
            }
            Clause c;
            c.verb = Verb::GoTo;
            c.a = desc_of(*w.object_by_id(ids[rng.below(ids.size())]), false);
            m.clauses = {c};
            break;
        }
        case L::PickupLoc:
        case L::Pickup:
        case L::UnblockPickup: {
            int n = id == L::PickupLoc ? 8 : (id == L::UnblockPickup ? 20 : 18);
            std::vector<int> ids;
            for (int i = 0; i < n; ++i) {
                auto placed = place_object(w, rng, random_kind(rng), random_color(rng));
                if (!placed) return std::nullopt;
                ids.push_back(*placed);
            }
            if (id == L::UnblockPickup) {
                // park one more portable object right beside a doorway
                auto ds = doors(w);
                if (ds.empty()) return std::nullopt;
                const Obj* door = ds[rng.below(ds.size())];
                std::vector<Coord> sides;
                for (int d = 0; d < kDirCount; ++d) {
                    Coord n2{door->pos.x + kDirDx[d], door->pos.y + kDirDy[d]};
                    if (w.free_cell(n2) && !(n2 == w.agent.pos)) sides.push_back(n2);
                }
                if (sides.empty()) return std::nullopt;
                Coord block = sides[rng.below(sides.size())];
                w.add_object(random_kind(rng), random_color(rng), block);
            }
            int target = ids[rng.below(ids.size())];
            const Obj& o = *w.object_by_id(target);
            if (id == L::UnblockPickup && room_of(w, o.pos) == room_of(w, w.agent.pos))
                return std::nullopt;  // force a cross-room fetch
            Clause c;
            c.verb = Verb::PickUp;
            c.a = desc_of(o, id == L::PickupLoc && rng.chance(1, 4));
            if (id == L::PickupLoc && rng.chance(1, 2)) c.a.qual = random_qual(w, o, rng);
            m.clauses = {c};
            break;
        }
        case L::PutNextLocal: {
            std::vector<int> ids;
            for (int i = 0; i < 8; ++i) {
                auto placed = place_object(w, rng, random_kind(rng), random_color(rng));
                if (!placed) return std::nullopt;
                ids.push_back(*placed);
            }
            int a = ids[rng.below(ids.size())];
            int b = -1;
            for (int tries = 0; tries < 32 && b < 0; ++tries) {
                int cand = ids[rng.below(ids.size())];
                const Obj* oa = w.object_by_id(a);
                const Obj* ob = w.object_by_id(cand);
                if (cand != a && (oa->kind != ob->kind || oa->color != ob->color)) b = cand;
            }
            if (b < 0) return std::nullopt;
            Clause c;
            c.verb = Verb::PutNext;
            c.a = desc_of(*w.object_by_id(a), false);
            c.b = desc_of(*w.object_by_id(b), false);
            m.clauses = {c};
            break;
        }
        case L::Open: {
            for (int i = 0; i < 18; ++i)
                if (!place_object(w, rng, random_kind(rng), random_color(rng)))
                    return std::nullopt;
            auto ds = doors(w);
            if (ds.empty()) return std::nullopt;
            Clause c;
            c.verb = Verb::Open;
            c.a = desc_of(*ds[rng.below(ds.size())], false);
            m.clauses = {c};
            break;
        }
        case L::Synth:
        case L::SynthLoc: {
            for (int i = 0; i < 18; ++i)
                if (!place_object(w, rng, random_kind(rng), random_color(rng)))
                    return std::nullopt;
            policy.drop_color = true;
            policy.lock_num = 1;
            policy.lock_den = 2;
            if (id == L::SynthLoc) {
                policy.qual_num = 1;
                policy.qual_den = 2;
            }
            auto c = build_clause(w, policy, rng);
            if (!c) return std::nullopt;
            m.clauses = {*c};
            break;
        }
        case L::GoToSeq: {
            for (int i = 0; i < 18; ++i)
                if (!place_object(w, rng, random_kind(rng), random_color(rng)))
                    return std::nullopt;
            policy.drop_color = true;
            policy.allow_open = policy.allow_pickup = policy.allow_put = false;
            auto seq = build_sequence(w, policy, rng);
            if (!seq) return std::nullopt;
            m = *seq;
            break;
        }
        case L::SynthSeq:
        case L::BossLevel: {
            for (int i = 0; i < 18; ++i)
                if (!place_object(w, rng, random_kind(rng), random_color(rng)))
                    return std::nullopt;
            policy.drop_color = true;
            policy.qual_num = 1;
            policy.qual_den = 4;
            policy.lock_num = 1;
            policy.lock_den = 2;
            auto seq = build_sequence(w, policy, rng);
            if (!seq) return std::nullopt;
            m = *seq;
            break;
        }
    }

    // implicit unlocking: every locked maze door gets a matching key
    for (int door_id : locked) {
        const Obj* d = w.object_by_id(door_id);
        if (!d) return std::nullopt;
        if (!place_object(w, rng, Kind::Key, d->color)) return std::nullopt;
    }

    if (!m.valid() || !plausible(w, m)) return std::nullopt;
    m.surface = render(w, m);
    return inst;
}

// The moved-objects competency is forced for UnblockPickup and forbidden for
// every level whose profile omits it; the Synth family may go either way.
inline bool trace_fits_level(LevelId id, const Trace& t) {
    if (!t.success) return false;
    if (id == LevelId::UnblockPickup) return t.used_relocation;
    if (!competency_covers(4, id)) return !t.used_relocation;
    return true;
}

}  // namespace gen

inline Instance generate(LevelId id, std::uint64_t seed) {
    std::string tag = std::string("level/") + kLevelName[static_cast<int>(id)];
    for (int attempt = 0; attempt < gen::kMaxAttempts; ++attempt) {
        Rng rng = Rng::from(tag, seed, static_cast<std::uint64_t>(attempt));
        auto inst = gen::attempt_level(id, rng);
        if (!inst) continue;
        inst->seed = seed;
        Trace t = solve(inst->world, inst->mission);
        if (!gen::trace_fits_level(id, t)) continue;
        return *inst;
    }
    throw GenerationExhausted(std::string(kLevelName[static_cast<int>(id)]) + " seed " +
                              std::to_string(seed) + ": no solvable instance in " +
                              std::to_string(gen::kMaxAttempts) + " attempts");
}

inline Instance generate_plan_env(const PlanEnvSpec& spec, std::uint64_t seed) {
    if (spec.n_distractors > kPlanDistractorCap[static_cast<int>(spec.size)])
        throw std::invalid_argument(spec.name() + ": distractor count over the cap");
    std::string tag = std::string("planenv/") + spec.name();
    for (int attempt = 0; attempt < gen::kMaxAttempts; ++attempt) {
        Rng rng = Rng::from(tag, seed, static_cast<std::uint64_t>(attempt));
        Instance inst;
        inst.level_name = spec.name();
        inst.seed = seed;
        World& w = inst.world;
        w = World::rooms(1, 1, kPlanRoomSize[static_cast<int>(spec.size)]);

        // ball first, then the agent away from it, then the clutter
        std::vector<Coord> cells;
        for (int y = 0; y < w.height; ++y)
            for (int x = 0; x < w.width; ++x)
                if (w.free_cell(Coord{x, y})) cells.push_back(Coord{x, y});
        if (cells.empty()) continue;
        Coord ball = cells[rng.below(cells.size())];
        w.add_object(Kind::Ball, Color::Red, ball);

        std::vector<Coord> starts;
        for (Coord c : cells)
            if (!(c == ball) && !is_adjacent(c, ball)) starts.push_back(c);
        if (starts.empty()) continue;
        w.agent.pos = starts[rng.below(starts.size())];
        w.agent.dir = static_cast<int>(rng.below(4));

        bool placed_all = true;
        for (int i = 0; i < spec.n_distractors && placed_all; ++i)
            placed_all = gen::place_object(w, rng, gen::random_kind(rng), Color::Grey)
                             .has_value();
        if (!placed_all) continue;

        Clause c;
        c.verb = Verb::GoTo;
        c.a = Desc{Kind::Ball, Color::Red, {}};
        inst.mission.clauses = {c};
        if (!gen::plausible(w, inst.mission)) continue;
        inst.mission.surface = render(w, inst.mission);
        if (!solvability_check(inst)) continue;
        return inst;
    }
    throw GenerationExhausted(spec.name() + " seed " + std::to_string(seed) +
                              ": no solvable instance in " + std::to_string(gen::kMaxAttempts) +
                              " attempts");
}

// Either a benchmark level or a custom plan environment, by name.
inline Instance generate_by_name(const std::string& name, std::uint64_t seed) {
    if (auto id = level_from_name(name)) return generate(*id, seed);
    if (auto spec = parse_plan_env_name(name)) return generate_plan_env(*spec, seed);
    throw std::invalid_argument("unknown environment name: " + name);
}

}  // namespace textgrid
