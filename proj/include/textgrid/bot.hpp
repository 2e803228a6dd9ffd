#pragma once
// bot.hpp - the omniscient expert: a subgoal stack machine with full-grid
// pathfinding and dynamic subgoal insertion.
//
// The stack holds subgoals with the top at the END of the list; execution
// pops from the end. A mission translates into one bundle per clause, bundles
// concatenated in reverse execution order so the first clause sits on top.
// While running, the bot may insert prerequisite subgoals (opening doors in
// the way, fetching keys for locked doors, relocating blocking objects);
// every inserted subgoal counts toward added_subgoals. Initialization-time
// safety Drops are part of the initial stack and are not counted.
//
// Navigation is two-phase: a path over currently traversable cells is always
// preferred; only when none exists does the planner route through "soft"
// obstacles (closed or locked doors, portable objects), and the walk stops in
// front of the first soft cell, where the matching insertion happens.

#include <climits>
#include <optional>
#include <string>
#include <vector>

#include "textgrid/grid.hpp"
#include "textgrid/mission.hpp"

namespace textgrid {

// ============================================================ subgoals

enum class SubKind { GoNextTo, Open, Pickup, Drop };

// Completion condition of a GoNextTo target.
enum class NavMode {
    Adjacent,      // agent cell cardinally adjacent to the target, any facing
    Face,          // target is the front cell
    DropAdjacent,  // front cell is free floor cardinally adjacent to the target
    Onto           // agent stands on the target cell
};

struct Subgoal {
    SubKind kind = SubKind::Drop;
    std::optional<Desc> desc;    // GoNextTo by descriptor
    std::optional<Coord> coord;  // GoNextTo by coordinate
    NavMode mode = NavMode::Face;

    static Subgoal go_desc(Desc d, NavMode m) {
        Subgoal s;
        s.kind = SubKind::GoNextTo;
        s.desc = d;
        s.mode = m;
        return s;
    }
    static Subgoal go_coord(Coord c, NavMode m) {
        Subgoal s;
        s.kind = SubKind::GoNextTo;
        s.coord = c;
        s.mode = m;
        return s;
    }
    static Subgoal open() { return Subgoal{SubKind::Open, {}, {}, NavMode::Face}; }
    static Subgoal pickup() { return Subgoal{SubKind::Pickup, {}, {}, NavMode::Face}; }
    static Subgoal drop() { return Subgoal{SubKind::Drop, {}, {}, NavMode::Face}; }
};

inline std::string repr(const Subgoal& s) {
    switch (s.kind) {
        case SubKind::Open: return "(OpenSubgoal)";
        case SubKind::Pickup: return "(PickupSubgoal)";
        case SubKind::Drop: return "(DropSubgoal)";
        case SubKind::GoNextTo: break;
    }
    std::string out = "(GoNextToSubgoal: ";
    if (s.coord) {
        out += "(" + std::to_string(s.coord->x) + "," + std::to_string(s.coord->y) + ")";
    } else if (s.desc) {
        if (s.desc->color) {
            out += to_string(*s.desc->color);
            out += ' ';
        }
        out += to_string(s.desc->kind);
        out += ' ';
        out += s.desc->qual ? kQualName[static_cast<int>(*s.desc->qual)] : "None";
    }
    out += ")";
    return out;
}

inline std::string repr(const std::vector<Subgoal>& stack) {
    std::string out = "[";
    for (std::size_t i = 0; i < stack.size(); ++i) {
        if (i) out += ", ";
        out += repr(stack[i]);
    }
    out += "]";
    return out;
}

// ============================================================ translation

// Per-clause bundles, listed bottom-to-top. The Drop under every Pickup is
// the safety release: holding an object past its clause can make later
// clauses unsatisfiable, so it is dropped right away (which also restores the
// cell it was taken from). The whole-mission stack concatenates bundles in
// reverse execution order.
inline std::vector<Subgoal> translate_clause(const Clause& c) {
    switch (c.verb) {
        case Verb::GoTo:
            return {Subgoal::go_desc(c.a, NavMode::Adjacent)};
        case Verb::Open:
            return {Subgoal::open(), Subgoal::go_desc(c.a, NavMode::Face)};
        case Verb::PickUp:
            return {Subgoal::drop(), Subgoal::pickup(), Subgoal::go_desc(c.a, NavMode::Face)};
        case Verb::PutNext:
            return {Subgoal::drop(), Subgoal::go_desc(c.b, NavMode::DropAdjacent),
                    Subgoal::pickup(), Subgoal::go_desc(c.a, NavMode::Face)};
    }
    return {};
}

inline std::vector<std::size_t> execution_order(const Mission& m) {
    // Split at the (single) sequencing connector; "after you" swaps the
    // groups, "then" keeps them.
    std::size_t boundary = m.clauses.size();
    bool swapped = false;
    for (std::size_t i = 0; i < m.conns.size(); ++i) {
        if (m.conns[i] == Conn::Then) boundary = i + 1;
        if (m.conns[i] == Conn::AfterYou) {
            boundary = i + 1;
            swapped = true;
        }
    }
    std::vector<std::size_t> order;
    if (swapped) {
        for (std::size_t i = boundary; i < m.clauses.size(); ++i) order.push_back(i);
        for (std::size_t i = 0; i < boundary; ++i) order.push_back(i);
    } else {
        for (std::size_t i = 0; i < m.clauses.size(); ++i) order.push_back(i);
    }
    return order;
}

inline std::vector<Subgoal> translate_mission(const Mission& m) {
    std::vector<Subgoal> stack;
    auto order = execution_order(m);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        auto bundle = translate_clause(m.clauses[*it]);
        stack.insert(stack.end(), bundle.begin(), bundle.end());
    }
    return stack;
}

// ============================================================ pathfinding

namespace nav {

inline bool soft_cell(const World& w, Coord c) {
    const Obj* o = w.object_at(c);
    if (!o) return false;
    if (o->portable()) return true;
    return o->kind == Kind::Door && o->door != DoorState::Open;
}

inline bool passable(const World& w, Coord c, bool relaxed) {
    if (!w.in_bounds(c) || w.is_wall(c)) return false;
    if (w.traversable(c)) return true;
    return relaxed && soft_cell(w, c);
}

struct Search {
    const World& w;
    int npose;
    std::vector<std::int32_t> parent;
    std::vector<std::int8_t> via;
    std::vector<std::uint8_t> goal;

    explicit Search(const World& ww)
        : w(ww),
          npose(ww.width * ww.height * kDirCount),
          parent(static_cast<std::size_t>(npose), -2),
          via(static_cast<std::size_t>(npose), -1),
          goal(static_cast<std::size_t>(npose), 0) {}

    int pose(Coord c, int d) const { return (c.y * w.width + c.x) * kDirCount + d; }

    void mark_goal(const std::vector<Coord>& targets, NavMode mode) {
        auto mark_all_dirs = [&](Coord c) {
            if (!w.in_bounds(c)) return;
            for (int d = 0; d < kDirCount; ++d) goal[pose(c, d)] = 1;
        };
        auto mark_facing = [&](Coord f) {
            // Poses whose front cell is f.
            for (int d = 0; d < kDirCount; ++d) {
                Coord c{f.x - kDirDx[d], f.y - kDirDy[d]};
                if (w.in_bounds(c)) goal[pose(c, d)] = 1;
            }
        };
        for (Coord t : targets) {
            switch (mode) {
                case NavMode::Adjacent:
                    for (int d = 0; d < kDirCount; ++d)
                        mark_all_dirs(Coord{t.x + kDirDx[d], t.y + kDirDy[d]});
                    break;
                case NavMode::Face:
                    mark_facing(t);
                    break;
                case NavMode::DropAdjacent:
                    for (int d = 0; d < kDirCount; ++d) {
                        Coord f{t.x + kDirDx[d], t.y + kDirDy[d]};
                        if (w.free_cell(f)) mark_facing(f);
                    }
                    break;
                case NavMode::Onto:
                    mark_all_dirs(t);
                    break;
            }
        }
    }

    // Breadth-first over (cell, direction) poses, one unit per turn or step.
    // Expansion order forward, left, right: alphabetical in the action words,
    // so the first shortest path found is the lexicographically first one.
    std::optional<std::vector<Action>> run(const std::vector<Coord>& targets, NavMode mode,
                                           bool relaxed) {
        if (targets.empty()) return std::nullopt;
        mark_goal(targets, mode);
        int start = pose(w.agent.pos, w.agent.dir);
        if (goal[start]) return std::vector<Action>{};
        parent[start] = -1;
        std::vector<std::int32_t> queue;
        queue.push_back(start);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            std::int32_t p = queue[head];
            int d = p % kDirCount;
            int cell = p / kDirCount;
            Coord c{cell % w.width, cell / w.width};
            const Action acts[3] = {Action::Forward, Action::Left, Action::Right};
            for (Action a : acts) {
                std::int32_t q;
                if (a == Action::Forward) {
                    Coord f{c.x + kDirDx[d], c.y + kDirDy[d]};
                    if (!passable(w, f, relaxed)) continue;
                    q = pose(f, d);
                } else {
                    q = pose(c, a == Action::Left ? turn_left(d) : turn_right(d));
                }
                if (parent[q] != -2) continue;
                parent[q] = p;
                via[q] = static_cast<std::int8_t>(a);
                if (goal[q]) {
                    std::vector<Action> path;
                    for (std::int32_t at = q; parent[at] != -1; at = parent[at])
                        path.push_back(static_cast<Action>(via[at]));
                    std::reverse(path.begin(), path.end());
                    return path;
                }
                queue.push_back(q);
            }
        }
        return std::nullopt;
    }
};

struct PlanOutcome {
    bool found = false;
    bool relaxed = false;
    std::vector<Action> actions;
};

inline PlanOutcome plan(const World& w, const std::vector<Coord>& targets, NavMode mode) {
    PlanOutcome out;
    if (auto strict = Search(w).run(targets, mode, false)) {
        out.found = true;
        out.actions = std::move(*strict);
        return out;
    }
    if (auto soft = Search(w).run(targets, mode, true)) {
        out.found = true;
        out.relaxed = true;
        out.actions = std::move(*soft);
        return out;
    }
    return out;
}

// Cells the path walks through (entered by forward moves), start included.
inline std::vector<Coord> path_cells(const World& w, const std::vector<Action>& actions) {
    std::vector<Coord> cells{w.agent.pos};
    Coord c = w.agent.pos;
    int d = w.agent.dir;
    for (Action a : actions) {
        if (a == Action::Left) d = turn_left(d);
        else if (a == Action::Right) d = turn_right(d);
        else if (a == Action::Forward) {
            c = Coord{c.x + kDirDx[d], c.y + kDirDy[d]};
            cells.push_back(c);
        }
    }
    return cells;
}

// Nearest free floor cell from `from`, searched breadth-first in east, south,
// west, north neighbor order over currently walkable cells (plus the start,
// which may be a door or object cell). Excluded cells are skipped as results
// but still traversed.
inline std::optional<Coord> nearest_free_cell(const World& w, Coord from,
                                              const std::vector<Coord>& exclude) {
    auto excluded = [&](Coord c) {
        for (Coord e : exclude)
            if (e == c) return true;
        return false;
    };
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w.width) * w.height, 0);
    std::vector<Coord> queue{from};
    seen[static_cast<std::size_t>(from.y) * w.width + from.x] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        Coord c = queue[head];
        if (w.free_cell(c) && !excluded(c) && !(c == w.agent.pos)) return c;
        for (int d = 0; d < kDirCount; ++d) {
            Coord n{c.x + kDirDx[d], c.y + kDirDy[d]};
            if (!w.in_bounds(n) || w.is_wall(n)) continue;
            auto idx = static_cast<std::size_t>(n.y) * w.width + n.x;
            if (seen[idx]) continue;
            // Expansion stays on currently walkable cells: a free cell past
            // a closed door is no use as an immediate drop target.
            if (!w.traversable(n)) continue;
            seen[idx] = 1;
            queue.push_back(n);
        }
    }
    return std::nullopt;
}

}  // namespace nav

// Shortest action sequence toward a single coordinate goal. Prefers paths
// over currently traversable cells; falls back to routing through soft
// obstacles (the caller resolves them). nullopt when no route exists at all.
enum class PathMode { AdjacentTo, Onto, Face };

inline std::optional<std::vector<Action>> plan_path(const World& w, Coord goal, PathMode mode) {
    NavMode m = mode == PathMode::AdjacentTo ? NavMode::Adjacent
                : mode == PathMode::Onto     ? NavMode::Onto
                                             : NavMode::Face;
    auto out = nav::plan(w, {goal}, m);
    if (!out.found) return std::nullopt;
    return out.actions;
}

// ============================================================ episode trace

struct StackEvent {
    int step = 0;
    std::string stack;
};

struct Trace {
    std::vector<Action> actions;
    std::vector<World> states;  // states.size() == actions.size() + 1
    bool success = false;
    int added_subgoals = 0;
    bool used_relocation = false;
    int steps = 0;
    std::string failure_reason;
    std::vector<Subgoal> anticipated;  // execution order, coordinate targets
    std::vector<StackEvent> events;

    json to_json() const {
        json j;
        j["actions"] = actions_json(actions);
        j["success"] = success;
        j["added_subgoals"] = added_subgoals;
        j["steps"] = steps;
        if (!failure_reason.empty()) j["failure_reason"] = failure_reason;
        return j;
    }
};

struct SolveOptions {
    std::optional<std::vector<Subgoal>> init_stack;  // bottom-to-top; default: translate_mission
    bool allow_additions = true;
    std::optional<int> addition_budget;  // max added subgoals when additions allowed
    std::optional<int> max_steps;
    bool record_events = false;
    bool record_anticipated = false;
    // Counts initialization-time safety Drops as additions instead of initial
    // stack content. Off by default; kept as an explicit convention switch.
    bool count_initial_drops = false;
};

// ============================================================ solver

class Solver {
public:
    Solver(const World& start, const Mission& mission, const SolveOptions& opts)
        : start_(start), mission_(mission), opts_(opts), w_(start), tracker_(mission, start) {}

    Trace run() {
        stack_ = opts_.init_stack ? *opts_.init_stack : translate_mission(mission_);
        if (opts_.count_initial_drops && !opts_.init_stack) {
            for (const Subgoal& s : stack_)
                if (s.kind == SubKind::Drop) ++trace_.added_subgoals;
        }
        budget_ = opts_.allow_additions ? opts_.addition_budget.value_or(INT_MAX) : 0;
        max_steps_ = opts_.max_steps.value_or(default_step_budget(w_));
        trace_.states.push_back(w_);
        event(0, "initial");

        // Iteration guard: every loop turn either emits an action, pops, or
        // inserts; pops and insertions are budget-bounded, so this cap only
        // trips on an internal planning bug.
        long guard = 8L * max_steps_ + 4096;
        // A healthy run emits an action after at most a short burst of pops
        // and insertions (bounded by stack depth plus nesting). A planner
        // stuck re-inserting the same bundle never emits, so cut it off long
        // before the full guard: these instances are rejected either way, and
        // the cap makes the rejection cheap.
        constexpr int kNoEmitCap = 1024;
        int idle = 0;
        while (true) {
            if (guard-- <= 0 || idle > kNoEmitCap) {
                mark_fail("no progress");
                break;
            }
            if (tracker_.success()) {
                trace_.success = true;
                // Subgoals still pending at success never pop on their own;
                // the full upfront decomposition includes them, top first. A
                // replay regains success before reaching any stale leftovers.
                if (opts_.record_anticipated)
                    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
                        anticipate_pop(*it);
                break;
            }
            if (static_cast<int>(trace_.actions.size()) >= max_steps_) {
                mark_fail("step budget exhausted");
                break;
            }
            if (stack_.empty()) {
                mark_fail("subgoal stack depleted without success");
                break;
            }
            std::size_t emitted = trace_.actions.size();
            if (!process_top()) break;  // marks its own failure
            idle = trace_.actions.size() == emitted ? idle + 1 : 0;
        }
        trace_.steps = static_cast<int>(trace_.actions.size());
        return std::move(trace_);
    }

private:
    // -------------------------------------------------- stack plumbing

    void event(int, const char*) {
        if (opts_.record_events) {
            int step = static_cast<int>(trace_.actions.size());
            trace_.events.push_back(StackEvent{step, repr(stack_)});
        }
    }

    void mark_fail(const std::string& why) {
        trace_.success = false;
        trace_.failure_reason = why;
    }

    void pop(bool completed) {
        if (completed && opts_.record_anticipated) anticipate_pop(stack_.back());
        stack_.pop_back();
        event(0, "pop");
    }

    // Push a bundle given in execution order (first element executes first).
    // Returns false when the addition budget cannot cover it.
    bool insert(const std::vector<Subgoal>& exec_order) {
        int n = static_cast<int>(exec_order.size());
        if (trace_.added_subgoals + n > budget_) {
            failed_insert_ = true;
            return false;
        }
        trace_.added_subgoals += n;
        if (opts_.record_anticipated)
            trace_.anticipated.push_back(Subgoal::go_coord(w_.front_cell(), NavMode::Face));
        for (auto it = exec_order.rbegin(); it != exec_order.rend(); ++it) stack_.push_back(*it);
        event(0, "insert");
        return true;
    }

    // Anticipated list: what a fully informed planner would have written down
    // up front. Completed subgoals append themselves in execution order, with
    // navigation targets frozen to the coordinates they completed against.
    void anticipate_pop(const Subgoal& s) {
        if (s.kind != SubKind::GoNextTo) {
            trace_.anticipated.push_back(s);
            return;
        }
        Coord c{};
        switch (s.mode) {
            case NavMode::Face:
            case NavMode::DropAdjacent:
                c = w_.front_cell();
                break;
            case NavMode::Adjacent: {
                auto ts = targets_of(s);
                bool found = false;
                for (Coord t : ts)
                    if (is_adjacent(w_.agent.pos, t)) {
                        c = t;
                        found = true;
                        break;
                    }
                if (!found) return;
                break;
            }
            case NavMode::Onto:
                c = w_.agent.pos;
                break;
        }
        trace_.anticipated.push_back(Subgoal::go_coord(c, NavMode::Face));
    }

    void emit(Action a) {
        bool ok = apply(w_, a);
        trace_.actions.push_back(a);
        trace_.states.push_back(w_);
        tracker_.observe(w_, static_cast<int>(trace_.actions.size()));
        if (!ok) illegal_emit_ = true;
    }

    // -------------------------------------------------- target resolution

    std::vector<Coord> targets_of(const Subgoal& s) const {
        std::vector<Coord> out;
        if (s.coord) {
            out.push_back(*s.coord);
        } else if (s.desc) {
            // Identity is fixed against the episode's initial state (the
            // mission's frame of reference); positions are current.
            for (int id : match_ids(start_, *s.desc))
                if (const Obj* o = w_.object_by_id(id)) out.push_back(o->pos);
        }
        return out;
    }

    bool satisfied(const Subgoal& s, const std::vector<Coord>& targets) const {
        switch (s.mode) {
            case NavMode::Adjacent:
                for (Coord t : targets)
                    if (is_adjacent(w_.agent.pos, t)) return true;
                return false;
            case NavMode::Face: {
                Coord f = w_.front_cell();
                for (Coord t : targets)
                    if (f == t) return true;
                return false;
            }
            case NavMode::DropAdjacent: {
                Coord f = w_.front_cell();
                if (!w_.free_cell(f)) return false;
                for (Coord t : targets)
                    if (is_adjacent(f, t)) return true;
                return false;
            }
            case NavMode::Onto:
                for (Coord t : targets)
                    if (w_.agent.pos == t) return true;
                return false;
        }
        return false;
    }

    // -------------------------------------------------- insertions

    std::optional<Coord> free_cell_near(Coord from, std::vector<Coord> exclude) {
        return nav::nearest_free_cell(w_, from, exclude);
    }

    // Nearest key of the given color by cell distance from the agent,
    // searching through soft cells the same way relaxed planning does.
    std::optional<Coord> nearest_key(Color color) const {
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(w_.width) * w_.height, 0);
        std::vector<Coord> queue{w_.agent.pos};
        seen[static_cast<std::size_t>(w_.agent.pos.y) * w_.width + w_.agent.pos.x] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            Coord c = queue[head];
            const Obj* o = w_.object_at(c);
            if (o && o->kind == Kind::Key && o->color == color) return c;
            for (int d = 0; d < kDirCount; ++d) {
                Coord n{c.x + kDirDx[d], c.y + kDirDy[d]};
                if (!w_.in_bounds(n) || w_.is_wall(n)) continue;
                auto idx = static_cast<std::size_t>(n.y) * w_.width + n.x;
                if (seen[idx]) continue;
                seen[idx] = 1;
                queue.push_back(n);
            }
        }
        return std::nullopt;
    }

    bool carrying_key(Color color) const {
        return w_.agent.carrying && w_.agent.carrying->kind == Kind::Key &&
               w_.agent.carrying->color == color;
    }

    // Locked door at cell `door` with no usable key in hand: fetch the
    // nearest matching key, return, open, then shed the key nearby. A carried
    // non-key object is stashed first and re-picked afterward so later Drop
    // subgoals stay meaningful.
    bool insert_key_fetch(Coord door, Color color, const std::vector<Coord>& path) {
        auto key = nearest_key(color);
        if (!key) {
            fail_reason_ = "locked door with no matching key on the grid";
            return false;
        }
        std::vector<Coord> excl = path;
        excl.push_back(door);
        excl.push_back(*key);
        auto keydrop = free_cell_near(door, excl);
        if (!keydrop) {
            fail_reason_ = "no free cell to shed the key";
            return false;
        }
        std::vector<Subgoal> exec;
        std::optional<Coord> stash;
        if (w_.agent.carrying) {
            excl.push_back(*keydrop);
            stash = free_cell_near(w_.agent.pos, excl);
            if (!stash) {
                fail_reason_ = "no free cell to stash the carried object";
                return false;
            }
            exec.push_back(Subgoal::go_coord(*stash, NavMode::Face));
            exec.push_back(Subgoal::drop());
        }
        exec.push_back(Subgoal::go_coord(*key, NavMode::Face));
        exec.push_back(Subgoal::pickup());
        exec.push_back(Subgoal::go_coord(door, NavMode::Face));
        exec.push_back(Subgoal::open());
        exec.push_back(Subgoal::go_coord(*keydrop, NavMode::Face));
        exec.push_back(Subgoal::drop());
        if (stash) {
            exec.push_back(Subgoal::go_coord(*stash, NavMode::Face));
            exec.push_back(Subgoal::pickup());
        }
        return insert(exec);
    }

    // Portable object blocking the path at cell `block`: carry it to the
    // nearest free cell off the path. With a full hand the carried object is
    // stashed and re-picked around the relocation.
    bool insert_relocation(Coord block, const std::vector<Coord>& path) {
        trace_.used_relocation = true;
        std::vector<Coord> excl = path;
        excl.push_back(block);
        auto dump = free_cell_near(block, excl);
        if (!dump) {
            fail_reason_ = "no free cell to relocate the blocking object";
            return false;
        }
        std::vector<Subgoal> exec;
        if (w_.agent.carrying) {
            excl.push_back(*dump);
            auto stash = free_cell_near(w_.agent.pos, excl);
            if (!stash) {
                fail_reason_ = "no free cell to stash the carried object";
                return false;
            }
            exec.push_back(Subgoal::go_coord(*stash, NavMode::Face));
            exec.push_back(Subgoal::drop());
            exec.push_back(Subgoal::go_coord(block, NavMode::Face));
            exec.push_back(Subgoal::pickup());
            exec.push_back(Subgoal::go_coord(*dump, NavMode::Face));
            exec.push_back(Subgoal::drop());
            exec.push_back(Subgoal::go_coord(*stash, NavMode::Face));
            exec.push_back(Subgoal::pickup());
        } else {
            exec.push_back(Subgoal::pickup());
            exec.push_back(Subgoal::go_coord(*dump, NavMode::Face));
            exec.push_back(Subgoal::drop());
        }
        return insert(exec);
    }

    // -------------------------------------------------- subgoal execution

    // One iteration of work on the top subgoal. Returns false to end the run
    // (budget exceeded, unreachable target, or an internal fault).
    bool process_top() {
        Subgoal top = stack_.back();
        bool ok = true;
        switch (top.kind) {
            case SubKind::Drop: ok = do_drop(); break;
            case SubKind::Pickup: ok = do_pickup(); break;
            case SubKind::Open: ok = do_open(); break;
            case SubKind::GoNextTo: ok = do_go(top); break;
        }
        if (illegal_emit_) {
            mark_fail("internal: emitted an ineffective action");
            return false;
        }
        if (!ok) {
            if (failed_insert_) mark_fail("addition budget exceeded");
            else mark_fail(fail_reason_.empty() ? "unresolvable subgoal" : fail_reason_);
            return false;
        }
        return true;
    }

    bool do_drop() {
        if (!w_.agent.carrying) {
            pop(false);
            return true;
        }
        if (w_.free_cell(w_.front_cell())) {
            emit(Action::Drop);
            pop(true);
            return true;
        }
        auto cell = free_cell_near(w_.agent.pos, {});
        if (!cell) {
            fail_reason_ = "no free cell to drop onto";
            return false;
        }
        return insert({Subgoal::go_coord(*cell, NavMode::Face)});
    }

    bool do_pickup() {
        Coord f = w_.front_cell();
        const Obj* o = w_.in_bounds(f) ? w_.object_at(f) : nullptr;
        if (w_.agent.carrying) {
            // Hand must be freed, then the original front cell faced again.
            auto stash = free_cell_near(w_.agent.pos, {f});
            if (!stash) {
                fail_reason_ = "no free cell to stash the carried object";
                return false;
            }
            return insert({Subgoal::go_coord(*stash, NavMode::Face), Subgoal::drop(),
                           Subgoal::go_coord(f, NavMode::Face)});
        }
        if (o && o->portable()) {
            emit(Action::Pickup);
            pop(true);
            return true;
        }
        pop(false);  // nothing to pick up; vacuous
        return true;
    }

    bool do_open() {
        Coord f = w_.front_cell();
        const Obj* o = w_.in_bounds(f) ? w_.object_at(f) : nullptr;
        if (!o || o->kind != Kind::Door) {
            pop(false);
            return true;
        }
        switch (o->door) {
            case DoorState::Open:
                pop(false);
                return true;
            case DoorState::Closed:
                emit(Action::Toggle);
                pop(true);
                return true;
            case DoorState::Locked:
                if (carrying_key(o->color)) {
                    emit(Action::Toggle);
                    pop(true);
                    return true;
                }
                return insert_key_fetch(f, o->color, {});
        }
        return true;
    }

    bool do_go(const Subgoal& top) {
        auto targets = targets_of(top);
        if (targets.empty() || (top.coord && !w_.in_bounds(*top.coord))) {
            fail_reason_ = "navigation target does not exist";
            return false;
        }
        if (satisfied(top, targets)) {
            pop(true);
            return true;
        }
        auto plan = nav::plan(w_, targets, top.mode);
        if (!plan.found) {
            fail_reason_ = "navigation target unreachable";
            return false;
        }
        Action first = plan.actions.empty() ? Action::Forward : plan.actions.front();
        if (!plan.relaxed || first != Action::Forward ||
            w_.traversable(w_.front_cell())) {
            emit(first);
            return true;
        }
        // Forward into a soft cell: resolve it instead of moving.
        Coord f = w_.front_cell();
        const Obj* o = w_.object_at(f);
        auto cells = nav::path_cells(w_, plan.actions);
        if (o && o->kind == Kind::Door) {
            if (o->door == DoorState::Locked && !carrying_key(o->color))
                return insert_key_fetch(f, o->color, cells);
            return insert({Subgoal::open()});
        }
        if (o && o->portable()) return insert_relocation(f, cells);
        fail_reason_ = "internal: blocked by an unexpected cell";
        return false;
    }

    // -------------------------------------------------- members

    World start_;
    Mission mission_;
    SolveOptions opts_;
    World w_;
    SuccessTracker tracker_;
    std::vector<Subgoal> stack_;
    Trace trace_;
    int budget_ = 0;
    int max_steps_ = 0;
    bool failed_insert_ = false;
    bool illegal_emit_ = false;
    std::string fail_reason_;
};

inline Trace solve(const World& start, const Mission& mission, const SolveOptions& opts = {}) {
    return Solver(start, mission, opts).run();
}

}  // namespace textgrid
