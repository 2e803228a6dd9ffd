#pragma once
// grid.hpp - the world model: cells, objects, agent pose, and the transition
// function for the six actions.
//
// Conventions fixed here and relied on everywhere else:
//   * (0,0) is the top-left corner; x grows east, y grows south.
//   * Directions are indices 0..3 = east, south, west, north. A right turn
//     maps i to (i+1)%4, a left turn to (i+3)%4.
//   * The transition function is total: an illegal action changes nothing
//     except step_count, and the step result carries a validity flag.
//   * A grid of R x R rooms of size S (walls included) measures
//     R*(S-1)+1 cells per axis; adjacent rooms share their wall line.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textgrid/rng.hpp"

namespace textgrid {

using json = nlohmann::ordered_json;

// ============================================================ basic values

struct Coord {
    int x = 0;
    int y = 0;
    bool operator==(const Coord&) const = default;
};

inline int manhattan(Coord a, Coord b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

inline bool is_adjacent(Coord a, Coord b) { return manhattan(a, b) == 1; }

inline constexpr int kDirCount = 4;
inline constexpr int kDirDx[kDirCount] = {1, 0, -1, 0};
inline constexpr int kDirDy[kDirCount] = {0, 1, 0, -1};
inline constexpr const char* kDirName[kDirCount] = {"east", "south", "west", "north"};

inline int turn_right(int dir) { return (dir + 1) % kDirCount; }
inline int turn_left(int dir) { return (dir + 3) % kDirCount; }

enum class Color { Red, Green, Blue, Purple, Yellow, Grey };
inline constexpr int kColorCount = 6;
inline constexpr const char* kColorName[kColorCount] = {"red",    "green",  "blue",
                                                        "purple", "yellow", "grey"};
inline const char* to_string(Color c) { return kColorName[static_cast<int>(c)]; }

enum class Kind { Key, Ball, Box, Door };
inline constexpr const char* kKindName[4] = {"key", "ball", "box", "door"};
inline const char* to_string(Kind k) { return kKindName[static_cast<int>(k)]; }

// Closed means closed but unlocked. Doors forced open by the agent revert to
// Closed when toggled again.
enum class DoorState { Open, Closed, Locked };

enum class Action { Left, Right, Forward, Pickup, Drop, Toggle };
inline constexpr int kActionCount = 6;
inline constexpr const char* kActionName[kActionCount] = {"left",   "right", "forward",
                                                          "pickup", "drop",  "toggle"};
inline const char* to_string(Action a) { return kActionName[static_cast<int>(a)]; }

inline std::optional<Action> action_from_string(std::string_view s) {
    for (int i = 0; i < kActionCount; ++i)
        if (s == kActionName[i]) return static_cast<Action>(i);
    return std::nullopt;
}

// ============================================================ objects

struct Obj {
    int id = 0;  // stable identity across moves and pickups
    Kind kind = Kind::Ball;
    Color color = Color::Red;
    Coord pos{};
    DoorState door = DoorState::Closed;  // doors only

    bool portable() const { return kind != Kind::Door; }
};

// ============================================================ agent + world

struct Agent {
    Coord pos{};
    int dir = 0;
    std::optional<Obj> carrying;  // pos field is stale while carried
};

struct World {
    int rooms_x = 1;
    int rooms_y = 1;
    int room_size = 8;  // walls included
    int width = 8;
    int height = 8;
    std::vector<std::uint8_t> wall;  // width*height, 1 = wall cell
    std::vector<Obj> objects;
    Agent agent;
    int step_count = 0;
    int next_obj_id = 1;

    static World rooms(int rx, int ry, int size) {
        World w;
        w.rooms_x = rx;
        w.rooms_y = ry;
        w.room_size = size;
        w.width = rx * (size - 1) + 1;
        w.height = ry * (size - 1) + 1;
        w.wall.assign(static_cast<std::size_t>(w.width) * w.height, 0);
        for (int y = 0; y < w.height; ++y)
            for (int x = 0; x < w.width; ++x)
                if (x % (size - 1) == 0 || y % (size - 1) == 0)
                    w.wall[static_cast<std::size_t>(y) * w.width + x] = 1;
        return w;
    }

    bool in_bounds(Coord c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
    }
    bool is_wall(Coord c) const {
        return wall[static_cast<std::size_t>(c.y) * width + c.x] != 0;
    }

    const Obj* object_at(Coord c) const {
        for (const Obj& o : objects)
            if (o.pos == c) return &o;
        return nullptr;
    }
    Obj* object_at(Coord c) {
        for (Obj& o : objects)
            if (o.pos == c) return &o;
        return nullptr;
    }
    const Obj* object_by_id(int id) const {
        for (const Obj& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }
    Obj* object_by_id(int id) {
        for (Obj& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }

    // Carving a doorway: the wall cell is cleared and a door object placed on
    // it, keeping the one-occupant-per-cell invariant.
    Obj& add_door(Coord c, Color color, DoorState st) {
        wall[static_cast<std::size_t>(c.y) * width + c.x] = 0;
        objects.push_back(Obj{next_obj_id++, Kind::Door, color, c, st});
        return objects.back();
    }
    Obj& add_object(Kind k, Color color, Coord c) {
        objects.push_back(Obj{next_obj_id++, k, color, c, DoorState::Closed});
        return objects.back();
    }

    Coord front_cell() const {
        return Coord{agent.pos.x + kDirDx[agent.dir], agent.pos.y + kDirDy[agent.dir]};
    }

    // A cell the agent may stand on right now.
    bool traversable(Coord c) const {
        if (!in_bounds(c) || is_wall(c)) return false;
        const Obj* o = object_at(c);
        return o == nullptr || (o->kind == Kind::Door && o->door == DoorState::Open);
    }

    bool free_cell(Coord c) const {  // droppable: empty floor
        return in_bounds(c) && !is_wall(c) && object_at(c) == nullptr;
    }

    void remove_object(int id) {
        std::erase_if(objects, [id](const Obj& o) { return o.id == id; });
    }
};

// ============================================================ transition

// Applies one action in place. Returns whether the action had an effect;
// illegal actions only advance step_count.
inline bool apply(World& w, Action a) {
    ++w.step_count;
    switch (a) {
        case Action::Left:
            w.agent.dir = turn_left(w.agent.dir);
            return true;
        case Action::Right:
            w.agent.dir = turn_right(w.agent.dir);
            return true;
        case Action::Forward: {
            Coord f = w.front_cell();
            if (!w.traversable(f)) return false;
            w.agent.pos = f;
            return true;
        }
        case Action::Pickup: {
            Coord f = w.front_cell();
            if (w.agent.carrying || !w.in_bounds(f)) return false;
            Obj* o = w.object_at(f);
            if (!o || !o->portable()) return false;
            w.agent.carrying = *o;
            w.remove_object(o->id);
            return true;
        }
        case Action::Drop: {
            Coord f = w.front_cell();
            if (!w.agent.carrying || !w.free_cell(f)) return false;
            Obj dropped = *w.agent.carrying;
            dropped.pos = f;
            w.objects.push_back(dropped);
            w.agent.carrying.reset();
            return true;
        }
        case Action::Toggle: {
            Coord f = w.front_cell();
            if (!w.in_bounds(f)) return false;
            Obj* o = w.object_at(f);
            if (!o) return false;
            if (o->kind == Kind::Door) {
                switch (o->door) {
                    case DoorState::Open:
                        o->door = DoorState::Closed;
                        return true;
                    case DoorState::Closed:
                        o->door = DoorState::Open;
                        return true;
                    case DoorState::Locked:
                        // Unlocking needs the matching key in hand; the key
                        // is retained, not consumed.
                        if (w.agent.carrying && w.agent.carrying->kind == Kind::Key &&
                            w.agent.carrying->color == o->color) {
                            o->door = DoorState::Open;
                            return true;
                        }
                        return false;
                }
                return false;
            }
            if (o->kind == Kind::Box) {  // boxes are empty; toggling destroys them
                w.remove_object(o->id);
                return true;
            }
            return false;
        }
    }
    return false;
}

inline std::pair<World, bool> step(const World& w, Action a) {
    World next = w;
    bool ok = apply(next, a);
    return {next, ok};
}

inline int default_step_budget(const World& w) { return 8 * w.width * w.height; }

// ============================================================ serialization

inline json coord_json(Coord c) { return json::array({c.x, c.y}); }

inline Coord coord_from_json(const json& j) {
    return Coord{j.at(0).get<int>(), j.at(1).get<int>()};
}

inline json agent_state_json(const Agent& a) {
    return json{{"position", coord_json(a.pos)}, {"direction", a.dir}};
}

inline json actions_json(const std::vector<Action>& as) {
    json arr = json::array();
    for (Action a : as) arr.push_back(to_string(a));
    return arr;
}

inline std::vector<Action> actions_from_json(const json& j) {
    std::vector<Action> out;
    for (const auto& e : j) {
        auto a = action_from_string(e.get<std::string>());
        if (!a) throw std::runtime_error("unknown action: " + e.get<std::string>());
        out.push_back(*a);
    }
    return out;
}

}  // namespace textgrid
