#pragma once
// Shared test fixtures: tiny world builders and one fully pinned reference
// environment used by the formatter byte-stability tests.

#include "textgrid/grid.hpp"
#include "textgrid/mission.hpp"

namespace fixtures {

using namespace textgrid;

inline World one_room(int size = 8) { return World::rooms(1, 1, size); }

inline int put(World& w, Kind k, Color c, int x, int y) {
    return w.add_object(k, c, Coord{x, y}).id;
}

inline int put_door(World& w, Color c, int x, int y, DoorState st) {
    return w.add_door(Coord{x, y}, c, st).id;
}

// A 3x3-room, room size 8 (22x22) environment with 29 objects, agent at
// (4, 12) facing north, mission with all four verbs, a qualifier, and a
// sequencing connector. Object insertion order is scanline order so listing
// order matches insertion order.
inline World reference_world() {
    World w = World::rooms(3, 3, 8);
    put(w, Kind::Box, Color::Yellow, 5, 1);
    put_door(w, Color::Grey, 14, 1, DoorState::Closed);
    put(w, Kind::Box, Color::Purple, 4, 2);
    put(w, Kind::Key, Color::Red, 13, 2);
    put(w, Kind::Box, Color::Purple, 20, 3);
    put(w, Kind::Key, Color::Grey, 1, 6);
    put(w, Kind::Key, Color::Yellow, 5, 6);
    put_door(w, Color::Grey, 7, 6, DoorState::Closed);
    put_door(w, Color::Yellow, 5, 7, DoorState::Closed);
    put_door(w, Color::Blue, 9, 7, DoorState::Closed);
    put(w, Kind::Box, Color::Yellow, 1, 8);
    put(w, Kind::Box, Color::Yellow, 3, 8);
    put(w, Kind::Ball, Color::Grey, 4, 10);
    put(w, Kind::Ball, Color::Red, 1, 12);
    put(w, Kind::Box, Color::Blue, 3, 12);
    put_door(w, Color::Grey, 7, 12, DoorState::Closed);
    put(w, Kind::Key, Color::Yellow, 10, 12);
    put(w, Kind::Key, Color::Grey, 1, 13);
    put(w, Kind::Key, Color::Grey, 9, 13);
    put_door(w, Color::Yellow, 3, 14, DoorState::Closed);
    put_door(w, Color::Red, 10, 14, DoorState::Closed);
    put_door(w, Color::Yellow, 20, 14, DoorState::Locked);
    put(w, Kind::Key, Color::Purple, 16, 15);
    put(w, Kind::Box, Color::Purple, 12, 16);
    put_door(w, Color::Grey, 7, 17, DoorState::Closed);
    put(w, Kind::Ball, Color::Purple, 15, 17);
    put(w, Kind::Ball, Color::Grey, 20, 17);
    put(w, Kind::Ball, Color::Blue, 11, 18);
    put_door(w, Color::Yellow, 14, 19, DoorState::Closed);
    w.agent.pos = Coord{4, 12};
    w.agent.dir = 3;  // north
    return w;
}

inline Mission reference_mission() {
    Mission m;
    Clause c0;
    c0.verb = Verb::PickUp;
    c0.a = Desc{Kind::Ball, Color::Grey, {}};
    Clause c1;
    c1.verb = Verb::GoTo;
    c1.a = Desc{Kind::Ball, {}, Qual::InFront};
    Clause c2;
    c2.verb = Verb::GoTo;
    c2.a = Desc{Kind::Box, {}, {}};
    Clause c3;
    c3.verb = Verb::PutNext;
    c3.a = Desc{Kind::Box, Color::Purple, {}};
    c3.b = Desc{Kind::Door, Color::Red, {}};
    m.clauses = {c0, c1, c2, c3};
    m.conns = {Conn::And, Conn::Then, Conn::And};
    return m;
}

}  // namespace fixtures
