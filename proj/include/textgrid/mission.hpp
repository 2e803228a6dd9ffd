#pragma once
// mission.hpp - the instruction grammar and the success checker.
//
// Grammar shape (a compositional English subset):
//   Mission  := Group | Group "then" Group | Group "after you" Group
//   Group    := Clause | Clause "and" Clause
//   Clause   := go to D | open D | pick up D | put D next to D
//   D        := article [color] kind [location qualifier]
//
// "A then B" orders A before B, "A after you B" orders B before A, "and"
// imposes no order. Location qualifiers are half-planes relative to the
// agent's pose at mission authoring time (the start of the episode).

#include <optional>
#include <string>
#include <vector>

#include "textgrid/grid.hpp"

namespace textgrid {

// ============================================================ descriptors

enum class Qual { InFront, Behind, OnLeft, OnRight };
inline constexpr const char* kQualPhrase[4] = {"in front of you", "behind you",
                                               "on your left", "on your right"};
inline constexpr const char* kQualName[4] = {"front", "behind", "left", "right"};

struct Desc {
    Kind kind = Kind::Ball;
    std::optional<Color> color;
    std::optional<Qual> qual;
    bool operator==(const Desc&) const = default;
};

// Half-plane test against a fixed reference pose. Forward vector f, right
// vector r = f rotated a quarter turn clockwise (screen coordinates, y down).
inline bool in_half_plane(Coord obj, Coord ref, int dir, Qual q) {
    int ox = obj.x - ref.x, oy = obj.y - ref.y;
    int fx = kDirDx[dir], fy = kDirDy[dir];
    int rx = -fy, ry = fx;
    switch (q) {
        case Qual::InFront: return ox * fx + oy * fy > 0;
        case Qual::Behind: return ox * fx + oy * fy < 0;
        case Qual::OnRight: return ox * rx + oy * ry > 0;
        case Qual::OnLeft: return ox * rx + oy * ry < 0;
    }
    return false;
}

// Objects matching a descriptor, evaluated against a reference state: kind
// and color directly, qualifier against the reference agent pose. Returns
// stable object ids so later checks can follow objects as they move.
inline std::vector<int> match_ids(const World& ref, const Desc& d) {
    std::vector<int> out;
    for (const Obj& o : ref.objects) {
        if (o.kind != d.kind) continue;
        if (d.color && o.color != *d.color) continue;
        if (d.qual && !in_half_plane(o.pos, ref.agent.pos, ref.agent.dir, *d.qual)) continue;
        out.push_back(o.id);
    }
    return out;
}

// ============================================================ clauses

enum class Verb { GoTo, Open, PickUp, PutNext };

struct Clause {
    Verb verb = Verb::GoTo;
    Desc a;
    Desc b;  // PutNext only: put a next to b
};

enum class Conn { And, Then, AfterYou };

struct Mission {
    std::vector<Clause> clauses;
    std::vector<Conn> conns;  // conns[i] joins clauses[i] and clauses[i+1]
    std::string surface;

    bool valid() const {
        if (clauses.empty()) return true;
        if (conns.size() != clauses.size() - 1) return false;
        int seq = 0;
        for (Conn c : conns)
            if (c != Conn::And) ++seq;
        return seq <= 1;  // at most one sequencing connector
    }
};

// ============================================================ rendering

inline std::string desc_phrase(const World& ref, const Desc& d) {
    std::string out = match_ids(ref, d).size() == 1 ? "the " : "a ";
    if (d.color) {
        out += to_string(*d.color);
        out += ' ';
    }
    out += to_string(d.kind);
    if (d.qual) {
        out += ' ';
        out += kQualPhrase[static_cast<int>(*d.qual)];
    }
    return out;
}

inline std::string clause_phrase(const World& ref, const Clause& c) {
    switch (c.verb) {
        case Verb::GoTo: return "go to " + desc_phrase(ref, c.a);
        case Verb::Open: return "open " + desc_phrase(ref, c.a);
        case Verb::PickUp: return "pick up " + desc_phrase(ref, c.a);
        case Verb::PutNext:
            return "put " + desc_phrase(ref, c.a) + " next to " + desc_phrase(ref, c.b);
    }
    return {};
}

inline std::string render(const World& ref, const Mission& m) {
    std::string out;
    for (std::size_t i = 0; i < m.clauses.size(); ++i) {
        if (i > 0) {
            switch (m.conns[i - 1]) {
                case Conn::And: out += " and "; break;
                case Conn::Then: out += ", then "; break;
                case Conn::AfterYou: out += " after you "; break;
            }
        }
        out += clause_phrase(ref, m.clauses[i]);
    }
    return out;
}

// ============================================================ test parser
// Inverse of render, used only to exercise the round-trip property. Accepts
// exactly the strings render can produce.

namespace detail {
inline bool eat(std::string_view& s, std::string_view word) {
    if (s.substr(0, word.size()) == word) {
        s.remove_prefix(word.size());
        return true;
    }
    return false;
}

inline std::optional<Desc> parse_desc(std::string_view& s) {
    Desc d;
    if (!eat(s, "the ") && !eat(s, "a ")) return std::nullopt;
    for (int c = 0; c < kColorCount; ++c) {
        std::string w = std::string(kColorName[c]) + " ";
        if (eat(s, w)) {
            d.color = static_cast<Color>(c);
            break;
        }
    }
    bool kind_found = false;
    for (int k = 0; k < 4; ++k) {
        if (eat(s, kKindName[k])) {
            d.kind = static_cast<Kind>(k);
            kind_found = true;
            break;
        }
    }
    if (!kind_found) return std::nullopt;
    for (int q = 0; q < 4; ++q) {
        std::string w = std::string(" ") + kQualPhrase[q];
        if (eat(s, w)) {
            d.qual = static_cast<Qual>(q);
            break;
        }
    }
    return d;
}

inline std::optional<Clause> parse_clause(std::string_view& s) {
    Clause c;
    if (eat(s, "go to ")) {
        c.verb = Verb::GoTo;
    } else if (eat(s, "open ")) {
        c.verb = Verb::Open;
    } else if (eat(s, "pick up ")) {
        c.verb = Verb::PickUp;
    } else if (eat(s, "put ")) {
        c.verb = Verb::PutNext;
        auto a = parse_desc(s);
        if (!a || !eat(s, " next to ")) return std::nullopt;
        auto b = parse_desc(s);
        if (!b) return std::nullopt;
        c.a = *a;
        c.b = *b;
        return c;
    } else {
        return std::nullopt;
    }
    auto a = parse_desc(s);
    if (!a) return std::nullopt;
    c.a = *a;
    return c;
}
}  // namespace detail

inline std::optional<Mission> parse_mission(std::string_view s) {
    Mission m;
    auto first = detail::parse_clause(s);
    if (!first) return std::nullopt;
    m.clauses.push_back(*first);
    while (!s.empty()) {
        Conn conn;
        if (detail::eat(s, " and ")) {
            conn = Conn::And;
        } else if (detail::eat(s, ", then ")) {
            conn = Conn::Then;
        } else if (detail::eat(s, " after you ")) {
            conn = Conn::AfterYou;
        } else {
            return std::nullopt;
        }
        auto c = detail::parse_clause(s);
        if (!c) return std::nullopt;
        m.conns.push_back(conn);
        m.clauses.push_back(*c);
    }
    if (!m.valid()) return std::nullopt;
    return m;
}

// ============================================================ success

// Success uses done-index semantics over the episode history. Each clause is
// done at the earliest step where its condition held, but no earlier than its
// activation step. Sequencing connectors split the clause list into two
// groups; the group ordered second activates when every clause of the first
// group is done. Descriptor match sets are fixed against the initial state;
// conditions then follow the matched objects' current positions.
//
//   go to D     agent cardinally adjacent to a matched object on the grid
//   open D      a matched door is open
//   pick up D   a matched object is being carried
//   put A B     a matched A and a distinct matched B sit on adjacent cells

class SuccessTracker {
public:
    SuccessTracker(const Mission& m, const World& initial) : mission_(m) {
        for (const Clause& c : m.clauses) {
            matches_a_.push_back(match_ids(initial, c.a));
            matches_b_.push_back(match_ids(initial, c.b));
            done_.push_back(-1);
        }
        // Group boundary: index of the first clause of the second group, or
        // clause count if there is no sequencing connector.
        boundary_ = m.clauses.size();
        first_group_second_ = false;
        for (std::size_t i = 0; i < m.conns.size(); ++i) {
            if (m.conns[i] == Conn::Then) {
                boundary_ = i + 1;
            } else if (m.conns[i] == Conn::AfterYou) {
                boundary_ = i + 1;
                first_group_second_ = true;  // textual first group runs second
            }
        }
        observe(initial, 0);
    }

    // Feed the state reached at trace index t (call in order, starting at 0).
    void observe(const World& w, int t) {
        // Pass 1: clauses of the group that runs first.
        for (std::size_t i = 0; i < mission_.clauses.size(); ++i)
            if (runs_first(i) && done_[i] < 0 && holds(w, i)) done_[i] = t;
        int gate = gate_step();
        if (gate < 0) return;
        for (std::size_t i = 0; i < mission_.clauses.size(); ++i)
            if (!runs_first(i) && done_[i] < 0 && t >= gate && holds(w, i)) done_[i] = t;
    }

    bool success() const {
        for (int d : done_)
            if (d < 0) return false;
        return true;
    }

private:
    bool runs_first(std::size_t i) const {
        bool in_first_group = i < boundary_;
        return first_group_second_ ? !in_first_group : in_first_group;
    }

    // Step at which the second-running group activates: all first-running
    // clauses done. -1 while the first group is incomplete.
    int gate_step() const {
        int gate = 0;
        for (std::size_t i = 0; i < done_.size(); ++i) {
            if (!runs_first(i)) continue;
            if (done_[i] < 0) return -1;
            gate = std::max(gate, done_[i]);
        }
        return gate;
    }

    bool holds(const World& w, std::size_t i) const {
        const Clause& c = mission_.clauses[i];
        switch (c.verb) {
            case Verb::GoTo:
                for (int id : matches_a_[i])
                    if (const Obj* o = w.object_by_id(id))
                        if (is_adjacent(w.agent.pos, o->pos)) return true;
                return false;
            case Verb::Open:
                for (int id : matches_a_[i])
                    if (const Obj* o = w.object_by_id(id))
                        if (o->kind == Kind::Door && o->door == DoorState::Open) return true;
                return false;
            case Verb::PickUp:
                if (!w.agent.carrying) return false;
                for (int id : matches_a_[i])
                    if (w.agent.carrying->id == id) return true;
                return false;
            case Verb::PutNext:
                for (int ia : matches_a_[i]) {
                    const Obj* oa = w.object_by_id(ia);
                    if (!oa) continue;
                    for (int ib : matches_b_[i]) {
                        if (ib == ia) continue;
                        const Obj* ob = w.object_by_id(ib);
                        if (ob && is_adjacent(oa->pos, ob->pos)) return true;
                    }
                }
                return false;
        }
        return false;
    }

    Mission mission_;
    std::vector<std::vector<int>> matches_a_;
    std::vector<std::vector<int>> matches_b_;
    std::vector<int> done_;
    std::size_t boundary_;
    bool first_group_second_;
};

inline bool check_success(const Mission& m, const std::vector<World>& trace) {
    if (trace.empty()) return m.clauses.empty();
    SuccessTracker t(m, trace.front());
    for (std::size_t i = 1; i < trace.size(); ++i) t.observe(trace[i], static_cast<int>(i));
    return t.success();
}

// A descriptor that matches no object makes the mission ill-posed; surfaced
// at generation time.
inline bool well_posed(const Mission& m, const World& initial) {
    for (const Clause& c : m.clauses) {
        if (match_ids(initial, c.a).empty()) return false;
        if (c.verb == Verb::PutNext && match_ids(initial, c.b).empty()) return false;
    }
    return true;
}

}  // namespace textgrid
