#pragma once

// Prompt-facing renderings of an environment. Three styles share the same
// facts; the structured style is the dataset default and the only one with a
// parser, which exists so round trips can be tested.

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "textgrid/grid.hpp"

namespace textgrid {

enum class FormatStyle { Narrative, Structured, Json };

struct FormatOptions {
    // Door open/closed state is omitted by default: initial instances only
    // ever contain closed or locked doors, so "locked=" carries the full
    // state. Turning this on appends "open=True/False" for mid-episode use.
    bool emit_open_state = false;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_no, const std::string& why)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + why),
          line(line_no) {}
};

namespace fmt_detail {

inline std::string pos_str(Coord c) {
    return "(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
}

inline std::string dims_str(int a, int b) {
    return std::to_string(a) + "x" + std::to_string(b);
}

inline std::vector<const Obj*> reading_order(const World& w) {
    std::vector<const Obj*> out;
    out.reserve(w.objects.size());
    for (const Obj& o : w.objects) out.push_back(&o);
    std::sort(out.begin(), out.end(), [](const Obj* a, const Obj* b) {
        if (a->pos.y != b->pos.y) return a->pos.y < b->pos.y;
        return a->pos.x < b->pos.x;
    });
    return out;
}

inline const char* kRoomsSentences =
    "Rooms are separated by walls and might contain objects such as keys, balls, and "
    "boxes of different colors. Some walls, connecting two adjacent rooms, have doors. "
    "Some doors are unlocked, whereas others need to be unlocked with keys of the same "
    "color.";

inline const char* kActionsInline =
    "The agent can perform 6 actions: left (turn left), right (turn right), forward "
    "(move forward), pickup (pickup an object), drop (drop an object), and toggle "
    "(open/close a door or a box).";

inline const char* kPhysicsSentences =
    "Only the forward action changes the agent's position in the grid world. Turning "
    "left or right changes the agent's orientation only but not the position. The "
    "agent cannot move into a cell that is already occupied by an object, even if the "
    "object is one it is trying to interact with.";

inline const char* kCoordClause =
    "Using a coordinate system where the (0, 0) position is the top-left corner of "
    "the grid world, necessarily corresponding to a wall, the coordinates follow the "
    "format (x, y), with x denoting the horizontal position in the grid and y "
    "denoting the vertical position in the grid";

inline std::string door_state_suffix(const Obj& o, const FormatOptions& opts) {
    std::string s = ", locked=";
    s += o.door == DoorState::Locked ? "True" : "False";
    if (opts.emit_open_state) {
        s += ", open=";
        s += o.door == DoorState::Open ? "True" : "False";
    }
    return s;
}

inline std::string narrative(const World& w, const std::string& mission,
                             const FormatOptions& opts) {
    std::ostringstream out;
    out << "An agent in a grid world made of " << dims_str(w.rooms_x, w.rooms_y)
        << " rooms, each of size " << dims_str(w.room_size, w.room_size)
        << ", including the surrounding walls, meaning that effectively, each room is "
           "of size "
        << dims_str(w.room_size - 2, w.room_size - 2)
        << ". The total grid size is thus " << dims_str(w.width, w.height) << ". "
        << kRoomsSentences << " " << kActionsInline << " " << kPhysicsSentences << " "
        << kCoordClause << ", and the agent is initially placed at "
        << pos_str(w.agent.pos) << ", and is facing " << kDirName[w.agent.dir]
        << ", toward the " << pos_str(w.front_cell()) << " position.";
    auto objs = reading_order(w);
    if (!objs.empty()) {
        out << " There is ";
        for (std::size_t i = 0; i < objs.size(); ++i) {
            const Obj& o = *objs[i];
            if (i > 0) out << (i + 1 == objs.size() ? ", and " : ", ");
            if (o.kind == Kind::Door) {
                out << (o.door == DoorState::Locked ? "a locked " : "an unlocked ");
                if (opts.emit_open_state && o.door == DoorState::Open) out << "open ";
            } else {
                out << "a ";
            }
            out << to_string(o.color) << " " << to_string(o.kind) << " at position "
                << pos_str(o.pos);
        }
        out << ".";
    }
    out << " The agent's mission is '" << mission << ".'";
    return out.str();
}

inline std::string structured(const World& w, const std::string& mission,
                              const FormatOptions& opts) {
    std::ostringstream out;
    out << "An agent is in a grid world consisting of one or more rooms. All rooms in "
           "the same grid world are squares of identical size and are organized in a "
           "square grid layout. "
        << kRoomsSentences
        << " The agent can perform 6 actions:\n"
           "- left (turn left),\n"
           "- right (turn right),\n"
           "- forward (move forward),\n"
           "- pickup (pickup an object),\n"
           "- drop (drop an object),\n"
           "- toggle (open/close a door or a box).\n"
        << kPhysicsSentences << " " << kCoordClause
        << ".\n\nThese are the specifics regarding this environment:\n"
        << "- Number of rooms: " << dims_str(w.rooms_x, w.rooms_y) << "\n"
        << "- Size of each room (including walls): "
        << dims_str(w.room_size, w.room_size) << "\n"
        << "- Effective room size (excluding walls): "
        << dims_str(w.room_size - 2, w.room_size - 2) << "\n"
        << "- Total grid size: " << dims_str(w.width, w.height) << "\n"
        << "- Agent initial position: " << pos_str(w.agent.pos) << "\n"
        << "- Agent facing direction: " << kDirName[w.agent.dir] << " (toward "
        << pos_str(w.front_cell()) << ")\n"
        << "- Objects in environment:\n";
    for (const Obj* o : reading_order(w)) {
        out << "  - " << to_string(o->kind) << ", color=" << to_string(o->color)
            << ", position=" << pos_str(o->pos);
        if (o->kind == Kind::Door) out << door_state_suffix(*o, opts);
        out << "\n";
    }
    out << "- Mission: '" << mission << ".'";
    return out.str();
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

inline std::string json_style(const World& w, const std::string& mission,
                              const FormatOptions& opts) {
    std::string context =
        std::string(
            "An agent is in a grid world consisting of one or more rooms. All rooms "
            "in the same grid world are squares of identical size and are organized "
            "in a square grid layout. ") +
        kRoomsSentences + " " + kActionsInline + " " + kPhysicsSentences + " " +
        kCoordClause + ",\n\nThese are the specifics regarding this environment: \n\n";
    auto pair = [](int a, int b) {
        return "[" + std::to_string(a) + ", " + std::to_string(b) + "]";
    };
    std::ostringstream out;
    out << "{\n  \"context\": \"" << json_escape(context) << "\",\n"
        << "  \"config\": {\n"
        << "    \"num_rooms\": " << pair(w.rooms_x, w.rooms_y) << ",\n"
        << "    \"room_size_incl_walls\": " << pair(w.room_size, w.room_size) << ",\n"
        << "    \"room_size_excl_walls\": " << pair(w.room_size - 2, w.room_size - 2)
        << ",\n"
        << "    \"grid_size\": " << pair(w.width, w.height) << ",\n"
        << "    \"agent_initial_pos\": " << pair(w.agent.pos.x, w.agent.pos.y) << ",\n"
        << "    \"agent_front_pos\": " << pair(w.front_cell().x, w.front_cell().y)
        << ",\n"
        << "    \"agent_direction\": {\n"
        << "      \"index\": " << w.agent.dir << ",\n"
        << "      \"name\": \"" << kDirName[w.agent.dir] << "\"\n"
        << "    },\n";
    auto objs = reading_order(w);
    if (objs.empty()) {
        out << "    \"objects\": [],\n";
    } else {
        out << "    \"objects\": [\n";
        for (std::size_t i = 0; i < objs.size(); ++i) {
            const Obj& o = *objs[i];
            out << "      {\"type\": \"" << to_string(o.kind) << "\", \"color\": \""
                << to_string(o.color) << "\", \"position\": "
                << pair(o.pos.x, o.pos.y);
            if (o.kind == Kind::Door) {
                out << ", \"locked\": " << (o.door == DoorState::Locked ? "true" : "false");
                if (opts.emit_open_state)
                    out << ", \"open\": " << (o.door == DoorState::Open ? "true" : "false");
            }
            out << "}" << (i + 1 < objs.size() ? "," : "") << "\n";
        }
        out << "    ],\n";
    }
    out << "    \"mission\": \"" << json_escape(mission) << "\"\n  }\n}";
    return out.str();
}

}  // namespace fmt_detail

inline std::string format_env(const World& w, const std::string& mission,
                              FormatStyle style, FormatOptions opts = {}) {
    switch (style) {
        case FormatStyle::Narrative: return fmt_detail::narrative(w, mission, opts);
        case FormatStyle::Structured: return fmt_detail::structured(w, mission, opts);
        case FormatStyle::Json: return fmt_detail::json_style(w, mission, opts);
    }
    throw std::logic_error("unknown format style");
}

// ============================================================ structured parse

struct ParsedEnv {
    World world;
    std::string mission_text;
};

namespace fmt_detail {

inline std::optional<Kind> kind_from(const std::string& s) {
    for (Kind k : {Kind::Key, Kind::Ball, Kind::Box, Kind::Door})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

inline std::optional<Color> color_from(const std::string& s) {
    for (int i = 0; i < kColorCount; ++i)
        if (s == to_string(static_cast<Color>(i))) return static_cast<Color>(i);
    return std::nullopt;
}

inline std::optional<int> dir_from(const std::string& s) {
    for (int d = 0; d < kDirCount; ++d)
        if (s == kDirName[d]) return d;
    return std::nullopt;
}

// "(x, y)" with arbitrary suffix allowed; returns chars consumed
inline std::optional<Coord> read_pos(const std::string& s, std::size_t at,
                                     std::size_t* end = nullptr) {
    std::size_t i = at;
    auto num = [&](int& out) {
        bool neg = i < s.size() && s[i] == '-';
        if (neg) ++i;
        std::size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == start) return false;
        out = std::stoi(s.substr(start, i - start)) * (neg ? -1 : 1);
        return true;
    };
    Coord c;
    if (i >= s.size() || s[i] != '(') return std::nullopt;
    ++i;
    if (!num(c.x)) return std::nullopt;
    if (i + 1 >= s.size() || s[i] != ',' || s[i + 1] != ' ') return std::nullopt;
    i += 2;
    if (!num(c.y)) return std::nullopt;
    if (i >= s.size() || s[i] != ')') return std::nullopt;
    if (end) *end = i + 1;
    return c;
}

inline std::optional<std::pair<int, int>> read_dims(const std::string& s) {
    auto x = s.find('x');
    if (x == std::string::npos) return std::nullopt;
    try {
        std::size_t a_end = 0, b_end = 0;
        int a = std::stoi(s, &a_end);
        if (a_end != x) return std::nullopt;
        int b = std::stoi(s.substr(x + 1), &b_end);
        if (x + 1 + b_end != s.size()) return std::nullopt;
        return std::make_pair(a, b);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace fmt_detail

inline ParsedEnv parse_structured(const std::string& text) {
    using namespace fmt_detail;
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
    }
    std::size_t i = 0;
    auto next = [&]() -> const std::string& {
        if (i >= lines.size()) throw ParseError(static_cast<int>(lines.size()), "unexpected end of text");
        return lines[i++];
    };
    auto lineno = [&]() { return static_cast<int>(i); };  // 1-based, after next()

    while (i < lines.size() &&
           lines[i] != "These are the specifics regarding this environment:")
        ++i;
    if (i >= lines.size())
        throw ParseError(static_cast<int>(lines.size()), "missing specifics section");
    ++i;

    auto field = [&](const std::string& label) {
        const std::string& l = next();
        std::string prefix = "- " + label + ": ";
        if (l.rfind(prefix, 0) != 0)
            throw ParseError(lineno(), "expected '" + label + "' field");
        return l.substr(prefix.size());
    };

    auto rooms = read_dims(field("Number of rooms"));
    if (!rooms) throw ParseError(lineno(), "malformed room count");
    auto size = read_dims(field("Size of each room (including walls)"));
    if (!size || size->first != size->second)
        throw ParseError(lineno(), "malformed room size");
    auto eff = read_dims(field("Effective room size (excluding walls)"));
    if (!eff || eff->first != size->first - 2)
        throw ParseError(lineno(), "effective size disagrees with room size");
    auto grid = read_dims(field("Total grid size"));
    if (!grid || grid->first != rooms->first * (size->first - 1) + 1 ||
        grid->second != rooms->second * (size->first - 1) + 1)
        throw ParseError(lineno(), "grid size disagrees with room layout");

    World w = World::rooms(rooms->first, rooms->second, size->first);

    auto pos_text = field("Agent initial position");
    std::size_t consumed = 0;
    auto agent_pos = read_pos(pos_text, 0, &consumed);
    if (!agent_pos || consumed != pos_text.size())
        throw ParseError(lineno(), "malformed agent position");
    if (!w.in_bounds(*agent_pos) || w.is_wall(*agent_pos))
        throw ParseError(lineno(), "agent position not on open floor");

    auto dir_text = field("Agent facing direction");
    auto sp = dir_text.find(' ');
    auto dir = dir_from(dir_text.substr(0, sp));
    if (!dir) throw ParseError(lineno(), "unknown direction name");
    std::string toward = " (toward ";
    if (sp == std::string::npos || dir_text.compare(sp, toward.size(), toward) != 0)
        throw ParseError(lineno(), "malformed direction field");
    auto front = read_pos(dir_text, sp + toward.size());
    Coord expect{agent_pos->x + kDirDx[*dir], agent_pos->y + kDirDy[*dir]};
    if (!front || !(*front == expect))
        throw ParseError(lineno(), "front cell disagrees with direction");
    w.agent.pos = *agent_pos;
    w.agent.dir = *dir;

    if (next() != "- Objects in environment:")
        throw ParseError(lineno(), "expected object list");
    while (i < lines.size() && lines[i].rfind("  - ", 0) == 0) {
        std::string body = lines[i].substr(4);
        ++i;
        auto c1 = body.find(", color=");
        if (c1 == std::string::npos) throw ParseError(lineno(), "missing object color");
        auto kind = kind_from(body.substr(0, c1));
        if (!kind) throw ParseError(lineno(), "unknown object type");
        auto c2 = body.find(", position=", c1);
        if (c2 == std::string::npos)
            throw ParseError(lineno(), "missing object position");
        auto color = color_from(body.substr(c1 + 8, c2 - c1 - 8));
        if (!color) throw ParseError(lineno(), "unknown object color");
        auto pos = read_pos(body, c2 + 11, &consumed);
        if (!pos) throw ParseError(lineno(), "malformed object position");
        if (!w.in_bounds(*pos)) throw ParseError(lineno(), "object out of bounds");
        if (w.object_at(*pos)) throw ParseError(lineno(), "two objects share a cell");
        std::vector<std::string> attrs;
        for (std::size_t at = consumed; at < body.size();) {
            if (body.compare(at, 2, ", ") != 0)
                throw ParseError(lineno(), "malformed object attributes");
            at += 2;
            auto stop = body.find(", ", at);
            if (stop == std::string::npos) stop = body.size();
            attrs.push_back(body.substr(at, stop - at));
            at = stop;
        }
        bool locked = false, open = false;
        for (const std::string& a : attrs) {
            if (a == "locked=True") locked = true;
            else if (a == "locked=False") locked = false;
            else if (a == "open=True") open = true;
            else if (a == "open=False") open = false;
            else throw ParseError(lineno(), "unknown object attribute");
        }
        if (*kind == Kind::Door) {
            if (attrs.empty()) throw ParseError(lineno(), "door without lock state");
            if (!w.is_wall(*pos)) throw ParseError(lineno(), "door off the wall lattice");
            w.add_door(*pos, *color,
                       locked ? DoorState::Locked
                              : (open ? DoorState::Open : DoorState::Closed));
        } else {
            if (!attrs.empty()) throw ParseError(lineno(), "unexpected object attribute");
            if (w.is_wall(*pos)) throw ParseError(lineno(), "object on a wall cell");
            w.add_object(*kind, *color, *pos);
        }
    }
    if (w.object_at(w.agent.pos))
        throw ParseError(lineno(), "agent shares a cell with an object");

    const std::string& mline = next();
    std::string mprefix = "- Mission: '";
    if (mline.rfind(mprefix, 0) != 0 || mline.size() < mprefix.size() + 2 ||
        mline.substr(mline.size() - 2) != ".'")
        throw ParseError(lineno(), "malformed mission field");
    std::string mission =
        mline.substr(mprefix.size(), mline.size() - mprefix.size() - 2);
    return ParsedEnv{std::move(w), std::move(mission)};
}

}  // namespace textgrid
