#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "textgrid/rng.hpp"

using namespace textgrid;

namespace {

Mission single(Verb v, Desc a, Desc b = Desc{}) {
    Mission m;
    Clause c;
    c.verb = v;
    c.a = a;
    c.b = b;
    m.clauses = {c};
    return m;
}

Desc ball(std::optional<Color> c = {}, std::optional<Qual> q = {}) {
    return Desc{Kind::Ball, c, q};
}

}  // namespace

TEST_CASE("articles follow match multiplicity") {
    World w = fixtures::one_room();
    fixtures::put(w, Kind::Ball, Color::Red, 2, 2);
    fixtures::put(w, Kind::Ball, Color::Blue, 3, 3);
    fixtures::put(w, Kind::Ball, Color::Blue, 4, 4);
    fixtures::put_door(w, Color::Green, 0, 3, DoorState::Closed);
    w.agent.pos = Coord{1, 1};
    w.agent.dir = 0;

    CHECK(render(w, single(Verb::GoTo, ball(Color::Red))) == "go to the red ball");
    CHECK(render(w, single(Verb::GoTo, ball(Color::Blue))) == "go to a blue ball");
    CHECK(render(w, single(Verb::PickUp, ball())) == "pick up a ball");
    CHECK(render(w, single(Verb::Open, Desc{Kind::Door, Color::Green, {}})) ==
          "open the green door");
}

TEST_CASE("put-next and qualifier phrasing") {
    World w = fixtures::one_room();
    fixtures::put(w, Kind::Ball, Color::Red, 2, 2);
    fixtures::put(w, Kind::Box, Color::Grey, 4, 4);
    w.agent.pos = Coord{3, 3};
    w.agent.dir = 0;

    Mission m = single(Verb::PutNext, ball(Color::Red), Desc{Kind::Box, Color::Grey, {}});
    CHECK(render(w, m) == "put the red ball next to the grey box");

    Mission q = single(Verb::GoTo, ball(Color::Red, Qual::Behind));
    CHECK(render(w, q) == "go to the red ball behind you");
    q.clauses[0].a.qual = Qual::OnLeft;
    CHECK(render(w, q).find("on your left") != std::string::npos);
    q.clauses[0].a.qual = Qual::InFront;
    CHECK(render(w, q).find("in front of you") != std::string::npos);
}

TEST_CASE("connector surface forms") {
    World w = fixtures::one_room();
    fixtures::put(w, Kind::Ball, Color::Red, 2, 2);
    fixtures::put(w, Kind::Box, Color::Blue, 4, 4);
    w.agent.pos = Coord{1, 1};
    w.agent.dir = 0;

    Mission m;
    Clause a, b;
    a.verb = Verb::GoTo;
    a.a = ball(Color::Red);
    b.verb = Verb::GoTo;
    b.a = Desc{Kind::Box, Color::Blue, {}};
    m.clauses = {a, b};

    m.conns = {Conn::And};
    CHECK(render(w, m) == "go to the red ball and go to the blue box");
    m.conns = {Conn::Then};
    CHECK(render(w, m) == "go to the red ball, then go to the blue box");
    m.conns = {Conn::AfterYou};
    CHECK(render(w, m) == "go to the red ball after you go to the blue box");
}

TEST_CASE("the full reference mission renders verbatim") {
    World w = fixtures::reference_world();
    CHECK(render(w, fixtures::reference_mission()) ==
          "pick up a grey ball and go to the ball in front of you, then go to a box and put "
          "a purple box next to the red door");
}

TEST_CASE("at most one sequencing connector is accepted") {
    Mission m;
    m.clauses.resize(3);
    m.conns = {Conn::Then, Conn::And};
    CHECK(m.valid());
    m.conns = {Conn::Then, Conn::AfterYou};
    CHECK_FALSE(m.valid());
    m.conns = {Conn::And, Conn::And};
    CHECK(m.valid());
    m.conns = {Conn::And};
    CHECK_FALSE(m.valid());  // arity mismatch
}

TEST_CASE("surface forms parse back to the same mission") {
    Rng rng = Rng::from("test/mission-roundtrip", 5);
    World w = fixtures::reference_world();
    auto rand_desc = [&](bool allow_qual) {
        Desc d;
        d.kind = static_cast<Kind>(rng.below(4));
        if (rng.chance(2, 3)) d.color = static_cast<Color>(rng.below(6));
        if (allow_qual && rng.chance(1, 3)) d.qual = static_cast<Qual>(rng.below(4));
        return d;
    };
    auto rand_clause = [&] {
        Clause c;
        c.verb = static_cast<Verb>(rng.below(4));
        c.a = rand_desc(true);
        if (c.verb == Verb::Open) c.a.kind = Kind::Door;
        if (c.verb == Verb::PickUp || c.verb == Verb::PutNext)
            c.a.kind = static_cast<Kind>(rng.below(3));  // portable kinds only
        if (c.verb == Verb::PutNext) c.b = rand_desc(true);
        return c;
    };
    for (int trial = 0; trial < 300; ++trial) {
        Mission m;
        int n = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < n; ++i) m.clauses.push_back(rand_clause());
        int seq_at = -1;
        if (n > 1 && rng.chance(2, 3)) seq_at = static_cast<int>(rng.below(n - 1));
        for (int i = 0; i + 1 < n; ++i) {
            if (i == seq_at)
                m.conns.push_back(rng.chance(1, 2) ? Conn::Then : Conn::AfterYou);
            else
                m.conns.push_back(Conn::And);
        }
        REQUIRE(m.valid());
        std::string text = render(w, m);
        auto back = parse_mission(text);
        REQUIRE(back.has_value());
        REQUIRE(back->clauses.size() == m.clauses.size());
        for (std::size_t i = 0; i < m.clauses.size(); ++i) {
            CHECK(back->clauses[i].verb == m.clauses[i].verb);
            CHECK(back->clauses[i].a == m.clauses[i].a);
            if (m.clauses[i].verb == Verb::PutNext) CHECK(back->clauses[i].b == m.clauses[i].b);
        }
        CHECK(back->conns == m.conns);
    }
}

TEST_CASE("qualifiers split the world by the initial pose") {
    World w = fixtures::one_room();
    w.agent.pos = Coord{4, 4};
    w.agent.dir = 3;  // facing north
    int front = fixtures::put(w, Kind::Ball, Color::Red, 4, 2);
    int behind = fixtures::put(w, Kind::Ball, Color::Red, 4, 6);
    int right = fixtures::put(w, Kind::Ball, Color::Red, 6, 4);
    int left = fixtures::put(w, Kind::Ball, Color::Red, 2, 4);

    auto ids = [&](Qual q) { return match_ids(w, Desc{Kind::Ball, Color::Red, q}); };
    CHECK(ids(Qual::InFront) == std::vector<int>{front});
    CHECK(ids(Qual::Behind) == std::vector<int>{behind});
    CHECK(ids(Qual::OnRight) == std::vector<int>{right});
    CHECK(ids(Qual::OnLeft) == std::vector<int>{left});
    CHECK(match_ids(w, Desc{Kind::Ball, Color::Red, {}}).size() == 4);
}

TEST_CASE("go-to succeeds on adjacency to any matching object") {
    World w = fixtures::one_room();
    fixtures::put(w, Kind::Ball, Color::Red, 2, 1);
    Mission m = single(Verb::GoTo, ball(Color::Red));
    w.agent.pos = Coord{4, 4};
    w.agent.dir = 0;

    World beside = w;
    beside.agent.pos = Coord{2, 2};
    CHECK(check_success(m, {w, beside}));
    CHECK_FALSE(check_success(m, {w}));

    World diagonal = w;
    diagonal.agent.pos = Coord{3, 2};
    CHECK_FALSE(check_success(m, {w, diagonal}));  // diagonal is not adjacent
}

TEST_CASE("pickup tracks the matched object identity") {
    World w = fixtures::one_room();
    int id = fixtures::put(w, Kind::Ball, Color::Red, 2, 1);
    fixtures::put(w, Kind::Ball, Color::Blue, 4, 1);
    Mission m = single(Verb::PickUp, ball(Color::Red));
    w.agent.pos = Coord{1, 1};
    w.agent.dir = 0;

    World carrying = w;
    REQUIRE(apply(carrying, Action::Pickup));
    REQUIRE(carrying.agent.carrying->id == id);
    CHECK(check_success(m, {w, carrying}));

    // carrying the wrong ball does not count
    World wrong = w;
    wrong.agent.pos = Coord{3, 1};
    REQUIRE(apply(wrong, Action::Pickup));
    CHECK_FALSE(check_success(m, {w, wrong}));
}

TEST_CASE("open succeeds only when a matched door is open") {
    World w = World::rooms(2, 1, 8);
    int id = fixtures::put_door(w, Color::Blue, 7, 3, DoorState::Closed);
    w.agent.pos = Coord{6, 3};
    w.agent.dir = 0;
    Mission m = single(Verb::Open, Desc{Kind::Door, Color::Blue, {}});
    World opened = w;
    opened.object_by_id(id)->door = DoorState::Open;
    CHECK(check_success(m, {w, opened}));
    CHECK_FALSE(check_success(m, {w}));
}

TEST_CASE("put-next needs both objects on the grid and adjacent") {
    World w = fixtures::one_room();
    fixtures::put(w, Kind::Ball, Color::Red, 2, 1);
    fixtures::put(w, Kind::Box, Color::Blue, 5, 5);
    w.agent.pos = Coord{1, 1};
    w.agent.dir = 0;
    Mission m = single(Verb::PutNext, ball(Color::Red), Desc{Kind::Box, Color::Blue, {}});

    World picked = w;
    REQUIRE(apply(picked, Action::Pickup));
    CHECK_FALSE(check_success(m, {w, picked}));  // in hand does not count

    World placed = picked;
    placed.agent.pos = Coord{4, 4};
    placed.agent.dir = 1;  // faces (4,5), adjacent to the box at (5,5)
    REQUIRE(apply(placed, Action::Drop));
    CHECK(check_success(m, {w, picked, placed}));
}

TEST_CASE("put-next with a shared descriptor needs two distinct objects") {
    World w = fixtures::one_room();
    fixtures::put(w, Kind::Ball, Color::Red, 2, 1);
    w.agent.pos = Coord{4, 4};
    w.agent.dir = 0;
    Mission m = single(Verb::PutNext, ball(Color::Red), ball(Color::Red));
    // only one red ball exists; it cannot sit next to itself
    CHECK_FALSE(check_success(m, {w}));

    fixtures::put(w, Kind::Ball, Color::Red, 3, 1);
    Mission m2 = single(Verb::PutNext, ball(Color::Red), ball(Color::Red));
    CHECK(check_success(m2, {w}));  // two adjacent matching balls
}

TEST_CASE("sequencing gates the second group") {
    World w = fixtures::one_room(10);
    fixtures::put(w, Kind::Ball, Color::Red, 2, 2);
    fixtures::put(w, Kind::Box, Color::Blue, 7, 7);
    w.agent.pos = Coord{5, 5};
    w.agent.dir = 0;

    Mission m;
    Clause a, b;
    a.verb = Verb::GoTo;
    a.a = ball(Color::Red);
    b.verb = Verb::GoTo;
    b.a = Desc{Kind::Box, Color::Blue, {}};
    m.clauses = {a, b};
    m.conns = {Conn::Then};

    World near_box = w;
    near_box.agent.pos = Coord{7, 6};
    World near_ball = w;
    near_ball.agent.pos = Coord{2, 3};

    // box first, ball second: the box visit happened before the gate opened
    CHECK_FALSE(check_success(m, {w, near_box, near_ball}));
    CHECK(check_success(m, {w, near_box, near_ball, near_box}));
    // ball first, box second: correct order
    CHECK(check_success(m, {w, near_ball, near_box}));

    // "after you" swaps execution order, not the clause list
    m.conns = {Conn::AfterYou};
    CHECK(check_success(m, {w, near_box, near_ball}));
    CHECK_FALSE(check_success(m, {w, near_ball, near_box}));
}

TEST_CASE("success may hold in the initial state") {
    World w = fixtures::one_room();
    fixtures::put(w, Kind::Ball, Color::Red, 2, 1);
    w.agent.pos = Coord{2, 2};
    w.agent.dir = 0;
    Mission m = single(Verb::GoTo, ball(Color::Red));
    CHECK(check_success(m, {w}));
}

TEST_CASE("well-posedness requires nonempty match sets") {
    World w = fixtures::one_room();
    fixtures::put(w, Kind::Ball, Color::Red, 2, 1);
    w.agent.pos = Coord{4, 4};
    w.agent.dir = 0;
    CHECK(well_posed(single(Verb::GoTo, ball(Color::Red)), w));
    CHECK_FALSE(well_posed(single(Verb::GoTo, ball(Color::Green)), w));
}
