#include <catch2/catch.hpp>

#include "qac/builtins.hpp"
#include "qac/protocol.hpp"

using namespace qac;

TEST_CASE("init_prob sets unit counters and uniform buckets") {
    Digraph g = builtins::demo4();
    ProbNode v1 = init_prob(0, 5, g);
    CHECK(v1.state.y == 5);
    CHECK(v1.state.z == 1);
    CHECK(v1.state.y_s == 5);
    CHECK(v1.state.z_s == 1);
    CHECK(to_string(v1.state.estimate()) == "5/1");
    CHECK(v1.routing.targets == std::vector<int>{1, 2});
    CHECK(v1.routing.cumulative.size() == 3);
    CHECK(v1.routing.cumulative.back() == 1.0);

    ProbNode v4 = init_prob(3, 2, g);
    CHECK(to_string(v4.state.estimate()) == "2/1");

    ProbNode zero = init_prob(1, 0, g);
    CHECK(to_string(zero.state.estimate()) == "0/1");
}

TEST_CASE("prob_choose_target partitions [0,1) self-first") {
    Digraph g = builtins::demo4();
    ProbNode v1 = init_prob(0, 5, g);  // two out-neighbors, buckets of width 1/3

    CHECK_FALSE(prob_choose_target(v1, 0.10).has_value());
    CHECK(prob_choose_target(v1, 0.50) == 1);  // first out-neighbor in file order
    CHECK(prob_choose_target(v1, 0.99) == 2);

    // Half-open boundaries: a draw exactly at a bucket edge belongs to the
    // bucket on the right.
    double third = v1.routing.cumulative[0];
    CHECK(prob_choose_target(v1, third) == 1);
    CHECK_FALSE(prob_choose_target(v1, 0.0).has_value());

    v1.state.z = 0;
    v1.state.y = 0;
    CHECK_FALSE(prob_choose_target(v1, 0.99).has_value());  // no mass, always keep
}

TEST_CASE("uniform buckets give every outcome the same width") {
    Digraph g = builtins::net7();
    for (int j = 0; j < g.n; ++j) {
        ProbNode node = init_prob(j, 1, g);
        const auto& cum = node.routing.cumulative;
        double width = 1.0 / (1.0 + g.out_degree(j));
        for (std::size_t i = 0; i < cum.size(); ++i) {
            double lo = i == 0 ? 0.0 : cum[i - 1];
            CHECK(cum[i] - lo == Approx(width).margin(1e-12));
        }
    }
}

TEST_CASE("explicit probabilities must be positive and sum to one") {
    Digraph g = builtins::demo4();
    std::vector<double> good{0.2, 0.3, 0.5};
    ProbRouting r = ProbRouting::with_probabilities(g, 0, good);
    CHECK(r.cumulative.back() == 1.0);

    std::vector<double> zero_edge{0.5, 0.0, 0.5};
    CHECK_THROWS_AS(ProbRouting::with_probabilities(g, 0, zero_edge), std::invalid_argument);
    std::vector<double> short_sum{0.2, 0.2, 0.2};
    CHECK_THROWS_AS(ProbRouting::with_probabilities(g, 0, short_sum), std::invalid_argument);
    std::vector<double> wrong_arity{0.5, 0.5};
    CHECK_THROWS_AS(ProbRouting::with_probabilities(g, 0, wrong_arity), std::invalid_argument);
}

TEST_CASE("emit_and_clear moves the mass and keeps the estimate") {
    NodeState s = initial_node_state(7);
    MassMessage m = emit_and_clear(s, 2, 0);
    CHECK(m.y == 7);
    CHECK(m.z == 1);
    CHECK(s.y == 0);
    CHECK(s.z == 0);
    CHECK(s.y_s == 7);
    CHECK(s.z_s == 1);

    s.y = 17;
    s.z = 4;
    m = emit_and_clear(s, 2, 0);
    CHECK(m.y == 17);
    CHECK(m.z == 4);
    CHECK(s.y == 0);
    CHECK(s.z == 0);

    s.y = -3;
    s.z = 2;
    m = emit_and_clear(s, 2, 0);
    CHECK(m.y == -3);
    CHECK(m.z == 2);

    CHECK_THROWS_AS(emit_and_clear(s, 2, 0), std::logic_error);  // now empty
}

TEST_CASE("receive_and_sum merges the inbox into the held mass") {
    NodeState v2 = initial_node_state(3);
    std::vector<MassMessage> inbox{{5, 1, 0, 1}};
    receive_and_sum(v2, inbox);
    CHECK(v2.y == 8);
    CHECK(v2.z == 2);

    NodeState v3;
    v3.y = 9;
    v3.z = 2;
    std::vector<MassMessage> merged{{8, 2, 3, 2}};
    receive_and_sum(v3, merged);
    CHECK(v3.y == 17);
    CHECK(v3.z == 4);

    NodeState untouched = initial_node_state(4);
    receive_and_sum(untouched, {});
    CHECK(untouched.y == 4);
    CHECK(untouched.z == 1);
}

TEST_CASE("mass is conserved across emit and receive") {
    NodeState a = initial_node_state(11);
    NodeState b = initial_node_state(-4);
    std::int64_t total_y = a.y + b.y;
    std::int64_t total_z = a.z + b.z;
    MassMessage m = emit_and_clear(a, 0, 1);
    CHECK(a.y + b.y + m.y == total_y);
    CHECK(a.z + b.z + m.z == total_z);
    receive_and_sum(b, std::vector<MassMessage>{m});
    CHECK(a.y + b.y == total_y);
    CHECK(a.z + b.z == total_z);
    CHECK((a.z == 0 ? a.y == 0 : true));
}

TEST_CASE("prob_update_state fires on z >= z_s") {
    NodeState s;
    s.y = 8;
    s.z = 2;
    s.y_s = 3;
    s.z_s = 1;
    CHECK(prob_update_state(s));
    CHECK(to_string(s.estimate()) == "8/2");

    NodeState empty;
    empty.y = 0;
    empty.z = 0;
    empty.y_s = 2;
    empty.z_s = 1;
    CHECK_FALSE(prob_update_state(empty));
    CHECK(to_string(empty.estimate()) == "2/1");

    NodeState equal;
    equal.y = 4;
    equal.z = 1;
    equal.y_s = 9;
    equal.z_s = 1;
    CHECK(prob_update_state(equal));  // equality triggers
    CHECK(to_string(equal.estimate()) == "4/1");
}

TEST_CASE("init_det transmits the unit token to the priority-0 neighbor") {
    Digraph ring = builtins::ring4();
    auto [v1, m1] = init_det(0, 9, ring);
    CHECK(m1.y == 9);
    CHECK(m1.z == 1);
    CHECK(m1.dest == 1);
    CHECK(v1.state.y == 0);
    CHECK(v1.state.z == 0);
    CHECK(to_string(v1.state.estimate()) == "9/1");
    CHECK(v1.routing.cursor == 0);  // single out-neighbor wraps back

    auto [v2, m2] = init_det(1, 3, ring);
    CHECK(m2.dest == 2);
    CHECK(m2.y == 3);

    Digraph pair = make_digraph(2, {{0, 1}, {1, 0}});
    auto [z, mz] = init_det(0, 0, pair);
    CHECK(mz.y == 0);
    CHECK(mz.z == 1);  // the counter still travels with a zero value

    Digraph demo = builtins::demo4();
    auto [d1, dm] = init_det(0, 5, demo);
    CHECK(dm.dest == 1);
    CHECK(d1.routing.cursor == 1);
}

TEST_CASE("det_event_conditions") {
    NodeState s;
    s.y = 3;
    s.z = 1;
    s.y_s = 9;
    s.z_s = 1;
    CHECK_FALSE(det_event_conditions(s));

    s.y = 12;
    s.z = 2;
    CHECK(det_event_conditions(s));  // counter grew

    s.y = 9;
    s.z = 1;
    s.y_s = 9;
    CHECK(det_event_conditions(s));  // equal counter, equal value

    s.y = 0;
    s.z = 0;
    CHECK_FALSE(det_event_conditions(s));  // empty node can never fire
}

TEST_CASE("det_step commits, transmits and clears only when triggered") {
    Digraph ring = builtins::ring4();
    auto [v1, init_msg] = init_det(0, 9, ring);
    (void)init_msg;

    v1.state.y = 12;
    v1.state.z = 2;
    auto fired = det_step(v1);
    REQUIRE(fired.has_value());
    CHECK(fired->y == 12);
    CHECK(fired->z == 2);
    CHECK(fired->dest == 1);
    CHECK(to_string(v1.state.estimate()) == "12/2");
    CHECK(v1.state.y == 0);
    CHECK(v1.state.z == 0);

    auto [v2, m2] = init_det(1, 9, ring);
    (void)m2;
    v2.state.y = 3;
    v2.state.z = 1;
    CHECK_FALSE(det_step(v2).has_value());
    CHECK(v2.state.y == 3);  // mass retained
    CHECK(to_string(v2.state.estimate()) == "9/1");

    auto [v3, m3] = init_det(2, 1, ring);
    (void)m3;
    CHECK_FALSE(det_step(v3).has_value());  // (0,0) never emits
}

TEST_CASE("round-robin cycles each out-neighbor exactly once per lap") {
    Digraph g = make_digraph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 0}, {2, 0}, {3, 0}});
    auto [node, first] = init_det(0, 5, g);
    std::vector<int> seen{first.dest};
    for (int lap = 0; lap < 3; ++lap) {
        node.state.y = 1;
        node.state.z = 5;  // force condition 1
        node.state.z_s = lap + 1;
        auto m = det_step(node);
        REQUIRE(m.has_value());
        seen.push_back(m->dest);
        node.state.z_s = 1;
    }
    // First four transmissions hit 1, 2, 3 then wrap back to 1.
    CHECK(seen == std::vector<int>{1, 2, 3, 1});
}

TEST_CASE("explicit round-robin priorities override file order") {
    Digraph g = make_digraph(3, {{0, 1}, {0, 2}, {1, 0}, {2, 0}});
    std::vector<int> priority{1, 0};  // neighbor 2 first
    RoundRobinRouting r = RoundRobinRouting::with_priorities(g, 0, priority);
    CHECK(r.take_target() == 2);
    CHECK(r.take_target() == 1);
    CHECK(r.take_target() == 2);

    std::vector<int> broken{0, 0};
    CHECK_THROWS_AS(RoundRobinRouting::with_priorities(g, 0, broken), std::invalid_argument);
}
