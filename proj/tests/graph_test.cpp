#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace kemeny;
using support::graph_of;
using support::parse_text;

TEST(Parse, TriangleFromEdgeList) {
    auto g = parse_text("0 1\n1 2\n0 2");
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.edge_count(), 3u);
    EXPECT_EQ(g, support::graph_of(3, {{0, 1}, {1, 2}, {0, 2}}));
}

TEST(Parse, DuplicatesCollapse) {
    std::istringstream in("0 1\n0 1\n1 0");
    auto parsed = parse_edge_list(in);
    EXPECT_EQ(parsed.graph.node_count(), 2u);
    EXPECT_EQ(parsed.graph.edge_count(), 1u);
    EXPECT_EQ(parsed.duplicates_dropped, 2u);
}

TEST(Parse, CommentsAndRemap) {
    auto g = parse_text("# comment\n5 9");
    EXPECT_EQ(g.node_count(), 2u);
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.label(0), 5u);
    EXPECT_EQ(g.label(1), 9u);
    EXPECT_EQ(g.find_label(9), NodeId{1});
}

TEST(Parse, TabsPercentCommentsAndSelfLoops) {
    std::istringstream in("% header\n1\t2\n\n3 3\n2 3\n");
    auto parsed = parse_edge_list(in);
    EXPECT_EQ(parsed.graph.node_count(), 3u);
    EXPECT_EQ(parsed.graph.edge_count(), 2u);
    EXPECT_EQ(parsed.self_loops_dropped, 1u);
}

TEST(Parse, MalformedTokenReportsLine) {
    std::istringstream in("0 1\n1 x\n");
    try {
        parse_edge_list(in);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::istringstream three("0 1 2\n");
    EXPECT_THROW(parse_edge_list(three), ParseError);
    std::istringstream negative("0 -1\n");
    EXPECT_THROW(parse_edge_list(negative), ParseError);
}

TEST(Parse, EmptyAfterCleaning) {
    std::istringstream in("# nothing\n4 4\n");
    EXPECT_THROW(parse_edge_list(in), EmptyGraphError);
}

TEST(Parse, RoundTripThroughWriter) {
    auto rng = stream_rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = support::random_connected_graph(12, rng, 0.3);
        std::ostringstream out;
        write_edge_list(g, out);
        auto again = parse_text(out.str());
        EXPECT_EQ(again, g);
    }
    // non-contiguous labels survive a round trip
    auto g = parse_text("10 30\n30 70\n");
    std::ostringstream out;
    write_edge_list(g, out);
    EXPECT_EQ(parse_text(out.str()), g);
}

TEST(Graph, InvariantsHold) {
    auto rng = stream_rng(3, 0);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = support::random_connected_graph(15, rng, 0.2);
        std::int64_t degree_sum = 0;
        for (NodeId u = 0; u < g.node_count(); ++u) {
            degree_sum += static_cast<std::int64_t>(g.degree(u));
            auto nb = g.neighbors(u);
            EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
            EXPECT_EQ(std::adjacent_find(nb.begin(), nb.end()), nb.end());
            for (NodeId v : nb) {
                EXPECT_NE(u, v);
                EXPECT_TRUE(g.has_edge(v, u));
            }
        }
        EXPECT_EQ(degree_sum, g.volume());
    }
}

TEST(LargestComponent, TieGoesToSmallestId) {
    auto g = graph_of(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    auto lcc = largest_connected_component(g);
    EXPECT_EQ(lcc.graph, graph_of(3, {{0, 1}, {1, 2}, {0, 2}}));
    EXPECT_EQ(lcc.old_to_new[0], 0u);
    EXPECT_EQ(lcc.old_to_new[3], kNoNode);
}

TEST(LargestComponent, ConnectedGraphUnchanged) {
    auto p3 = path_graph(3);
    auto lcc = largest_connected_component(p3);
    EXPECT_EQ(lcc.graph, p3);
    for (NodeId v = 0; v < 3; ++v) EXPECT_EQ(lcc.old_to_new[v], v);
}

TEST(LargestComponent, PicksLargerComponent) {
    auto g = graph_of(6, {{0, 1}, {2, 3}, {2, 4}, {2, 5}, {3, 4}, {3, 5}, {4, 5}});
    auto lcc = largest_connected_component(g);
    EXPECT_EQ(lcc.graph.node_count(), 4u);
    EXPECT_EQ(lcc.graph.edge_count(), 6u);
    EXPECT_TRUE(is_connected(lcc.graph));
    EXPECT_EQ(lcc.graph.label(0), 2u);
}

TEST(Update, InsertAndErrors) {
    auto p3 = path_graph(3);
    auto k3 = insert_edge(p3, 0, 2);
    EXPECT_EQ(k3, complete_graph(3));
    EXPECT_EQ(k3.degree(0), 2u);
    EXPECT_THROW(insert_edge(k3, 0, 1), DuplicateEdgeError);
    EXPECT_THROW(insert_edge(p3, 1, 1), InvalidEdgeError);
}

TEST(Update, DeleteExamples) {
    EXPECT_EQ(delete_edge(complete_graph(3), 0, 1), graph_of(3, {{1, 2}, {0, 2}}));
    EXPECT_THROW(delete_edge(path_graph(3), 0, 1), ConnectivityError);
    EXPECT_THROW(delete_edge(path_graph(3), 0, 2), EdgeNotFoundError);
    auto k4 = complete_graph(4);
    for (const auto& e : k4.edges()) {
        auto g = delete_edge(k4, e.u, e.v);
        EXPECT_EQ(g.edge_count(), 5u);
        EXPECT_TRUE(is_connected(g));
    }
}

TEST(Update, InsertThenDeleteIsIdentity) {
    auto rng = stream_rng(5, 0);
    for (int trial = 0; trial < 30; ++trial) {
        auto g = support::random_connected_graph(10, rng, 0.2);
        NodeId u = 0, v = 0;
        do {
            u = static_cast<NodeId>(uniform_below(rng, 10));
            v = static_cast<NodeId>(uniform_below(rng, 10));
        } while (u == v || g.has_edge(u, v));
        EXPECT_EQ(delete_edge(insert_edge(g, u, v), u, v), g);
    }
}

TEST(Update, MatchesRebuildFromEdgeList) {
    auto rng = stream_rng(6, 0);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = support::random_connected_graph(12, rng, 0.3);
        for (const auto& ev : generate_updates(g, 6, 0.5, 60 + trial)) {
            auto edges = g.edges();
            const auto e = make_edge(ev.u, ev.v);
            if (ev.op == UpdateOp::Insert) {
                edges.push_back(e);
                g = insert_edge(g, ev.u, ev.v);
            } else {
                edges.erase(std::find(edges.begin(), edges.end(), e));
                g = delete_edge(g, ev.u, ev.v);
            }
            EXPECT_EQ(g, Graph::from_edges(g.node_count(), edges, g.labels()));
        }
    }
}

TEST(Update, DegreeSumAfterRandomUpdates) {
    auto g = complete_graph(6);
    auto events = generate_updates(g, 40, 0.5, 9);
    for (const auto& ev : events) {
        g = ev.op == UpdateOp::Insert ? insert_edge(g, ev.u, ev.v) : delete_edge(g, ev.u, ev.v);
        std::int64_t sum = 0;
        for (NodeId u = 0; u < g.node_count(); ++u) sum += static_cast<std::int64_t>(g.degree(u));
        EXPECT_EQ(sum, g.volume());
        EXPECT_TRUE(is_connected(g));
    }
}

TEST(Eccentricity, Examples) {
    auto p3 = path_graph(3);
    EXPECT_EQ(eccentricity_from(p3, 1), 1u);
    EXPECT_EQ(eccentricity_from(p3, 0), 2u);
    for (NodeId r = 0; r < 5; ++r) EXPECT_EQ(eccentricity_from(complete_graph(5), r), 1u);
    EXPECT_THROW(eccentricity_from(graph_of(4, {{0, 1}, {2, 3}}), 0), ConnectivityError);
}

TEST(Bridges, MatchBruteForce) {
    auto rng = stream_rng(17, 0);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = support::random_connected_graph(9, rng, 0.12);
        std::vector<Edge> brute;
        for (const auto& e : g.edges()) {
            auto edges = g.edges();
            edges.erase(std::find(edges.begin(), edges.end(), e));
            if (!is_connected(Graph::from_edges(g.node_count(), edges))) brute.push_back(e);
        }
        EXPECT_EQ(find_bridges(g), brute);
    }
}

TEST(MaxDegree, SmallestIdOnTies) {
    EXPECT_EQ(max_degree_node(complete_graph(4)), 0u);
    EXPECT_EQ(max_degree_node(path_graph(4)), 1u);
    EXPECT_EQ(max_degree_node(star_graph(5)), 0u);
}

TEST(Generators, ErdosRenyiEdgeCountIsPlausible) {
    auto rng = stream_rng(1, 0);
    auto g = erdos_renyi(2000, 0.005, rng);
    const double expected = 0.005 * 2000.0 * 1999.0 / 2.0;
    EXPECT_NEAR(static_cast<double>(g.edge_count()), expected, 5.0 * std::sqrt(expected));
    auto lcc = erdos_renyi_lcc(2000, 0.005, rng);
    EXPECT_TRUE(is_connected(lcc));
}
