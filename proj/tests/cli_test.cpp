#include <gtest/gtest.h>

#include <cstdlib>
#include <regex>

#include "support.hpp"

using namespace kemeny;
using support::run_cli;
using support::temp_path;

namespace {

std::string graph_file(const std::string& name, const Graph& g) {
    const auto path = temp_path(name);
    support::write_graph(path, g);
    return path;
}

double number_field(const std::string& json_line, const std::string& key) {
    std::smatch m;
    const std::regex re("\"" + key + "\":(-?[0-9.eE+-]+)");
    if (!std::regex_search(json_line, m, re)) return std::nan("");
    return std::stod(m[1]);
}

std::string without_timings(const std::string& out) {
    return std::regex_replace(out, std::regex(",\"timings\":\\{[^}]*\\}"), "");
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(line);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, ExactPrintsTwelveDigits) {
    auto run = run_cli("exact " + graph_file("k3.txt", complete_graph(3)));
    ASSERT_EQ(run.exit_code, 0);
    EXPECT_NE(run.out.find("\"kappa_digits\":\"1.33333333333\""), std::string::npos);
    EXPECT_NEAR(number_field(run.out, "kappa"), 4.0 / 3.0, 1e-12);
}

TEST(Cli, EstimateTriangle) {
    auto run = run_cli("estimate " + graph_file("k3.txt", complete_graph(3)) + " --samples 10000 --seed 7");
    ASSERT_EQ(run.exit_code, 0);
    EXPECT_LE(std::fabs(number_field(run.out, "kappa") - 4.0 / 3.0) / (4.0 / 3.0), 0.03);
}

TEST(Cli, EstimatePathIsExact) {
    auto run = run_cli("estimate " + graph_file("p3.txt", path_graph(3)) + " --samples 1");
    ASSERT_EQ(run.exit_code, 0);
    EXPECT_EQ(number_field(run.out, "kappa"), 1.5);
}

TEST(Cli, PlannerFlags) {
    const auto k2 = graph_file("k2.txt", path_graph(2));
    auto two_over_e2 = run_cli("estimate " + k2 + " --eps 1 --pf 0.2706705664732254");
    ASSERT_EQ(two_over_e2.exit_code, 0);
    EXPECT_EQ(number_field(two_over_e2.out, "samples"), 4.0);
    EXPECT_EQ(number_field(two_over_e2.out, "kappa"), 0.5);
    // ln(2 / 0.27) is slightly above 2, so the ceiling lands on 5
    auto rounded = run_cli("estimate " + k2 + " --eps 1 --pf 0.27");
    ASSERT_EQ(rounded.exit_code, 0);
    EXPECT_EQ(number_field(rounded.out, "samples"), 5.0);
    EXPECT_EQ(run_cli("estimate " + k2 + " --eps 1 --pf 2").exit_code, 2);
    EXPECT_EQ(run_cli("estimate " + k2 + " --eps 1").exit_code, 2);
}

TEST(Cli, InputErrorsExitTwo) {
    const auto bad = temp_path("bad.txt");
    support::write_text(bad, "0 1\n1 x\n");
    EXPECT_EQ(run_cli("estimate " + bad).exit_code, 2);
    const auto other_ext = temp_path("graph.csv");
    support::write_text(other_ext, "0 1\n");
    EXPECT_EQ(run_cli("exact " + other_ext).exit_code, 2);
    EXPECT_EQ(run_cli("exact " + temp_path("missing.txt")).exit_code, 2);
    const auto k3 = graph_file("k3.txt", complete_graph(3));
    EXPECT_EQ(run_cli("estimate " + k3 + " --method fast").exit_code, 2);
    EXPECT_EQ(run_cli("estimate " + k3 + " --root 99").exit_code, 2);
    EXPECT_EQ(run_cli("estimate " + k3 + " --samples 0").exit_code, 2);
    EXPECT_EQ(run_cli("frobnicate").exit_code, 2);
}

TEST(Cli, DisconnectedNeedsLcc) {
    const auto two = temp_path("two_triangles.txt");
    support::write_text(two, "0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n5 6\n");
    EXPECT_EQ(run_cli("exact " + two).exit_code, 2);
    auto run = run_cli("exact " + two + " --lcc");
    ASSERT_EQ(run.exit_code, 0);
    EXPECT_NE(run.out.find("\"n\":4"), std::string::npos);
}

TEST(Cli, CapacityGuardExitsThree) {
    EXPECT_EQ(run_cli("exact " + graph_file("long_path.txt", path_graph(kDenseNodeLimit + 1))).exit_code, 3);
}

TEST(Cli, TraceHasOneLinePerSample) {
    const auto trace = temp_path("trace.jsonl");
    auto run = run_cli("estimate " + graph_file("c6.txt", cycle_graph(6)) + " --samples 25 --trace " + trace);
    ASSERT_EQ(run.exit_code, 0);
    auto lines = lines_of(read_file(trace));
    ASSERT_EQ(lines.size(), 25u);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        EXPECT_EQ(number_field(lines[i], "sample_index"), static_cast<double>(i));
        EXPECT_NE(lines[i].find("\"f\":"), std::string::npos);
        EXPECT_GE(number_field(lines[i], "walk_steps"), 5.0);
    }
}

TEST(Cli, ReportsAreByteIdenticalApartFromTimings) {
    auto rng = stream_rng(80, 0);
    const auto g = graph_file("det.txt", support::random_connected_graph(80, rng, 0.06));
    for (const std::string flags : {" --samples 300 --seed 4", " --samples 200 --tau0 wilson --method naive --seed 1"}) {
        auto a = run_cli("estimate " + g + flags);
        auto b = run_cli("estimate " + g + flags);
        ASSERT_EQ(a.exit_code, 0);
        EXPECT_NE(a.out.find("\"timings\""), std::string::npos);
        EXPECT_EQ(without_timings(a.out), without_timings(b.out));
    }
}

TEST(Cli, ThreadCountDoesNotChangeEstimate) {
    auto rng = stream_rng(81, 0);
    const auto g = graph_file("threads.txt", support::random_connected_graph(150, rng, 0.04));
    std::vector<std::string> outs;
    for (const std::string t : {"1", "4", "0"}) {
        auto run = run_cli("estimate " + g + " --samples 400 --seed 12 --threads " + t);
        ASSERT_EQ(run.exit_code, 0);
        outs.push_back(without_timings(run.out));
    }
    EXPECT_EQ(outs[0], outs[1]);
    EXPECT_EQ(outs[0], outs[2]);
    setenv("KF_THREADS", "3", 1);
    auto env_run = run_cli("estimate " + g + " --samples 400 --seed 12 --threads 1");
    unsetenv("KF_THREADS");
    EXPECT_EQ(without_timings(env_run.out), outs[0]);
}

TEST(Cli, GenUpdatesPathInsertion) {
    const auto out = temp_path("p3_updates.txt");
    auto run = run_cli("gen-updates " + graph_file("p3.txt", path_graph(3)) + " " + out +
                       " --count 1 --insert-frac 1 --seed 3");
    ASSERT_EQ(run.exit_code, 0);
    auto lines = lines_of(read_file(out));
    ASSERT_EQ(lines.back(), "I 0 2");
}

TEST(Cli, GenUpdatesIsDeterministicPerSeed) {
    auto rng = stream_rng(82, 0);
    const auto g = graph_file("gen.txt", support::random_connected_graph(40, rng, 0.1));
    const auto a = temp_path("gen_a.txt"), b = temp_path("gen_b.txt"), c = temp_path("gen_c.txt");
    ASSERT_EQ(run_cli("gen-updates " + g + " " + a + " --count 30 --seed 5").exit_code, 0);
    ASSERT_EQ(run_cli("gen-updates " + g + " " + b + " --count 30 --seed 5").exit_code, 0);
    ASSERT_EQ(run_cli("gen-updates " + g + " " + c + " --count 30 --seed 6").exit_code, 0);
    EXPECT_EQ(read_file(a), read_file(b));
    EXPECT_NE(read_file(a), read_file(c));
}

TEST(GenUpdates, TriangleDeletionsAreEquiprobable) {
    const auto k3 = complete_graph(3);
    std::map<Edge, std::uint64_t> counts;
    const std::size_t runs = 6000;
    for (std::uint64_t seed = 0; seed < runs; ++seed) {
        auto ev = generate_updates(k3, 1, 0.0, seed);
        ASSERT_EQ(ev.size(), 1u);
        ASSERT_EQ(ev[0].op, UpdateOp::Delete);
        ++counts[make_edge(ev[0].u, ev[0].v)];
    }
    ASSERT_EQ(counts.size(), 3u);
    std::vector<std::uint64_t> observed;
    for (auto& [e, c] : counts) observed.push_back(c);
    EXPECT_GT(support::chi_square_p_value(observed, std::vector<double>(3, 1.0 / 3.0)), 0.001);
}

TEST(GenUpdates, StarEdgesAreAllBridges) {
    // every star edge is a bridge, so a deletion request falls back to an insertion
    const auto s5 = star_graph(5);
    EXPECT_EQ(find_bridges(s5).size(), 4u);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto ev = generate_updates(s5, 1, 0.0, seed);
        ASSERT_EQ(ev.size(), 1u);
        EXPECT_EQ(ev[0].op, UpdateOp::Insert);
        EXPECT_NE(ev[0].u, 0u);
        EXPECT_NE(ev[0].v, 0u);
    }
}

TEST(GenUpdates, WheelSpokeDeletionsAreEquiprobable) {
    // in the wheel every spoke has the same degree product, as does every rim edge
    const auto w = wheel_graph(6);
    std::map<Edge, std::uint64_t> spokes;
    std::uint64_t rim = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 8000; ++seed) {
        auto ev = generate_updates(w, 1, 0.0, seed)[0];
        ASSERT_EQ(ev.op, UpdateOp::Delete);
        ++total;
        if (ev.u == 0 || ev.v == 0)
            ++spokes[make_edge(ev.u, ev.v)];
        else
            ++rim;
    }
    ASSERT_EQ(spokes.size(), 5u);
    std::vector<std::uint64_t> observed;
    for (auto& [e, c] : spokes) observed.push_back(c);
    EXPECT_GT(support::chi_square_p_value(observed, std::vector<double>(5, 0.2)), 0.001);
    // spoke weight 5 * 3 = 15, rim weight 3 * 3 = 9
    EXPECT_NEAR(static_cast<double>(rim) / static_cast<double>(total), 45.0 / 120.0, 0.02);
}

TEST(GenUpdates, InsertionsWeightedByDegreeProduct) {
    // P4 non-edges: (0,2) and (1,3) have product 2, (0,3) has product 1
    const auto p4 = path_graph(4);
    std::map<Edge, std::uint64_t> counts;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        auto ev = generate_updates(p4, 1, 1.0, seed)[0];
        ASSERT_EQ(ev.op, UpdateOp::Insert);
        ++counts[make_edge(ev.u, ev.v)];
    }
    std::vector<std::uint64_t> observed{counts[{0, 2}], counts[{0, 3}], counts[{1, 3}]};
    EXPECT_GT(support::chi_square_p_value(observed, {0.4, 0.2, 0.4}), 0.001);
}

TEST(UpdateStream, ParseAndWrite) {
    auto g = support::parse_text("10 20\n20 30\n");
    std::istringstream in("# header\nI 10 30\n\nD 10 20\n");
    auto events = parse_update_stream(in, g);
    ASSERT_EQ(events.size(), 2u);
    EXPECT_EQ(events[0], (UpdateEvent{UpdateOp::Insert, 0, 2}));
    EXPECT_EQ(events[1], (UpdateEvent{UpdateOp::Delete, 0, 1}));
    std::ostringstream out;
    write_update_stream(events, g, out);
    EXPECT_EQ(out.str(), "I 10 30\nD 10 20\n");
    std::istringstream bad_op("X 10 20\n");
    EXPECT_THROW(parse_update_stream(bad_op, g), ParseError);
    std::istringstream unknown("I 10 99\n");
    EXPECT_THROW(parse_update_stream(unknown, g), InvalidEdgeError);
}

TEST(Cli, IndexBuildAndReplay) {
    auto rng = stream_rng(83, 0);
    const Graph g0 = support::random_connected_graph(40, rng, 0.12);
    const auto g = graph_file("replay.txt", g0);
    const auto idx = temp_path("replay.kfi");
    const auto upd = temp_path("replay_updates.txt");
    const auto out_idx = temp_path("replay_out.kfi");
    auto build = run_cli("index build " + g + " " + idx + " --samples 300 --seed 2 --mode ism");
    ASSERT_EQ(build.exit_code, 0);
    ASSERT_EQ(run_cli("gen-updates " + g + " " + upd + " --count 6 --seed 9").exit_code, 0);
    auto replay = run_cli("update-replay " + g + " " + idx + " " + upd + " --mode ism --out " + out_idx);
    ASSERT_EQ(replay.exit_code, 0);
    auto lines = lines_of(replay.out);
    ASSERT_EQ(lines.size(), 6u);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        EXPECT_EQ(number_field(lines[i], "step"), static_cast<double>(i));
        EXPECT_EQ(number_field(lines[i], "wilson_draws"), 0.0);
        EXPECT_TRUE(std::isfinite(number_field(lines[i], "kappa")));
    }

    // library replay of the same stream reproduces the final estimate bit for bit
    Graph lib_g = g0;
    auto store = read_index_file(idx, lib_g);
    std::ifstream in(upd);
    auto events = parse_update_stream(in, lib_g);
    for (const auto& ev : events) apply_update(store, lib_g, ev);
    EXPECT_EQ(number_field(lines.back(), "kappa"), current_estimate(store));
    EXPECT_EQ(serialize(read_index_file(out_idx, lib_g)), serialize(store));

    // an index carrying importance weights cannot be replayed with bsm
    const auto upd2 = temp_path("replay_updates2.txt");
    const auto g_after = graph_file("replay_after.txt", lib_g);
    ASSERT_EQ(run_cli("gen-updates " + g_after + " " + upd2 + " --count 1 --seed 1").exit_code, 0);
    EXPECT_EQ(run_cli("update-replay " + g_after + " " + out_idx + " " + upd2 + " --mode bsm").exit_code, 2);
}

TEST(Cli, CorruptIndexExitsFive) {
    const auto g = graph_file("k4.txt", complete_graph(4));
    const auto idx = temp_path("corrupt.kfi");
    ASSERT_EQ(run_cli("index build " + g + " " + idx + " --samples 10").exit_code, 0);
    auto bytes = read_file(idx);
    bytes[0] = 'Z';
    support::write_text(idx, bytes);
    const auto upd = temp_path("corrupt_updates.txt");
    support::write_text(upd, "D 0 1\n");
    EXPECT_EQ(run_cli("update-replay " + g + " " + idx + " " + upd).exit_code, 5);
    // index built for another graph
    const auto idx2 = temp_path("other.kfi");
    ASSERT_EQ(run_cli("index build " + graph_file("c5.txt", cycle_graph(5)) + " " + idx2).exit_code, 0);
    EXPECT_EQ(run_cli("update-replay " + g + " " + idx2 + " " + upd).exit_code, 5);
}

TEST(Cli, RebuildAndBsmAgree) {
    auto rng = stream_rng(84, 0);
    const Graph g0 = support::random_connected_graph(200, rng, 0.02);
    const auto g = graph_file("agree.txt", g0);
    const auto idx = temp_path("agree.kfi");
    const auto upd = temp_path("agree_updates.txt");
    ASSERT_EQ(run_cli("index build " + g + " " + idx + " --samples 2000 --seed 3").exit_code, 0);
    ASSERT_EQ(run_cli("gen-updates " + g + " " + upd + " --count 10 --seed 4").exit_code, 0);
    auto bsm = lines_of(run_cli("update-replay " + g + " " + idx + " " + upd + " --mode bsm").out);
    auto rebuild = lines_of(run_cli("update-replay " + g + " " + idx + " " + upd + " --mode rebuild").out);
    ASSERT_EQ(bsm.size(), 10u);
    ASSERT_EQ(rebuild.size(), 10u);
    const double kb = number_field(bsm.back(), "kappa"), kr = number_field(rebuild.back(), "kappa");
    EXPECT_LE(std::fabs(kb - kr) / kr, 0.1);
}

TEST(Cli, OracleCheckPasses) {
    auto run = run_cli("oracle-check --max-n 6 --graphs-per-size 4 --seed 3");
    EXPECT_EQ(run.exit_code, 0);
    EXPECT_NE(run.out.find("\"passed\":true"), std::string::npos);
    EXPECT_EQ(run_cli("oracle-check --max-n 12").exit_code, 2);
}
