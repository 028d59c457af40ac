#include <catch2/catch_amalgamated.hpp>

#include "loadsig/association.hpp"
#include "loadsig/error.hpp"
#include "loadsig/heaterbench.hpp"
#include "support.hpp"

using namespace loadsig;

namespace {

LoadEvent ev(std::int64_t t, double p, double q, PhaseTag phase = PhaseTag::A) {
    LoadEvent e;
    e.t = t;
    e.phase = phase;
    e.direction = p > 0 ? Direction::On : Direction::Off;
    e.delta_p = p;
    e.delta_q = q;
    e.thd = 0.05;
    return e;
}

PatternStep step(AssociationType t, Direction d = Direction::On) {
    PatternStep s;
    s.type = t;
    s.direction = d;
    return s;
}

}  // namespace

TEST_CASE("segment lengths are one and a half average durations") {
    const auto table = default_condition_table();
    // Average durations (min) and the published segment lengths (min).
    const struct {
        const char* row;
        double duration;
        double segment;
    } rows[] = {{"fridge", 15, 22.5},    {"furnace", 20, 30},    {"microwave", 4, 6},  {"stove_big", 25, 37.5},
                {"stove_small", 25, 37.5}, {"kettle", 4, 6},     {"oven", 10, 15},     {"washer_front", 45, 67.5},
                {"washer_top", 45, 67.5},  {"dryer", 50, 75}};
    AssociationParams p;
    for (const auto& r : rows) {
        INFO(r.row);
        const auto& row = find_row(table, r.row);
        CHECK(row.avg_duration_min == r.duration);
        CHECK(segment_length_s(row, p) == 1.5 * r.duration * 60.0);
        CHECK(segment_length_s(row, p) == r.segment * 60.0);
    }
}

TEST_CASE("association criteria") {
    const AssociationParams p;
    CHECK(classify_association(12, 1, 12, p) == AssociationType::Single);
    CHECK(classify_association(21, 2, 12, p) == AssociationType::Repetitive);
    CHECK(classify_association(4, 1, 12, p) == AssociationType::Occasional);
    CHECK(classify_association(3, 1, 12, p) == AssociationType::Unrelated);
    CHECK(classify_association(2, 1, 12, p) == AssociationType::Unrelated);
    // Boundaries are inclusive: N = cM and N = bM.
    CHECK(classify_association(8, 1, 10, p) == AssociationType::Single);
    CHECK(classify_association(3, 1, 10, p) == AssociationType::Occasional);

    AssociationParams bad;
    bad.b = 0.8;
    bad.c = 0.3;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK(parse_association_type("occasional") == AssociationType::Occasional);
    CHECK_THROWS_AS(parse_association_type("sometimes"), Error);
}

TEST_CASE("classification exhaustiveness and threshold monotonicity") {
    const auto msg = testsupport::check_classification(20000, 4);
    INFO(msg);
    CHECK(msg.empty());
}

TEST_CASE("segments start at each authentic ON event") {
    auto row = find_row(default_condition_table(), "oven");  // 10 min: 900 s segments
    row.phase = PhaseCondition::Single;
    const auto authentic = make_cluster({ev(1000, 300, 50), ev(5000, 310, 50)});
    const std::vector<LoadEvent> all{ev(990, 100, 1),         ev(1000, 300, 50),  ev(1100, 2000, 0),
                                     ev(1200, -120, -5),      ev(1300, 80, 2, PhaseTag::B),
                                     ev(1899, -300, -50),     ev(1900, 50, 5),    ev(5000, 310, 50),
                                     ev(5500, -310, -50)};
    const auto segs = build_segments(authentic, all, row, {});
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].span == Interval{1000, 1900});
    REQUIRE(segs[0].events.size() == 3);  // anchor, -120, -300; B-leg and the 2 kW outlier dropped
    CHECK(segs[0].events[0] == all[1]);
    CHECK(segs[0].events[2].t == 1899);
    CHECK(segs[1].events.size() == 2);
}

TEST_CASE("associated classes assemble into a cycle") {
    // Ten runs: 500 W start, a 200 W element cycled twice, a 4-in-10 80 W
    // accessory, then the 500 W stop.
    std::vector<LoadEvent> all;
    for (int r = 0; r < 10; ++r) {
        const std::int64_t s = 10000 + r * 5000;
        const double k = 1.0 + 0.001 * r;
        all.push_back(ev(s, 500 * k, 50 * k));
        for (int rep = 0; rep < 2; ++rep) {
            all.push_back(ev(s + 60 + rep * 140, 200 * k, 20 * k));
            all.push_back(ev(s + 120 + rep * 140, -200 * k, -20 * k));
        }
        if (r % 3 == 0) {
            all.push_back(ev(s + 300, 80, 30));
            all.push_back(ev(s + 330, -80, -30));
        }
        all.push_back(ev(s + 400, -500 * k, -50 * k));
    }
    std::stable_sort(all.begin(), all.end(), [](const LoadEvent& a, const LoadEvent& b) { return a.t < b.t; });
    std::vector<LoadEvent> anchors;
    for (const auto& e : all)
        if (e.delta_p > 400) anchors.push_back(e);
    auto row = find_row(default_condition_table(), "oven");

    const AssociationParams ap;
    const auto segs = build_segments(make_cluster(anchors), all, row, ap);
    REQUIRE(segs.size() == 10);
    const auto classes = associate_segments(segs, row.weights, {}, ap);
    const auto cycle = assemble_cycle("oven", classes, segs.size());
    REQUIRE(cycle.steps.size() == 6);
    CHECK(cycle.pattern() == "1 -> 2* -> 3* -> (4 -> 5) -> 6");
    CHECK(cycle.steps[0].n_total == 10);
    CHECK(cycle.steps[1].n_total == 20);
    CHECK(cycle.steps[1].n_max == 2);
    CHECK(cycle.steps[3].n_total == 4);
    CHECK(cycle.steps[5].direction == Direction::Off);
    CHECK(cycle.steps[5].median_offset_s == 400);
    CHECK_FALSE(cycle.open_cycle);
    CHECK_FALSE(cycle.multiple_off);

    std::size_t anchors_seen = 0;
    for (const auto& c : classes) {
        anchors_seen += c.anchors;
        std::size_t sum = 0;
        for (auto n : c.per_segment) sum += n;
        CHECK(sum == c.n_total);
    }
    CHECK(anchors_seen == 10);
}

TEST_CASE("a lone anchor class is an open cycle") {
    const auto row = find_row(default_condition_table(), "kettle");
    std::vector<LoadEvent> all{ev(100, 1500, 5), ev(10000, 1500, 5), ev(20000, 1500, 5)};
    const auto segs = build_segments(make_cluster(all), all, row, {});
    const auto classes = associate_segments(segs, row.weights, {}, {});
    const auto cycle = assemble_cycle("kettle", classes, segs.size());
    CHECK(cycle.pattern() == "1");
    CHECK(cycle.open_cycle);
    CHECK_FALSE(cycle.warnings.empty());
    CHECK_THROWS_AS(assemble_cycle("kettle", {}, 0), Error);
}

TEST_CASE("pattern notation") {
    CycleSignature c;
    c.steps = {step(AssociationType::Single), step(AssociationType::Repetitive), step(AssociationType::Occasional),
               step(AssociationType::Single, Direction::Off)};
    CHECK(c.pattern() == "1 -> 2* -> (3) -> 4");
    c.steps.push_back(step(AssociationType::Occasional));
    CHECK(c.pattern() == "1 -> 2* -> (3) -> 4 -> (5)");
}

TEST_CASE("heater bench association table") {
    const auto report = run_heater_bench(1);
    INFO(format_heater_report(report));
    CHECK(report.m == 12);
    CHECK(report.all_match);
    CHECK(report.pattern == "1 -> 2* -> 3* -> 4 -> (5 -> 6) -> 7");
    for (std::uint64_t seed = 2; seed <= 6; ++seed) {
        INFO("seed " << seed);
        CHECK(run_heater_bench(seed).all_match);
    }
}

TEST_CASE("heater lab runs follow the plan") {
    const auto lab = heater_lab_scenarios(1);
    std::map<std::string, int> count;
    for (const auto& e : lab.data.truth.events) ++count[e.state];
    CHECK(count["E1"] == 12);
    CHECK(count["E2"] == 21);
    CHECK(count["E3"] == 21);
    CHECK(count["E6"] == 4);
    CHECK(count["E8"] == 3);
    CHECK(count["E10"] == 2);
    CHECK(std::count(lab.element_repeats.begin(), lab.element_repeats.end(), 1) == 3);
}
