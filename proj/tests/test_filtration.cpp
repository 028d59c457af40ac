#include <catch2/catch_amalgamated.hpp>

#include "loadsig/error.hpp"
#include "loadsig/filtration.hpp"
#include "support.hpp"

using namespace loadsig;

namespace {

LoadEvent on_event(std::int64_t t, double p, double q, double thd_pct, bool spike, PhaseTag phase = PhaseTag::A) {
    LoadEvent e;
    e.t = t;
    e.phase = phase;
    e.delta_p = p;
    e.delta_q = q;
    e.thd = thd_pct / 100.0;
    e.spike = spike;
    return e;
}

std::string config_error(std::string_view text) {
    try {
        parse_condition_table(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    return "no error";
}

bool contains(const std::string& s, std::string_view part) { return s.find(part) != std::string::npos; }

const std::string kRow = R"({"name": "x", "P_W": [1, 2], "Q_var": [0, 1], "THD_pct": [0, 5], "spike": "no",
  "phase": "single", "avg_duration_min": 5, "category": "linear_active", "windows": )";

}  // namespace

TEST_CASE("shipped condition table carries the published ranges") {
    const auto t = default_condition_table();
    REQUIRE(t.size() == 10);
    struct Expect {
        const char* name;
        Range p, q, thd;
        SpikeRequirement spike;
        PhaseCondition phase;
    };
    using S = SpikeRequirement;
    using P = PhaseCondition;
    const Expect rows[] = {
        {"fridge", {70, 300}, {30, 200}, {0, 20}, S::Yes, P::Single},
        {"furnace", {120, 800}, {200, 800}, {0, 20}, S::Yes, P::Single},
        {"microwave", {800, 2500}, {80, 500}, {20, 50}, S::No, P::Single},
        {"stove_big", {1800, 3000}, {0, 30}, {0, 5}, S::No, P::Double},
        {"stove_small", {1000, 2000}, {0, 30}, {0, 5}, S::No, P::Double},
        {"oven", {2200, 3600}, {0, 30}, {0, 5}, S::No, P::Double},
        {"kettle", {1300, 3000}, {0, 30}, {0, 5}, S::No, P::Single},
        {"dryer", {3000, 6000}, {60, 250}, {0, 5}, S::Yes, P::Double},
        {"washer_front", {80, 300}, {0, 100}, {65, 95}, S::Yes, P::Single},
        {"washer_top", {300, 1000}, {300, 1200}, {0, 20}, S::Yes, P::Single},
    };
    for (const auto& e : rows) {
        INFO(e.name);
        const auto& r = find_row(t, e.name);
        CHECK(r.p_w == e.p);
        CHECK(r.q_var == e.q);
        CHECK(r.thd_pct == e.thd);
        CHECK(r.spike == e.spike);
        CHECK(r.phase == e.phase);
    }
    CHECK(find_row(t, "fridge").windows == std::vector<SearchWindow>{{2 * 3600, 5 * 3600, DaySet::All}});
    CHECK(find_row(t, "stove_big").windows == std::vector<SearchWindow>{{16 * 3600, 20 * 3600, DaySet::All}});
    CHECK_THROWS_AS(find_row(t, "toaster"), Error);
}

TEST_CASE("weights follow the load category") {
    const auto t = default_condition_table();
    CHECK(find_row(t, "fridge").weights == Weights{0.45, 0.45, 0.10});
    CHECK(find_row(t, "stove_big").weights == Weights{0.60, 0.10, 0.30});
    CHECK(find_row(t, "microwave").weights == Weights{0.45, 0.10, 0.45});
    for (auto c : {Category::LinearActive, Category::LinearReactive, Category::NonlinearActive, Category::NonlinearReactive}) {
        const auto w = default_weights(c);
        CHECK(w.p + w.q + w.h == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("condition table JSON round trip") {
    const auto t = default_condition_table();
    CHECK(parse_condition_table(format_condition_table(t)) == t);
}

TEST_CASE("condition table errors name the field") {
    CHECK(contains(config_error("{"), "invalid JSON"));
    CHECK(contains(config_error("{}"), "expected an array"));
    CHECK(contains(config_error("[" + kRow + R"([{"start": "25:00", "end": "26:00"}]}])"), "conditions[0].windows[0].start"));
    CHECK(contains(config_error("[" + kRow + R"([{"start": "08:00", "end": "07:00"}]}])"), "conditions[0].windows[0]"));
    CHECK(contains(config_error("[" + kRow + R"([{"start": "08:00", "end": "12:00"}, {"start": "11:00", "end": "13:00"}]}])"),
                   "overlap"));
    CHECK(contains(config_error("[" + kRow + R"([{"start": "08:00", "end": "12:00", "days": "sometimes"}]}])"),
                   "conditions[0].windows[0].days"));
    CHECK(contains(config_error(R"([{"name": "x"}])"), "conditions[0]"));
    const std::string row = kRow + R"([{"start": "08:00", "end": "12:00"}]})";
    CHECK(contains(config_error("[" + row + "," + row + "]"), "duplicate row"));
    // Weekday and weekend windows may share hours.
    CHECK_NOTHROW(parse_condition_table(
        "[" + kRow + R"([{"start": "08:00", "end": "12:00", "days": "weekday"}, {"start": "09:00", "end": "24:00", "days": "weekend"}]}])"));
}

TEST_CASE("row validation") {
    auto r = find_row(default_condition_table(), "fridge");
    CHECK_NOTHROW(r.validate());
    auto bad = r;
    bad.p_w = {300, 70};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = r;
    bad.weights = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = r;
    bad.avg_duration_min = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = r;
    bad.windows.clear();
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("each condition is checked") {
    const auto fridge = find_row(default_condition_table(), "fridge");
    CHECK(matches_conditions(on_event(0, 120, 80, 10, true), fridge));
    CHECK(matches_conditions(on_event(0, 120, -80, 10, true), fridge));  // |dQ|
    CHECK(matches_conditions(on_event(0, 70, 30, 0, true), fridge));     // closed bounds
    CHECK(matches_conditions(on_event(0, 300, 200, 20, true), fridge));
    CHECK_FALSE(matches_conditions(on_event(0, 69.9, 80, 10, true), fridge));
    CHECK_FALSE(matches_conditions(on_event(0, 120, 20, 10, true), fridge));
    CHECK_FALSE(matches_conditions(on_event(0, 120, 80, 25, true), fridge));
    CHECK_FALSE(matches_conditions(on_event(0, 120, 80, 10, false), fridge));
    CHECK_FALSE(matches_conditions(on_event(0, 120, 80, 10, true, PhaseTag::AB), fridge));
    auto off = on_event(0, -120, -80, 10, true);
    off.direction = Direction::Off;
    CHECK_FALSE(matches_conditions(off, fridge));
    auto unknown = on_event(0, 120, 80, 10, true);
    unknown.thd.reset();
    CHECK(matches_conditions(unknown, fridge));  // range starts at 0

    const auto stove = find_row(default_condition_table(), "stove_big");
    CHECK(matches_conditions(on_event(0, 2400, 5, 1, false, PhaseTag::AB), stove));
    CHECK_FALSE(matches_conditions(on_event(0, 2400, 5, 1, false, PhaseTag::B), stove));
    CHECK_FALSE(matches_conditions(on_event(0, 2400, 5, 1, true, PhaseTag::AB), stove));

    const auto washer = find_row(default_condition_table(), "washer_front");
    auto w = on_event(0, 150, 40, 80, true);
    w.thd.reset();
    CHECK_FALSE(matches_conditions(w, washer));  // unknown THD cannot satisfy 65-95 %
    auto either = washer;
    either.spike = SpikeRequirement::Either;
    CHECK(matches_conditions(on_event(0, 150, 40, 80, false), either));
}

TEST_CASE("search windows splice across days, weekends and gaps") {
    const auto table = default_condition_table();
    // Monday 2024-01-01 for 7 days; leg A only.
    auto rec = testsupport::step_recording({}, 7 * 86400, 50.0, 0.0, 1, false);

    SECTION("daily window") {
        const auto d = splice_data_pieces(rec, find_row(table, "fridge"));
        REQUIRE(d.pieces.size() == 7);
        for (int k = 0; k < 7; ++k) CHECK(d.pieces[k] == Interval{k * 86400 + 7200, k * 86400 + 18000});
        CHECK(d.total_seconds() == 7 * 3 * 3600);
    }
    SECTION("weekend only") {
        const auto d = splice_data_pieces(rec, find_row(table, "dryer"));
        REQUIRE(d.pieces.size() == 2);  // Saturday and Sunday
        CHECK(d.pieces[0] == Interval{5 * 86400 + 8 * 3600, 5 * 86400 + 23 * 3600});
        CHECK(d.pieces[1] == Interval{6 * 86400 + 8 * 3600, 6 * 86400 + 23 * 3600});
    }
    SECTION("adjacent windows join across midnight") {
        auto row = find_row(table, "furnace");
        row.windows = {{0, 2 * 3600, DaySet::All}, {22 * 3600, 86400, DaySet::All}};
        const auto d = splice_data_pieces(rec, row);
        REQUIRE(d.pieces.size() == 8);
        CHECK(d.pieces[0] == Interval{0, 7200});
        CHECK(d.pieces[1] == Interval{86400 - 7200, 86400 + 7200});
        CHECK(d.pieces[6] == Interval{6 * 86400 - 7200, 6 * 86400 + 7200});
        CHECK(d.pieces[7] == Interval{7 * 86400 - 7200, 7 * 86400});
    }
    SECTION("gaps are cut out") {
        for (std::int64_t t = 3 * 3600; t < 3 * 3600 + 60; ++t) rec.clear_sample(Phase::A, t);
        rec.finalize();
        const auto d = splice_data_pieces(rec, find_row(table, "fridge"));
        REQUIRE(d.pieces.size() == 8);
        CHECK(d.pieces[0] == Interval{7200, 10800});
        CHECK(d.pieces[1] == Interval{10860, 18000});
        CHECK(d.covers(7200, 10800));
        CHECK_FALSE(d.covers(10790, 10870));
    }
    SECTION("epoch moves the windows") {
        const auto shifted = rec.with_epoch(Epoch::parse("2024-01-01T03:00:00"));
        const auto d = splice_data_pieces(shifted, find_row(table, "fridge"));
        CHECK(d.pieces.front() == Interval{0, 7200});
        // The last window opens an hour before the recording ends.
        CHECK(d.pieces.back() == Interval{6 * 86400 + 23 * 3600, 7 * 86400});
    }
    SECTION("no overlap is an insufficient-data error") {
        const auto short_rec = testsupport::step_recording({}, 3600, 50.0, 0.0, 1, false);
        try {
            splice_data_pieces(short_rec, find_row(table, "fridge"));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Insufficient);
        }
    }
}

TEST_CASE("suspects need the guard seconds inside a piece") {
    const auto fridge = find_row(default_condition_table(), "fridge");
    SearchDomain d{{Interval{100, 200}}};
    const std::vector<LoadEvent> ev{on_event(100, 120, 80, 10, true), on_event(103, 120, 80, 10, true),
                                    on_event(150, 120, 80, 10, true), on_event(197, 120, 80, 10, true),
                                    on_event(198, 120, 80, 10, true), on_event(150, 20, 80, 10, true)};
    const auto s = filter_suspects(ev, fridge, d);
    REQUIRE(s.events.size() == 3);
    CHECK(s.events[0].t == 103);
    CHECK(s.events[2].t == 197);
    CHECK(s.appliance == "fridge");
    CHECK(filter_suspects(ev, fridge, d, {0, 0}).events.size() == 5);
}

TEST_CASE("widening ranges never removes a suspect") {
    const auto msg = testsupport::check_filtration_monotonicity(2000, 5);
    INFO(msg);
    CHECK(msg.empty());
}
