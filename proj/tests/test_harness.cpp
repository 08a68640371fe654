#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aquaperc/harness.hpp"
#include "doctest.h"

using namespace aquaperc;
using namespace aquaperc::harness;

namespace {

ScenarioSpec mini_scenario(const char* water, double backscatter) {
    ScenarioSpec spec;
    spec.name = std::string("mini_") + water;
    spec.water_type = water;
    spec.backscatter = backscatter;
    spec.leg_depths = {2.0, 3.0};
    spec.steps_per_leg = 4;
    spec.lattice_distances = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    spec.lattice_lights = {0.0, 0.5, 1.0};
    spec.spp = 12;
    spec.image_width = 128;
    spec.image_height = 72;
    return spec;
}

}  // namespace

TEST_CASE("operation plan builds the lawnmower lattice") {
    ScenarioSpec spec = mini_scenario("JI", 0.0183);
    OperationPlan plan = OperationPlan::build(spec);
    CHECK(plan.waypoints.size() == 8);
    CHECK(plan.waypoints[0].leg == 0);
    CHECK(plan.waypoints[5].leg == 1);
    CHECK(plan.waypoints[1].along_track == doctest::Approx(0.5));
    ScenarioSpec bad = spec;
    bad.leg_depths.clear();
    CHECK_THROWS(OperationPlan::build(bad));
}

TEST_CASE("gradient policy controller arithmetic") {
    // At the target gradient the distance holds.
    auto [d1, l1] = gradient_policy_step(0.1, 0.1, 0.5, 1.5, 0.4, 0.5, 3.0);
    CHECK(d1 == doctest::Approx(1.5));
    CHECK(l1 == doctest::Approx(0.4));
    // Too little detail: move closer.
    auto [d2, l2] = gradient_policy_step(0.05, 0.1, 0.5, 1.5, 0.4, 0.5, 3.0);
    CHECK(d2 < 1.5);
    // Too much detail: back off, but the step is bounded by the gain.
    auto [d3, l3] = gradient_policy_step(10.0, 0.1, 0.5, 1.5, 0.4, 0.5, 3.0);
    CHECK(d3 <= 1.5 * 1.5);
    CHECK(d3 <= 3.0);
    CHECK_THROWS(gradient_policy_step(0.1, 0.0, 0.5, 1.5, 0.4, 0.5, 3.0));
}

TEST_CASE("fixed policy trace stays on its lattice point") {
    ScenarioSpec spec = mini_scenario("JI", 0.0183);
    OperationPlan plan = OperationPlan::build(spec);
    LatticeCache cache(spec, "", 99);
    PolicyTrace trace = run_policy(plan, FixedPolicy{1.0, 0.5}, 7, cache);
    REQUIRE(trace.steps.size() == plan.waypoints.size());
    for (const auto& s : trace.steps) {
        CHECK(s.distance == doctest::Approx(1.0));
        CHECK(s.light == doctest::Approx(0.5));
    }
    // Lattice closure for every policy output.
    for (const auto& s : trace.steps) {
        bool on_lattice = false;
        for (double d : spec.lattice_distances)
            if (std::abs(d - s.distance) < 1e-9) on_lattice = true;
        CHECK(on_lattice);
    }
}

TEST_CASE("traces are deterministic for a fixed seed") {
    ScenarioSpec spec = mini_scenario("JII", 0.05);
    OperationPlan plan = OperationPlan::build(spec);
    LatticeCache cache(spec, "", 5);
    PolicyTrace t1 = run_policy(plan, GradientPolicy{}, 3, cache);
    PolicyTrace t2 = run_policy(plan, GradientPolicy{}, 3, cache);
    REQUIRE(t1.steps.size() == t2.steps.size());
    for (size_t i = 0; i < t1.steps.size(); ++i) {
        CHECK(t1.steps[i].distance == t2.steps[i].distance);
        CHECK(t1.steps[i].match.n_inliers == t2.steps[i].match.n_inliers);
    }
}

TEST_CASE("aggregate: coverage counts only usable frames") {
    PolicyTrace trace;
    trace.policy = "synthetic";
    for (int i = 0; i < 4; ++i) {
        StepRecord s;
        s.distance = 1.0;
        s.light = 0.5;
        s.match.n_features = 100;
        s.match.n_matches = 50;
        s.match.n_inliers = i < 2 ? 30 : 0;  // half usable
        s.match.inlier_ratio = i < 2 ? 0.6 : 0.0;
        s.coverage = i < 2 ? 2.5 : 0.0;
        trace.steps.push_back(s);
    }
    ScenarioSpec spec = mini_scenario("JI", 0.0183);
    Aggregate agg = aggregate(trace, spec);
    CHECK(agg.mean_inliers == doctest::Approx(15.0));
    CHECK(agg.total_coverage == doctest::Approx(5.0));
    CHECK(agg.usable_fraction == doctest::Approx(0.5));

    PolicyTrace empty_usable = trace;
    for (auto& s : empty_usable.steps) {
        s.match.n_inliers = 0;
        s.coverage = 0.0;
    }
    CHECK(aggregate(empty_usable, spec).total_coverage == doctest::Approx(0.0));
    CHECK_THROWS(aggregate(PolicyTrace{}, spec));
}

TEST_CASE("fixed-distance coverage equals count times footprint when all usable") {
    ScenarioSpec spec = mini_scenario("JI", 0.0183);
    render::SceneState base = spec.base_scene();
    double per_frame = imstats::coverage_area(1.0, base.camera.fov_h, base.camera.aspect(), true);
    PolicyTrace trace;
    for (int i = 0; i < 6; ++i) {
        StepRecord s;
        s.distance = 1.0;
        s.match.n_inliers = kUsableInliers + 5;
        s.coverage = per_frame;
        trace.steps.push_back(s);
    }
    Aggregate agg = aggregate(trace, spec);
    CHECK(agg.total_coverage == doctest::Approx(6.0 * per_frame));
}

TEST_CASE("lattice cache round trips through disk") {
    ScenarioSpec spec = mini_scenario("JI", 0.0183);
    spec.spp = 4;
    auto dir = std::filesystem::temp_directory_path() / "aquaperc_cache_test";
    std::filesystem::remove_all(dir);
    {
        LatticeCache cache(spec, dir.string(), 42);
        const ImageF& img = cache.at(0, 2, 1);
        CHECK(img.width == spec.image_width);
        auto file = dir / spec.name / "0" / "1.5_0.5.pfm";
        CHECK(std::filesystem::exists(file));
    }
    {
        // Second cache instance reads the PFM back instead of rendering.
        LatticeCache cache(spec, dir.string(), 42);
        const ImageF& img = cache.at(0, 2, 1);
        CHECK(img.height == spec.image_height);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("compare_report writes traces, summary, and plots") {
    ScenarioSpec spec = mini_scenario("JI", 0.0183);
    OperationPlan plan = OperationPlan::build(spec);
    LatticeCache cache(spec, "", 11);
    std::map<std::string, PolicyTrace> traces;
    PolicyTrace a = run_policy(plan, FixedPolicy{1.0, 0.5}, 3, cache);
    PolicyTrace b = run_policy(plan, FixedPolicy{2.0, 0.0}, 3, cache);
    traces[a.policy] = a;
    traces[b.policy] = b;

    auto dir = std::filesystem::temp_directory_path() / "aquaperc_report_test";
    std::filesystem::remove_all(dir);
    compare_report(traces, spec, dir.string());
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / (a.policy + "_trace.csv")));
    CHECK(std::filesystem::exists(dir / "params_distance.svg"));
    CHECK(std::filesystem::exists(dir / "inliers.svg"));

    // One summary row per policy.
    std::ifstream in(dir / "summary.csv");
    std::string line;
    int policy_rows = 0;
    bool niqe_note = false;
    while (std::getline(in, line)) {
        if (line.find("niqe") != std::string::npos) niqe_note = true;
        if (line.rfind("fixed_", 0) == 0) ++policy_rows;
    }
    CHECK(policy_rows == 2);
    CHECK(niqe_note);
    std::filesystem::remove_all(dir);

    CHECK_THROWS(compare_report({{a.policy, a}}, spec, dir.string()));
}
