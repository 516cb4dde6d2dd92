#include "curvekit/incidence.hpp"
#include "curvekit/invariants.hpp"
#include "curvekit/surgery.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace ck;

namespace {

int crossings(const GraphArc& a, const GraphArc& b) {
    int n = 0;
    for (size_t i = 0; i + 1 < a.size(); ++i) {
        double d0 = b.y[i] - a.y[i], d1 = b.y[i + 1] - a.y[i + 1];
        if ((d0 < 0) != (d1 < 0)) ++n;
    }
    return n;
}

void check_contract(const SurgeryOutcome& o) {
    CHECK(o.sigma_plus_after <= o.sigma_plus_before);
    CHECK(o.c2_regular);
    CHECK(o.curvature_jump < 0.25);
    CHECK(oracle::connected(o.result));
    CHECK(o.inflections_added <= 2);
    CHECK(o.classes.size() == o.predicted_added.size());
}

// The tangent line at each interior sample must miss the part of the arm between that sample and the vortex.
bool tangent_misses_inner_arc(const std::vector<Vec2>& arm) {
    auto cr = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
    for (size_t i = 2; i + 2 < arm.size(); ++i) {
        Vec2 t = (arm[i + 1] - arm[i - 1]).normalized();
        double side = 0;
        for (size_t j = 0; j + 2 <= i; ++j) {
            double s = cr(t, arm[j] - arm[i]);
            if (side == 0) side = s;
            if (s * side <= 0) return false;
        }
    }
    return true;
}

}  // namespace

TEST_SUITE("surgery") {

TEST_CASE("spiral arms meet their tangent lines only at the tangency") {
    std::vector<Vec2> log_arm;
    for (int k = 0; k <= 3000; ++k) {
        double th = 6 * kPi * (1 - k / 3000.0);
        log_arm.push_back(std::exp(-0.2 * th) * Vec2(std::cos(th), std::sin(th)));
    }
    CHECK(tangent_misses_inner_arc(log_arm));
    auto ds = double_spiral_from_graph(GraphArc::sample([](double x) { return x * x; }, -1, 1, 401));
    CHECK(tangent_misses_inner_arc(ds.arm1));
    CHECK(tangent_misses_inner_arc(ds.arm2));
}

TEST_CASE("double spiral classes of model graphs") {
    auto sq = double_spiral_from_graph(GraphArc::sample([](double x) { return x * x; }, -1, 1, 201));
    CHECK(classify_double_spiral(sq) == SpiralClass::convex);
    auto cube = double_spiral_from_graph(GraphArc::sample([](double x) { return x * x * x; }, -1, 1, 201));
    CHECK(classify_double_spiral(cube) == SpiralClass::semiconvex);
    DoubleSpiral cusp;
    for (int i = 0; i <= 100; ++i) {
        double t = i / 100.0;
        cusp.arm1.push_back(Vec2(t * t, t * t * t));
        cusp.arm2.push_back(Vec2(t * t, -t * t * t));
    }
    CHECK(classify_double_spiral(cusp) == SpiralClass::concave);
    CHECK(cusp.classification == SpiralClass::concave);
}

TEST_CASE("zero-preserving mollifier keeps zeros and signs") {
    Tolerances tol;
    ScalarField saw(512), sine(512);
    for (size_t i = 0; i < 512; ++i) {
        double t = 4.0 * double(i) / 512;
        saw[i] = std::abs(std::fmod(t, 1.0) - 0.5) * 4 - 1;
        sine[i] = std::sin(kTwoPi * double(i) / 512);
    }
    auto m = mollify_zero_preserving(saw, 0.05, tol);
    CHECK(count_sign_changes(m, tol).count == count_sign_changes(saw, tol).count);
    for (size_t i = 0; i < 512; ++i)
        if (saw[i] != 0) CHECK((m[i] > 0) == (saw[i] > 0));
    auto ms = mollify_zero_preserving(sine, 0.01, tol);
    double dev = 0;
    for (size_t i = 0; i < 512; ++i) dev = std::max(dev, std::abs(ms[i] - sine[i]));
    CHECK(dev < 0.02);
}

TEST_CASE("bump perturbation lifts the vertex and keeps convexity") {
    auto g = GraphArc::sample([](double x) { return x * x; }, -1, 1, 201);
    auto b = bump_perturb(g, 0.01);
    CHECK(b.eval(0) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(b.eval(0.9) == doctest::Approx(g.eval(0.9)));
    for (double v : b.second_derivative()) CHECK(v > 0);
}

TEST_CASE("tangential intersections are separated, transversal ones kept") {
    auto up = GraphArc::sample([](double x) { return x * x; }, -1, 1, 401);
    auto dn = GraphArc::sample([](double x) { return -x * x; }, -1, 1, 401);
    auto [a, b] = separate_tangential_intersection(up, dn);
    CHECK(crossings(a, b) == 0);
    auto l1 = GraphArc::sample([](double x) { return x; }, -1, 1, 401);
    auto l2 = GraphArc::sample([](double x) { return -x; }, -1, 1, 401);
    auto [p, q] = separate_tangential_intersection(l1, l2);
    for (size_t i = 0; i < q.size(); ++i) CHECK(q.y[i] == doctest::Approx(l2.y[i]));
    CHECK(crossings(p, q) == 1);
}

TEST_CASE("desingularizing classical cusps") {
    auto card = oracle::lift([](double t) { return Vec2(2 * std::cos(t) - std::cos(2 * t), 2 * std::sin(t) - std::sin(2 * t)); },
                             1024, 0.2);
    auto o = desingularize(card, 0, 0.08);
    check_contract(o);
    CHECK(o.classes == std::vector<SpiralClass>{SpiralClass::concave});
    CHECK(singular_points(o.result).count == 0);
    auto tear = oracle::lift([](double t) { return Vec2(std::cos(t), std::sin(t) * std::abs(std::sin(t / 2))); }, 1024, 0.4);
    auto ot = desingularize(tear, 0, 0.1);
    check_contract(ot);
    CHECK(ot.classes == std::vector<SpiralClass>{SpiralClass::convex});
    CHECK(ot.inflections_added == 0);
}

TEST_CASE("resolving double points") {
    auto lim = oracle::lift([](double t) { double r = 0.5 + std::cos(t); return Vec2(r * std::cos(t), r * std::sin(t)); }, 1024, 0.4);
    auto o = resolve_double_point(lim, {2 * kPi / 3, 4 * kPi / 3});
    check_contract(o);
    CHECK(coincidence_pairs(o.result).first.count() == 0);
    auto eight = oracle::lift([](double t) { return Vec2(std::sin(t), std::sin(t) * std::cos(t)); }, 1024, 0.5);
    auto o8 = resolve_double_point(eight, {0, kPi});
    check_contract(o8);
    CHECK(coincidence_pairs(o8.result).first.count() == 0);
}

TEST_CASE("preconditions") {
    auto ellipse = oracle::lift([](double t) { return Vec2(std::cos(t), 0.5 * std::sin(t)); }, 512, 0.5);
    CHECK_THROWS_AS(resolve_double_point(ellipse, {0.5, 2.0}), Error);
    auto open = ellipse;
    open.closed = false;
    CHECK_THROWS_AS(desingularize(open, 0.0), Error);
}

TEST_CASE("samples outside the changed set are copied bit for bit") {
    auto delt = oracle::lift([](double t) { return Vec2(2 * std::cos(t) + std::cos(2 * t), 2 * std::sin(t) - std::sin(2 * t)); },
                             1024, 0.2);
    for (int k = 0; k < 3; ++k) {
        auto o = desingularize(delt, k * kTwoPi / 3, 0.08);
        std::vector<bool> changed(o.result.size(), false);
        for (size_t i : o.changed) changed[i] = true;
        size_t kept = 0;
        for (size_t i = 0; i < o.result.size(); ++i) {
            if (changed[i]) continue;
            ++kept;
            bool found = std::find(delt.pts.begin(), delt.pts.end(), o.result.pts[i]) != delt.pts.end();
            CHECK(found);
        }
        CHECK(kept > delt.size() / 2);
    }
}

TEST_CASE("every case of the surgery corpus keeps the contract") {
    Tolerances tol;
    auto cases = oracle::surgery_corpus(tol);
    CHECK(cases.size() >= 30);
    for (const auto& c : cases) {
        INFO(c.name);
        check_contract(c.run());
    }
}

}
