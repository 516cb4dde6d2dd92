#include "curvekit/incidence.hpp"
#include "curvekit/synthesis.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace ck;

TEST_SUITE("incidence") {

TEST_CASE("figure eight and limacon double points") {
    auto eight = oracle::lift([](double t) { return Vec2(std::sin(t), std::sin(t) * std::cos(t)); }, 1024, 0.5);
    auto [d8, a8] = coincidence_pairs(eight);
    REQUIRE(d8.count() == 1);
    CHECK(std::min(d8.pairs[0].first, d8.pairs[0].second) == doctest::Approx(0).epsilon(0.02));
    CHECK(std::max(d8.pairs[0].first, d8.pairs[0].second) == doctest::Approx(kPi).epsilon(0.01));
    CHECK(a8.count() == 0);
    CHECK_FALSE(is_simple(eight));
    auto lim = oracle::lift([](double t) { double r = 0.5 + std::cos(t); return Vec2(r * std::cos(t), r * std::sin(t)); }, 1024, 0.4);
    auto [dl, al] = coincidence_pairs(lim);
    REQUIRE(dl.count() == 1);
    CHECK(dl.pairs[0].first == doctest::Approx(2 * kPi / 3).epsilon(0.01));
    CHECK(dl.pairs[0].second == doctest::Approx(4 * kPi / 3).epsilon(0.01));
}

TEST_CASE("antipodal pairs of a tilted great-circle perturbation") {
    // z = 0.2 sin(2t) meets its antipodal image where z = 0 at t and t + pi
    auto c = sample_closed(Ambient::sphere, 1024, [](double t) { return Vec3(std::cos(t), std::sin(t), 0.2 * std::sin(2 * t)); });
    auto [self, anti] = coincidence_pairs(c);
    CHECK(self.count() == 0);
    CHECK(anti.count() == 2);
}

TEST_CASE("library pair detection matches the brute-force scan on random loops") {
    Tolerances tol;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 12; ++k) {
        double a[6];
        for (double& x : a) x = u(rng);
        auto c = sample_closed(Ambient::sphere, 300 + 50 * k, [&](double t) {
            return Vec3(std::cos(t) + 0.6 * a[0] * std::cos(2 * t) + 0.4 * a[1] * std::sin(3 * t),
                        std::sin(t) + 0.6 * a[2] * std::sin(2 * t) + 0.4 * a[3] * std::cos(3 * t),
                        0.5 * a[4] * std::sin(2 * t + a[5]));
        });
        for (const auto& m : oracle::compare_pairs(c, tol)) CHECK_MESSAGE(m.empty(), m);
        auto planar = sample_closed(Ambient::plane, 400, [&](double t) {
            return Vec3(std::cos(t) + a[0] * std::cos(2 * t), std::sin(t) + a[1] * std::sin(3 * t), 0);
        });
        auto [lib, unused] = coincidence_pairs(planar, tol);
        auto ref = cluster_pairs(planar, oracle::brute_scan(planar, false, tol), PairKind::coincident, tol);
        CHECK(oracle::compare_sets(planar, lib, ref, tol).empty());
    }
}

TEST_CASE("origin in hull agrees with the subset oracle") {
    Tolerances tol;
    int seen[3] = {0, 0, 0};
    for (const auto& pts : oracle::hull_point_sets(5, 150)) {
        auto lib = origin_in_hull(pts, tol);
        auto ref = oracle::hull_by_subsets(pts, tol.eps_hull);
        ++seen[int(ref)];
        CHECK(lib.status == ref);
        if (lib.status == HullClass::interior) {
            Vec3 s = Vec3::Zero();
            double w = 0;
            for (size_t k = 0; k < lib.witness.size(); ++k) {
                s += lib.weights[k] * pts[lib.witness[k]];
                w += lib.weights[k];
                CHECK(lib.weights[k] >= 0);
            }
            CHECK(s.norm() < 1e-9);
            CHECK(w == doctest::Approx(1));
        } else {
            for (const auto& p : pts) CHECK(lib.separator.dot(p) <= 1e-9);
        }
    }
    CHECK(seen[0] > 0);
    CHECK(seen[1] > 0);
    CHECK(seen[2] > 0);
}

TEST_CASE("octahedron vertices contain the origin in the interior") {
    std::vector<Vec3> pts{Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
    CHECK(origin_in_hull(pts).status == HullClass::interior);
    pts.pop_back();
    CHECK(origin_in_hull(pts).status == HullClass::boundary);
    pts.pop_back();
    CHECK(origin_in_hull(pts).status == HullClass::boundary);
    std::vector<Vec3> cap{Vec3(0.1, 0, 1), Vec3(0, 0.1, 1), Vec3(-0.1, -0.1, 1)};
    CHECK(origin_in_hull(cap).status == HullClass::outside);
}

TEST_CASE("enclosed areas of latitude circles") {
    for (double colat : {0.5, 1.2, kPi / 2}) {
        auto c = sample_closed(Ambient::sphere, 2048, [&](double t) {
            return Vec3(std::sin(colat) * std::cos(t), std::sin(colat) * std::sin(t), std::cos(colat));
        });
        auto a = enclosed_area(c);
        CHECK(a.left == doctest::Approx(kTwoPi * (1 - std::cos(colat))).epsilon(1e-5));
        CHECK(a.left + a.right == doctest::Approx(4 * kPi).epsilon(1e-12));
        CHECK(a.bisects == (colat == kPi / 2));
        auto pole = hemisphere_pole(c);
        CHECK(pole.has_value());
    }
}

TEST_CASE("nonnegative least squares") {
    Eigen::MatrixXd A(3, 3);
    A << 1, 0, 0, 0, 1, 0, 0, 0, 1;
    Eigen::VectorXd b(3);
    b << 1, -2, 3;
    auto x = nnls(A, b);
    CHECK(x[0] == doctest::Approx(1));
    CHECK(x[1] == doctest::Approx(0));
    CHECK(x[2] == doctest::Approx(3));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd M(5, 4);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = u(rng);
    Eigen::VectorXd x0(4);
    x0 << 0.5, 0, 1.5, 0.25;
    auto y = nnls(M, M * x0);
    CHECK((y - x0).norm() < 1e-8);
}

}

TEST_SUITE("incidence") {

TEST_CASE("inflection-free arcs lie in open hemispheres") {
    Tolerances tol;
    int arcs = 0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        LoopConstraints lc;
        lc.simple = lc.bisecting = true;
        auto c = random_fourier_loop(seed, 3, Ambient::sphere, lc, tol).curve;
        auto rep = invariant_report(c, tol);
        const auto& loc = rep.I.locations;
        REQUIRE(loc.size() >= 2);
        for (size_t k = 0; k < loc.size(); ++k) {
            double a = loc[k], b = k + 1 < loc.size() ? loc[k + 1] : loc[0] + kTwoPi;
            SampledCurve arc;
            arc.ambient = Ambient::sphere;
            arc.closed = false;
            for (size_t i = 0; i < c.size(); ++i) {
                double t = c.params[i] < a ? c.params[i] + kTwoPi : c.params[i];
                if (t > a && t < b) {
                    arc.params.push_back(t);
                    arc.pts.push_back(c.pts[i]);
                }
            }
            std::vector<size_t> order(arc.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return arc.params[x] < arc.params[y]; });
            SampledCurve sorted = arc;
            for (size_t i = 0; i < order.size(); ++i) {
                sorted.params[i] = arc.params[order[i]];
                sorted.pts[i] = arc.pts[order[i]];
            }
            if (sorted.size() < 3) continue;
            ++arcs;
            CHECK(hemisphere_pole(sorted, tol).has_value());
        }
    }
    CHECK(arcs >= 40);
}

}
