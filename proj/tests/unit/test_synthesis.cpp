#include "curvekit/incidence.hpp"
#include "curvekit/synthesis.hpp"
#include "curvekit/verify.hpp"

#include <doctest.h>

using namespace ck;

TEST_SUITE("synthesis") {

TEST_CASE("constant geodesic curvature integrates to a closed latitude circle") {
    double colat = 0.9;
    double k = 1 / std::tan(colat);
    double L = kTwoPi * std::sin(colat);
    auto c = curve_from_geodesic_curvature([k](double) { return k; }, L, 2001, Vec3(std::sin(colat), 0, std::cos(colat)),
                                           Vec3(0, 1, 0));
    CHECK((c.pts.front() - c.pts.back()).norm() < 1e-8);
    for (const auto& p : c.pts) CHECK(p.z() == doctest::Approx(std::cos(colat)).epsilon(1e-8));
}

TEST_CASE("sampled curvature input matches the functional form") {
    auto f = [](double s) { return 0.5 + std::sin(s); };
    ScalarField k(1001);
    for (size_t i = 0; i < k.size(); ++i) k[i] = f(4.0 * double(i) / 1000);
    auto a = curve_from_geodesic_curvature(f, 4.0, 1001, Vec3(1, 0, 0), Vec3(0, 1, 0));
    auto b = curve_from_geodesic_curvature(k, 4.0, Vec3(1, 0, 0), Vec3(0, 1, 0));
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK((a.pts[i] - b.pts[i]).norm() < 1e-6);
}

TEST_CASE("triple families") {
    auto check = [](Family f, size_t count, int sum) {
        auto ts = family_triples(f);
        CHECK(ts.size() == count);
        for (const auto& t : ts) CHECK(2 * (t[0] + t[1]) + t[2] == sum);
    };
    check(Family::eq3, 10, 6);
    check(Family::eq4, 6, 4);
    check(Family::eq5, 3, 6);
    CHECK_THROWS_AS(sharp_example(Family::eq3, {1, 1, 1}), Error);
}

TEST_CASE("sharp examples verify across sample counts") {
    Tolerances tol;
    for (size_t n : {256, 512, 2048}) {
        for (Family f : {Family::eq3, Family::eq4, Family::eq5})
            for (const auto& t : family_triples(f)) {
                INFO(to_string(f), " ", t[0], t[1], t[2], " n=", n);
                auto ex = sharp_example(f, t, n, tol);
                CHECK(ex.verified);
                auto rep = invariant_report(ex.curve, tol);
                const auto& d = f == Family::eq3 ? rep.D : rep.D_plus;
                CHECK(d.count == t[0]);
                CHECK(rep.S.count == t[1]);
                CHECK(rep.I.genuine == t[2]);
                CHECK_FALSE(any_violated(verify_spherical(ex.curve, rep, tol)));
            }
    }
}

TEST_CASE("deltoid assembly has three cusps and a hull containing the origin") {
    auto c = arc_assembly_curve(deltoid_assembly(deltoid_radius()), 1024);
    auto rep = invariant_report(c);
    CHECK(rep.S.count == 3);
    CHECK(rep.D.count == 0);
    CHECK(rep.I.count == 0);
    REQUIRE(rep.hull.has_value());
    CHECK(*rep.hull != HullClass::outside);
}

TEST_CASE("random loops satisfy their constraints") {
    Tolerances tol;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        LoopConstraints bis;
        bis.simple = bis.bisecting = true;
        auto b = random_fourier_loop(seed, 3, Ambient::sphere, bis, tol);
        CHECK(is_simple(b.curve, tol));
        CHECK(enclosed_area(b.curve, tol).bisects);
        LoopConstraints sym;
        sym.symmetric = true;
        CHECK(is_centrally_symmetric(random_fourier_loop(seed, 3, Ambient::sphere, sym, tol).curve, tol));
        LoopConstraints hull;
        hull.simple = hull.hull_interior = true;
        hull.z_offset = 0.2;
        auto h = random_fourier_loop(seed, 3, Ambient::sphere, hull, tol);
        CHECK(origin_in_hull(h.curve.pts, tol).status == HullClass::interior);
        auto again = random_fourier_loop(seed, 3, Ambient::sphere, hull, tol);
        CHECK(again.curve.pts == h.curve.pts);
    }
}

TEST_CASE("tantrix integration recovers a closed curve") {
    auto c = sample_closed(Ambient::space, 1024, [](double t) {
        return Vec3(2 * std::cos(t), std::sin(t), 0.3 * std::sin(2 * t));
    });
    auto ti = integrate_tantrix(tantrix(c));
    CHECK(ti.closure_residual < 1e-9 * arc_length(ti.curve));
    for (double v : ti.speed) CHECK(v >= 0.1);
    auto cap = sample_closed(Ambient::sphere, 256, [](double t) { return Vec3(0.3 * std::cos(t), 0.3 * std::sin(t), 1); });
    CHECK_THROWS_AS(integrate_tantrix(cap), Error);
}

}
