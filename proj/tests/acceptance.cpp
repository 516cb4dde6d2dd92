// Acceptance run: one line per criterion, nonzero exit if any fails.
#include "curvekit/flow.hpp"
#include "curvekit/incidence.hpp"
#include "curvekit/invariants.hpp"
#include "curvekit/surgery.hpp"
#include "curvekit/synthesis.hpp"
#include "curvekit/verify.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace ck;

namespace {

// Pinned tolerances.
constexpr size_t kSharpN = 1024;
constexpr double kSharpSeconds = 120.0;
constexpr size_t kFlowN = 512;
constexpr double kExtinctionRel = 0.02;
constexpr double kAreaLawRel = 1e-2;
constexpr double kRandomSeconds = 300.0;
constexpr double kJumpC2 = 0.25;  // same bound the surgery uses for c2_regular
constexpr double kGaussBonnet = 1e-3;
constexpr double kTantrixRel = 1e-2;
constexpr double kClosureRel = 1e-6;
constexpr double kRoundTrip = 1e-3;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void fail(const std::string& why) {
        if (pass) detail << " first failure: " << why << ";";
        pass = false;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Ineq family_ineq(Family f) {
    return f == Family::eq3 ? Ineq::eq3 : f == Family::eq4 ? Ineq::eq4 : Ineq::eq5;
}

const Verdict* find(const std::vector<Verdict>& vs, Ineq id) {
    for (const auto& v : vs)
        if (v.id == id) return &v;
    return nullptr;
}

void sharp_examples(Outcome& out) {
    Tolerances tol;
    auto t0 = std::chrono::steady_clock::now();
    int total = 0, ok = 0;
    for (Family f : {Family::eq3, Family::eq4, Family::eq5}) {
        auto triples = family_triples(f);
        size_t want = f == Family::eq3 ? 10 : f == Family::eq4 ? 6 : 3;
        if (triples.size() != want) out.fail(std::string(to_string(f)) + " triple count");
        for (const auto& t : triples) {
            ++total;
            std::string name = std::string(to_string(f)) + " (" + std::to_string(t[0]) + "," +
                               std::to_string(t[1]) + "," + std::to_string(t[2]) + ")";
            int sum = f == Family::eq3 ? 6 : f == Family::eq4 ? 4 : 6;
            if (2 * (t[0] + t[1]) + t[2] != sum) out.fail(name + " not on the equality line");
            try {
                auto ex = sharp_example(f, t, kSharpN, tol);
                auto rep = invariant_report(ex.curve, tol);
                const CountResult& d = f == Family::eq3 ? rep.D : rep.D_plus;
                bool match = d.finite() && rep.S.finite() && rep.I.finite() && d.count == t[0] &&
                             rep.S.count == t[1] && rep.I.genuine == t[2];
                auto vs = verify_spherical(ex.curve, rep, tol);
                const Verdict* v = find(vs, family_ineq(f));
                bool eq = v && v->status == VerdictStatus::equality && v->lhs && *v->lhs == sum;
                if (match && eq && !any_violated(vs)) ++ok;
                else out.fail(name + " measured " + d.str() + "," + rep.S.str() + "," + rep.I.str());
            } catch (const std::exception& e) {
                out.fail(name + ": " + e.what());
            }
        }
    }
    double secs = seconds_since(t0);
    if (total != 19) out.fail("expected 19 triples");
    if (secs >= kSharpSeconds) out.fail("runtime");
    out.detail << " " << ok << "/" << total << " triples verified with equality, " << secs << " s";
}

SampledCurve latitude_circle(double colat, size_t n) {
    return sample_closed(Ambient::sphere, n, [&](double t) {
        return Vec3(std::sin(colat) * std::cos(t), std::sin(colat) * std::sin(t), std::cos(colat));
    });
}

void flow_exactness(Outcome& out) {
    auto c = latitude_circle(kPi / 3, kFlowN);
    StopRule stop;
    stop.max_time = 2.0;
    auto tr = csf_run(c, stop);
    if (!tr.extinction_time) {
        out.fail("no extinction (" + tr.stop_reason + ")");
        return;
    }
    double rel = std::abs(*tr.extinction_time - std::log(2.0)) / std::log(2.0);
    if (rel >= kExtinctionRel) out.fail("extinction time off");
    double worst = 0;
    auto res = area_law_residuals(tr);
    for (double r : res) worst = std::max(worst, r);
    if (res.empty()) out.fail("no area residuals");
    if (worst >= kAreaLawRel) out.fail("area law residual");
    out.detail << " extinction t=" << *tr.extinction_time << " (rel err " << rel << "), max area residual " << worst
               << " over " << res.size() << " intervals";
}

void flow_monotonicity(Outcome& out) {
    int entered = 0, increases = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        LoopConstraints lc;
        lc.simple = true;
        lc.hull_interior = true;
        lc.z_offset = 0.2;
        lc.n = kFlowN;
        try {
            auto rl = random_fourier_loop(seed, 3, Ambient::sphere, lc);
            StopRule stop;
            stop.max_time = 5.0;
            stop.hemisphere_watch = true;
            auto tr = csf_run(rl.curve, stop);
            if (tr.hemisphere_entry_time) ++entered;
            else out.fail("seed " + std::to_string(seed) + " never entered a hemisphere (" + tr.stop_reason + ")");
            for (size_t k = 0; k < tr.states.size(); ++k)
                if (tr.inflection_counts[k] < 0 || tr.antipodal_intersection_counts[k] < 0)
                    out.fail("seed " + std::to_string(seed) + " sentinel count at state " + std::to_string(k));
            auto v = monotonicity_report(tr);
            increases += int(v.size());
            if (!v.empty()) out.fail("seed " + std::to_string(seed) + " " + v.front().quantity + " increased");
        } catch (const std::exception& e) {
            out.fail("seed " + std::to_string(seed) + ": " + e.what());
        }
    }
    out.detail << " " << entered << "/20 reached hemisphere entry, " << increases << " count increases";
}

void tennis_ball(Outcome& out) {
    Tolerances tol;
    auto t0 = std::chrono::steady_clock::now();
    int bis_ok = 0, sym_ok = 0, min_bis = 99, min_sym = 99;
    for (uint64_t seed = 0; seed < 50; ++seed) {
        LoopConstraints lc;
        lc.simple = true;
        lc.bisecting = true;
        try {
            auto rl = random_fourier_loop(seed, 3, Ambient::sphere, lc, tol);
            auto area = enclosed_area(rl.curve, tol);
            auto rep = invariant_report(rl.curve, tol);
            bool ok = area.bisects && rep.I.finite() && rep.I.genuine >= 4 && !any_violated(verify_spherical(rl.curve, rep, tol));
            min_bis = std::min(min_bis, rep.I.genuine);
            if (ok) ++bis_ok;
            else out.fail("bisecting seed " + std::to_string(seed) + " I=" + rep.I.str());
        } catch (const std::exception& e) {
            out.fail("bisecting seed " + std::to_string(seed) + ": " + e.what());
        }
    }
    for (uint64_t seed = 0; seed < 50; ++seed) {
        LoopConstraints lc;
        lc.simple = true;
        lc.symmetric = true;
        try {
            auto rl = random_fourier_loop(seed, 3, Ambient::sphere, lc, tol);
            auto rep = invariant_report(rl.curve, tol);
            bool ok = is_centrally_symmetric(rl.curve, tol) && rep.I.finite() && rep.I.genuine >= 6 &&
                      !any_violated(verify_spherical(rl.curve, rep, tol));
            min_sym = std::min(min_sym, rep.I.genuine);
            if (ok) ++sym_ok;
            else out.fail("symmetric seed " + std::to_string(seed) + " I=" + rep.I.str());
        } catch (const std::exception& e) {
            out.fail("symmetric seed " + std::to_string(seed) + ": " + e.what());
        }
    }
    double secs = seconds_since(t0);
    if (secs >= kRandomSeconds) out.fail("runtime");
    out.detail << " bisecting " << bis_ok << "/50 (min I " << min_bis << "), symmetric " << sym_ok << "/50 (min I "
               << min_sym << "), " << secs << " s";
}

int class_bound(const std::vector<SpiralClass>& classes) {
    int b = 0;
    for (auto c : classes) b += c == SpiralClass::convex ? 0 : c == SpiralClass::semiconvex ? 1 : 2;
    return std::min(b, 2);
}

void surgery_contract(Outcome& out) {
    Tolerances tol;
    auto cases = oracle::surgery_corpus(tol);
    int ok = 0, convex = 0, semiconvex = 0;
    double worst_jump = 0;
    for (const auto& sc : cases) {
        try {
            SurgeryOutcome o = sc.run();
            bool conn = oracle::connected(o.result);
            int bound = class_bound(o.classes);
            bool good = o.sigma_plus_before >= 0 && o.sigma_plus_after >= 0 && o.sigma_plus_after <= o.sigma_plus_before &&
                        o.c2_regular && o.curvature_jump < kJumpC2 && conn && o.inflections_added <= 2 &&
                        o.inflections_added <= bound;
            for (auto c : o.classes) {
                convex += c == SpiralClass::convex;
                semiconvex += c == SpiralClass::semiconvex;
            }
            worst_jump = std::max(worst_jump, o.curvature_jump);
            if (good) ++ok;
            else {
                std::ostringstream s;
                s << sc.name << " sigma+ " << o.sigma_plus_before << "->" << o.sigma_plus_after << " added "
                  << o.inflections_added << " bound " << bound << " jump " << o.curvature_jump << " connected " << conn;
                out.fail(s.str());
            }
        } catch (const std::exception& e) {
            out.fail(sc.name + ": " + e.what());
        }
    }
    if (cases.size() < 30) out.fail("corpus smaller than 30 cases");
    out.detail << " " << ok << "/" << cases.size() << " operations kept the contract (" << convex << " convex, "
               << semiconvex << " semiconvex vortices), max curvature jump " << worst_jump;
}

void oracle_equivalence(Outcome& out) {
    Tolerances tol;
    int curves = 0, sets = 0, pair_mismatch = 0, hull_mismatch = 0, hulls = 0;
    int by_class[3] = {0, 0, 0};
    for (const auto& nc : oracle::full_corpus(tol)) {
        ++curves;
        for (const auto& m : oracle::compare_pairs(nc.curve, tol)) {
            ++sets;
            if (!m.empty()) {
                ++pair_mismatch;
                out.fail(nc.name + " " + m);
            }
        }
    }
    for (const auto& pts : oracle::hull_point_sets(2024, 400)) {
        ++hulls;
        auto lib = origin_in_hull(pts, tol).status;
        auto ref = oracle::hull_by_subsets(pts, tol.eps_hull);
        ++by_class[int(ref)];
        if (lib != ref) {
            ++hull_mismatch;
            out.fail(std::string("hull set of ") + std::to_string(pts.size()) + " points: " + to_string(lib) + " vs " +
                     to_string(ref));
        }
    }
    out.detail << " " << sets << " pair sets on " << curves << " curves, " << pair_mismatch << " mismatches; " << hulls
               << " hull sets (" << by_class[0] << " outside, " << by_class[1] << " boundary, " << by_class[2]
               << " interior), " << hull_mismatch << " mismatches";
}

void projection_invariance(Outcome& out) {
    Tolerances tol;
    int vertex_mm = 0, sign_mm = 0, curves = 0, vertices = 0, inflections = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        LoopConstraints lc;
        lc.simple = true;
        lc.z_offset = 0.5;
        try {
            auto rl = random_fourier_loop(seed, 3, Ambient::sphere, lc, tol);
            auto pole = hemisphere_pole(rl.curve, tol);
            if (!pole) {
                out.fail("seed " + std::to_string(seed) + " not in a hemisphere");
                continue;
            }
            ++curves;
            auto r = oracle::projection_check(rl.curve, *pole, tol);
            vertices += r.vertices;
            inflections += r.inflections;
            if (!r.vertex_match) {
                ++vertex_mm;
                out.fail("seed " + std::to_string(seed) + " vertex counts " + r.vertex_detail);
            }
            if (!r.sign_match) {
                ++sign_mm;
                out.fail("seed " + std::to_string(seed) + " inflection signs " + r.sign_detail);
            }
        } catch (const std::exception& e) {
            out.fail("seed " + std::to_string(seed) + ": " + e.what());
        }
    }
    if (curves != 20) out.fail("fewer than 20 hemisphere curves");
    out.detail << " " << curves << " curves, " << vertices << " vertices, " << inflections << " inflections; "
               << vertex_mm << " vertex mismatches, " << sign_mm << " sign-pattern mismatches";
}

void numerical_consistency(Outcome& out) {
    Tolerances tol;
    double gb = 0, tan = 0, clos = 0, rt = 0;
    int gb_n = 0;
    for (const auto& nc : oracle::full_corpus(tol)) {
        const auto& c = nc.curve;
        if (c.ambient != Ambient::sphere || c.size() < 1024 || !nc.smooth) continue;
        if (!is_simple(c, tol)) continue;
        double r = std::abs(gauss_bonnet_residual(c, true, tol));
        ++gb_n;
        gb = std::max(gb, r);
        if (r >= kGaussBonnet) out.fail(nc.name + " Gauss-Bonnet residual " + std::to_string(r));
    }
    for (const auto& sc : oracle::space_curves()) {
        double e = oracle::tantrix_identity_error(sc.curve, tol);
        tan = std::max(tan, e);
        if (e >= kTantrixRel) out.fail(sc.name + " tantrix identity " + std::to_string(e));
        auto T = tantrix(sc.curve, tol);
        auto ti = integrate_tantrix(T, tol);
        double rel = ti.closure_residual / arc_length(ti.curve);
        clos = std::max(clos, rel);
        if (rel >= kClosureRel) out.fail(sc.name + " closure " + std::to_string(rel));
    }
    rt = oracle::curvature_round_trip_error(tol);
    if (rt >= kRoundTrip) out.fail("curvature round trip " + std::to_string(rt));
    if (gb_n == 0) out.fail("no smooth simple curves");
    out.detail << " Gauss-Bonnet max " << gb << " on " << gb_n << " curves, tantrix identity max " << tan
               << ", closure max " << clos << " x length, round trip " << rt;
}

void inscribed_bound(Outcome& out) {
    Tolerances tol;
    for (int n : {2, 3}) {
        auto c = oracle::inscribed_curve(n, 1024);
        try {
            Verdict v = inscribed_bound_check(c, tol);
            int changes = v.lhs.value_or(-1);
            if (changes < 2 * n || v.status == VerdictStatus::violated || v.status == VerdictStatus::degenerate)
                out.fail("n=" + std::to_string(n) + " reported " + std::to_string(changes));
            out.detail << " n=" << n << ": " << changes << " sign changes (need " << 2 * n << ", "
                       << to_string(v.status) << ");";
        } catch (const std::exception& e) {
            out.fail("n=" + std::to_string(n) + ": " + e.what());
        }
    }
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Outcome&)> run;
    };
    std::vector<Criterion> all{
        {1, "sharp-example completeness", sharp_examples},
        {2, "flow exactness", flow_exactness},
        {3, "flow monotonicity", flow_monotonicity},
        {4, "tennis ball / symmetric inflections", tennis_ball},
        {5, "surgery contract", surgery_contract},
        {6, "oracle equivalence", oracle_equivalence},
        {7, "projection invariance", projection_invariance},
        {8, "numerical consistency", numerical_consistency},
        {9, "inscribed bound", inscribed_bound},
    };
    int failed = 0;
    for (auto& c : all) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.fail(std::string("uncaught: ") + e.what());
        }
        std::printf("criterion %d %-38s %s (%.1f s)%s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", seconds_since(t0),
                    o.detail.str().c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
