#include "curvekit/verify.hpp"

#include "curvekit/incidence.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ck {

const char* to_string(Ineq i) {
    switch (i) {
        case Ineq::eq1: return "eq1";
        case Ineq::eq2: return "eq2";
        case Ineq::eq3: return "eq3";
        case Ineq::eq4: return "eq4";
        case Ineq::eq5: return "eq5";
        case Ineq::eq6: return "eq6";
        case Ineq::eq7: return "eq7";
        case Ineq::eq8: return "eq8";
        case Ineq::thm32: return "thm32";
    }
    return "?";
}

const char* to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::holds: return "holds";
        case VerdictStatus::equality: return "equality";
        case VerdictStatus::degenerate: return "degenerate";
        case VerdictStatus::violated: return "violated";
    }
    return "?";
}

const char* to_string(LiftKind k) { return k == LiftKind::double_cover ? "double_cover" : "closed_lift"; }

bool any_violated(const std::vector<Verdict>& v) {
    return std::any_of(v.begin(), v.end(), [](const Verdict& x) { return x.status == VerdictStatus::violated; });
}

namespace {

struct Term {
    std::string name;
    CountResult c;
    int weight;
    bool genuine;
};

// Weighted sum of counters; degenerate when any counter is a sentinel.
Verdict combine(Ineq id, int rhs, const std::vector<Term>& terms) {
    Verdict v;
    v.id = id;
    v.rhs = rhs;
    int sum = 0;
    bool ok = true;
    for (const auto& t : terms) {
        v.terms.emplace_back(t.name, t.c.str());
        if (!t.c.finite()) {
            ok = false;
            v.notes.push_back(t.name + " is " + to_string(t.c.status));
            continue;
        }
        sum += t.weight * (t.genuine ? t.c.genuine : t.c.count);
        if (t.genuine && t.c.genuine != t.c.count)
            v.notes.push_back(t.name + ": " + std::to_string(t.c.genuine) + " genuine of " + std::to_string(t.c.count));
    }
    if (!ok) {
        v.status = VerdictStatus::degenerate;
        return v;
    }
    v.lhs = sum;
    v.status = sum > rhs ? VerdictStatus::holds : (sum == rhs ? VerdictStatus::equality : VerdictStatus::violated);
    return v;
}

CountResult halved(const CountResult& c, const std::string& what, std::vector<std::string>& notes) {
    if (!c.finite()) return c;
    CountResult h = c;
    if (c.count % 2 != 0 || c.genuine % 2 != 0) notes.push_back(what + " on the double cover is odd");
    h.count = c.count / 2;
    h.genuine = c.genuine / 2;
    return h;
}

Hypothesis hull_hypothesis(const SampledCurve& c, const Tolerances& tol, HullClass& status) {
    auto hs = origin_in_hull(c.pts, tol);
    status = hs.status;
    Hypothesis h;
    h.name = std::string("origin in hull (") + to_string(hs.status) + ")";
    h.satisfied = hs.status != HullClass::outside;
    h.margin = hs.status == HullClass::outside ? -hs.distance : 0.0;
    if (hs.status == HullClass::interior && !hs.weights.empty())
        h.margin = *std::min_element(hs.weights.begin(), hs.weights.end());
    return h;
}

double max_discrete_curvature(const SampledCurve& c) {
    double k = 0;
    size_t n = c.size();
    for (size_t i = 0; i < n; ++i) {
        if (!c.closed && (i == 0 || i + 1 == n)) continue;
        const Vec3& a = c.pts[c.wrap(long(i) - 1)];
        const Vec3& b = c.pts[i];
        const Vec3& d = c.pts[c.wrap(long(i) + 1)];
        double h1 = (b - a).norm(), h2 = (d - b).norm(), h3 = (d - a).norm();
        if (h1 * h2 * h3 == 0) continue;
        k = std::max(k, 2 * (b - a).cross(d - b).norm() / (h1 * h2 * h3));
    }
    return k;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 d = b - a;
    double l2 = d.squaredNorm();
    double t = l2 > 0 ? std::clamp((p - a).dot(d) / l2, 0.0, 1.0) : 0.0;
    return (a + t * d - p).norm();
}

// Spherical periodic curve from a lift; throws LiftInvalid when it neither closes nor anti-closes.
SampledCurve lift_curve(const SampledCurve& lift, LiftKind kind, const Tolerances& tol, std::vector<std::string>& notes) {
    if (lift.ambient != Ambient::sphere) throw Error(ErrorKind::LiftInvalid, "lift must be a spherical curve");
    double eps = std::max(match_eps(lift, tol), 1e-12);
    if (lift.closed) {
        if (kind == LiftKind::double_cover && !is_centrally_symmetric(lift, tol))
            throw Error(ErrorKind::LiftInvalid, "double cover is not centrally symmetric");
        return lift;
    }
    const Vec3& a = lift.pts.front();
    const Vec3& b = lift.pts.back();
    bool closes = (a - b).norm() <= eps, anti = (a + b).norm() <= eps;
    if (!closes && !anti) throw Error(ErrorKind::LiftInvalid, "lift neither closes nor anti-closes", {(a - b).norm(), (a + b).norm()});
    if (kind == LiftKind::closed_lift && !closes)
        throw Error(ErrorKind::LiftInvalid, "contractible curve needs a closing lift");
    if (kind == LiftKind::double_cover && !anti)
        throw Error(ErrorKind::LiftInvalid, "noncontractible curve needs an anti-closing lift");
    size_t m = lift.size() - 1;  // last sample duplicates (or opposes) the first
    SampledCurve out;
    out.ambient = Ambient::sphere;
    out.closed = true;
    for (size_t i = 0; i < m; ++i) out.pts.push_back(lift.pts[i]);
    if (kind == LiftKind::double_cover) {
        for (size_t i = 0; i < m; ++i) out.pts.push_back(-lift.pts[i]);
        notes.push_back("double cover assembled from the anti-closing lift");
    }
    out.params = uniform_params(out.pts.size());
    return out;
}

}  // namespace

bool is_centrally_symmetric(const SampledCurve& c, const Tolerances& tol) {
    size_t n = c.size();
    if (n < 4) return false;
    double eps = match_eps(c, tol);
    if (n % 2 == 0) {
        bool shift = true;
        for (size_t i = 0; i < n && shift; ++i)
            if ((c.pts[i] + c.pts[(i + n / 2) % n]).norm() > eps) shift = false;
        if (shift) return true;
    }
    // sampling may not align: compare against the polyline with a chord sagitta allowance
    auto g = chord_gaps(c);
    double gmax = *std::max_element(g.begin(), g.end());
    double allow = eps + std::min(0.125 * gmax * gmax * max_discrete_curvature(c), 0.05 * gmax);
    size_t segs = c.closed ? n : n - 1;
    for (size_t i = 0; i < n; ++i) {
        Vec3 q = -c.pts[i];
        double best = 1e300;
        for (size_t j = 0; j < segs && best > allow; ++j)
            best = std::min(best, point_segment_distance(q, c.pts[j], c.pts[c.wrap(long(j) + 1)]));
        if (best > allow) return false;
    }
    return true;
}

std::vector<Verdict> verify_space(const SampledCurve& c, const Tolerances& tol) {
    return verify_space(c, invariant_report(c, tol), tol);
}

std::vector<Verdict> verify_space(const SampledCurve& c, const InvariantReport& rep, const Tolerances& tol) {
    (void)tol;
    if (c.ambient != Ambient::space) throw Error(ErrorKind::PreconditionViolated, "verify_space needs a space curve");
    std::vector<Verdict> out;
    out.push_back(combine(Ineq::eq1, 6, {{"P", rep.P, 2, false}, {"I", rep.I, 2, false}, {"V", rep.V, 1, true}}));
    out.push_back(combine(Ineq::eq2, 4, {{"P+", rep.P_plus, 2, false}, {"I", rep.I, 2, false}, {"V", rep.V, 1, true}}));
    for (auto& v : out) {
        v.hypotheses.push_back({"closed curve", c.closed, 0});
        if (!c.closed) v.status = VerdictStatus::degenerate, v.notes.push_back("open curve");
    }
    return out;
}

std::vector<Verdict> verify_spherical(const SampledCurve& c, const Tolerances& tol) {
    return verify_spherical(c, invariant_report(c, tol), tol);
}

std::vector<Verdict> verify_spherical(const SampledCurve& c, const InvariantReport& rep, const Tolerances& tol) {
    if (c.ambient != Ambient::sphere) throw Error(ErrorKind::PreconditionViolated, "verify_spherical needs a spherical curve");
    std::vector<Verdict> out;
    if (!c.closed) return out;
    HullClass hc;
    Hypothesis hull = hull_hypothesis(c, tol, hc);
    if (hull.satisfied) {
        auto v3 = combine(Ineq::eq3, 6, {{"D", rep.D, 2, false}, {"S", rep.S, 2, false}, {"I", rep.I, 1, true}});
        auto v4 = combine(Ineq::eq4, 4, {{"D+", rep.D_plus, 2, false}, {"S", rep.S, 2, false}, {"I", rep.I, 1, true}});
        v3.hypotheses.push_back(hull);
        v4.hypotheses.push_back(hull);
        out.push_back(v3);
        out.push_back(v4);
    }
    if (is_centrally_symmetric(c, tol)) {
        auto v5 = combine(Ineq::eq5, 6, {{"D+", rep.D_plus, 2, false}, {"S", rep.S, 2, false}, {"I", rep.I, 1, true}});
        v5.hypotheses.push_back({"centrally symmetric", true, 0});
        out.push_back(v5);
    }
    return out;
}

std::vector<Verdict> verify_projective(const SampledCurve& lift, LiftKind kind, const Tolerances& tol) {
    std::vector<std::string> notes;
    SampledCurve g = lift_curve(lift, kind, tol, notes);
    auto rep = invariant_report(g, tol);
    std::vector<Verdict> out;
    if (kind == LiftKind::double_cover) {
        // each projective double point or singularity appears twice on the symmetric cover
        auto D = halved(rep.D_plus, "D+", notes);
        auto S = halved(rep.S, "S", notes);
        auto I = halved(rep.I, "I", notes);
        auto v = combine(Ineq::eq6, 3, {{"D", D, 2, false}, {"S", S, 2, false}, {"I", I, 1, true}});
        v.hypotheses.push_back({"noncontractible (symmetric cover)", true, 0});
        v.notes.insert(v.notes.end(), notes.begin(), notes.end());
        out.push_back(v);
        return out;
    }
    HullClass hc;
    Hypothesis hull = hull_hypothesis(g, tol, hc);
    hull.name = "meets every great circle: " + hull.name;
    // projective double points come from self and antipodal intersections of the lift
    auto v = combine(Ineq::eq7, 6, {{"D", rep.D, 2, false}, {"S", rep.S, 2, false}, {"I", rep.I, 1, true}});
    v.hypotheses.push_back({"contractible (closed lift)", true, 0});
    v.hypotheses.push_back(hull);
    v.notes.insert(v.notes.end(), notes.begin(), notes.end());
    if (!hull.satisfied) {
        v.status = VerdictStatus::degenerate;
        v.notes.push_back("not applicable: lift misses a great circle");
    }
    out.push_back(v);
    return out;
}

Verdict darboux_report(const SampledCurve& c, const Tolerances& tol) {
    if (c.ambient != Ambient::space) throw Error(ErrorKind::PreconditionViolated, "darboux_report needs a space curve");
    FrenetData f = frenet(c, tol);
    size_t n = c.size();
    double kmax = *std::max_element(f.kappa.begin(), f.kappa.end());
    double kdead = tol.eps_zero * std::max(kmax, 1.0 / std::max(diameter(c), 1e-300));
    std::vector<double> flat;
    for (size_t i = 0; i < n; ++i)
        if (!(f.kappa[i] > kdead) || !std::isfinite(f.tau[i])) flat.push_back(c.params[i]);
    if (!flat.empty()) throw Error(ErrorKind::InflectedCurve, "curvature vanishes", flat);

    SampledCurve Nc;
    Nc.ambient = Ambient::sphere;
    Nc.closed = c.closed;
    Nc.params = c.params;
    Nc.pts = f.N;
    for (auto& p : Nc.pts) p.normalize();
    auto [dp, anti] = coincidence_pairs(Nc, tol);
    CountResult P = to_count(dp);
    CountResult a = to_count(anti);
    if (!a.finite()) P.status = a.status;
    else if (P.finite()) {
        P.count += a.count;
        P.genuine += a.genuine;
    }

    ScalarField ratio(n);
    double rmax = 0;
    for (size_t i = 0; i < n; ++i) {
        ratio[i] = f.tau[i] / f.kappa[i];
        rmax = std::max(rmax, std::abs(ratio[i]));
    }
    SignChangeOptions opt;
    opt.cyclic = c.closed;
    opt.scale = std::max(1.0, rmax);
    CountResult Vd = count_sign_changes(field_derivative(c, ratio), tol, c.params, opt);

    Verdict v = combine(Ineq::eq8, 6, {{"P_N", P, 2, false}, {"V_d", Vd, 1, false}});
    double nmin = 1e300;
    for (size_t i = 0; i < n; ++i) nmin = std::min(nmin, std::hypot(f.kappa[i], f.tau[i]));
    v.hypotheses.push_back({"kappa > 0", true, *std::min_element(f.kappa.begin(), f.kappa.end())});
    v.hypotheses.push_back({"normal image regular: sqrt(kappa^2 + tau^2) > 0", nmin > 0, nmin});
    v.hypotheses.push_back({"closed curve", c.closed, 0});
    if (!c.closed && v.status != VerdictStatus::degenerate) {
        v.status = VerdictStatus::degenerate;
        v.notes.push_back("open curve");
    }
    return v;
}

InscribedContacts inscribed_contacts(const SampledCurve& c, const Tolerances& tol) {
    if (c.ambient != Ambient::sphere || !c.closed)
        throw Error(ErrorKind::NotInscribed, "needs a closed spherical curve");
    size_t n = c.size();
    auto g = chord_gaps(c);
    double gmax = *std::max_element(g.begin(), g.end());
    // a touching curve sampled off its contact points sits up to a chord sagitta above the circle
    double contact = match_eps(c, tol) + 0.125 * gmax * gmax * max_discrete_curvature(c);
    auto hs = origin_in_hull(c.pts, tol);
    if (hs.status == HullClass::interior) throw Error(ErrorKind::NotInscribed, "curve is not in a closed hemisphere");
    if (hs.status == HullClass::outside && hs.distance > contact)
        throw Error(ErrorKind::NotInscribed, "curve lies in an open hemisphere", {hs.distance});

    Vec3 u = (-hs.separator).normalized();
    struct Minimum {
        Vec3 p;
        double t, h;
    };
    auto minima = [&](const Vec3& pole) {
        std::vector<Minimum> out;
        double P = c.period();
        for (size_t i = 0; i < n; ++i) {
            const Vec3& pm = c.pts[c.wrap(long(i) - 1)];
            const Vec3& pp = c.pts[c.wrap(long(i) + 1)];
            double hm = pole.dot(pm), h0 = pole.dot(c.pts[i]), hp = pole.dot(pp);
            if (!(h0 < hm && h0 <= hp)) continue;
            // parabola through the three heights
            double den = hm - 2 * h0 + hp;
            double s = den > 0 ? std::clamp(0.5 * (hm - hp) / den, -0.5, 0.5) : 0.0;
            double h = h0 - 0.25 * (hm - hp) * s;
            Vec3 q = s >= 0 ? Vec3(c.pts[i] + s * (pp - c.pts[i])) : Vec3(c.pts[i] - s * (pm - c.pts[i]));
            double t = c.params[i] + (s >= 0 ? s * std::remainder(c.params[c.wrap(long(i) + 1)] - c.params[i], P)
                                             : -s * std::remainder(c.params[c.wrap(long(i) - 1)] - c.params[i], P));
            out.push_back({q.normalized(), t, h});
        }
        return out;
    };
    auto min_height = [&](const Vec3& pole) {
        double m = 1e300;
        for (const auto& p : c.pts) m = std::min(m, pole.dot(p));
        return m;
    };
    // refine the pole as the normal of the plane through the near-contact points
    for (int it = 0; it < 4; ++it) {
        Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
        int k = 0;
        for (const auto& m : minima(u))
            if (m.h < std::max(100 * contact, 1e-4)) {
                M += m.p * m.p.transpose();
                ++k;
            }
        if (k == 0) break;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
        double top = es.eigenvalues()(2);
        std::vector<Vec3> null;
        for (int j = 0; j < 3; ++j)
            if (es.eigenvalues()(j) <= 1e-8 * top) null.push_back(es.eigenvectors().col(j));
        if (null.size() == 1) {
            u = null[0].dot(u) >= 0 ? null[0] : Vec3(-null[0]);
        } else if (null.size() == 2) {
            // contacts span a line: pick the pole in the normal plane that maximizes the lowest point
            auto at = [&](double th) { return Vec3(std::cos(th) * null[0] + std::sin(th) * null[1]); };
            double best = -1e300, bt = 0;
            for (int j = 0; j < 3600; ++j) {
                double th = kTwoPi * j / 3600.0, m = min_height(at(th));
                if (m > best) best = m, bt = th;
            }
            double lo = bt - kTwoPi / 3600, hi = bt + kTwoPi / 3600;
            for (int j = 0; j < 60; ++j) {
                double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
                if (min_height(at(m1)) < min_height(at(m2))) lo = m1;
                else hi = m2;
            }
            u = at(0.5 * (lo + hi));
        } else {
            break;
        }
    }
    double hmin = min_height(u);
    if (hmin < -contact) throw Error(ErrorKind::NotInscribed, "curve leaves the bounding hemisphere", {hmin});

    InscribedContacts r;
    r.pole = u;
    for (const auto& m : minima(u)) {
        if (std::abs(m.h) > contact) continue;
        r.points.push_back(m.p);
        r.params.push_back(m.t);
    }
    if (r.points.empty()) throw Error(ErrorKind::NotInscribed, "no contact with the bounding great circle");
    return r;
}

Verdict inscribed_bound_check(const SampledCurve& c, const Tolerances& tol) {
    if (!is_simple(c, tol)) throw Error(ErrorKind::NotInscribed, "curve is not simple");
    auto ic = inscribed_contacts(c, tol);
    TangentFrame fr = frame_at(ic.pole);
    std::vector<double> ang;
    for (const auto& p : ic.points) ang.push_back(std::atan2(p.dot(fr.e2), p.dot(fr.e1)));
    std::sort(ang.begin(), ang.end());
    double gap = ang.front() + kTwoPi - ang.back();
    for (size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
    // contact positions are known to about a sample gap
    auto cg = chord_gaps(c);
    double slack = 2 * *std::max_element(cg.begin(), cg.end());
    if (gap > kPi + slack) throw Error(ErrorKind::NotInscribed, "contact points lie in an open semicircle", {gap});

    int m = int(ic.points.size());
    SignChangeOptions opt;
    opt.scale = 1.0;
    CountResult I = count_sign_changes(geodesic_curvature(c, tol), tol, c.params, opt);
    Verdict v = combine(Ineq::thm32, 2 * m, {{"I", I, 1, false}});
    v.terms.emplace_back("contacts", std::to_string(m));
    v.hypotheses.push_back({"contacts not in an open semicircle", true, kPi - gap});
    std::ostringstream os;
    os << "pole (" << ic.pole.x() << ", " << ic.pole.y() << ", " << ic.pole.z() << ")";
    v.notes.push_back(os.str());
    return v;
}

bool has_special_antipodal_pair(const SampledCurve& c, const InvariantReport& rep, const Tolerances& tol) {
    if (c.ambient != Ambient::sphere) return false;
    auto [dp, anti] = coincidence_pairs(c, tol);
    if (anti.status != Sentinel::finite) return false;
    std::vector<double> special = rep.S.locations;
    for (auto [t, s] : dp.pairs) {
        special.push_back(t);
        special.push_back(s);
    }
    double w = tol.cluster_width * c.period() / double(c.size());
    for (auto [t, s] : anti.pairs)
        for (double q : special)
            if (std::abs(std::remainder(t - q, c.period())) <= w || std::abs(std::remainder(s - q, c.period())) <= w)
                return true;
    return false;
}

}  // namespace ck
