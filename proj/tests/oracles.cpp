#include "oracles.hpp"

#include "curvekit/invariants.hpp"
#include "curvekit/synthesis.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace oracle {

using namespace ck;

namespace {

double det3(const Vec3& a, const Vec3& b, const Vec3& c) { return a.dot(b.cross(c)); }

// Closest points between segments p0p1 and q0q1 (clamped parametric solve).
double seg_dist2(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1, double& s, double& t) {
    Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
    double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    double c = d1.dot(r), b = d1.dot(d2);
    double den = a * e - b * b;
    s = den > 1e-300 ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
    t = e > 1e-300 ? (b * s + f) / e : 0.0;
    if (t < 0) {
        t = 0;
        s = a > 1e-300 ? std::clamp(-c / a, 0.0, 1.0) : 0.0;
    } else if (t > 1) {
        t = 1;
        s = a > 1e-300 ? std::clamp((b - c) / a, 0.0, 1.0) : 0.0;
    }
    return (p0 + s * d1 - q0 - t * d2).squaredNorm();
}

// Great-circle arcs p0p1 and q0q1 cross: endpoints straddle the other's plane, same side of the sphere.
bool arcs_cross(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1, double& s, double& t) {
    double a0 = det3(q0, q1, p0), a1 = det3(q0, q1, p1);
    double b0 = det3(p0, p1, q0), b1 = det3(p0, p1, q1);
    if ((a0 > 0) == (a1 > 0) || a0 == a1) return false;
    if ((b0 > 0) == (b1 > 0) || b0 == b1) return false;
    s = a0 / (a0 - a1);
    t = b0 / (b0 - b1);
    Vec3 x = p0 + s * (p1 - p0), y = q0 + t * (q1 - q0);
    return x.dot(y) > 0;
}

bool lines_cross2(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1, double& s, double& t) {
    Vec2 a = p0.head<2>(), b = p1.head<2>(), c = q0.head<2>(), d = q1.head<2>();
    auto cr = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
    double den = cr(b - a, d - c);
    if (std::abs(den) < 1e-300) return false;
    s = cr(c - a, d - c) / den;
    t = cr(c - a, b - a) / den;
    return s >= 0 && s <= 1 && t >= 0 && t <= 1;
}

double cyc_dist(double a, double b, double period) {
    double d = std::fmod(std::abs(a - b), period);
    return std::min(d, period - d);
}

double max_param_gap(const SampledCurve& c) {
    double g = 0;
    for (size_t i = 0; i + 1 < c.size(); ++i) g = std::max(g, c.params[i + 1] - c.params[i]);
    if (c.closed) g = std::max(g, c.params.front() + c.period() - c.params.back());
    return g;
}

}  // namespace

PairScan brute_scan(const SampledCurve& c, bool antipodal, const Tolerances& tol) {
    PairScan scan;
    size_t n = c.size();
    scan.n = n;
    size_t m = c.closed ? n : n - 1;
    double eps = match_eps(c, tol);
    for (size_t i = 0; i < m; ++i) {
        const Vec3& p0 = c.pts[i];
        const Vec3& p1 = c.pts[(i + 1) % n];
        for (size_t j = antipodal ? 0 : i + 2; j < m; ++j) {
            if (!antipodal && c.closed && i == 0 && j == m - 1) continue;
            Vec3 q0 = c.pts[j], q1 = c.pts[(j + 1) % n];
            if (antipodal) {
                q0 = -q0;
                q1 = -q1;
            }
            double s = 0, t = 0;
            bool hit = false;
            if (c.ambient == Ambient::sphere) hit = arcs_cross(p0, p1, q0, q1, s, t);
            else if (c.ambient == Ambient::plane) hit = lines_cross2(p0, p1, q0, q1, s, t);
            if (!hit) hit = seg_dist2(p0, p1, q0, q1, s, t) <= eps * eps;
            if (hit) scan.hits.push_back({i, j, s, t});
        }
    }
    return scan;
}

std::string compare_sets(const SampledCurve& c, const PairSet& lib, const PairSet& ref, const Tolerances& tol) {
    std::ostringstream s;
    s << to_string(lib.kind) << ": ";
    if (lib.status != ref.status) {
        s << "status " << to_string(lib.status) << " vs " << to_string(ref.status);
        return s.str();
    }
    if (lib.count() != ref.count()) {
        s << "count " << lib.count() << " vs " << ref.count();
        return s.str();
    }
    double w = tol.cluster_width * max_param_gap(c);
    double period = c.period();
    std::vector<bool> used(ref.pairs.size(), false);
    for (const auto& p : lib.pairs) {
        bool found = false;
        for (size_t k = 0; k < ref.pairs.size() && !found; ++k) {
            if (used[k]) continue;
            const auto& q = ref.pairs[k];
            bool same = cyc_dist(p.first, q.first, period) <= w && cyc_dist(p.second, q.second, period) <= w;
            bool swapped = cyc_dist(p.first, q.second, period) <= w && cyc_dist(p.second, q.first, period) <= w;
            if (same || swapped) found = used[k] = true;
        }
        if (!found) {
            s << "pair (" << p.first << ", " << p.second << ") has no brute-force match";
            return s.str();
        }
    }
    return {};
}

std::vector<std::string> compare_pairs(const SampledCurve& c, const Tolerances& tol) {
    std::vector<std::string> out;
    auto check = [&](const SampledCurve& x) {
        auto [self, anti] = coincidence_pairs(x, tol);
        out.push_back(compare_sets(x, self, cluster_pairs(x, brute_scan(x, false, tol), PairKind::coincident, tol), tol));
        if (x.ambient == Ambient::sphere)
            out.push_back(compare_sets(x, anti, cluster_pairs(x, brute_scan(x, true, tol), PairKind::antipodal, tol), tol));
    };
    check(c);
    // the tantrix is undefined at cusps
    auto sing = singular_points(c, tol);
    if (sing.finite() && sing.count == 0) check(tantrix(c, tol));
    return out;
}

const std::vector<NamedCurve>& full_corpus(const Tolerances& tol) {
    static const std::vector<NamedCurve> corpus = [&] {
        std::vector<NamedCurve> v;
        for (Family f : {Family::eq3, Family::eq4, Family::eq5})
            for (const auto& t : family_triples(f)) {
                std::ostringstream name;
                name << to_string(f) << "-" << t[0] << t[1] << t[2];
                auto ex = sharp_example(f, t, 1024, tol);
                // smoothed cusps keep tips far below the sample spacing
                v.push_back({name.str(), ex.curve, ex.cusps == 0 && ex.smoothed == 0 && t[1] == 0});
            }
        auto family = [&](const char* prefix, int count, Ambient amb, LoopConstraints lc) {
            for (int s = 0; s < count; ++s) {
                auto rl = random_fourier_loop(uint64_t(s), 3, amb, lc, tol);
                v.push_back({std::string(prefix) + "-" + std::to_string(s), rl.curve, true});
            }
        };
        LoopConstraints bis;
        bis.simple = bis.bisecting = true;
        family("bisecting", 50, Ambient::sphere, bis);
        LoopConstraints sym;
        sym.symmetric = true;
        family("symmetric", 50, Ambient::sphere, sym);
        LoopConstraints hull;
        hull.simple = hull.hull_interior = true;
        hull.z_offset = 0.2;
        family("hull", 20, Ambient::sphere, hull);
        family("space", 10, Ambient::space, LoopConstraints{});
        return v;
    }();
    return corpus;
}

std::vector<NamedCurve> space_curves() {
    std::vector<NamedCurve> v;
    v.push_back({"trefoil", sample_closed(Ambient::space, 2048, [](double t) {
                     return Vec3((2 + std::cos(3 * t)) * std::cos(2 * t), (2 + std::cos(3 * t)) * std::sin(2 * t),
                                 std::sin(3 * t));
                 })});
    v.push_back({"tilted-ellipse", sample_closed(Ambient::space, 2048, [](double t) {
                     return Vec3(2 * std::cos(t), std::sin(t), 0.3 * std::sin(2 * t));
                 })});
    v.push_back({"cinquefoil", sample_closed(Ambient::space, 4096, [](double t) {
                     return Vec3((3 + std::cos(5 * t)) * std::cos(2 * t), (3 + std::cos(5 * t)) * std::sin(2 * t),
                                 std::sin(5 * t));
                 })});
    return v;
}

HullClass hull_by_subsets(const std::vector<Vec3>& pts, double eps) {
    size_t n = pts.size();
    bool inside = false;
    for (const auto& p : pts)
        if (p.norm() <= eps) inside = true;
    auto in_segment = [&](const Vec3& a, const Vec3& b) {
        Vec3 d = b - a;
        double L2 = d.squaredNorm();
        if (L2 < 1e-300) return false;
        double s = std::clamp(-a.dot(d) / L2, 0.0, 1.0);
        return (a + s * d).norm() <= eps;
    };
    auto in_triangle = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
        Vec3 nrm = (b - a).cross(c - a);
        double area2 = nrm.norm();
        if (area2 < 1e-14) return false;
        nrm /= area2;
        if (std::abs(nrm.dot(a)) > eps) return false;
        // barycentric weights of o in the triangle plane
        double wa = nrm.dot(b.cross(c)) / area2, wb = nrm.dot(c.cross(a)) / area2, wc = nrm.dot(a.cross(b)) / area2;
        return wa >= -eps && wb >= -eps && wc >= -eps;
    };
    auto in_tetra = [&](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
        double v = det3(b - a, c - a, d - a);
        if (std::abs(v) < 1e-14) return false;
        double wa = det3(b, c, d) / v, wb = -det3(a, c, d) / v, wc = det3(a, b, d) / v, wd = -det3(a, b, c) / v;
        return wa >= -eps && wb >= -eps && wc >= -eps && wd >= -eps;
    };
    for (size_t i = 0; i < n && !inside; ++i)
        for (size_t j = i + 1; j < n && !inside; ++j) {
            if (in_segment(pts[i], pts[j])) inside = true;
            for (size_t k = j + 1; k < n && !inside; ++k) {
                if (in_triangle(pts[i], pts[j], pts[k])) inside = true;
                for (size_t l = k + 1; l < n && !inside; ++l)
                    if (in_tetra(pts[i], pts[j], pts[k], pts[l])) inside = true;
            }
        }
    if (!inside) return HullClass::outside;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            Vec3 nrm = pts[i].cross(pts[j]);
            if (nrm.norm() < 1e-12) continue;
            nrm.normalize();
            bool pos = true, neg = true;
            for (const auto& p : pts) {
                double d = nrm.dot(p);
                pos = pos && d >= -eps;
                neg = neg && d <= eps;
            }
            if (pos || neg) return HullClass::boundary;
        }
    return HullClass::interior;
}

std::vector<std::vector<Vec3>> hull_point_sets(unsigned seed, int count) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto unit = [&] { return Vec3(g(rng), g(rng), g(rng)).normalized(); };
    std::vector<std::vector<Vec3>> out;
    for (int k = 0; k < count; ++k) {
        int size = 4 + int(u(rng) * 57);
        std::vector<Vec3> pts;
        switch (k % 5) {
            case 0:  // whole sphere
                for (int i = 0; i < size; ++i) pts.push_back(unit() * (0.5 + u(rng)));
                break;
            case 1: {  // open cap, origin outside
                Vec3 axis = unit();
                double h = 0.05 + 0.5 * u(rng);
                while (int(pts.size()) < size) {
                    Vec3 p = unit();
                    if (p.dot(axis) > h) pts.push_back(p);
                }
                break;
            }
            case 2: {  // closed hemisphere with an antipodal pair on its rim
                Vec3 axis = unit();
                Vec3 rim = axis.cross(unit()).normalized();
                pts.push_back(rim);
                pts.push_back(-rim * (0.5 + u(rng)));
                while (int(pts.size()) < size) {
                    Vec3 p = unit();
                    if (p.dot(axis) > 0.05) pts.push_back(p);
                }
                break;
            }
            case 3: {  // flat set around the origin
                Vec3 axis = unit();
                TangentFrame f = frame_at(axis);
                for (int i = 0; i < size; ++i) {
                    double a = kTwoPi * (i + 0.5 * u(rng)) / size;
                    pts.push_back((std::cos(a) * f.e1 + std::sin(a) * f.e2) * (0.5 + u(rng)));
                }
                break;
            }
            default: {  // random cap, origin on either side
                Vec3 axis = unit();
                double h = -0.3 + 0.6 * u(rng);
                while (int(pts.size()) < size) {
                    Vec3 p = unit();
                    if (p.dot(axis) > h) pts.push_back(p);
                }
                break;
            }
        }
        out.push_back(pts);
    }
    return out;
}

ProjectionResult projection_check(const SampledCurve& c, const Vec3& pole, const Tolerances& tol) {
    ProjectionResult r;
    SignChangeOptions opt;
    // vertices: sign changes of the curvature derivative
    auto ks = geodesic_curvature(c, tol);
    auto vs = count_sign_changes(field_derivative(c, ks), tol, c.params, opt);
    auto st = stereographic_project(c, -pole, tol);
    auto kst = planar_curvature(st, tol);
    auto vp = count_sign_changes(field_derivative(st, kst), tol, st.params, opt);
    r.vertices = vs.count;
    r.vertex_match = vs.finite() && vp.finite() && vs.count == vp.count;
    r.vertex_detail = vs.str() + " on the sphere vs " + vp.str() + " in the plane";

    auto bp = beltrami_project(c, pole, tol);
    auto kb = planar_curvature(bp, tol);
    auto is = count_sign_changes(ks, tol, c.params, opt);
    auto ib = count_sign_changes(kb, tol, bp.params, opt);
    r.inflections = is.count;
    bool ok = is.finite() && ib.finite() && is.count == ib.count;
    double w = tol.cluster_width * max_param_gap(c);
    for (size_t k = 0; ok && k < is.locations.size(); ++k) {
        bool found = false;
        for (double t : ib.locations) found = found || cyc_dist(t, is.locations[k], c.period()) <= w;
        ok = found;
    }
    // per-sample signs outside the dead bands, up to one global orientation sign
    double ms = 0, mb = 0, dot = 0;
    for (size_t i = 0; i < ks.size(); ++i)
        if (std::isfinite(ks[i]) && std::isfinite(kb[i])) {
            ms = std::max(ms, std::abs(ks[i]));
            mb = std::max(mb, std::abs(kb[i]));
            dot += ks[i] * kb[i];
        }
    double orient = dot >= 0 ? 1.0 : -1.0;
    int bad = 0;
    for (size_t i = 0; i < ks.size(); ++i) {
        if (!std::isfinite(ks[i]) || !std::isfinite(kb[i])) continue;
        if (std::abs(ks[i]) <= tol.eps_zero * ms || std::abs(kb[i]) <= tol.eps_zero * mb) continue;
        if ((ks[i] > 0) != (orient * kb[i] > 0)) ++bad;
    }
    r.sign_match = ok && bad == 0;
    r.sign_detail = is.str() + " vs " + ib.str() + ", " + std::to_string(bad) + " sample sign mismatches";
    return r;
}

double tantrix_identity_error(const SampledCurve& c, const Tolerances& tol) {
    auto fd = frenet(c, tol);
    auto T = tantrix(c, tol);
    auto kg = geodesic_curvature(T, tol);
    double num = 0, den = 0;
    for (size_t i = 0; i < c.size(); ++i) {
        if (!std::isfinite(fd.tau[i]) || !std::isfinite(kg[i])) continue;
        double ratio = fd.tau[i] / fd.kappa[i];
        num = std::max(num, std::abs(kg[i] - ratio));
        den = std::max(den, std::abs(ratio));
    }
    return den > 0 ? num / den : 1.0;
}

double curvature_round_trip_error(const Tolerances& tol) {
    auto k = [](double s) { return 0.8 + 0.6 * std::cos(1.5 * s) + 0.2 * std::sin(4 * s); };
    double L = 6.0;
    size_t n = 8192;
    auto c = curve_from_geodesic_curvature(k, L, n, Vec3(1, 0, 0), Vec3(0, 1, 0));
    auto kg = geodesic_curvature(c, tol);
    double err = 0;
    for (size_t i = n / 50; i < n - n / 50; ++i) {
        double s = L * double(i) / double(n - 1);
        if (std::isfinite(kg[i])) err = std::max(err, std::abs(kg[i] - k(s)));
    }
    return err;
}

SampledCurve inscribed_curve(int touches, size_t n) {
    return sample_closed(Ambient::sphere, n, [&](double t) {
        double z = 0.3 * (1 - std::cos(touches * t)) / 2;
        double r = std::sqrt(1 - z * z);
        return Vec3(r * std::cos(t), r * std::sin(t), z);
    });
}

SampledCurve lift(const std::function<Vec2(double)>& f, size_t n, double scale) {
    return sample_closed(Ambient::sphere, n, [&](double t) {
        Vec2 p = f(t) * scale;
        return Vec3(p.x(), p.y(), 1.0);
    });
}

std::vector<SurgeryCase> surgery_corpus(const Tolerances& tol) {
    std::vector<SurgeryCase> v;
    auto cusp = [&](std::string name, SampledCurve c, double t0, double radius) {
        v.push_back({name, [c, t0, radius, tol] { return desingularize(c, t0, radius, tol); }});
    };
    auto crossing = [&](std::string name, SampledCurve c, std::pair<double, double> p) {
        v.push_back({name, [c, p, tol] { return resolve_double_point(c, p, tol); }});
    };
    auto card = lift([](double t) { return Vec2(2 * std::cos(t) - std::cos(2 * t), 2 * std::sin(t) - std::sin(2 * t)); },
                     1024, 0.2);
    cusp("cardioid", card, 0, 0.08);
    auto neph = lift([](double t) { return Vec2(3 * std::cos(t) - std::cos(3 * t), 3 * std::sin(t) - std::sin(3 * t)); },
                     1024, 0.12);
    for (int k = 0; k < 2; ++k) cusp("nephroid-" + std::to_string(k), neph, k * kPi, 0);
    auto delt = lift([](double t) { return Vec2(2 * std::cos(t) + std::cos(2 * t), 2 * std::sin(t) - std::sin(2 * t)); },
                     1024, 0.2);
    for (int k = 0; k < 3; ++k) cusp("deltoid-" + std::to_string(k), delt, k * kTwoPi / 3, 0.08);
    auto astr = lift([](double t) { return Vec2(std::pow(std::cos(t), 3), std::pow(std::sin(t), 3)); }, 1024, 0.5);
    for (int k = 0; k < 4; ++k) cusp("astroid-" + std::to_string(k), astr, k * kPi / 2, 0);
    auto tear = lift([](double t) { return Vec2(std::cos(t), std::sin(t) * std::abs(std::sin(t / 2))); }, 1024, 0.4);
    cusp("teardrop", tear, 0, 0.1);

    auto eight = lift([](double t) { return Vec2(std::sin(t), std::sin(t) * std::cos(t)); }, 1024, 0.5);
    crossing("figure-eight", eight, {0, kPi});
    for (double a : {0.3, 0.5, 0.7}) {
        auto lim = lift([a](double t) {
            double r = a + std::cos(t);
            return Vec2(r * std::cos(t), r * std::sin(t));
        }, 1024, 0.4);
        double t1 = std::acos(-a);
        crossing("limacon-" + std::to_string(a).substr(0, 3), lim, {t1, kTwoPi - t1});
    }

    // every cusp and crossing of the sharp examples, each taken on the unmodified curve
    for (Family f : {Family::eq3, Family::eq4, Family::eq5})
        for (const auto& t : family_triples(f)) {
            std::ostringstream name;
            name << to_string(f) << "-" << t[0] << t[1] << t[2];
            auto c = sharp_example(f, t, 1024, tol).curve;
            auto sp = singular_points(c, tol);
            if (sp.finite())
                for (size_t k = 0; k < sp.locations.size(); ++k)
                    cusp(name.str() + "-cusp" + std::to_string(k), c, sp.locations[k], 0);
            auto [dp, anti] = coincidence_pairs(c, tol);
            if (dp.status == Sentinel::finite)
                for (size_t k = 0; k < dp.pairs.size(); ++k)
                    crossing(name.str() + "-crossing" + std::to_string(k), c, dp.pairs[k]);
        }
    return v;
}

bool connected(const SampledCurve& c) {
    if (c.size() < 8 || !c.closed) return false;
    auto g = chord_gaps(c);
    auto sorted = g;
    std::nth_element(sorted.begin(), sorted.begin() + long(sorted.size() / 2), sorted.end());
    double med = sorted[sorted.size() / 2];
    return *std::max_element(g.begin(), g.end()) <= 8 * med;
}

}  // namespace oracle
