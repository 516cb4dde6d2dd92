#include "curvekit/surgery.hpp"

#include "curvekit/incidence.hpp"
#include "curvekit/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace ck {

const char* to_string(SpiralClass c) {
    switch (c) {
        case SpiralClass::convex: return "convex";
        case SpiralClass::concave: return "concave";
        case SpiralClass::semiconvex: return "semiconvex";
        case SpiralClass::unknown: return "unknown";
    }
    return "?";
}

namespace {

double smoothstep5(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (10 - 15 * u + 6 * u * u);
}

// 1 on |x| <= inner, 0 on |x| >= outer.
double cutoff(double x, double inner, double outer) {
    double a = std::abs(x);
    if (a <= inner) return 1;
    if (a >= outer) return 0;
    return 1 - smoothstep5((a - inner) / (outer - inner));
}

Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }
double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0 ? a + kTwoPi : a;
}

// Gnomonic chart at a sphere point, or a translation for planar curves.
struct Chart {
    Ambient amb = Ambient::plane;
    Vec3 origin = Vec3::Zero();
    TangentFrame f;

    Chart(Ambient a, const Vec3& o) : amb(a), origin(o) {
        if (amb == Ambient::space) throw Error(ErrorKind::PreconditionViolated, "surgery works on plane or sphere curves");
        if (amb == Ambient::sphere) {
            origin = o.normalized();
            f = frame_at(origin);
        }
    }
    Vec2 to(const Vec3& q) const {
        if (amb == Ambient::plane) return Vec2(q.x() - origin.x(), q.y() - origin.y());
        double d = q.dot(f.pole);
        if (d <= 1e-9) throw Error(ErrorKind::NotInHemisphere, "neighbourhood leaves the chart");
        return Vec2(q.dot(f.e1) / d, q.dot(f.e2) / d);
    }
    Vec3 from(const Vec2& p) const {
        if (amb == Ambient::plane) return Vec3(origin.x() + p.x(), origin.y() + p.y(), 0);
        return (f.pole + p.x() * f.e1 + p.y() * f.e2).normalized();
    }
};

double lin(const std::vector<double>& u, const std::vector<double>& y, double t) {
    if (t <= u.front()) return y.front();
    if (t >= u.back()) return y.back();
    size_t k = size_t(std::upper_bound(u.begin(), u.end(), t) - u.begin());
    double a = (t - u[k - 1]) / (u[k] - u[k - 1]);
    return y[k - 1] + a * (y[k] - y[k - 1]);
}

// Convolution of piecewise-linear data with the normalized kernel (1 - (x/lam)^2)^3.
double kernel_conv(const std::vector<double>& u, const std::vector<double>& y, double t, double lam) {
    constexpr int K = 96;
    double s = 0, w = 0;
    for (int k = 0; k < K; ++k) {
        double v = -1 + (k + 0.5) * 2.0 / K;
        double q = 1 - v * v;
        double wk = q * q * q;
        s += wk * lin(u, y, t + lam * v);
        w += wk;
    }
    return s / w;
}

constexpr double kBlendInner = 1.0, kBlendOuter = 3.5;

// y <- y + phi (theta * y - y) around center; returns indices touched.
std::vector<size_t> graph_blend(std::vector<double>& y, const std::vector<double>& u, double center, double lam) {
    std::vector<double> y0 = y;
    std::vector<size_t> touched;
    for (size_t i = 0; i < u.size(); ++i) {
        double phi = cutoff(u[i] - center, kBlendInner * lam, kBlendOuter * lam);
        if (phi <= 0) continue;
        y[i] = y0[i] + phi * (kernel_conv(u, y0, u[i], lam) - y0[i]);
        touched.push_back(i);
    }
    return touched;
}

// Graph blend of a polyline around vertex k over its local tangent line.
bool polyline_blend(std::vector<Vec2>& pts, std::vector<long>& src, size_t k, double lam) {
    if (k == 0 || k + 1 >= pts.size()) return false;
    Vec2 q = pts[k];
    Vec2 T = (pts[k + 1] - pts[k - 1]).normalized();
    Vec2 N = perp(T);
    double reach = (kBlendOuter + 1.0) * lam;
    size_t lo = k, hi = k;
    while (lo > 0 && (pts[lo] - q).dot(T) > -reach) --lo;
    while (hi + 1 < pts.size() && (pts[hi] - q).dot(T) < reach) ++hi;
    std::vector<double> u, y;
    for (size_t i = lo; i <= hi; ++i) {
        u.push_back((pts[i] - q).dot(T));
        y.push_back((pts[i] - q).dot(N));
    }
    for (size_t i = 1; i < u.size(); ++i)
        if (!(u[i] > u[i - 1])) return false;
    if (u.front() > -reach + lam || u.back() < reach - lam) return false;
    auto touched = graph_blend(y, u, 0.0, lam);
    for (size_t t : touched) {
        pts[lo + t] = q + u[t] * T + y[t] * N;
        src[lo + t] = -1;
    }
    return true;
}

double angle_at(const std::vector<Vec2>& arm, double r) {
    for (size_t i = 1; i < arm.size(); ++i) {
        double ri = arm[i].norm();
        if (ri >= r) {
            double rp = arm[i - 1].norm();
            double a = ri > rp ? (r - rp) / (ri - rp) : 1.0;
            Vec2 p = arm[i - 1] + a * (arm[i] - arm[i - 1]);
            return std::atan2(p.y(), p.x());
        }
    }
    return kNaN;
}

double max_radius(const std::vector<Vec2>& arm) {
    double m = 0;
    for (const auto& p : arm) m = std::max(m, p.norm());
    return m;
}

// +1 if the arm bends left of its outward direction, -1 right, 0 unclear.
int bend_sign(const std::vector<Vec2>& arm) {
    int pos = 0, neg = 0;
    for (size_t i = 2; i + 1 < arm.size(); ++i) {
        Vec2 e0 = arm[i] - arm[i - 1], e1 = arm[i + 1] - arm[i];
        double t = cross2(e0, e1);
        if (std::abs(t) <= 1e-9 * e0.norm() * e1.norm()) continue;
        (t > 0 ? pos : neg)++;
    }
    int tot = pos + neg;
    if (tot == 0) return 0;
    double frac = double(pos - neg) / tot;
    if (std::abs(frac) < 0.5) return 0;
    return frac > 0 ? 1 : -1;
}

std::vector<Vec2> offset_polyline(const std::vector<Vec2>& arm, int dir, double r) {
    // dir = +1 offsets to the left of the outward direction
    std::vector<Vec2> out(arm.size());
    for (size_t i = 0; i < arm.size(); ++i) {
        size_t a = i == 0 ? 0 : i - 1, b = std::min(i + 1, arm.size() - 1);
        Vec2 t = (arm[b] - arm[a]).normalized();
        out[i] = arm[i] + dir * r * perp(t);
    }
    return out;
}

bool seg_cross(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1, double& s, double& t) {
    Vec2 d1 = p1 - p0, d2 = q1 - q0, w = q0 - p0;
    double den = cross2(d1, d2);
    if (std::abs(den) < 1e-300) return false;
    s = cross2(w, d2) / den;
    t = cross2(w, d1) / den;
    return s >= 0 && s <= 1 && t >= 0 && t <= 1;
}

double seg_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 d = b - a;
    double L = d.squaredNorm();
    double s = L > 0 ? std::clamp((p - a).dot(d) / L, 0.0, 1.0) : 0.0;
    return (a + s * d - p).norm();
}

struct Fillet {
    size_t i1 = 0, i2 = 0;  // segment indices on arm1 (out) and arm2 (in)
    double s1 = 0, s2 = 0;
    Vec2 center = Vec2::Zero(), q1 = Vec2::Zero(), q2 = Vec2::Zero();
    double r = 0, sweep = 0, lam = 0;
};

std::optional<Fillet> try_fillet(const std::vector<Vec2>& out, const std::vector<Vec2>& in, int side, double r,
                                 double gap) {
    // side 0 lies left of the outgoing arm and right of the incoming arm
    int d1 = side == 0 ? 1 : -1, d2 = -d1;
    auto o1 = offset_polyline(out, d1, r), o2 = offset_polyline(in, d2, r);
    std::optional<Fillet> best;
    size_t best_key = size_t(-1);
    for (size_t i = 1; i + 1 < o1.size(); ++i) {
        for (size_t j = 1; j + 1 < o2.size(); ++j) {
            if (i + j >= best_key) break;
            double s, t;
            if (!seg_cross(o1[i], o1[i + 1], o2[j], o2[j + 1], s, t)) continue;
            Fillet f;
            f.i1 = i;
            f.s1 = s;
            f.i2 = j;
            f.s2 = t;
            f.center = o1[i] + s * (o1[i + 1] - o1[i]);
            f.r = r;
            best = f;
            best_key = i + j;
        }
    }
    if (!best) return std::nullopt;
    Fillet f = *best;
    for (size_t i = 0; i + 1 < out.size(); ++i)
        if (seg_dist(f.center, out[i], out[i + 1]) < 0.97 * r) return std::nullopt;
    for (size_t i = 0; i + 1 < in.size(); ++i)
        if (seg_dist(f.center, in[i], in[i + 1]) < 0.97 * r) return std::nullopt;
    // feet of the perpendiculars from the center
    auto foot = [&](const std::vector<Vec2>& arm, size_t& seg, double& s) {
        double bd = 1e300;
        Vec2 bp;
        for (size_t i = 0; i + 1 < arm.size(); ++i) {
            Vec2 d = arm[i + 1] - arm[i];
            double ss = std::clamp((f.center - arm[i]).dot(d) / d.squaredNorm(), 0.0, 1.0);
            Vec2 p = arm[i] + ss * d;
            double dd = (p - f.center).norm();
            if (dd < bd) {
                bd = dd;
                bp = p;
                seg = i;
                s = ss;
            }
        }
        return bp;
    };
    f.q1 = foot(out, f.i1, f.s1);
    f.q2 = foot(in, f.i2, f.s2);
    if (f.i1 < 1 || f.i2 < 1) return std::nullopt;
    // traversal arrives along the incoming arm toward o, leaves along the outgoing arm
    Vec2 tin = (in[f.i2] - in[f.i2 + 1]).normalized();
    Vec2 v2 = f.q2 - f.center, v1 = f.q1 - f.center;
    bool ccw = perp(v2).dot(tin) > 0;
    double a2 = std::atan2(v2.y(), v2.x()), a1 = std::atan2(v1.y(), v1.x());
    f.sweep = ccw ? wrap_angle(a1 - a2) : -wrap_angle(a2 - a1);
    double arc = std::abs(f.sweep) * r;
    double rest1 = 0, rest2 = 0;
    for (size_t i = f.i1 + 1; i + 1 < out.size(); ++i) rest1 += (out[i + 1] - out[i]).norm();
    for (size_t i = f.i2 + 1; i + 1 < in.size(); ++i) rest2 += (in[i + 1] - in[i]).norm();
    double reach = kBlendOuter + 1.5;
    // the arc must stay a graph over the junction tangent across the blend window
    double graph_reach = r * std::sin(std::min(std::abs(f.sweep) / 2, 1.2));
    f.lam = std::min({arc / (2 * reach), rest1 / reach, rest2 / reach, graph_reach / reach});
    if (f.lam < 0.3 * gap) return std::nullopt;
    return f;
}

struct LocalPiece {
    std::vector<Vec2> pts;
    std::vector<long> src;  // index into the original section, or -1 for new samples
    SpiralClass cls = SpiralClass::unknown;
    int predicted = 2;
};

int predicted_for(SpiralClass c) {
    switch (c) {
        case SpiralClass::convex: return 0;
        case SpiralClass::semiconvex: return 1;
        default: return 2;
    }
}

// Centripetal Catmull-Rom through P, subdivided to spacing about h.
std::vector<Vec2> densify(const std::vector<Vec2>& raw, double h) {
    std::vector<Vec2> P;
    for (const auto& p : raw)
        if (P.empty() || (p - P.back()).norm() > 1e-3 * h) P.push_back(p);
    std::vector<Vec2> out;
    size_t n = P.size();
    if (n < 2) return P;
    // phantom end points continue the turning of the last two chords
    auto extend = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        Vec2 e1 = b - a, e2 = c - b;
        double th = std::atan2(cross2(e1, e2), e1.dot(e2));
        Eigen::Rotation2Dd rot(th);
        return Vec2(c + rot * e2);
    };
    Vec2 head = n >= 3 ? extend(P[2], P[1], P[0]) : Vec2(2 * P[0] - P[1]);
    Vec2 tail = n >= 3 ? extend(P[n - 3], P[n - 2], P[n - 1]) : Vec2(2 * P[n - 1] - P[n - 2]);
    auto pt = [&](long i) {
        if (i < 0) return head;
        if (i >= long(n)) return tail;
        return P[size_t(i)];
    };
    for (size_t k = 0; k + 1 < n; ++k) {
        Vec2 p0 = pt(long(k) - 1), p1 = P[k], p2 = P[k + 1], p3 = pt(long(k) + 2);
        double t0 = 0;
        double t1 = t0 + std::sqrt(std::max((p1 - p0).norm(), 1e-300));
        double t2 = t1 + std::sqrt(std::max((p2 - p1).norm(), 1e-300));
        double t3 = t2 + std::sqrt(std::max((p3 - p2).norm(), 1e-300));
        int m = std::max(1, int(std::ceil((p2 - p1).norm() / h)));
        for (int j = 0; j < m; ++j) {
            double t = t1 + (t2 - t1) * j / m;
            Vec2 a1 = (t1 - t) / (t1 - t0) * p0 + (t - t0) / (t1 - t0) * p1;
            Vec2 a2 = (t2 - t) / (t2 - t1) * p1 + (t - t1) / (t2 - t1) * p2;
            Vec2 a3 = (t3 - t) / (t3 - t2) * p2 + (t - t2) / (t3 - t2) * p3;
            Vec2 b1 = (t2 - t) / (t2 - t0) * a1 + (t - t0) / (t2 - t0) * a2;
            Vec2 b2 = (t3 - t) / (t3 - t1) * a2 + (t - t1) / (t3 - t1) * a3;
            out.push_back((t2 - t) / (t2 - t1) * b1 + (t - t1) / (t2 - t1) * b2);
        }
    }
    out.push_back(P[n - 1]);
    return out;
}

// Resamples a fine polyline with spacing h inside the zones (centre, half-width) and growing
// geometrically away from them toward the end spacings gl and gr.
std::vector<Vec2> resample_graded(const std::vector<Vec2>& F, const std::vector<std::pair<double, double>>& zones,
                                  double gl, double gr, double h) {
    size_t n = F.size();
    std::vector<double> s(n, 0.0);
    for (size_t i = 1; i < n; ++i) s[i] = s[i - 1] + (F[i] - F[i - 1]).norm();
    double L = s.back();
    auto sigma = [&](double x) {
        double cap = gl + (gr - gl) * x / L;
        double d = 1e300;
        for (auto [c, w] : zones) d = std::min(d, std::max(0.0, std::abs(x - c) - w));
        // spacing also shrinks gradually from the end spacings so the seams stay smooth
        double ends = std::max(gl - 0.15 * x, gr - 0.15 * (L - x));
        return std::min(cap, std::max(h + 0.15 * d, std::min(ends, h + 0.5 * d)));
    };
    std::vector<double> phi(n, 0.0);
    for (size_t i = 1; i < n; ++i)
        phi[i] = phi[i - 1] + (s[i] - s[i - 1]) * 0.5 * (1 / sigma(s[i]) + 1 / sigma(s[i - 1]));
    long m = std::max(2L, std::lround(phi.back()));
    std::vector<Vec2> out{F.front()};
    size_t k = 1;
    for (long j = 1; j < m; ++j) {
        double t = phi.back() * double(j) / double(m);
        while (k + 1 < n && phi[k] < t) ++k;
        double a = phi[k] > phi[k - 1] ? std::clamp((t - phi[k - 1]) / (phi[k] - phi[k - 1]), 0.0, 1.0) : 0.0;
        out.push_back(F[k - 1] + a * (F[k] - F[k - 1]));
    }
    out.push_back(F.back());
    return out;
}

bool build_fillet(const std::vector<Vec2>& in, const std::vector<Vec2>& out, const Fillet& fil, double gap,
                  size_t vortex_offset, LocalPiece& lp);

LocalPiece fillet_piece(const std::vector<Vec2>& in, const std::vector<Vec2>& out, int side, double gap,
                        size_t vortex_offset) {
    double R = std::min(max_radius(in), max_radius(out));
    for (double r = 0.5 * R; r >= 0.5 * gap; r *= 0.8) {
        auto f = try_fillet(out, in, side, r, gap);
        if (!f) continue;
        LocalPiece lp;
        if (build_fillet(in, out, *f, gap, vortex_offset, lp)) return lp;
    }
    throw Error(ErrorKind::ClassificationFailed, "no fillet circle fits the proper side");
}

bool build_fillet(const std::vector<Vec2>& in, const std::vector<Vec2>& out, const Fillet& fil, double gap,
                  size_t vortex_offset, LocalPiece& lp) {
    const Fillet* f = &fil;

    // fine geometry: spline through the kept arm samples, the circular arc, spline again
    double hf = std::clamp(f->lam / 10, gap / 48, gap / 2);
    double hfine = hf / 4;
    size_t mi = in.size();
    std::vector<Vec2> a2;
    for (size_t k = mi - 1; k > f->i2; --k) a2.push_back(in[k]);
    a2.push_back(f->q2);
    std::vector<Vec2> a1{f->q1};
    for (size_t k = f->i1 + 1; k < out.size(); ++k) a1.push_back(out[k]);
    std::vector<Vec2> F = densify(a2, hfine);
    size_t j2 = F.size() - 1;
    Vec2 v2 = f->q2 - f->center;
    double ang2 = std::atan2(v2.y(), v2.x());
    int m = std::max(2, int(std::ceil(std::abs(f->sweep) * f->r / hfine)));
    for (int k = 1; k < m; ++k) {
        double a = ang2 + f->sweep * k / m;
        F.push_back(f->center + f->r * Vec2(std::cos(a), std::sin(a)));
    }
    size_t j1 = F.size();
    auto d1 = densify(a1, hfine);
    F.insert(F.end(), d1.begin(), d1.end());
    std::vector<long> fsrc(F.size(), -1);
    if (!polyline_blend(F, fsrc, j1, f->lam) || !polyline_blend(F, fsrc, j2, f->lam)) return false;

    double gl = (in[mi - 1] - in[mi - 2]).norm(), gr = (out.back() - out[out.size() - 2]).norm();
    auto arc_at = [&](size_t idx) {
        double a = 0;
        for (size_t i = 1; i <= idx; ++i) a += (F[i] - F[i - 1]).norm();
        return a;
    };
    double zw = (kBlendOuter + 1.0) * f->lam;
    lp.pts = resample_graded(F, {{arc_at(j2), zw}, {arc_at(j1), zw}}, gl, gr, hf);
    lp.src.assign(lp.pts.size(), -1);
    lp.src.front() = 0;
    lp.src.back() = long(mi - 1 + vortex_offset + out.size() - 2);
    return true;
}

// Smooths the vortex where `in` arrives and `out` leaves; both arms start at o.
LocalPiece smooth_vortex(const std::vector<Vec2>& in, const std::vector<Vec2>& out, bool vortex_is_sample, double gap,
                         const Tolerances& tol) {
    DoubleSpiral ds{out, in, std::min(max_radius(in), max_radius(out)), SpiralClass::unknown};
    SpiralSides sides = spiral_sides(ds, tol);
    SpiralClass cls = SpiralClass::unknown;
    if (sides.normal_side1 >= 0 && sides.normal_side2 >= 0) {
        if (sides.normal_side1 == sides.normal_side2)
            cls = sides.proper[sides.normal_side1] ? SpiralClass::convex : SpiralClass::concave;
        else
            cls = SpiralClass::semiconvex;
    }
    size_t voff = vortex_is_sample ? 1 : 0;
    {
        std::vector<double> g;
        for (size_t k = 1; k < in.size(); ++k) g.push_back((in[k] - in[k - 1]).norm());
        for (size_t k = 1; k < out.size(); ++k) g.push_back((out[k] - out[k - 1]).norm());
        std::nth_element(g.begin(), g.begin() + long(g.size() / 2), g.end());
        gap = g[g.size() / 2];
    }

    // outward directions a short way from the vortex
    auto dir = [&](const std::vector<Vec2>& arm) {
        size_t k = std::min<size_t>(arm.size() - 1, std::max<size_t>(2, arm.size() / 6));
        return Vec2(arm[k].normalized());
    };
    Vec2 d1 = dir(out), d2 = dir(in);
    bool c1 = d1.dot(d2) < -std::cos(kPi / 4);
    if (c1) {
        Vec2 T = (d1 - d2).normalized(), N = perp(T);
        std::vector<Vec2> sec;
        for (size_t k = in.size() - 1; k >= 1; --k) sec.push_back(in[k]);
        // a crossing point is not a sample of the curve
        if (vortex_is_sample) sec.push_back(in[0]);
        for (size_t k = 1; k < out.size(); ++k) sec.push_back(out[k]);
        std::vector<double> u(sec.size()), y(sec.size());
        bool mono = true;
        for (size_t i = 0; i < sec.size(); ++i) {
            u[i] = sec[i].dot(T);
            y[i] = sec[i].dot(N);
            if (i > 0 && u[i] <= u[i - 1]) mono = false;
        }
        // reshape and blend on fine geometry, then resample graded back to the arm spacing
        auto fine_piece = [&](double flip, double lc, const std::vector<double>& centers,
                              const std::function<void(const std::vector<double>&, std::vector<double>&)>& shape)
            -> std::optional<LocalPiece> {
            double hf = std::clamp(lc / 10, gap / 48, gap / 2);
            auto F = densify(sec, hf / 4);
            std::vector<double> fu(F.size()), fy(F.size());
            for (size_t i = 0; i < F.size(); ++i) {
                fu[i] = F[i].dot(T);
                fy[i] = flip * F[i].dot(N);
                if (i > 0 && !(fu[i] > fu[i - 1])) return std::nullopt;
            }
            shape(fu, fy);
            for (double x : centers) graph_blend(fy, fu, x, lc);
            std::vector<Vec2> G(F.size());
            std::vector<double> s(F.size(), 0.0);
            for (size_t i = 0; i < F.size(); ++i) {
                G[i] = fu[i] * T + flip * fy[i] * N;
                if (i > 0) s[i] = s[i - 1] + (G[i] - G[i - 1]).norm();
            }
            double zw = (kBlendOuter + 1.0) * lc;
            std::vector<std::pair<double, double>> zones;
            for (double x : centers) zones.push_back({lin(fu, s, x), zw});
            double gl = (sec[1] - sec[0]).norm(), gr = (sec.back() - sec[sec.size() - 2]).norm();
            LocalPiece lp;
            lp.cls = cls;
            lp.predicted = predicted_for(cls);
            lp.pts = resample_graded(G, zones, gl, gr, hf);
            lp.src.assign(lp.pts.size(), -1);
            lp.src.front() = 0;
            lp.src.back() = long(sec.size() - 1);
            return lp;
        };
        if (mono) {
            double Rp = std::min(-u.front(), u.back());
            if (cls == SpiralClass::semiconvex) {
                // cubic bridge g = lam (x^3 + x) on a graph convex on the right
                double flip = 1;
                size_t i0 = in.size() - 1;
                double right = 0;
                for (size_t i = i0 + 1; i + 1 < y.size(); ++i) right += y[i + 1] - 2 * y[i] + y[i - 1];
                if (right < 0) flip = -1;
                std::vector<double> yn = y;
                for (auto& v : yn) v *= flip;
                double a = -0.6 * Rp, b = 0.6 * Rp;
                double fa = lin(u, yn, a), fb = lin(u, yn, b);
                double lam = 0;
                for (int k = 0; k <= 60; ++k) {
                    double l = std::ldexp(1.0, -k);
                    if (l * (b * b * b + b) < fb && l * (a * a * a + a) > fa) {
                        lam = l;
                        break;
                    }
                }
                if (lam > 0) {
                    auto g = [&](double x) { return lam * (x * x * x + x); };
                    double x1 = kNaN, x2 = kNaN;
                    for (size_t i = 1; i < u.size(); ++i) {
                        if (u[i] <= a || u[i - 1] >= 0) continue;
                        double e0 = yn[i - 1] - g(u[i - 1]), e1 = yn[i] - g(u[i]);
                        if (e0 < 0 && e1 >= 0) {
                            x1 = u[i - 1] + (u[i] - u[i - 1]) * (-e0) / (e1 - e0);
                            break;
                        }
                    }
                    for (size_t i = u.size() - 1; i >= 1; --i) {
                        if (u[i - 1] >= b || u[i] <= 0) continue;
                        double e0 = yn[i - 1] - g(u[i - 1]), e1 = yn[i] - g(u[i]);
                        if (e0 <= 0 && e1 > 0) {
                            x2 = u[i - 1] + (u[i] - u[i - 1]) * (-e0) / (e1 - e0);
                            break;
                        }
                    }
                    if (std::isfinite(x1) && std::isfinite(x2)) {
                        double lc = std::min({(x2 - x1) / (2 * (kBlendOuter + 1)), (x1 - u.front()) / (kBlendOuter + 1.5),
                                              (u.back() - x2) / (kBlendOuter + 1.5)});
                        auto bridge = [&](const std::vector<double>& fu, std::vector<double>& fy) {
                            for (size_t i = 0; i < fu.size(); ++i)
                                if (fu[i] > x1 && fu[i] < x2) fy[i] = g(fu[i]);
                        };
                        if (lc >= 0.3 * gap)
                            if (auto lp = fine_piece(flip, lc, {x1, x2}, bridge)) return *lp;
                    }
                }
            }
            // plain smoothing of the corner
            double lam = Rp / (kBlendOuter + 2);
            if (lam >= 0.3 * gap)
                if (auto lp = fine_piece(1.0, lam, {0.0}, [](const std::vector<double>&, std::vector<double>&) {}))
                    return *lp;
        }
    }

    int side = -1;
    if (sides.proper[0] && !sides.proper[1]) side = 0;
    else if (sides.proper[1] && !sides.proper[0]) side = 1;
    else if (sides.proper[0] && sides.proper[1]) side = sides.width[0] <= sides.width[1] ? 0 : 1;
    if (side < 0) throw Error(ErrorKind::ClassificationFailed, "no proper side at the vortex");
    LocalPiece lp = fillet_piece(in, out, side, gap, voff);
    lp.cls = cls;
    // the fillet bends into the proper side; each arm bending away from it adds one inflection
    if (sides.normal_side1 >= 0 && sides.normal_side2 >= 0)
        lp.predicted = int(sides.normal_side1 != side) + int(sides.normal_side2 != side);
    else
        lp.predicted = 2;
    if (cls == SpiralClass::unknown) lp.predicted = 2;
    return lp;
}

double median_gap(const SampledCurve& c) {
    auto g = chord_gaps(c);
    std::nth_element(g.begin(), g.begin() + long(g.size() / 2), g.end());
    return g[g.size() / 2];
}

size_t nearest_index(const SampledCurve& c, double t) {
    size_t best = 0;
    double bd = 1e300;
    double P = c.period();
    for (size_t i = 0; i < c.size(); ++i) {
        double d = std::abs(std::remainder(c.params[i] - t, P));
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

ScalarField curvature_of(const SampledCurve& c, const Tolerances& tol) {
    return c.ambient == Ambient::sphere ? geodesic_curvature(c, tol) : planar_curvature(c, tol);
}

struct Item {
    Vec3 p;
    long src;  // original sample index or -1
};

SampledCurve assemble(const SampledCurve& c, const std::vector<Item>& items, std::vector<size_t>& changed) {
    SampledCurve r;
    r.ambient = c.ambient;
    r.closed = true;
    changed.clear();
    for (size_t i = 0; i < items.size(); ++i) {
        r.pts.push_back(items[i].p);
        if (items[i].src < 0) changed.push_back(i);
    }
    r.params = uniform_params(r.pts.size());
    return r;
}

void finish(SurgeryOutcome& out, const SampledCurve& before, const Tolerances& tol) {
    auto rb = invariant_report(before, tol);
    auto ra = invariant_report(out.result, tol);
    out.sigma_plus_before = rb.sigma_plus.value_or(-1);
    out.sigma_plus_after = ra.sigma_plus.value_or(-1);
    out.inflections_added = (ra.I.finite() && rb.I.finite()) ? ra.I.count - rb.I.count : -1;
    if (out.changed.empty()) {
        out.curvature_jump = 0;
        out.c2_regular = true;
        return;
    }
    // measure around each run of changed samples (cyclic)
    const auto& ch = out.changed;
    long n = long(out.result.size());
    std::vector<std::pair<long, long>> runs;
    for (size_t k = 0; k < ch.size(); ++k) {
        long i = long(ch[k]);
        if (!runs.empty() && i - runs.back().second <= 24) runs.back().second = i;
        else runs.push_back({i, i});
    }
    if (runs.size() > 1 && runs.front().first + n - runs.back().second <= 24) {
        runs.front().first = runs.back().first - n;
        runs.pop_back();
    }
    auto sm = singular_mask(out.result, tol);
    auto k = curvature_of(out.result, tol);
    std::vector<bool> changed(size_t(n), false);
    for (size_t i : ch) changed[i] = true;
    bool singular = false;
    out.curvature_jump = 0;
    // only steps touching a new sample count; untouched input keeps its own sharpness
    for (auto [a, b] : runs) {
        long lo = a - 12, hi = b + 12;
        double km = 0, jump = 0;
        for (long i = lo; i <= hi; ++i) {
            size_t w = out.result.wrap(i);
            if (sm[w]) singular = true;
            if (!std::isfinite(k[w])) {
                if (changed[w]) jump = std::numeric_limits<double>::infinity();
                continue;
            }
            km = std::max(km, std::abs(k[w]));
        }
        for (long i = a - 1; i <= b; ++i) {
            size_t w0 = out.result.wrap(i), w1 = out.result.wrap(i + 1);
            if (!changed[w0] && !changed[w1]) continue;
            double d = std::abs(k[w1] - k[w0]);
            if (std::isfinite(d)) jump = std::max(jump, d);
        }
        out.curvature_jump = std::max(out.curvature_jump, km > 0 ? jump / km : 0.0);
    }
    out.c2_regular = !singular && out.curvature_jump < 0.25;
}

}  // namespace

double GraphArc::eval(double t) const { return lin(x, y, t); }

std::vector<double> GraphArc::second_derivative() const {
    size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) return d;
    for (size_t i = 1; i + 1 < n; ++i) {
        double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
        d[i] = 2 * (h1 * y[i + 1] - (h1 + h2) * y[i] + h2 * y[i - 1]) / (h1 * h2 * (h1 + h2));
    }
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    return d;
}

GraphArc GraphArc::sample(const std::function<double(double)>& f, double a, double b, size_t n,
                          std::vector<RegTag> tags) {
    GraphArc g;
    g.x.resize(n);
    g.y.resize(n);
    for (size_t i = 0; i < n; ++i) {
        g.x[i] = a + (b - a) * double(i) / double(n - 1);
        g.y[i] = f(g.x[i]);
    }
    g.tags = tags.empty() ? std::vector<RegTag>{{a, b, 2}} : std::move(tags);
    return g;
}

DoubleSpiral double_spiral_from_graph(const GraphArc& f) {
    DoubleSpiral ds;
    Vec2 o(0, f.eval(0));
    ds.arm1.push_back(Vec2(0, 0));
    ds.arm2.push_back(Vec2(0, 0));
    for (size_t i = 0; i < f.size(); ++i) {
        Vec2 p = Vec2(f.x[i], f.y[i]) - o;
        if (f.x[i] > 0) ds.arm1.push_back(p);
    }
    for (size_t i = f.size(); i-- > 0;) {
        Vec2 p = Vec2(f.x[i], f.y[i]) - o;
        if (f.x[i] < 0) ds.arm2.push_back(p);
    }
    ds.radius = std::min(max_radius(ds.arm1), max_radius(ds.arm2));
    return ds;
}

SpiralSides spiral_sides(const DoubleSpiral& ds, const Tolerances& tol) {
    (void)tol;
    if (ds.arm1.size() < 5 || ds.arm2.size() < 5)
        throw Error(ErrorKind::PreconditionViolated, "spiral arms need at least 5 samples");
    SpiralSides s;
    double rmax = std::min(max_radius(ds.arm1), max_radius(ds.arm2));
    double rlo = std::max(ds.arm1[3].norm(), ds.arm2[3].norm());
    double rhi = 0.6 * rmax;
    if (rlo >= rhi) rlo = 0.25 * rhi;
    constexpr int K = 24;
    double lo[2] = {-1e300, -1e300}, hi[2] = {1e300, 1e300}, ref[2] = {kNaN, kNaN};
    for (int k = 0; k < K; ++k) {
        double r = rlo * std::pow(rhi / rlo, double(k) / (K - 1));
        double a1 = angle_at(ds.arm1, r), a2 = angle_at(ds.arm2, r);
        if (!std::isfinite(a1) || !std::isfinite(a2)) continue;
        double w0 = wrap_angle(a2 - a1);
        double start[2] = {a1, a2}, width[2] = {w0, kTwoPi - w0};
        for (int side = 0; side < 2; ++side) {
            double st = start[side];
            if (std::isnan(ref[side])) ref[side] = st;
            st += kTwoPi * std::round((ref[side] - st) / kTwoPi);
            lo[side] = std::max(lo[side], st);
            hi[side] = std::min(hi[side], st + width[side]);
        }
    }
    for (int side = 0; side < 2; ++side) {
        s.width[side] = std::max(0.0, hi[side] - lo[side]);
        s.proper[side] = s.width[side] <= kPi + 1e-12;
    }
    int b1 = bend_sign(ds.arm1), b2 = bend_sign(ds.arm2);
    // side 0 lies left of arm1 and right of arm2
    if (b1 != 0) s.normal_side1 = b1 > 0 ? 0 : 1;
    if (b2 != 0) s.normal_side2 = b2 > 0 ? 1 : 0;
    return s;
}

SpiralClass classify_double_spiral(DoubleSpiral& ds, const Tolerances& tol) {
    auto s = spiral_sides(ds, tol);
    if (s.normal_side1 < 0 || s.normal_side2 < 0)
        throw Error(ErrorKind::AmbiguousClassification, "principal normal side is unclear on an arm");
    if (s.normal_side1 == s.normal_side2)
        ds.classification = s.proper[s.normal_side1] ? SpiralClass::convex : SpiralClass::concave;
    else
        ds.classification = SpiralClass::semiconvex;
    return ds.classification;
}

ScalarField mollify_zero_preserving(const ScalarField& f, double eps, const Tolerances& tol) {
    size_t n = f.size();
    if (n < 8) throw Error(ErrorKind::InsufficientSamples, "field needs at least 8 samples");
    double fmax = 0;
    for (double v : f) fmax = std::max(fmax, std::abs(v));
    double dead = tol.eps_zero * fmax;
    std::vector<bool> isdead(n);
    size_t nd = 0;
    for (size_t i = 0; i < n; ++i) {
        isdead[i] = std::abs(f[i]) <= dead;
        nd += isdead[i];
    }
    if (fmax == 0 || double(nd) > tol.degenerate_fraction * double(n))
        throw Error(ErrorKind::DegenerateField, "field within the dead band almost everywhere");

    // linear bridges across dead runs
    ScalarField g = f;
    size_t start = 0;
    while (isdead[start]) ++start;
    for (size_t k = 0; k < n;) {
        size_t i = (start + k) % n;
        if (!isdead[i]) {
            ++k;
            continue;
        }
        size_t len = 0;
        while (isdead[(i + len) % n]) ++len;
        size_t L = (i + n - 1) % n, R = (i + len) % n;
        for (size_t q = 0; q < len; ++q) {
            double a = double(q + 1) / double(len + 1);
            g[(i + q) % n] = (1 - a) * f[L] + a * f[R];
        }
        k += len;
    }
    auto zeros = [&](const ScalarField& h) {
        double hm = 0;
        for (double v : h) hm = std::max(hm, std::abs(v));
        double d = tol.eps_zero * hm;
        int cnt = 0, prev = 0, first = 0;
        for (size_t i = 0; i < n; ++i) {
            int s = h[i] > d ? 1 : (h[i] < -d ? -1 : 0);
            if (s == 0) continue;
            if (first == 0) first = s;
            if (prev != 0 && s != prev) ++cnt;
            prev = s;
        }
        if (prev != 0 && first != 0 && prev != first) ++cnt;
        return cnt;
    };
    auto in = count_sign_changes(f, tol);
    int limit = in.finite() ? in.count + int(in.touches.size()) : zeros(g);
    limit = std::max(limit, zeros(g));
    for (long L = long(n / 8); L >= 1; L /= 2) {
        std::vector<double> w(size_t(2 * L + 1));
        double ws = 0;
        for (long k = -L; k <= L; ++k) {
            double q = 1 - double(k * k) / double((L + 1) * (L + 1));
            w[size_t(k + L)] = q * q * q;
            ws += q * q * q;
        }
        ScalarField h(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            double s = 0;
            for (long k = -L; k <= L; ++k) s += w[size_t(k + L)] * g[(i + n + size_t(k + long(n))) % n];
            h[i] = s / ws;
        }
        double dev = 0;
        for (size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(h[i] - f[i]));
        if (dev <= eps && zeros(h) <= limit) return h;
    }
    return g;
}

GraphArc bump_perturb(const GraphArc& f, double delta, const Tolerances& tol) {
    if (f.size() < 9 || f.a() >= 0 || f.b() <= 0)
        throw Error(ErrorKind::PreconditionViolated, "bump needs a graph over an interval around 0");
    double a = std::min(-f.a(), f.b());
    auto d2 = f.second_derivative();
    double m = 0;
    for (double v : d2) m = std::max(m, std::abs(v));
    double h = (f.b() - f.a()) / double(f.size() - 1);
    int sgn = 0;
    for (size_t i = 1; i + 1 < f.size(); ++i) {
        if (std::abs(f.x[i]) <= 2 * h) continue;
        if (std::abs(d2[i]) <= tol.eps_zero * m)
            throw Error(ErrorKind::PreconditionViolated, "second derivative vanishes away from 0", {f.x[i]});
        int s = d2[i] > 0 ? 1 : -1;
        if (f.x[i] > 0) {
            if (sgn == 0) sgn = s;
        }
    }
    auto zc = [&](const std::vector<double>& v) {
        ScalarField fld(v.begin() + 1, v.end() - 1);
        SignChangeOptions o;
        o.cyclic = false;
        o.scale = m;
        auto r = count_sign_changes(fld, tol, {}, o);
        return r.finite() ? r.count + int(r.touches.size()) : 1 << 20;
    };
    int base = zc(d2);
    for (int it = 0; it < 40; ++it, delta *= 0.5) {
        GraphArc g = f;
        for (size_t i = 0; i < g.size(); ++i) g.y[i] += delta * cutoff(g.x[i], a / 4, a / 2);
        if (zc(g.second_derivative()) <= base) return g;
    }
    return f;
}

std::pair<GraphArc, GraphArc> separate_tangential_intersection(const GraphArc& b1, const GraphArc& b2,
                                                               const Tolerances& tol) {
    if (b1.size() != b2.size() || b1.size() < 16)
        throw Error(ErrorKind::PreconditionViolated, "branches must share a sampling grid");
    for (size_t i = 0; i < b1.size(); ++i)
        if (std::abs(b1.x[i] - b2.x[i]) > 1e-12 * (1 + std::abs(b1.x[i])))
            throw Error(ErrorKind::PreconditionViolated, "branches must share a sampling grid");
    size_t n = b1.size();
    const auto& x = b1.x;
    std::vector<double> d(n);
    double dmax = 0;
    for (size_t i = 0; i < n; ++i) {
        d[i] = b2.y[i] - b1.y[i];
        dmax = std::max(dmax, std::abs(d[i]));
    }
    if (dmax == 0) throw Error(ErrorKind::PreconditionViolated, "branches coincide");
    double dead = tol.eps_zero * dmax;
    auto sg = [&](double v) { return v > dead ? 1 : (v < -dead ? -1 : 0); };

    struct Cluster {
        size_t l, r;  // first and last index of the zero cluster
        int before, after;
    };
    std::vector<Cluster> cl;
    for (size_t i = 0; i + 1 < n;) {
        if (sg(d[i]) == 0) {
            size_t r = i;
            while (r + 1 < n && sg(d[r + 1]) == 0) ++r;
            cl.push_back({i, r, i > 0 ? sg(d[i - 1]) : 0, r + 1 < n ? sg(d[r + 1]) : 0});
            i = r + 1;
        } else if (sg(d[i + 1]) != 0 && sg(d[i + 1]) != sg(d[i])) {
            cl.push_back({i, i + 1, sg(d[i]), sg(d[i + 1])});
            ++i;
        } else {
            ++i;
        }
    }
    auto inflections = [&](const GraphArc& g) {
        auto s = g.second_derivative();
        double m = 0, ym = 0;
        for (double v : s) m = std::max(m, std::abs(v));
        for (double v : g.y) ym = std::max(ym, std::abs(v));
        std::vector<double> at;
        double span = x.back() - x.front();
        // a straight branch has no inflection to avoid
        if (m <= 1e-8 * std::max(ym, dmax) / (span * span)) return at;
        double dd = 1e-6 * m;
        int prev = 0;
        for (size_t i = 1; i + 1 < n; ++i) {
            int q = s[i] > dd ? 1 : (s[i] < -dd ? -1 : 0);
            if (q == 0) {
                at.push_back(x[i]);
                continue;
            }
            if (prev != 0 && q != prev) at.push_back(0.5 * (x[i] + x[i - 1]));
            prev = q;
        }
        return at;
    };
    auto inf1 = inflections(b1), inf2 = inflections(b2);
    double h = (x.back() - x.front()) / double(n - 1);
    auto near_inflection = [&](double x0) {
        for (double v : inf1)
            if (std::abs(v - x0) <= 2.5 * h) return true;
        for (double v : inf2)
            if (std::abs(v - x0) <= 2.5 * h) return true;
        return false;
    };

    std::vector<double> dn = d;
    for (size_t k = 0; k < cl.size(); ++k) {
        const auto& c = cl[k];
        if (c.l < 3 || c.r + 3 >= n || c.before == 0 || c.after == 0) continue;
        double x0 = 0.5 * (x[c.l] + x[c.r]);
        double w = std::min(x0 - x.front(), x.back() - x0);
        if (k > 0) w = std::min(w, x0 - x[cl[k - 1].r]);
        if (k + 1 < cl.size()) w = std::min(w, x[cl[k + 1].l] - x0);
        w *= 0.9;
        bool touch = c.before == c.after;
        double slope = (d[c.r + 1] - d[c.l - 1]) / (x[c.r + 1] - x[c.l - 1]);
        bool tangential = std::abs(slope) < 1e-3 * dmax / (x.back() - x.front());
        if (!touch && !tangential && !near_inflection(x0)) continue;
        double wmax = 0;
        for (size_t i = 0; i < n; ++i)
            if (std::abs(x[i] - x0) <= w) wmax = std::max(wmax, std::abs(d[i]));
        if (touch) {
            double delta = 0.1 * wmax;
            for (size_t i = 0; i < n; ++i) dn[i] += c.before * delta * cutoff(x[i] - x0, w / 2, w);
            continue;
        }
        // tangential crossing or crossing at an inflection: tilt and shift the difference
        bool ok = false;
        for (int it = 0; it < 30 && !ok; ++it) {
            double eps = wmax / w * std::ldexp(1.0, -it);
            double shift = w / 8;
            std::vector<double> trial = dn;
            for (size_t i = 0; i < n; ++i)
                trial[i] += c.after * eps * cutoff(x[i] - x0, w / 2, w) * ((x[i] - x0) + shift);
            int changes = 0;
            double root = kNaN;
            for (size_t i = 0; i + 1 < n; ++i) {
                if (std::abs(x[i] - x0) > w) continue;
                if ((trial[i] < 0) != (trial[i + 1] < 0)) {
                    ++changes;
                    root = x[i] + (x[i + 1] - x[i]) * trial[i] / (trial[i] - trial[i + 1]);
                }
            }
            if (changes == 1 && !near_inflection(root)) {
                dn = trial;
                ok = true;
            }
        }
        if (!ok) throw Error(ErrorKind::PreconditionViolated, "could not move the crossing off the inflection", {x0});
    }
    GraphArc o2 = b2;
    for (size_t i = 0; i < n; ++i) o2.y[i] = b1.y[i] + dn[i];
    return {b1, o2};
}

double curvature_jump(const SampledCurve& c, long lo, long hi, const Tolerances& tol) {
    auto k = curvature_of(c, tol);
    double km = 0, jump = 0;
    for (long i = lo; i <= hi; ++i) {
        double v = k[c.wrap(i)];
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        km = std::max(km, std::abs(v));
    }
    for (long i = lo; i < hi; ++i) jump = std::max(jump, std::abs(k[c.wrap(i + 1)] - k[c.wrap(i)]));
    return km > 0 ? jump / km : 0.0;
}

namespace {

SurgeryOutcome desingularize_once(const SampledCurve& c, double t0, double radius, const Tolerances& tol) {
    size_t n = c.size();
    size_t i0 = nearest_index(c, t0);
    // settle on the sharpest sample nearby
    double best = -1;
    size_t ib = i0;
    for (long d = -3; d <= 3; ++d) {
        size_t i = c.wrap(long(i0) + d);
        Vec3 a = c[i] - c[c.wrap(long(i) - 1)], b = c[c.wrap(long(i) + 1)] - c[i];
        double ang = std::atan2(a.cross(b).norm(), a.dot(b));
        if (ang > best) {
            best = ang;
            ib = i;
        }
    }
    i0 = ib;
    Chart ch(c.ambient, c[i0]);
    std::vector<Vec2> out{Vec2(0, 0)}, in{Vec2(0, 0)};
    for (long k = 1; k < long(n / 3); ++k) {
        Vec2 p = ch.to(c[c.wrap(long(i0) + k)]);
        if (p.norm() > radius) break;
        out.push_back(p);
    }
    for (long k = 1; k < long(n / 3); ++k) {
        Vec2 p = ch.to(c[c.wrap(long(i0) - k)]);
        if (p.norm() > radius) break;
        in.push_back(p);
    }
    if (out.size() < 12 || in.size() < 12)
        throw Error(ErrorKind::PreconditionViolated, "neighbourhood holds too few samples");
    long m_in = long(in.size()), m_out = long(out.size());

    auto sp = singular_points(c, tol);
    int inside = 0;
    for (double t : sp.locations) {
        long d = long(nearest_index(c, t)) - long(i0);
        d = std::abs(std::remainder(double(d), double(n)));
        if (d < std::max(m_in, m_out)) ++inside;
    }
    if (inside > 1) throw Error(ErrorKind::MultipleSingularity, "more than one singular point in the neighbourhood");

    double gap = median_gap(c);
    LocalPiece lp = smooth_vortex(in, out, true, gap, tol);

    // section covers samples i0 - (m_in - 1) .. i0 + (m_out - 1)
    long first = long(i0) - (m_in - 1), last = long(i0) + (m_out - 1);
    std::vector<Item> items;
    bool wraps = first < 0 || last >= long(n);
    long restart = wraps ? last + 1 : 0;
    auto push_outside = [&](long from, long to) {
        for (long i = from; i <= to; ++i) items.push_back({c[c.wrap(i)], long(c.wrap(i))});
    };
    auto push_piece = [&]() {
        for (size_t k = 0; k < lp.pts.size(); ++k) {
            if (lp.src[k] >= 0) {
                size_t idx = c.wrap(first + lp.src[k]);
                items.push_back({c[idx], long(idx)});
            } else {
                items.push_back({ch.from(lp.pts[k]), -1});
            }
        }
    };
    if (!wraps) {
        push_outside(0, first - 1);
        push_piece();
        push_outside(last + 1, long(n) - 1);
    } else {
        push_outside(restart, restart + (long(n) - (last - first + 1)) - 1);
        push_piece();
    }
    SurgeryOutcome o;
    o.result = assemble(c, items, o.changed);
    o.classes = {lp.cls};
    o.predicted_added = {lp.predicted};
    finish(o, c, tol);
    return o;
}

}  // namespace

SurgeryOutcome desingularize(const SampledCurve& c, double t0, double radius, const Tolerances& tol) {
    if (!c.closed || c.size() < 32) throw Error(ErrorKind::PreconditionViolated, "need a closed curve with 32+ samples");
    if (radius <= 0) radius = 30 * median_gap(c);
    // a thin horn between tangent arms may hold no fillet until the neighbourhood grows
    for (int attempt = 0;; ++attempt) {
        try {
            return desingularize_once(c, t0, radius, tol);
        } catch (const Error& e) {
            bool grow = e.kind() == ErrorKind::ClassificationFailed || e.kind() == ErrorKind::PreconditionViolated;
            if (!grow || attempt >= 5) throw;
        }
        radius *= 1.6;
    }
}

SurgeryOutcome resolve_double_point(const SampledCurve& c, std::pair<double, double> p, const Tolerances& tol,
                                    double radius) {
    if (!c.closed || c.size() < 64) throw Error(ErrorKind::PreconditionViolated, "need a closed curve with 64+ samples");
    size_t n = c.size();
    auto scan = scan_pairs(c, false, tol);
    if (scan.hits.empty()) throw Error(ErrorKind::NotDouble, "no crossing found");
    const SegmentHit* hit = nullptr;
    double P = c.period(), bd = 1e300;
    for (const auto& h : scan.hits) {
        double ti = c.params[h.i], tj = c.params[h.j];
        double d1 = std::abs(std::remainder(ti - p.first, P)) + std::abs(std::remainder(tj - p.second, P));
        double d2 = std::abs(std::remainder(ti - p.second, P)) + std::abs(std::remainder(tj - p.first, P));
        double d = std::min(d1, d2);
        if (d < bd) {
            bd = d;
            hit = &h;
        }
    }
    size_t i = hit->i, j = hit->j;
    double ai = hit->a, aj = hit->b;
    if (i > j) {
        std::swap(i, j);
        std::swap(ai, aj);
    }
    Vec3 X = c[i] + ai * (c[c.wrap(long(i) + 1)] - c[i]);
    if (c.ambient == Ambient::sphere) X.normalize();
    double gap = median_gap(c);
    if (radius <= 0) radius = 30 * gap;
    // sample spacing near the crossing bounds how far the neighbourhood may shrink
    double local_gap;
    {
        std::vector<double> g;
        for (size_t b : {i, j})
            for (long d = -20; d <= 20; ++d) {
                size_t k = c.wrap(long(b) + d);
                g.push_back((c[c.wrap(long(k) + 1)] - c[k]).norm());
            }
        std::nth_element(g.begin(), g.begin() + long(g.size() / 2), g.end());
        local_gap = g[g.size() / 2];
    }

    // a third branch near the crossing makes it a multiple point
    for (const auto& h : scan.hits) {
        auto far = [&](size_t a) {
            long d1 = std::abs(std::remainder(double(long(a) - long(i)), double(n)));
            long d2 = std::abs(std::remainder(double(long(a) - long(j)), double(n)));
            return d1 > 3 && d2 > 3;
        };
        Vec3 Y = c[h.i] + h.a * (c[c.wrap(long(h.i) + 1)] - c[h.i]);
        if ((Y - X).norm() < 3 * gap && (far(h.i) || far(h.j)))
            throw Error(ErrorKind::NotDouble, "more than two branches meet at the crossing");
    }

    Chart ch(c.ambient, X);
    // reconnection that keeps the curve connected: reverse the arc i+1 .. j
    std::vector<long> L;
    for (size_t k = 0; k <= i; ++k) L.push_back(long(k));
    for (size_t k = j; k > i; --k) L.push_back(long(k));
    for (size_t k = j + 1; k < n; ++k) L.push_back(long(k));
    long span = long(j - i);
    long shift = (long(i) - (long(n) - span) / 2 + long(n)) % long(n);
    std::rotate(L.begin(), L.begin() + shift, L.end());
    long p1 = (long(i) - shift + long(n)) % long(n);  // corner between L[p1] and L[p1 + 1]
    long p2 = p1 + span;

    // shrink the neighbourhood until only the four arms enter it
    std::vector<long> arm_len(4);
    for (int tries = 0;; ++tries) {
        bool clean = true;
        auto count_arm = [&](long pos, int step) {
            long m = 0;
            while (m < long(n) / 6) {
                long q = pos + step * m;
                if (q < 0 || q >= long(n)) break;
                if (ch.to(c[size_t(L[size_t(q)])]).norm() > radius) break;
                ++m;
            }
            return m;
        };
        arm_len = {count_arm(p1, -1), count_arm(p1 + 1, 1), count_arm(p2, -1), count_arm(p2 + 1, 1)};
        // arms running around a small loop must not meet
        if (arm_len[1] + arm_len[2] > span - 2 || arm_len[0] + arm_len[3] > long(n) - span - 2) clean = false;
        std::vector<bool> in_arm(n, false);
        auto mark = [&](long pos, int step, long m) {
            for (long k = 0; k < m; ++k) in_arm[size_t(L[size_t(pos + step * k)])] = true;
        };
        mark(p1, -1, arm_len[0]);
        mark(p1 + 1, 1, arm_len[1]);
        mark(p2, -1, arm_len[2]);
        mark(p2 + 1, 1, arm_len[3]);
        for (size_t k = 0; k < n && clean; ++k) {
            if (in_arm[k]) continue;
            if (c.ambient == Ambient::sphere && c[k].dot(X) <= 0.5) continue;  // 60 degrees away lies outside any neighbourhood
            if (ch.to(c[k]).norm() < radius) clean = false;
        }
        if (clean) break;
        radius *= 0.75;
        if (radius < 10 * local_gap || tries > 30)
            throw Error(ErrorKind::PreconditionViolated, "crossing neighbourhood is crowded");
    }
    for (long m : arm_len)
        if (m < 8) throw Error(ErrorKind::PreconditionViolated, "neighbourhood holds too few samples");

    std::vector<Item> items;
    for (long q : L) items.push_back({c[size_t(q)], q});
    SurgeryOutcome o;
    std::vector<std::pair<SpiralClass, int>> results;
    // later corner first so earlier positions stay valid
    for (long pc : {p2, p1}) {
        long mi = pc == p1 ? arm_len[0] : arm_len[2];
        long mo = pc == p1 ? arm_len[1] : arm_len[3];
        std::vector<Vec2> in{Vec2(0, 0)}, out{Vec2(0, 0)};
        for (long k = 0; k < mi; ++k) in.push_back(ch.to(items[size_t(pc - k)].p));
        for (long k = 0; k < mo; ++k) out.push_back(ch.to(items[size_t(pc + 1 + k)].p));
        LocalPiece lp = smooth_vortex(in, out, false, gap, tol);
        long first = pc - (mi - 1);
        std::vector<Item> piece;
        for (size_t k = 0; k < lp.pts.size(); ++k) {
            if (lp.src[k] >= 0) piece.push_back(items[size_t(first + lp.src[k])]);
            else piece.push_back({ch.from(lp.pts[k]), -1});
        }
        items.erase(items.begin() + first, items.begin() + (pc + mo + 1));
        items.insert(items.begin() + first, piece.begin(), piece.end());
        results.push_back({lp.cls, lp.predicted});
    }
    for (auto it = results.rbegin(); it != results.rend(); ++it) {
        o.classes.push_back(it->first);
        o.predicted_added.push_back(it->second);
    }
    o.result = assemble(c, items, o.changed);
    if (!is_simple(o.result, tol)) {
        // the surgery must remove this crossing; other crossings may remain
        auto [dp, anti] = coincidence_pairs(o.result, tol);
        (void)anti;
        auto [dp0, anti0] = coincidence_pairs(c, tol);
        (void)anti0;
        if (dp.status == Sentinel::finite && dp0.status == Sentinel::finite && dp.count() >= dp0.count())
            throw Error(ErrorKind::DisconnectedResult, "reconnection did not remove the crossing");
    }
    finish(o, c, tol);
    return o;
}

}  // namespace ck
