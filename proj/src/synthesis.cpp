#include "curvekit/synthesis.hpp"

#include "curvekit/incidence.hpp"

#include <algorithm>
#include <random>

namespace ck {

const char* to_string(Family f) {
    switch (f) {
        case Family::eq3: return "eq3";
        case Family::eq4: return "eq4";
        case Family::eq5: return "eq5";
    }
    return "?";
}

namespace {

struct FrameState {
    Vec3 p, t;
};

FrameState frame_rhs(const FrameState& s, double k) {
    // p' = t, t' = -p + k (p x t) for a unit-speed curve on the unit sphere
    return {s.t, -s.p + k * s.p.cross(s.t)};
}

FrameState axpy(const FrameState& a, double h, const FrameState& d) { return {a.p + h * d.p, a.t + h * d.t}; }

void reorthonormalize(FrameState& s) {
    s.p.normalize();
    s.t = (s.t - s.t.dot(s.p) * s.p).normalized();
}

double smoothstep5(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * (10 + x * (-15 + 6 * x));
}

}  // namespace

SampledCurve curve_from_geodesic_curvature(const std::function<double(double)>& k, double L, size_t n,
                                           const Vec3& p0, const Vec3& t0) {
    if (n < 2) throw Error(ErrorKind::InsufficientSamples, "need at least 2 samples");
    FrameState s{p0.normalized(), t0};
    reorthonormalize(s);
    double h = L / double(n - 1);
    SampledCurve c;
    c.ambient = Ambient::sphere;
    c.closed = false;
    c.params = uniform_params(n, 0.0, L, false);
    c.pts.push_back(s.p);
    for (size_t i = 1; i < n; ++i) {
        double x = h * double(i - 1);
        FrameState k1 = frame_rhs(s, k(x));
        FrameState k2 = frame_rhs(axpy(s, h / 2, k1), k(x + h / 2));
        FrameState k3 = frame_rhs(axpy(s, h / 2, k2), k(x + h / 2));
        FrameState k4 = frame_rhs(axpy(s, h, k3), k(x + h));
        s.p += h / 6 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
        s.t += h / 6 * (k1.t + 2 * k2.t + 2 * k3.t + k4.t);
        reorthonormalize(s);
        c.pts.push_back(s.p);
    }
    return c;
}

SampledCurve curve_from_geodesic_curvature(const ScalarField& k, double L, const Vec3& p0, const Vec3& t0) {
    size_t n = k.size();
    if (n < 4) throw Error(ErrorKind::InsufficientSamples, "need at least 4 curvature samples");
    double h = L / double(n - 1);
    auto interp = [&](double s) {
        double x = std::clamp(s / h, 0.0, double(n - 1));
        long i = std::min<long>(long(x), long(n) - 2);
        double u = x - double(i);
        auto at = [&](long j) {
            if (j < 0) return 2 * k[0] - k[1];
            if (j >= long(n)) return 2 * k[n - 1] - k[n - 2];
            return k[size_t(j)];
        };
        double y0 = at(i - 1), y1 = at(i), y2 = at(i + 1), y3 = at(i + 2);
        // cubic Lagrange through four neighbours
        return y0 * (-u * (u - 1) * (u - 2) / 6) + y1 * ((u + 1) * (u - 1) * (u - 2) / 2) +
               y2 * (-(u + 1) * u * (u - 2) / 2) + y3 * ((u + 1) * u * (u - 1) / 6);
    };
    return curve_from_geodesic_curvature(interp, L, n, p0, t0);
}

SampledCurve close_up(const SampledCurve& open, double window, const Tolerances& tol) {
    (void)tol;
    if (open.closed) return open;
    size_t n = open.size();
    if (n < 8) throw Error(ErrorKind::InsufficientSamples, "need at least 8 samples");
    if (!(window > 0 && window < 1)) throw Error(ErrorKind::PreconditionViolated, "window must lie in (0,1)");
    double a = open.params.front(), b = open.params.back(), L = b - a;
    auto d1 = differentiate(open, 1), d2 = differentiate(open, 2);
    Vec3 e0 = open.pts.front() - open.pts.back();
    Vec3 e1 = d1.front() - d1.back();
    Vec3 e2 = d2.front() - d2.back();
    double w = window * L;
    if (e0.norm() > 0.1 * w) throw Error(ErrorKind::MismatchTooLarge, "endpoint gap too large for the blend window");
    SampledCurve c;
    c.ambient = open.ambient;
    c.closed = true;
    for (size_t i = 0; i + 1 < n; ++i) {
        double s = open.params[i];
        Vec3 p = open.pts[i];
        double u = (s - (b - w)) / w;
        if (u > 0) {
            double H0 = u * u * u * (10 - 15 * u + 6 * u * u);
            double H1 = u * u * u * (-4 + 7 * u - 3 * u * u);
            double H2 = 0.5 * u * u * u * (1 - 2 * u + u * u);
            p += H0 * e0 + H1 * w * e1 + H2 * w * w * e2;
            if (c.ambient == Ambient::sphere) p.normalize();
        }
        c.pts.push_back(p);
        c.params.push_back(kTwoPi * (s - a) / L);
    }
    return c;
}

TantrixIntegration integrate_tantrix(const SampledCurve& T, const Tolerances& tol, double v_min) {
    if (!T.closed) throw Error(ErrorKind::PreconditionViolated, "tantrix must be closed");
    HullStatus hs = origin_in_hull(T.pts, tol);
    if (hs.status != HullClass::interior) throw Error(ErrorKind::HullViolation, "origin not interior to the tantrix hull");
    size_t n = T.size();
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) {
        double tp = T.params[T.wrap(long(i) + 1)], tm = T.params[T.wrap(long(i) - 1)];
        if (tp < T.params[i]) tp += kTwoPi;
        if (tm > T.params[i]) tm -= kTwoPi;
        w[i] = 0.5 * (tp - tm);
    }
    // min |v - 1|^2 subject to sum w v T = 0 and v >= v_min: projection plus clipping
    std::vector<double> v(n, 1.0);
    std::vector<bool> clipped(n, false);
    for (size_t iter = 0; iter <= n; ++iter) {
        Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
        Vec3 r = Vec3::Zero();
        for (size_t i = 0; i < n; ++i) {
            Vec3 a = w[i] * T.pts[i];
            if (clipped[i]) r -= v_min * a;
            else {
                M += a * a.transpose();
                r -= a;
            }
        }
        Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
        if (lu.rank() < 3) throw Error(ErrorKind::InfeasibleSpeed, "speed constraint lost rank");
        Vec3 lam = lu.solve(r);
        bool changed = false;
        for (size_t i = 0; i < n; ++i) {
            if (clipped[i]) {
                v[i] = v_min;
                continue;
            }
            v[i] = 1.0 + (w[i] * T.pts[i]).dot(lam);
            if (v[i] < v_min) {
                clipped[i] = true;
                v[i] = v_min;
                changed = true;
            }
        }
        if (!changed) break;
    }
    Vec3 closure = Vec3::Zero();
    double total = 0;
    for (size_t i = 0; i < n; ++i) {
        closure += w[i] * v[i] * T.pts[i];
        total += w[i] * v[i];
    }
    if (closure.norm() > 1e-9 * total) throw Error(ErrorKind::InfeasibleSpeed, "no admissible speed function");

    TantrixIntegration out;
    out.speed = v;
    out.curve.ambient = Ambient::space;
    out.curve.closed = true;
    out.curve.params = T.params;
    // trapezoidal integration closes exactly when the weighted sum vanishes
    Vec3 p = Vec3::Zero();
    out.curve.pts.push_back(p);
    for (size_t i = 0; i + 1 < n; ++i) {
        double h = T.params[i + 1] - T.params[i];
        p += 0.5 * h * (v[i] * T.pts[i] + v[i + 1] * T.pts[i + 1]);
        out.curve.pts.push_back(p);
    }
    double hl = T.params[0] + kTwoPi - T.params[n - 1];
    Vec3 end = p + 0.5 * hl * (v[n - 1] * T.pts[n - 1] + v[0] * T.pts[0]);
    Vec3 centroid = Vec3::Zero();
    for (const auto& q : out.curve.pts) centroid += q;
    centroid /= double(n);
    for (auto& q : out.curve.pts) q -= centroid;
    out.closure_residual = end.norm();
    return out;
}

namespace {

double compress_param(double u, int M) {
    if (M <= 0) return u;
    double a = std::min(u, 1.0 - u);
    double h = a + (std::pow(1.0 - 2.0 * a, M + 1) - 1.0) / (2.0 * (M + 1));
    double tot = double(M) / double(M + 1);
    return (u <= 0.5 ? h : tot - h) / tot;
}

Vec3 inverse_stereo(std::complex<double> w) {
    double r2 = std::norm(w);
    return Vec3(2 * w.real(), 2 * w.imag(), r2 - 1) / (r2 + 1);
}

Vec3 arc_point(const ArcAssembly& a, double t) {
    size_t m = a.arcs.size();
    double x = t / kTwoPi * double(m);
    size_t k = std::min<size_t>(size_t(std::floor(x)), m - 1);
    double u = x - double(k);
    const CircularArc& arc = a.arcs[k];
    double ang = arc.start + arc.span * compress_param(u, a.compress);
    return inverse_stereo(arc.center + arc.radius * std::polar(1.0, ang));
}

Vec3 cyl(double x, double z) { return Vec3(std::cos(x), std::sin(x), z).normalized(); }

using CurveFn = std::function<Vec3(double)>;

struct Unfold {
    double t0 = 0;
    double eps = 0;
    Vec3 normal = Vec3::Zero();
};

double wrap_pi(double s) {
    s = std::fmod(s + kPi, kTwoPi);
    if (s < 0) s += kTwoPi;
    return s - kPi;
}

constexpr double kBump0 = 1.5, kBump1 = 5.0;

double unfold_bump(double u) {
    u = std::abs(u);
    if (u <= kBump0) return 1.0;
    if (u >= kBump1) return 0.0;
    return 1.0 - smoothstep5((u - kBump0) / (kBump1 - kBump0));
}

// Local unfolding of a cusp at t0: a loop (sign = -1) or a smooth arc with two inflections (sign = +1).
Unfold make_unfold(const CurveFn& g, double t0, double tau, int sign, double gain) {
    const double d = 1e-4;
    Vec3 P = g(t0);
    Vec3 acc = (g(t0 + d) - 2 * P + g(t0 - d)) / (d * d);
    Vec3 e1 = (acc - acc.dot(P) * P).normalized();
    Vec3 nrm = P.cross(e1);
    double Y = (g(t0 + tau) - g(t0 - tau)).dot(nrm);
    Unfold u;
    u.t0 = t0;
    u.normal = nrm;
    u.eps = double(sign) * gain * Y / (2 * tau);
    return u;
}

CurveFn apply_unfolds(const CurveFn& g, std::vector<Unfold> us, double tau) {
    return [g, us = std::move(us), tau](double t) {
        Vec3 p = g(t);
        for (const auto& u : us) {
            double s = wrap_pi(t - u.t0);
            double b = unfold_bump(s / tau);
            if (b > 0) p += u.eps * s * b * u.normal;
        }
        return Vec3(p.normalized());
    };
}

SampledCurve sample_fn(const CurveFn& f, size_t n) { return sample_closed(Ambient::sphere, n, f); }

}  // namespace

SampledCurve arc_assembly_curve(const ArcAssembly& a, size_t n) {
    if (a.arcs.empty()) throw Error(ErrorKind::PreconditionViolated, "empty arc assembly");
    return sample_closed(Ambient::sphere, n, [&](double t) { return arc_point(a, t); });
}

ArcAssembly deltoid_assembly(double R) {
    ArcAssembly a;
    const double s3 = std::sqrt(3.0);
    for (int k = 0; k < 3; ++k) {
        CircularArc arc;
        std::complex<double> rot = std::polar(1.0, kTwoPi * k / 3.0);
        arc.center = rot * std::complex<double>(R, R * s3);
        arc.radius = s3 * R;
        arc.start = -kPi / 2 + kTwoPi * k / 3.0;
        arc.span = -kPi / 3;
        a.arcs.push_back(arc);
        a.junctions.push_back(Junction::cusp);
    }
    return a;
}

double deltoid_radius(const Tolerances& tol) {
    // widest run of radii whose three-arc curve reports (0,3,0) with the origin inside the hull
    static double cached = 0;
    if (cached > 0) return cached;
    std::vector<double> ok_r;
    double best_lo = 0, best_hi = -1, lo = -1;
    const double step = 0.05;
    for (double R = 2.0; R <= 5.0 + 1e-9; R += step) {
        SampledCurve c = arc_assembly_curve(deltoid_assembly(R), 512);
        InvariantReport rep = invariant_report(c, tol);
        bool ok = rep.D.finite() && rep.D.count == 0 && rep.S.finite() && rep.S.count == 3 && rep.I.finite() &&
                  rep.I.count == 0 && rep.hull && *rep.hull == HullClass::interior;
        if (ok && lo < 0) lo = R;
        if ((!ok || R + step > 5.0 + 1e-9) && lo >= 0) {
            double hi = ok ? R : R - step;
            if (hi - lo > best_hi - best_lo) {
                best_lo = lo;
                best_hi = hi;
            }
            lo = -1;
        }
    }
    if (best_hi < best_lo) throw Error(ErrorKind::ConstraintUnsatisfiable, "no admissible deltoid radius");
    cached = 0.5 * (best_lo + best_hi);
    return cached;
}

std::vector<Triple> family_triples(Family f) {
    std::vector<Triple> out;
    if (f == Family::eq5) return {{0, 0, 6}, {0, 2, 2}, {2, 0, 2}};
    int total = f == Family::eq3 ? 6 : 4;
    for (int ds = total / 2; ds >= 0; --ds)
        for (int d = 0; d <= ds; ++d) out.push_back({d, ds - d, total - 2 * ds});
    return out;
}

SharpExample sharp_example(Family f, const Triple& target, size_t n, const Tolerances& tol) {
    auto valid = family_triples(f);
    if (std::find(valid.begin(), valid.end(), target) == valid.end())
        throw Error(ErrorKind::InvalidTriple, "triple not in the family enumeration");
    SharpExample ex;
    ex.target = target;

    CurveFn base;
    std::vector<double> cusp_t;
    std::vector<int> mode;  // 0 keep, -1 loop, +1 smooth
    if (f == Family::eq3) {
        ArcAssembly a = deltoid_assembly(deltoid_radius(tol));
        base = [a](double t) { return arc_point(a, std::fmod(std::fmod(t, kTwoPi) + kTwoPi, kTwoPi)); };
        cusp_t = {0.0, kTwoPi / 3, 2 * kTwoPi / 3};
        ex.loops = target[0];
        ex.cusps = target[1];
        ex.smoothed = target[2] / 2;
    } else if (f == Family::eq4) {
        base = [](double t) { return cyl(t - std::sin(2 * t) / 2, 0.2 + 0.5 * std::cos(2 * t)); };
        cusp_t = {0.0, kPi};
        ex.loops = target[0];
        ex.cusps = target[1];
        ex.smoothed = target[2] / 2;
    } else {
        base = [](double t) { return cyl(t - std::sin(2 * t) / 2, 0.5 * std::cos(t)); };
        cusp_t = {0.0};
        ex.loops = target[0] / 2;
        ex.cusps = target[1] / 2;
        ex.smoothed = (target[2] - 2) / 2;
    }
    for (int i = 0; i < ex.loops; ++i) mode.push_back(-1);
    for (int i = 0; i < ex.cusps; ++i) mode.push_back(0);
    for (int i = 0; i < ex.smoothed; ++i) mode.push_back(1);
    if (f == Family::eq5) {
        ex.loops *= 2;
        ex.cusps *= 2;
        ex.smoothed *= 2;
    }

    const double taus[] = {0.2, 0.25, 0.15, 0.3, 0.12, 0.18, 0.22};
    const double gains[] = {1.0, 2.0};
    bool first = true;
    for (double gain : gains)
        for (double tau : taus) {
            if (f == Family::eq5 && kBump1 * tau >= kPi / 2) continue;
            std::vector<Unfold> us;
            for (size_t c = 0; c < cusp_t.size(); ++c)
                if (mode[c] != 0) us.push_back(make_unfold(base, cusp_t[c], tau, mode[c], gain));
            CurveFn g = apply_unfolds(base, us, tau);
            CurveFn h = g;
            if (f == Family::eq5) {
                h = [g](double t) {
                    double s = wrap_pi(t);
                    if (s >= -kPi / 2 && s < kPi / 2) return g(s);
                    return Vec3(-g(s - kPi));
                };
            }
            SampledCurve c = sample_fn(h, n);
            InvariantReport rep = invariant_report(c, tol);
            const CountResult& D = f == Family::eq3 ? rep.D : rep.D_plus;
            bool ok = D.finite() && rep.S.finite() && rep.I.finite() && D.count == target[0] && rep.S.count == target[1] &&
                      rep.I.count == target[2] && rep.I.genuine == rep.I.count;
            if (f != Family::eq5) ok = ok && rep.hull && *rep.hull != HullClass::outside;
            if (first || ok) {
                ex.curve = c;
                ex.unfold_scale = tau;
                first = false;
            }
            if (ok) {
                ex.verified = true;
                return ex;
            }
            if (us.empty()) return ex;  // nothing to tune
        }
    return ex;
}

Vec3 FourierLoop::eval(double t) const {
    if (graph) {
        double z = z0, phi = t;
        for (size_t k = 0; k < za.size(); ++k) {
            double kk = double(k + 1);
            z += za[k] * std::cos(kk * t) + zb[k] * std::sin(kk * t);
            phi += pc[k] * std::sin(kk * t);
        }
        double r = std::sqrt(std::max(0.0, 1 - z * z));
        return Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
    Vec3 p = Vec3::Zero();
    for (int d = 0; d < 3; ++d)
        for (size_t k = 0; k < ca[size_t(d)].size(); ++k) {
            double kk = double(k);
            p[d] += ca[size_t(d)][k] * std::cos(kk * t) + cb[size_t(d)][k] * std::sin(kk * t);
        }
    if (ambient == Ambient::sphere) p.normalize();
    return p;
}

SampledCurve FourierLoop::sample(size_t n) const {
    return sample_closed(ambient, n, [this](double t) { return eval(t); });
}

RandomLoop random_fourier_loop(uint64_t seed, int degree, Ambient ambient, const LoopConstraints& c, const Tolerances& tol) {
    if (degree < 1) throw Error(ErrorKind::PreconditionViolated, "degree must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    bool graph = ambient == Ambient::sphere && (c.simple || c.bisecting || c.symmetric);
    for (int tries = 1; tries <= c.max_tries; ++tries) {
        FourierLoop L;
        L.ambient = ambient;
        L.seed = seed;
        L.degree = degree;
        L.graph = graph;
        if (graph) {
            L.z0 = c.symmetric ? 0.0 : c.z_offset;
            double phi_slope = 1.0;
            for (int k = 1; k <= degree; ++k) {
                double za = U(rng) * c.amplitude / k, zb = U(rng) * c.amplitude / k, pc = U(rng) * 0.3 / (k * k);
                // p(t + pi) = -p(t) needs odd latitude and even longitude harmonics
                if (c.symmetric && k % 2 == 0) za = zb = 0;
                if (c.symmetric && k % 2 == 1) pc = 0;
                L.za.push_back(za);
                L.zb.push_back(zb);
                L.pc.push_back(pc);
                phi_slope -= k * std::abs(pc);
            }
            if (phi_slope < 0.2) continue;
        } else {
            for (int d = 0; d < 3; ++d) {
                L.ca[size_t(d)].assign(size_t(degree) + 1, 0.0);
                L.cb[size_t(d)].assign(size_t(degree) + 1, 0.0);
                for (int k = 1; k <= degree; ++k) {
                    L.ca[size_t(d)][size_t(k)] = U(rng) / k;
                    L.cb[size_t(d)][size_t(k)] = U(rng) / k;
                }
                L.ca[size_t(d)][0] = ambient == Ambient::sphere ? 0.3 * U(rng) : 0.0;
            }
        }
        auto zmax = [&](const FourierLoop& F) {
            double m = 0;
            for (int i = 0; i < 512; ++i) {
                Vec3 p = F.eval(kTwoPi * i / 512);
                m = std::max(m, std::abs(p.z()));
            }
            return m;
        };
        if (graph && zmax(L) > 0.95) continue;
        if (!graph) {
            bool bad = false;
            for (int i = 0; i < 512 && !bad; ++i) {
                double t = kTwoPi * i / 512;
                Vec3 p = Vec3::Zero();
                for (int d = 0; d < 3; ++d)
                    for (size_t k = 0; k < L.ca[size_t(d)].size(); ++k)
                        p[d] += L.ca[size_t(d)][k] * std::cos(double(k) * t) + L.cb[size_t(d)][k] * std::sin(double(k) * t);
                if (p.norm() < 0.1) bad = true;
            }
            if (bad) continue;
        }
        if (c.bisecting && !c.symmetric) {
            // latitude shift search: the left (northern) area decreases as the curve moves north
            double lo = -0.6, hi = 0.6;
            auto area_at = [&](double z0) {
                FourierLoop F = L;
                F.z0 = z0;
                return signed_area_left(F.sample(c.n));
            };
            double alo = area_at(lo), ahi = area_at(hi);
            if (!(alo > kTwoPi && ahi < kTwoPi)) continue;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                if (area_at(mid) > kTwoPi) lo = mid;
                else hi = mid;
            }
            L.z0 = 0.5 * (lo + hi);
            if (zmax(L) > 0.95) continue;
        }
        SampledCurve curve = L.sample(c.n);
        if (ambient != Ambient::space) {
            auto d1 = differentiate(curve, 1);
            double vmin = 1e300, vmax = 0;
            for (const auto& v : d1) {
                vmin = std::min(vmin, v.norm());
                vmax = std::max(vmax, v.norm());
            }
            if (vmin < 0.05 * vmax) continue;
        }
        if (c.simple && !is_simple(curve, tol)) continue;
        if (c.hull_interior && origin_in_hull(curve.pts, tol).status != HullClass::interior) continue;
        if (c.bisecting && std::abs(signed_area_left(curve) - kTwoPi) >= tol.bisect_tol) continue;
        return {L, curve, tries};
    }
    throw Error(ErrorKind::ConstraintUnsatisfiable, "no admissible loop within max_tries");
}

}  // namespace ck
