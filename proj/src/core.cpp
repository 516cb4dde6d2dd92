#include "curvekit/core.hpp"

#include "curvekit/incidence.hpp"
#include "curvekit/invariants.hpp"

#include <algorithm>
#include <numeric>

namespace ck {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::DegenerateCurve: return "DegenerateCurve";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::NotInHemisphere: return "NotInHemisphere";
        case ErrorKind::PoleOnCurve: return "PoleOnCurve";
        case ErrorKind::NotSimple: return "NotSimple";
        case ErrorKind::SingularCurve: return "SingularCurve";
        case ErrorKind::StepTooLarge: return "StepTooLarge";
        case ErrorKind::CurveDegenerate: return "CurveDegenerate";
        case ErrorKind::FlowBlowup: return "FlowBlowup";
        case ErrorKind::DegenerateField: return "DegenerateField";
        case ErrorKind::PreconditionViolated: return "PreconditionViolated";
        case ErrorKind::AmbiguousClassification: return "AmbiguousClassification";
        case ErrorKind::MultipleSingularity: return "MultipleSingularity";
        case ErrorKind::ClassificationFailed: return "ClassificationFailed";
        case ErrorKind::NotDouble: return "NotDouble";
        case ErrorKind::DisconnectedResult: return "DisconnectedResult";
        case ErrorKind::MismatchTooLarge: return "MismatchTooLarge";
        case ErrorKind::HullViolation: return "HullViolation";
        case ErrorKind::InfeasibleSpeed: return "InfeasibleSpeed";
        case ErrorKind::InvalidTriple: return "InvalidTriple";
        case ErrorKind::ConstraintUnsatisfiable: return "ConstraintUnsatisfiable";
        case ErrorKind::InflectedCurve: return "InflectedCurve";
        case ErrorKind::NotInscribed: return "NotInscribed";
        case ErrorKind::LiftInvalid: return "LiftInvalid";
        case ErrorKind::SpecParseError: return "SpecParseError";
    }
    return "Unknown";
}

const char* to_string(Ambient a) {
    switch (a) {
        case Ambient::plane: return "plane";
        case Ambient::sphere: return "sphere";
        case Ambient::space: return "space";
    }
    return "?";
}

const char* to_string(HullClass h) {
    switch (h) {
        case HullClass::outside: return "outside";
        case HullClass::boundary: return "boundary";
        case HullClass::interior: return "interior";
    }
    return "?";
}

void SampledCurve::validate(double eps_unit) const {
    if (pts.size() != params.size())
        throw Error(ErrorKind::PreconditionViolated, "params and samples differ in length");
    if (closed && pts.size() < 8) throw Error(ErrorKind::InsufficientSamples, "closed curve needs at least 8 samples");
    if (!closed && pts.size() < 2) throw Error(ErrorKind::InsufficientSamples, "open curve needs at least 2 samples");
    for (size_t i = 1; i < params.size(); ++i)
        if (!(params[i] > params[i - 1])) throw Error(ErrorKind::PreconditionViolated, "params not strictly increasing");
    if (closed && (params.front() < 0.0 || params.back() >= kTwoPi))
        throw Error(ErrorKind::PreconditionViolated, "closed params must lie in [0, 2pi)");
    if (ambient == Ambient::sphere) {
        std::vector<double> bad;
        for (size_t i = 0; i < pts.size(); ++i)
            if (std::abs(pts[i].norm() - 1.0) > eps_unit) bad.push_back(double(i));
        if (!bad.empty()) throw Error(ErrorKind::PreconditionViolated, "sphere samples off the unit sphere", bad);
    }
    if (ambient == Ambient::plane) {
        for (const auto& p : pts)
            if (p.z() != 0.0) throw Error(ErrorKind::PreconditionViolated, "planar samples need z = 0");
    }
}

void Tolerances::validate() const {
    if (!(eps_zero > 0 && eps_zero < 1)) throw Error(ErrorKind::PreconditionViolated, "eps_zero must lie in (0,1)");
    if (!(eps_match > 0 && eps_hull > 0 && eps_unit > 0 && cluster_width > 0))
        throw Error(ErrorKind::PreconditionViolated, "tolerances must be positive");
    if (!(degenerate_fraction > 0 && degenerate_fraction < 1))
        throw Error(ErrorKind::PreconditionViolated, "degenerate_fraction must lie in (0,1)");
    if (!(bisect_tol > 0 && singular_turn > 0)) throw Error(ErrorKind::PreconditionViolated, "tolerances must be positive");
}

std::vector<double> uniform_params(size_t n, double a, double b, bool closed) {
    std::vector<double> t(n);
    double h = closed ? (b - a) / double(n) : (b - a) / double(n - 1);
    for (size_t i = 0; i < n; ++i) t[i] = a + h * double(i);
    return t;
}

double diameter(const SampledCurve& c) {
    Vec3 lo = c.pts[0], hi = c.pts[0];
    for (const auto& p : c.pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    // bounding-box diagonal bounds the diameter within a factor sqrt(3)
    double d = (hi - lo).norm();
    if (c.size() <= 512) {
        double best = 0;
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = i + 1; j < c.size(); ++j) best = std::max(best, (c.pts[i] - c.pts[j]).norm());
        return best;
    }
    return d;
}

std::vector<double> chord_gaps(const SampledCurve& c) {
    size_t n = c.size();
    size_t m = c.closed ? n : n - 1;
    std::vector<double> g(m);
    for (size_t i = 0; i < m; ++i) g[i] = (c.pts[(i + 1) % n] - c.pts[i]).norm();
    return g;
}

double arc_length(const SampledCurve& c) {
    auto g = chord_gaps(c);
    return std::accumulate(g.begin(), g.end(), 0.0);
}

double match_eps(const SampledCurve& c, const Tolerances& tol) { return tol.eps_match * diameter(c); }

bool uniform_spacing(const SampledCurve& c, double rel) {
    size_t n = c.size();
    if (n < 3) return true;
    double h = c.closed ? kTwoPi / double(n) : (c.params.back() - c.params.front()) / double(n - 1);
    for (size_t i = 0; i < n; ++i) {
        double want = (c.closed ? 0.0 : c.params.front()) + h * double(i);
        if (std::abs(c.params[i] - want) > rel * std::max(1.0, std::abs(want)) + rel) return false;
    }
    return true;
}

namespace {

// Cubic spline through knots u with values y per coordinate; periodic for closed curves,
// natural otherwise. Stores second derivatives.
struct Spline3 {
    std::vector<double> u;
    std::vector<Vec3> y, m;
    bool periodic = true;
    double period = 0;

    void build(std::vector<double> knots, std::vector<Vec3> vals, bool closed) {
        u = std::move(knots);
        y = std::move(vals);
        periodic = closed;
        size_t n = y.size();
        m.assign(n, Vec3::Zero());
        if (periodic) {
            period = u.back() + (y.front() - y.back()).norm() - u.front();
            // cyclic tridiagonal solve via Sherman-Morrison
            std::vector<double> a(n), b(n), cc(n);
            std::vector<Vec3> r(n);
            for (size_t i = 0; i < n; ++i) {
                double hl = seg(i + n - 1), hr = seg(i);
                a[i] = hl / 6.0;
                b[i] = (hl + hr) / 3.0;
                cc[i] = hr / 6.0;
                r[i] = (y[(i + 1) % n] - y[i]) / hr - (y[i] - y[(i + n - 1) % n]) / hl;
            }
            double gamma = -b[0];
            std::vector<double> bb = b;
            bb[0] -= gamma;
            bb[n - 1] -= a[0] * cc[n - 1] / gamma;
            auto x = thomas(a, bb, cc, r);
            std::vector<Vec3> uvec(n, Vec3::Zero());
            uvec[0] = Vec3::Constant(gamma);
            uvec[n - 1] = Vec3::Constant(cc[n - 1]);
            auto z = thomas(a, bb, cc, uvec);
            for (int d = 0; d < 3; ++d) {
                double fact = (x[0][d] + a[0] * x[n - 1][d] / gamma) / (1.0 + z[0][d] + a[0] * z[n - 1][d] / gamma);
                for (size_t i = 0; i < n; ++i) m[i][d] = x[i][d] - fact * z[i][d];
            }
        } else {
            std::vector<double> a(n, 0), b(n, 1), cc(n, 0);
            std::vector<Vec3> r(n, Vec3::Zero());
            for (size_t i = 1; i + 1 < n; ++i) {
                double hl = u[i] - u[i - 1], hr = u[i + 1] - u[i];
                a[i] = hl / 6.0;
                b[i] = (hl + hr) / 3.0;
                cc[i] = hr / 6.0;
                r[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
            }
            m = thomas(a, b, cc, r);
        }
    }

    double seg(size_t i) const {
        size_t n = u.size();
        i %= n;
        if (i + 1 < n) return u[i + 1] - u[i];
        return period - (u[n - 1] - u[0]);
    }

    static std::vector<Vec3> thomas(const std::vector<double>& a, const std::vector<double>& b,
                                    const std::vector<double>& c, const std::vector<Vec3>& r) {
        size_t n = b.size();
        std::vector<double> cp(n);
        std::vector<Vec3> dp(n), x(n);
        cp[0] = c[0] / b[0];
        dp[0] = r[0] / b[0];
        for (size_t i = 1; i < n; ++i) {
            double den = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / den;
            dp[i] = (r[i] - a[i] * dp[i - 1]) / den;
        }
        x[n - 1] = dp[n - 1];
        for (size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
        return x;
    }

    // evaluate on segment i at local offset s in [0, seg(i)]
    Vec3 eval(size_t i, double s) const {
        size_t n = y.size();
        size_t j = (i + 1) % n;
        double h = seg(i);
        double A = (h - s) / h, B = s / h;
        return A * y[i] + B * y[j] + ((A * A * A - A) * m[i] + (B * B * B - B) * m[j]) * (h * h / 6.0);
    }
};

}  // namespace

SampledCurve resample_arclength(const SampledCurve& c, size_t n) {
    if (c.size() < 4) throw Error(ErrorKind::InsufficientSamples, "resampling needs at least 4 samples");
    if (n < (c.closed ? 8u : 2u)) throw Error(ErrorKind::InsufficientSamples, "too few output samples");
    double L = arc_length(c);
    double diam = diameter(c);
    if (!(L > 1e-6 * std::max(diam, 1e-300)) || diam < 1e-14) throw Error(ErrorKind::DegenerateCurve, "total length below eps_match");

    size_t m = c.size();
    std::vector<double> knots(m, 0.0);
    for (size_t i = 1; i < m; ++i) knots[i] = knots[i - 1] + (c.pts[i] - c.pts[i - 1]).norm();
    for (size_t i = 1; i < m; ++i)
        if (!(knots[i] > knots[i - 1])) throw Error(ErrorKind::DegenerateCurve, "repeated consecutive samples", {double(i)});
    if (c.closed && (c.pts.front() - c.pts.back()).norm() <= 0)
        throw Error(ErrorKind::DegenerateCurve, "repeated closing sample");
    Spline3 sp;
    sp.build(knots, c.pts, c.closed);

    // dense arclength table of the spline
    const int sub = 16;
    size_t nseg = c.closed ? m : m - 1;
    std::vector<double> cum;
    cum.reserve(nseg * sub + 1);
    cum.push_back(0.0);
    for (size_t i = 0; i < nseg; ++i) {
        double h = sp.seg(i);
        Vec3 prev = sp.eval(i, 0.0);
        for (int k = 1; k <= sub; ++k) {
            Vec3 q = sp.eval(i, h * k / sub);
            cum.push_back(cum.back() + (q - prev).norm());
            prev = q;
        }
    }
    double total = cum.back();

    SampledCurve out;
    out.ambient = c.ambient;
    out.closed = c.closed;
    out.params = c.closed ? uniform_params(n) : uniform_params(n, c.params.front(), c.params.back(), false);
    out.pts.resize(n);
    size_t pos = 0;
    for (size_t k = 0; k < n; ++k) {
        double target = c.closed ? total * double(k) / double(n) : total * double(k) / double(n - 1);
        while (pos + 1 < cum.size() - 1 && cum[pos + 1] <= target) ++pos;
        size_t seg = pos / sub;
        int subk = int(pos % sub);
        double h = sp.seg(seg);
        double span = cum[pos + 1] - cum[pos];
        double frac = span > 0 ? std::clamp((target - cum[pos]) / span, 0.0, 1.0) : 0.0;
        double s = h * (subk + frac) / sub;
        Vec3 p = (subk == 0 && frac == 0.0) ? c.pts[seg] : sp.eval(seg, s);
        if (!c.closed && k == n - 1) p = c.pts.back();
        if (c.ambient == Ambient::sphere) p.normalize();
        if (c.ambient == Ambient::plane) p.z() = 0.0;
        out.pts[k] = p;
    }
    return out;
}

namespace {

// Finite-difference weights (Fornberg) for derivative order m at x0 over nodes x.
std::vector<double> fd_weights(const std::vector<double>& x, double x0, int m) {
    size_t N = x.size();
    std::vector<std::vector<double>> c(N, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (size_t i = 1; i < N; ++i) {
        int mn = std::min<int>(int(i), m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - x0;
        for (size_t j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(N);
    for (size_t i = 0; i < N; ++i) w[i] = c[i][m];
    return w;
}

}  // namespace

std::vector<Vec3> differentiate(const SampledCurve& c, int order) {
    if (order < 1 || order > 3) throw Error(ErrorKind::PreconditionViolated, "order must be 1, 2 or 3");
    size_t n = c.size();
    int half = order == 3 ? 2 : 1;
    size_t need = c.closed ? size_t(2 * half + 1) : size_t(order + 2);
    if (n < std::max<size_t>(need, c.closed ? 8 : 2)) throw Error(ErrorKind::InsufficientSamples, "not enough samples for stencil");
    std::vector<Vec3> d(n, Vec3::Zero());

    if (c.closed && uniform_spacing(c)) {
        double h = kTwoPi / double(n);
        for (size_t i = 0; i < n; ++i) {
            const Vec3& pm2 = c.pts[c.wrap(long(i) - 2)];
            const Vec3& pm1 = c.pts[c.wrap(long(i) - 1)];
            const Vec3& p0 = c.pts[i];
            const Vec3& pp1 = c.pts[c.wrap(long(i) + 1)];
            const Vec3& pp2 = c.pts[c.wrap(long(i) + 2)];
            if (order == 1) d[i] = (pp1 - pm1) / (2 * h);
            else if (order == 2) d[i] = (pp1 - 2 * p0 + pm1) / (h * h);
            else d[i] = (pp2 - 2 * pp1 + 2 * pm1 - pm2) / (2 * h * h * h);
        }
        return d;
    }

    for (size_t i = 0; i < n; ++i) {
        std::vector<long> idx;
        if (c.closed) {
            for (long k = -half; k <= half; ++k) idx.push_back(long(i) + k);
        } else {
            long size = (i < size_t(half) || i + half >= n) ? order + 2 : 2 * half + 1;
            long start = long(i) - size / 2;
            start = std::clamp<long>(start, 0, long(n) - size);
            for (long k = 0; k < size; ++k) idx.push_back(start + k);
        }
        std::vector<double> xs;
        for (long j : idx) {
            if (!c.closed) {
                xs.push_back(c.params[size_t(j)]);
                continue;
            }
            size_t w = c.wrap(j);
            double t = c.params[w];
            if (j < 0) t -= kTwoPi;
            if (j >= long(n)) t += kTwoPi;
            xs.push_back(t);
        }
        auto w = fd_weights(xs, c.params[i], order);
        Vec3 acc = Vec3::Zero();
        for (size_t k = 0; k < idx.size(); ++k) acc += w[k] * c.pts[c.closed ? c.wrap(idx[k]) : size_t(idx[k])];
        d[i] = acc;
    }
    return d;
}

SampledCurve reversed(const SampledCurve& c) {
    SampledCurve r = c;
    size_t n = c.size();
    if (c.closed) {
        // keep sample 0 fixed so the parameter grid is unchanged
        for (size_t i = 0; i < n; ++i) r.pts[i] = c.pts[(n - i) % n];
        for (size_t i = 0; i < n; ++i) r.params[i] = i == 0 ? c.params[0] : kTwoPi - c.params[n - i] + c.params[0];
        if (!uniform_spacing(c)) std::sort(r.params.begin(), r.params.end());
    } else {
        std::reverse(r.pts.begin(), r.pts.end());
        for (size_t i = 0; i < n; ++i) r.params[i] = c.params.front() + c.params.back() - c.params[n - 1 - i];
    }
    return r;
}

SampledCurve rotated_start(const SampledCurve& c, size_t shift) {
    SampledCurve r = c;
    size_t n = c.size();
    for (size_t i = 0; i < n; ++i) r.pts[i] = c.pts[(i + shift) % n];
    return r;
}

SampledCurve transformed(const SampledCurve& c, const Eigen::Matrix3d& R) {
    SampledCurve r = c;
    for (auto& p : r.pts) p = R * p;
    return r;
}

TangentFrame frame_at(const Vec3& pole_in) {
    TangentFrame f;
    f.pole = pole_in.normalized();
    Vec3 a = std::abs(f.pole.x()) > 0.9 ? Vec3::UnitY() : Vec3::UnitX();
    f.e1 = (a - a.dot(f.pole) * f.pole).normalized();
    f.e2 = f.pole.cross(f.e1);
    return f;
}

SampledCurve beltrami_project(const SampledCurve& c, const Vec3& pole, const Tolerances& tol) {
    (void)tol;
    TangentFrame f = frame_at(pole);
    std::vector<double> bad;
    for (size_t i = 0; i < c.size(); ++i)
        if (!(c.pts[i].dot(f.pole) > 1e-12)) bad.push_back(double(i));
    if (!bad.empty()) throw Error(ErrorKind::NotInHemisphere, "samples outside the open hemisphere", bad);
    SampledCurve out = c;
    out.ambient = Ambient::plane;
    for (size_t i = 0; i < c.size(); ++i) {
        Vec3 x = c.pts[i] / c.pts[i].dot(f.pole);
        out.pts[i] = Vec3(x.dot(f.e1), x.dot(f.e2), 0.0);
    }
    return out;
}

SampledCurve beltrami_unproject(const SampledCurve& plane, const Vec3& pole) {
    TangentFrame f = frame_at(pole);
    SampledCurve out = plane;
    out.ambient = Ambient::sphere;
    for (size_t i = 0; i < plane.size(); ++i)
        out.pts[i] = (f.pole + plane.pts[i].x() * f.e1 + plane.pts[i].y() * f.e2).normalized();
    return out;
}

SampledCurve stereographic_project(const SampledCurve& c, const Vec3& pole, const Tolerances& tol) {
    TangentFrame f = frame_at(pole);
    double eps = tol.eps_match * 2.0;
    std::vector<double> bad;
    for (size_t i = 0; i < c.size(); ++i)
        if ((c.pts[i] - f.pole).norm() <= eps) bad.push_back(double(i));
    if (!bad.empty()) throw Error(ErrorKind::PoleOnCurve, "sample at the projection pole", bad);
    SampledCurve out = c;
    out.ambient = Ambient::plane;
    for (size_t i = 0; i < c.size(); ++i) {
        const Vec3& p = c.pts[i];
        double s = p.dot(f.pole);
        Vec3 q = (p - s * f.pole) / (1.0 - s);
        out.pts[i] = Vec3(q.dot(f.e1), q.dot(f.e2), 0.0);
    }
    return out;
}

SampledCurve stereographic_unproject(const SampledCurve& plane, const Vec3& pole) {
    TangentFrame f = frame_at(pole);
    SampledCurve out = plane;
    out.ambient = Ambient::sphere;
    for (size_t i = 0; i < plane.size(); ++i) {
        double x = plane.pts[i].x(), y = plane.pts[i].y();
        double r2 = x * x + y * y;
        Vec3 p = (2 * x * f.e1 + 2 * y * f.e2 + (r2 - 1) * f.pole) / (r2 + 1);
        out.pts[i] = p.normalized();
    }
    return out;
}

double gauss_bonnet_residual(const SampledCurve& c, bool left, const Tolerances& tol) {
    if (c.ambient != Ambient::sphere || !c.closed)
        throw Error(ErrorKind::PreconditionViolated, "needs a closed spherical curve");
    auto areas = enclosed_area(c, tol);
    ScalarField k = geodesic_curvature(c, tol);
    auto g = chord_gaps(c);
    size_t n = c.size();
    double integral = 0;
    if (uniform_spacing(c) && n >= 16) {
        // fourth-order stencils and the periodic trapezoid rule for k |x'| dt
        double h = kTwoPi / double(n);
        for (size_t i = 0; i < n; ++i) {
            if (!std::isfinite(k[i])) throw Error(ErrorKind::SingularCurve, "curvature undefined", {double(i)});
            const Vec3& m2 = c.pts[c.wrap(long(i) - 2)];
            const Vec3& m1 = c.pts[c.wrap(long(i) - 1)];
            const Vec3& p1 = c.pts[c.wrap(long(i) + 1)];
            const Vec3& p2 = c.pts[c.wrap(long(i) + 2)];
            Vec3 d1 = (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h);
            Vec3 d2 = (-p2 + 16 * p1 - 30 * c.pts[i] + 16 * m1 - m2) / (12 * h * h);
            integral += c.pts[i].cross(d1).dot(d2) / d1.squaredNorm() * h;
        }
        if (left) return integral + areas.left - kTwoPi;
        return -integral + areas.right - kTwoPi;
    }
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(k[i])) throw Error(ErrorKind::SingularCurve, "curvature undefined", {double(i)});
        integral += k[i] * 0.5 * (g[i] + g[(i + n - 1) % n]);
    }
    if (left) return integral + areas.left - kTwoPi;
    return -integral + areas.right - kTwoPi;
}

}  // namespace ck
