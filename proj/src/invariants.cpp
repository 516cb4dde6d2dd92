#include "curvekit/invariants.hpp"

#include "curvekit/incidence.hpp"

#include <algorithm>
#include <sstream>

namespace ck {

const char* to_string(Sentinel s) {
    switch (s) {
        case Sentinel::finite: return "finite";
        case Sentinel::infinite: return "INFINITE";
        case Sentinel::degenerate: return "DEGENERATE";
        case Sentinel::not_applicable: return "n/a";
    }
    return "?";
}

std::string CountResult::str() const {
    if (status != Sentinel::finite) return to_string(status);
    std::ostringstream os;
    os << count;
    if (genuine != count) os << " (" << genuine << " genuine)";
    return os.str();
}

namespace {

double turning(const Vec3& a, const Vec3& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0) return kPi;
    double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

std::vector<bool> dilate(const std::vector<bool>& m, int r, bool cyclic) {
    size_t n = m.size();
    std::vector<bool> out(n, false);
    for (size_t i = 0; i < n; ++i) {
        if (!m[i]) continue;
        for (int k = -r; k <= r; ++k) {
            long j = long(i) + k;
            if (cyclic) j = ((j % long(n)) + long(n)) % long(n);
            else if (j < 0 || j >= long(n)) continue;
            out[size_t(j)] = true;
        }
    }
    return out;
}

double interp_param(const std::vector<double>& params, double pos, size_t n, bool cyclic) {
    if (params.empty()) {
        double p = pos;
        if (cyclic) p = std::fmod(std::fmod(p, double(n)) + double(n), double(n));
        return p;
    }
    double period = kTwoPi;
    long base = long(std::floor(pos));
    double frac = pos - double(base);
    auto at = [&](long i) {
        if (!cyclic) return params[size_t(std::clamp<long>(i, 0, long(n) - 1))];
        long w = ((i % long(n)) + long(n)) % long(n);
        long turns = (i - w) / long(n);
        return params[size_t(w)] + period * double(turns);
    };
    double t = at(base) + frac * (at(base + 1) - at(base));
    if (cyclic) t = std::fmod(std::fmod(t, period) + period, period);
    return t;
}

}  // namespace

std::vector<bool> singular_mask(const SampledCurve& c, const Tolerances& tol) {
    size_t n = c.size();
    std::vector<bool> flag(n, false);
    auto d1 = differentiate(c, 1);
    double vmax = 0;
    for (const auto& v : d1) vmax = std::max(vmax, v.norm());
    for (size_t i = 0; i < n; ++i)
        if (d1[i].norm() <= tol.eps_zero * vmax) flag[i] = true;
    // tangent reversal: a large turn at one vertex, or across two adjacent vertices
    std::vector<double> turn(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        if (!c.closed && (i == 0 || i + 1 == n)) continue;
        Vec3 a = c.pts[i] - c.pts[c.wrap(long(i) - 1)];
        Vec3 b = c.pts[c.wrap(long(i) + 1)] - c.pts[i];
        turn[i] = turning(a, b);
        if (turn[i] > tol.singular_turn) flag[i] = true;
    }
    for (size_t i = 0; i < n; ++i) {
        if (!c.closed && i + 1 >= n) break;
        size_t j = (i + 1) % n;
        if (turn[i] + turn[j] > 1.5 * tol.singular_turn) flag[i] = flag[j] = true;
    }
    return flag;
}

CountResult singular_points(const SampledCurve& c, const Tolerances& tol) {
    auto flag = singular_mask(c, tol);
    size_t n = c.size();
    CountResult r;
    size_t nflag = size_t(std::count(flag.begin(), flag.end(), true));
    if (nflag == 0) return r;
    if (double(nflag) > tol.degenerate_fraction * double(n)) return CountResult::make(Sentinel::degenerate);
    // clusters of flagged samples, merged across gaps shorter than cluster_width
    size_t start = 0;
    if (c.closed) {
        while (flag[start]) start = (start + 1) % n;  // begin on an unflagged sample
    }
    std::vector<std::pair<long, long>> clusters;  // [first, last] in unrolled index
    long i = long(start);
    long end = long(start) + long(n);
    long cw = long(std::ceil(tol.cluster_width));
    while (i < end) {
        if (!flag[size_t(i % long(n))]) {
            ++i;
            continue;
        }
        long a = i;
        while (i < end && flag[size_t(i % long(n))]) ++i;
        long b = i - 1;
        if (!clusters.empty() && a - clusters.back().second < cw) clusters.back().second = b;
        else clusters.push_back({a, b});
    }
    if (c.closed && clusters.size() > 1) {
        long wrapgap = clusters.front().first + long(n) - clusters.back().second;
        if (wrapgap < cw) {
            clusters.front().first = clusters.back().first - long(n);
            clusters.pop_back();
        }
    }
    for (auto [a, b] : clusters) {
        double mid = 0.5 * double(a + b);
        r.locations.push_back(interp_param(c.params, mid, n, c.closed));
    }
    std::sort(r.locations.begin(), r.locations.end());
    r.count = int(clusters.size());
    r.genuine = r.count;
    return r;
}

FrenetData frenet(const SampledCurve& c, const Tolerances& tol) {
    size_t n = c.size();
    auto d1 = differentiate(c, 1), d2 = differentiate(c, 2), d3 = differentiate(c, 3);
    double vmax = 0;
    for (const auto& v : d1) vmax = std::max(vmax, v.norm());
    std::vector<double> bad;
    for (size_t i = 0; i < n; ++i)
        if (d1[i].norm() <= tol.eps_zero * vmax) bad.push_back(c.params[i]);
    if (!bad.empty() || vmax == 0) throw Error(ErrorKind::SingularCurve, "vanishing speed", bad);
    FrenetData f;
    f.T.resize(n);
    f.N.assign(n, Vec3::Constant(kNaN));
    f.B.assign(n, Vec3::Constant(kNaN));
    f.kappa.resize(n);
    f.tau.assign(n, kNaN);
    double kmax = 0;
    for (size_t i = 0; i < n; ++i) {
        double s = d1[i].norm();
        f.T[i] = d1[i] / s;
        f.kappa[i] = d1[i].cross(d2[i]).norm() / (s * s * s);
        kmax = std::max(kmax, f.kappa[i]);
    }
    double kdead = tol.eps_zero * std::max(kmax, 1.0 / std::max(diameter(c), 1e-300));
    for (size_t i = 0; i < n; ++i) {
        if (f.kappa[i] <= kdead) continue;
        Vec3 b = d1[i].cross(d2[i]);
        double b2 = b.squaredNorm();
        f.B[i] = b / std::sqrt(b2);
        f.N[i] = f.B[i].cross(f.T[i]);
        f.tau[i] = b.dot(d3[i]) / b2;
    }
    return f;
}

SampledCurve tantrix(const SampledCurve& c, const Tolerances& tol) {
    auto d1 = differentiate(c, 1);
    double vmax = 0;
    for (const auto& v : d1) vmax = std::max(vmax, v.norm());
    std::vector<double> bad;
    for (size_t i = 0; i < c.size(); ++i)
        if (d1[i].norm() <= tol.eps_zero * vmax) bad.push_back(c.params[i]);
    if (!bad.empty() || vmax == 0) throw Error(ErrorKind::SingularCurve, "vanishing speed", bad);
    SampledCurve t = c;
    t.ambient = Ambient::sphere;
    for (size_t i = 0; i < c.size(); ++i) t.pts[i] = d1[i].normalized();
    return t;
}

ScalarField geodesic_curvature(const SampledCurve& c, const Tolerances& tol) {
    if (c.ambient != Ambient::sphere) throw Error(ErrorKind::PreconditionViolated, "geodesic curvature needs a spherical curve");
    auto d1 = differentiate(c, 1), d2 = differentiate(c, 2);
    auto mask = dilate(singular_mask(c, tol), 2, c.closed);
    ScalarField k(c.size(), kNaN);
    for (size_t i = 0; i < c.size(); ++i) {
        if (mask[i]) continue;
        double s = d1[i].norm();
        k[i] = c.pts[i].cross(d1[i]).dot(d2[i]) / (s * s * s);
    }
    return k;
}

ScalarField planar_curvature(const SampledCurve& c, const Tolerances& tol) {
    auto d1 = differentiate(c, 1), d2 = differentiate(c, 2);
    auto mask = dilate(singular_mask(c, tol), 2, c.closed);
    ScalarField k(c.size(), kNaN);
    for (size_t i = 0; i < c.size(); ++i) {
        if (mask[i]) continue;
        double s = std::hypot(d1[i].x(), d1[i].y());
        k[i] = (d1[i].x() * d2[i].y() - d1[i].y() * d2[i].x()) / (s * s * s);
    }
    return k;
}

ScalarField field_derivative(const SampledCurve& c, const ScalarField& f) {
    size_t n = f.size();
    ScalarField d(n, kNaN);
    for (size_t i = 0; i < n; ++i) {
        if (!c.closed && (i == 0 || i + 1 == n)) continue;
        size_t a = c.wrap(long(i) - 1), b = c.wrap(long(i) + 1);
        double ta = c.params[a], tb = c.params[b];
        if (c.closed) {
            if (ta > c.params[i]) ta -= kTwoPi;
            if (tb < c.params[i]) tb += kTwoPi;
        }
        d[i] = (f[b] - f[a]) / (tb - ta);
    }
    return d;
}

CountResult count_sign_changes(const ScalarField& field, const Tolerances& tol, const std::vector<double>& params,
                               SignChangeOptions opt) {
    size_t n = field.size();
    if (n == 0) return CountResult::make(Sentinel::degenerate);
    size_t nvalid = 0;
    double m = 0;
    for (double v : field)
        if (std::isfinite(v)) {
            ++nvalid;
            m = std::max(m, std::abs(v));
        }
    double ref = std::max(m, opt.scale);
    if (nvalid == 0 || ref == 0) return CountResult::make(Sentinel::degenerate);
    double eps = tol.eps_zero * ref;
    std::vector<int> sgn(n, 2);  // 2 marks invalid
    size_t ndead = 0;
    for (size_t i = 0; i < n; ++i) {
        double v = field[i];
        if (!std::isfinite(v)) continue;
        sgn[i] = v > eps ? 1 : (v < -eps ? -1 : 0);
        if (sgn[i] == 0) ++ndead;
    }
    if (double(ndead) > tol.degenerate_fraction * double(nvalid)) return CountResult::make(Sentinel::degenerate);

    // runs of valid samples, as unrolled index sequences
    struct Run {
        long first, len;
        bool cyc;
    };
    std::vector<Run> runs;
    if (nvalid == n) {
        runs.push_back({0, long(n), opt.cyclic});
    } else {
        long start = 0;
        if (opt.cyclic)
            while (sgn[size_t(start)] != 2) ++start;
        long end = opt.cyclic ? start + long(n) : long(n);
        long i = start;
        while (i < end) {
            if (sgn[size_t(i % long(n))] == 2) {
                ++i;
                continue;
            }
            long a = i;
            while (i < end && sgn[size_t(i % long(n))] != 2) ++i;
            runs.push_back({a, i - a, false});
        }
    }

    struct Event {
        double pos;  // unrolled sample position
        bool change;
        long dead;
        bool clean;  // strictly monotone through the dead band
    };
    CountResult r;
    long cw = long(std::ceil(tol.cluster_width));
    for (const Run& run : runs) {
        std::vector<long> nz;
        for (long k = 0; k < run.len; ++k)
            if (sgn[size_t((run.first + k) % long(n))] != 0) nz.push_back(run.first + k);
        if (nz.size() < 2) continue;
        std::vector<Event> ev;
        auto make = [&](long a, long b) {
            int sa = sgn[size_t(a % long(n))], sb = sgn[size_t(b % long(n))];
            long gap = b - a - 1;
            if (sa != sb) {
                double pos;
                if (gap == 0) {
                    double fa = field[size_t(a % long(n))], fb = field[size_t(b % long(n))];
                    pos = double(a) + fa / (fa - fb);
                } else {
                    pos = 0.5 * double(a + b);
                }
                bool clean = true;
                for (long q = a; q < b && clean; ++q) {
                    double d = field[size_t((q + 1) % long(n))] - field[size_t(q % long(n))];
                    clean = sa > 0 ? d < 0 : d > 0;
                }
                ev.push_back({pos, true, gap, clean});
            } else if (gap > 0) {
                ev.push_back({0.5 * double(a + b), false, gap, false});
            }
        };
        for (size_t k = 0; k + 1 < nz.size(); ++k) make(nz[k], nz[k + 1]);
        if (run.cyc) make(nz.back(), nz.front() + long(n));
        if (ev.empty()) continue;
        std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.pos < b.pos; });
        if (run.cyc && ev.size() > 1) {
            // start grouping right after the widest gap between events
            size_t best = 0;
            double widest = -1;
            for (size_t k = 0; k < ev.size(); ++k) {
                double next = k + 1 < ev.size() ? ev[k + 1].pos : ev[0].pos + double(n);
                if (next - ev[k].pos > widest) {
                    widest = next - ev[k].pos;
                    best = (k + 1) % ev.size();
                }
            }
            std::rotate(ev.begin(), ev.begin() + long(best), ev.end());
            for (size_t k = 1; k < ev.size(); ++k)
                while (ev[k].pos < ev[k - 1].pos) ev[k].pos += double(n);
        }
        size_t k = 0;
        while (k < ev.size()) {
            size_t j = k;
            while (j + 1 < ev.size() && ev[j + 1].pos - ev[j].pos < double(cw)) ++j;
            int changes = 0;
            for (size_t q = k; q <= j; ++q) changes += ev[q].change ? 1 : 0;
            double pos = changes == 1 ? [&] {
                for (size_t q = k; q <= j; ++q)
                    if (ev[q].change) return ev[q].pos;
                return ev[k].pos;
            }()
                                      : 0.5 * (ev[k].pos + ev[j].pos);
            double loc = interp_param(params, pos, n, opt.cyclic);
            if (changes % 2 == 1) {
                ++r.count;
                bool single = (j == k) && (ev[k].dead < cw || ev[k].clean);
                if (single) ++r.genuine;
                r.locations.push_back(loc);
            } else {
                r.touches.push_back(loc);
            }
            k = j + 1;
        }
    }
    std::sort(r.locations.begin(), r.locations.end());
    std::sort(r.touches.begin(), r.touches.end());
    return r;
}

namespace {

CountResult zero_clusters(const ScalarField& f, double eps, const Tolerances& tol, const std::vector<double>& params,
                          bool cyclic) {
    // counts clusters of |f| <= eps for nonnegative fields
    size_t n = f.size();
    CountResult r;
    std::vector<bool> z(n);
    size_t nz = 0;
    for (size_t i = 0; i < n; ++i) {
        z[i] = f[i] <= eps;
        nz += z[i];
    }
    if (nz == 0) return r;
    if (double(nz) > tol.degenerate_fraction * double(n)) return CountResult::make(Sentinel::degenerate);
    long cw = long(std::ceil(tol.cluster_width));
    long start = 0;
    if (cyclic)
        while (z[size_t(start)]) ++start;
    long end = cyclic ? start + long(n) : long(n);
    std::vector<std::pair<long, long>> cl;
    for (long i = start; i < end;) {
        if (!z[size_t(i % long(n))]) {
            ++i;
            continue;
        }
        long a = i;
        while (i < end && z[size_t(i % long(n))]) ++i;
        if (!cl.empty() && a - cl.back().second < cw) cl.back().second = i - 1;
        else cl.push_back({a, i - 1});
    }
    for (auto [a, b] : cl) {
        r.locations.push_back(interp_param(params, 0.5 * double(a + b), n, cyclic));
        if (b - a + 1 < cw) ++r.genuine;
    }
    std::sort(r.locations.begin(), r.locations.end());
    r.count = int(cl.size());
    return r;
}

}  // namespace

InvariantReport invariant_report(const SampledCurve& c, const Tolerances& tol) {
    InvariantReport rep;
    rep.S = singular_points(c, tol);
    const auto& params = c.params;
    SignChangeOptions opt;
    opt.cyclic = c.closed;

    if (c.ambient == Ambient::sphere || c.ambient == Ambient::plane) {
        ScalarField k;
        if (c.ambient == Ambient::sphere) {
            k = geodesic_curvature(c, tol);
            opt.scale = 1.0;
        } else {
            k = planar_curvature(c, tol);
            opt.scale = 1.0 / std::max(diameter(c), 1e-300);
        }
        rep.I = count_sign_changes(k, tol, params, opt);
        SignChangeOptions dopt = opt;
        dopt.scale = opt.scale * opt.scale;
        rep.curvature_extrema = count_sign_changes(field_derivative(c, k), tol, params, dopt);
        rep.V = CountResult::make(Sentinel::not_applicable);
        rep.P = CountResult::make(Sentinel::not_applicable);
        rep.P_plus = CountResult::make(Sentinel::not_applicable);
        auto [dp, anti] = coincidence_pairs(c, tol);
        rep.D_plus = to_count(dp);
        if (c.ambient == Ambient::sphere) {
            CountResult a = to_count(anti);
            rep.D = rep.D_plus;
            if (!a.finite()) rep.D.status = a.status;
            else if (rep.D.finite()) {
                rep.D.count += a.count;
                rep.D.genuine += a.genuine;
                rep.D.locations.insert(rep.D.locations.end(), a.locations.begin(), a.locations.end());
                std::sort(rep.D.locations.begin(), rep.D.locations.end());
            }
            auto hs = origin_in_hull(c.pts, tol);
            rep.hull = hs.status;
            rep.hemisphere_pole = hemisphere_pole(c, tol);
            if (hs.status == HullClass::boundary) rep.notes.push_back("origin on hull boundary within eps_hull");
        } else {
            rep.D = rep.D_plus;
        }
    } else {
        // space curve: inflections are zero clusters of kappa, vertices sign changes of torsion
        size_t n = c.size();
        auto d1 = differentiate(c, 1), d2 = differentiate(c, 2), d3 = differentiate(c, 3);
        auto mask = dilate(singular_mask(c, tol), 2, c.closed);
        ScalarField kappa(n, kNaN), tau(n, kNaN);
        double kmax = 0;
        for (size_t i = 0; i < n; ++i) {
            if (mask[i]) continue;
            double s = d1[i].norm();
            kappa[i] = d1[i].cross(d2[i]).norm() / (s * s * s);
            kmax = std::max(kmax, kappa[i]);
        }
        double kdead = tol.eps_zero * std::max(kmax, 1.0 / std::max(diameter(c), 1e-300));
        ScalarField kz(n);
        for (size_t i = 0; i < n; ++i) kz[i] = std::isfinite(kappa[i]) ? kappa[i] : 1e300;
        rep.I = zero_clusters(kz, kdead, tol, params, c.closed);
        // a zero of kappa is a cusp of the tantrix, which the turning test finds between samples
        if (rep.I.finite()) {
            try {
                CountResult st = singular_points(tantrix(c, tol), tol);
                if (!st.finite()) {
                    rep.I = st;
                } else {
                    double w = tol.cluster_width * c.period() / double(n);
                    for (double q : st.locations) {
                        bool seen = false;
                        for (double z : rep.I.locations) {
                            double d = c.closed ? std::abs(std::remainder(q - z, c.period())) : std::abs(q - z);
                            if (d <= w) seen = true;
                        }
                        if (!seen) {
                            rep.I.locations.push_back(q);
                            ++rep.I.count;
                            ++rep.I.genuine;
                        }
                    }
                    std::sort(rep.I.locations.begin(), rep.I.locations.end());
                }
            } catch (const Error&) {
            }
        }
        for (size_t i = 0; i < n; ++i) {
            if (!std::isfinite(kappa[i]) || kappa[i] <= kdead) continue;
            Vec3 b = d1[i].cross(d2[i]);
            tau[i] = b.dot(d3[i]) / b.squaredNorm();
        }
        SignChangeOptions topt = opt;
        topt.scale = kmax;
        rep.V = count_sign_changes(tau, tol, params, topt);
        auto [dp, anti] = coincidence_pairs(c, tol);
        (void)anti;
        rep.D_plus = to_count(dp);
        rep.D = rep.D_plus;
        try {
            auto [pp, disc] = parallel_tangent_pairs(c, tol);
            rep.P_plus = to_count(pp);
            CountResult d = to_count(disc);
            rep.P = rep.P_plus;
            if (!d.finite()) rep.P.status = d.status;
            else if (rep.P.finite()) {
                rep.P.count += d.count;
                rep.P.genuine += d.genuine;
            }
        } catch (const Error&) {
            rep.P = rep.P_plus = CountResult::make(Sentinel::degenerate);
            rep.notes.push_back("tantrix undefined at singular samples");
        }
        rep.curvature_extrema = CountResult::make(Sentinel::not_applicable);
    }

    if (rep.D.finite() && rep.S.finite() && rep.I.finite()) rep.sigma = 2 * (rep.D.count + rep.S.count) + rep.I.count;
    if (rep.D_plus.finite() && rep.S.finite() && rep.I.finite())
        rep.sigma_plus = 2 * (rep.D_plus.count + rep.S.count) + rep.I.count;
    return rep;
}

}  // namespace ck
