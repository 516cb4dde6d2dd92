#include "curvekit/incidence.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace ck {

const char* to_string(PairKind k) {
    switch (k) {
        case PairKind::coincident: return "coincident";
        case PairKind::antipodal: return "antipodal";
        case PairKind::tangent_concordant: return "tangent_concordant";
        case PairKind::tangent_discordant: return "tangent_discordant";
    }
    return "?";
}

CountResult to_count(const PairSet& p) {
    CountResult r;
    r.status = p.status;
    if (p.status != Sentinel::finite) return r;
    r.count = r.genuine = p.count();
    for (const auto& [t, s] : p.pairs) r.locations.push_back(t);
    std::sort(r.locations.begin(), r.locations.end());
    return r;
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Closest points between segments p0p1 and q0q1; returns squared distance.
double segment_distance2(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1, double& s, double& t) {
    Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
    double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    if (a <= 1e-300 && e <= 1e-300) {
        s = t = 0;
        return r.squaredNorm();
    }
    if (a <= 1e-300) {
        s = 0;
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        double c = d1.dot(r);
        if (e <= 1e-300) {
            t = 0;
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            double b = d1.dot(d2);
            double den = a * e - b * b;
            s = den > 1e-14 * a * e ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0) {
                t = 0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1) {
                t = 1;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return (p0 + s * d1 - (q0 + t * d2)).squaredNorm();
}

// Proper crossing of 2D segments with half-open parameter ranges.
bool crossing2(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1, double& s, double& t) {
    Vec2 r = p1 - p0, u = q1 - q0;
    double den = cross2(r, u);
    double scale = r.norm() * u.norm();
    if (std::abs(den) <= 1e-13 * scale) return false;
    Vec2 w = q0 - p0;
    s = cross2(w, u) / den;
    t = cross2(w, r) / den;
    return s >= 0 && s < 1 && t >= 0 && t < 1;
}

bool crossing_on_sphere(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1, double& s, double& t) {
    Vec3 sum = p0 + p1 + q0 + q1;
    if (sum.norm() < 1e-9) return false;
    TangentFrame f = frame_at(sum);
    auto chart = [&](const Vec3& x, Vec2& out) {
        double d = x.dot(f.pole);
        if (d <= 1e-9) return false;
        Vec3 y = x / d;
        out = Vec2(y.dot(f.e1), y.dot(f.e2));
        return true;
    };
    Vec2 a0, a1, b0, b1;
    if (!chart(p0, a0) || !chart(p1, a1) || !chart(q0, b0) || !chart(q1, b1)) return false;
    double gs, gt;
    if (!crossing2(a0, a1, b0, b1, gs, gt)) return false;
    // gnomonic fractions to chord fractions (same point along the chord)
    auto chord_frac = [&](const Vec3& x0, const Vec3& x1, const Vec2& c0, const Vec2& c1, double g) {
        Vec2 c = c0 + g * (c1 - c0);
        Vec3 dir = f.pole + c.x() * f.e1 + c.y() * f.e2;
        // intersect ray along dir with chord x0 + s (x1 - x0)
        Vec3 d = x1 - x0;
        if (dir.cross(d).squaredNorm() < 1e-300) return g;
        // solve x0 + s d = lambda dir in the least squares sense
        Eigen::Matrix<double, 3, 2> M;
        M.col(0) = d;
        M.col(1) = -dir;
        Eigen::Vector2d sol = M.colPivHouseholderQr().solve(-x0);
        return std::clamp(sol[0], 0.0, 1.0);
    };
    s = chord_frac(p0, p1, a0, a1, gs);
    t = chord_frac(q0, q1, b0, b1, gt);
    return true;
}

struct Box {
    Vec3 lo, hi;
    size_t seg;
    bool mirrored;
};

}  // namespace

PairScan scan_pairs(const SampledCurve& c, bool antipodal, const Tolerances& tol) {
    PairScan scan;
    size_t n = c.size();
    scan.n = n;
    size_t m = c.closed ? n : n - 1;
    double eps = match_eps(c, tol);
    auto seg_pts = [&](size_t i, bool mir, Vec3& a, Vec3& b) {
        a = c.pts[i];
        b = c.pts[(i + 1) % n];
        if (mir) {
            a = -a;
            b = -b;
        }
    };
    std::vector<Box> boxes;
    boxes.reserve(antipodal ? 2 * m : m);
    for (int pass = 0; pass < (antipodal ? 2 : 1); ++pass) {
        for (size_t i = 0; i < m; ++i) {
            Vec3 a, b;
            seg_pts(i, pass == 1, a, b);
            Box bx{a.cwiseMin(b) - Vec3::Constant(eps), a.cwiseMax(b) + Vec3::Constant(eps), i, pass == 1};
            boxes.push_back(bx);
        }
    }
    std::vector<size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        if (boxes[x].lo.x() != boxes[y].lo.x()) return boxes[x].lo.x() < boxes[y].lo.x();
        return x < y;
    });
    std::vector<size_t> active;
    std::vector<std::pair<size_t, size_t>> cand;
    for (size_t oi : order) {
        const Box& B = boxes[oi];
        size_t w = 0;
        for (size_t k = 0; k < active.size(); ++k) {
            const Box& A = boxes[active[k]];
            if (A.hi.x() < B.lo.x()) continue;
            active[w++] = active[k];
            bool overlap = A.lo.y() <= B.hi.y() && B.lo.y() <= A.hi.y() && A.lo.z() <= B.hi.z() && B.lo.z() <= A.hi.z();
            if (!overlap) continue;
            if (antipodal) {
                if (A.mirrored == B.mirrored) continue;
                size_t i = A.mirrored ? B.seg : A.seg;
                size_t j = A.mirrored ? A.seg : B.seg;
                cand.push_back({i, j});
            } else {
                size_t i = std::min(A.seg, B.seg), j = std::max(A.seg, B.seg);
                if (j - i <= 1 || (c.closed && i == 0 && j == m - 1)) continue;
                cand.push_back({i, j});
            }
        }
        active.resize(w);
        active.push_back(oi);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    for (auto [i, j] : cand) {
        Vec3 p0, p1, q0, q1;
        seg_pts(i, false, p0, p1);
        seg_pts(j, antipodal, q0, q1);
        double s = 0, t = 0;
        bool hit = false;
        if (c.ambient == Ambient::sphere) {
            hit = crossing_on_sphere(p0, p1, q0, q1, s, t);
        } else if (c.ambient == Ambient::plane) {
            hit = crossing2(p0.head<2>(), p1.head<2>(), q0.head<2>(), q1.head<2>(), s, t);
        }
        if (!hit) {
            double d2 = segment_distance2(p0, p1, q0, q1, s, t);
            hit = d2 <= eps * eps;
        }
        if (hit) scan.hits.push_back({i, j, s, t});
    }
    return scan;
}

namespace {

struct UnionFind {
    std::vector<size_t> p;
    explicit UnionFind(size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    size_t find(size_t x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) p[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

PairSet cluster_pairs(const SampledCurve& c, const PairScan& scan, PairKind kind, const Tolerances& tol) {
    PairSet out;
    out.kind = kind;
    size_t n = c.size();
    double period = c.period();
    double gap = period / double(c.closed ? n : n - 1);
    double cw = tol.cluster_width * gap;
    auto param_at = [&](size_t i, double frac) {
        double t0 = c.params[i];
        double t1 = (i + 1 < n) ? c.params[i + 1] : c.params[0] + kTwoPi;
        double t = t0 + frac * (t1 - t0);
        if (c.closed && t >= kTwoPi) t -= kTwoPi;
        return t;
    };
    auto cdist = [&](double a, double b) {
        double d = std::abs(a - b);
        if (c.closed) d = std::min(d, period - d);
        return d;
    };
    // the two arms of a cusp approach each other near the tip; such hits are not double points
    std::vector<long> near_cusp(n, -1);
    if (kind == PairKind::coincident || kind == PairKind::tangent_concordant) {
        auto flag = singular_mask(c, tol);
        long window = 2 * long(std::ceil(tol.cluster_width));
        double eps = 2 * match_eps(c, tol);
        long N = long(n);
        auto inside = [&](long k) { return c.closed || (k >= 0 && k < N); };
        // grow the window while the arms stay within the match tolerance of each other
        auto mark = [&](long i, long j, long label) {
            long reach = 0;
            while (reach < N / 4 && inside(i - reach - 1) && inside(j + reach + 1)) {
                const Vec3& a = c.pts[c.wrap(i - reach - 1)];
                double best = 1e300;
                for (long d = -window; d < window; ++d) {
                    long k = j + reach + 1 + d;
                    if (!inside(k) || !inside(k + 1)) continue;
                    const Vec3& p = c.pts[c.wrap(k)];
                    Vec3 e = c.pts[c.wrap(k + 1)] - p;
                    double u = e.squaredNorm() > 0 ? std::clamp((a - p).dot(e) / e.squaredNorm(), 0.0, 1.0) : 0.0;
                    best = std::min(best, (a - p - u * e).norm());
                }
                if (best > eps) break;
                ++reach;
            }
            for (long k = i - reach - window; k <= j + reach + window; ++k)
                if (inside(k)) near_cusp[c.wrap(k)] = label;
        };
        long label = 0;
        for (size_t i = 0; i < n; ++i) {
            if (!flag[i]) continue;
            if (i > 0 && flag[i - 1]) continue;
            if (c.closed && i == 0 && flag[n - 1]) continue;
            size_t j = i;
            while (flag[(j + 1) % n] && (j + 1) % n != i) j = (j + 1) % n;
            mark(long(i), long(j < i ? j + n : j), label++);
        }
        if (c.closed && flag[0] && flag[n - 1]) {
            // run wrapping through index 0 was skipped above
            size_t i = n - 1;
            while (i > 0 && flag[i - 1]) --i;
            size_t j = 0;
            while (j + 1 < n && flag[j + 1]) ++j;
            mark(long(i), long(j + n), label++);
        }
    }
    std::vector<std::pair<double, double>> raw;
    std::set<size_t> involved;
    for (const auto& h : scan.hits) {
        if (near_cusp[h.i] >= 0 && near_cusp[h.i] == near_cusp[h.j]) continue;
        double t = param_at(h.i, h.a), s = param_at(h.j, h.b);
        if (t > s) std::swap(t, s);
        if (kind != PairKind::antipodal && kind != PairKind::tangent_discordant && cdist(t, s) < cw) continue;
        raw.push_back({t, s});
        involved.insert(h.i);
        involved.insert((h.i + 1) % n);
        involved.insert(h.j);
        involved.insert((h.j + 1) % n);
    }
    if (double(involved.size()) > tol.degenerate_fraction * double(n)) {
        out.status = Sentinel::infinite;
        return out;
    }
    // antipodal relation is symmetric: each pair appears as (i, -j) and (j, -i)
    UnionFind uf(raw.size());
    for (size_t a = 0; a < raw.size(); ++a)
        for (size_t b = a + 1; b < raw.size(); ++b) {
            bool near = cdist(raw[a].first, raw[b].first) <= cw && cdist(raw[a].second, raw[b].second) <= cw;
            bool near_swapped = cdist(raw[a].first, raw[b].second) <= cw && cdist(raw[a].second, raw[b].first) <= cw;
            if (near || near_swapped) uf.unite(a, b);
        }
    std::vector<std::vector<size_t>> groups(raw.size());
    for (size_t a = 0; a < raw.size(); ++a) groups[uf.find(a)].push_back(a);
    for (const auto& g : groups) {
        if (g.empty()) continue;
        // cyclic mean relative to the first member
        double t0 = raw[g[0]].first, s0 = raw[g[0]].second;
        double st = 0, ss = 0;
        for (size_t k : g) {
            double t = raw[k].first, s = raw[k].second;
            if (cdist(t, t0) > cw) std::swap(t, s);
            auto rel = [&](double x, double ref) {
                double d = x - ref;
                if (c.closed) d -= period * std::round(d / period);
                return d;
            };
            st += rel(t, t0);
            ss += rel(s, s0);
        }
        double t = t0 + st / double(g.size()), s = s0 + ss / double(g.size());
        if (c.closed) {
            t = std::fmod(std::fmod(t, period) + period, period);
            s = std::fmod(std::fmod(s, period) + period, period);
        }
        if (t > s) std::swap(t, s);
        out.pairs.push_back({t, s});
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

std::pair<PairSet, PairSet> coincidence_pairs(const SampledCurve& c, const Tolerances& tol) {
    PairSet self = cluster_pairs(c, scan_pairs(c, false, tol), PairKind::coincident, tol);
    PairSet anti;
    anti.kind = PairKind::antipodal;
    if (c.ambient == Ambient::sphere) anti = cluster_pairs(c, scan_pairs(c, true, tol), PairKind::antipodal, tol);
    else anti.status = Sentinel::not_applicable;
    return {self, anti};
}

std::pair<PairSet, PairSet> parallel_tangent_pairs(const SampledCurve& c, const Tolerances& tol) {
    SampledCurve T = tantrix(c, tol);
    auto [same, opp] = coincidence_pairs(T, tol);
    same.kind = PairKind::tangent_concordant;
    opp.kind = PairKind::tangent_discordant;
    return {same, opp};
}

bool is_simple(const SampledCurve& c, const Tolerances& tol) {
    PairSet self = cluster_pairs(c, scan_pairs(c, false, tol), PairKind::coincident, tol);
    return self.status == Sentinel::finite && self.pairs.empty();
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter) {
    const long m = A.cols();
    if (max_iter <= 0) max_iter = int(3 * m + 30);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    std::vector<bool> passive(size_t(m), false);
    double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()) * std::max(1.0, b.norm());
    Eigen::VectorXd w = A.transpose() * (b - A * x);
    int iter = 0;
    while (iter++ < max_iter) {
        long jmax = -1;
        double wmax = tol;
        for (long j = 0; j < m; ++j)
            if (!passive[size_t(j)] && w[j] > wmax) {
                wmax = w[j];
                jmax = j;
            }
        if (jmax < 0) break;
        passive[size_t(jmax)] = true;
        while (true) {
            std::vector<long> P;
            for (long j = 0; j < m; ++j)
                if (passive[size_t(j)]) P.push_back(j);
            Eigen::MatrixXd AP(A.rows(), long(P.size()));
            for (size_t k = 0; k < P.size(); ++k) AP.col(long(k)) = A.col(P[k]);
            Eigen::VectorXd sP = AP.completeOrthogonalDecomposition().solve(b);
            bool ok = true;
            for (long k = 0; k < sP.size(); ++k)
                if (sP[k] <= 0) ok = false;
            if (ok) {
                x.setZero();
                for (size_t k = 0; k < P.size(); ++k) x[P[k]] = sP[long(k)];
                break;
            }
            double alpha = 1.0;
            for (size_t k = 0; k < P.size(); ++k) {
                if (sP[long(k)] <= 0) {
                    double xi = x[P[k]];
                    double den = xi - sP[long(k)];
                    if (den > 0) alpha = std::min(alpha, xi / den);
                }
            }
            for (size_t k = 0; k < P.size(); ++k) x[P[k]] += alpha * (sP[long(k)] - x[P[k]]);
            for (size_t k = 0; k < P.size(); ++k)
                if (x[P[k]] <= 1e-15) {
                    x[P[k]] = 0;
                    passive[size_t(P[k])] = false;
                }
            bool any = false;
            for (bool p : passive) any = any || p;
            if (!any) break;
        }
        w = A.transpose() * (b - A * x);
    }
    return x;
}

namespace {

// Wolfe's minimum-norm point of the convex hull of the columns of P.
Vec3 min_norm_point(const std::vector<Vec3>& P, double tol) {
    size_t n = P.size();
    size_t j0 = 0;
    for (size_t i = 1; i < n; ++i)
        if (P[i].squaredNorm() < P[j0].squaredNorm()) j0 = i;
    std::vector<size_t> S{j0};
    std::vector<double> lam{1.0};
    Vec3 x = P[j0];
    for (int outer = 0; outer < 1000; ++outer) {
        size_t j = 0;
        double best = P[0].dot(x);
        for (size_t i = 1; i < n; ++i) {
            double v = P[i].dot(x);
            if (v < best) {
                best = v;
                j = i;
            }
        }
        if (best >= x.squaredNorm() - tol) break;
        if (std::find(S.begin(), S.end(), j) != S.end()) break;
        S.push_back(j);
        lam.push_back(0.0);
        for (int inner = 0; inner < 100; ++inner) {
            long k = long(S.size());
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k + 1, k + 1);
            for (long a = 0; a < k; ++a) {
                for (long b = 0; b < k; ++b) K(a, b) = P[S[size_t(a)]].dot(P[S[size_t(b)]]);
                K(a, k) = K(k, a) = 1.0;
            }
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
            rhs[k] = 1.0;
            Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
            bool pos = true;
            for (long a = 0; a < k; ++a)
                if (sol[a] <= 1e-14) pos = false;
            if (pos) {
                for (long a = 0; a < k; ++a) lam[size_t(a)] = sol[a];
                break;
            }
            double theta = 1.0;
            for (long a = 0; a < k; ++a) {
                if (sol[a] <= 1e-14) {
                    double den = lam[size_t(a)] - sol[a];
                    if (den > 0) theta = std::min(theta, lam[size_t(a)] / den);
                }
            }
            for (long a = 0; a < k; ++a) lam[size_t(a)] += theta * (sol[a] - lam[size_t(a)]);
            std::vector<size_t> S2;
            std::vector<double> l2;
            for (long a = 0; a < k; ++a)
                if (lam[size_t(a)] > 1e-14) {
                    S2.push_back(S[size_t(a)]);
                    l2.push_back(lam[size_t(a)]);
                }
            S = S2;
            lam = l2;
            if (S.empty()) break;
        }
        double tot = std::accumulate(lam.begin(), lam.end(), 0.0);
        x.setZero();
        for (size_t a = 0; a < S.size(); ++a) x += lam[a] / tot * P[S[a]];
    }
    return x;
}

}  // namespace

HullStatus origin_in_hull(const std::vector<Vec3>& pts_in, const Tolerances& tol) {
    HullStatus hs;
    if (pts_in.empty()) throw Error(ErrorKind::PreconditionViolated, "origin_in_hull needs at least one point");
    double s = 0;
    for (const auto& p : pts_in) s = std::max(s, p.norm());
    if (s == 0) {
        hs.status = HullClass::boundary;
        hs.separator = Vec3::UnitZ();
        return hs;
    }
    std::vector<Vec3> pts;
    pts.reserve(pts_in.size());
    for (const auto& p : pts_in) pts.push_back(p / s);
    long m = long(pts.size());
    Eigen::MatrixXd A(3, m);
    for (long j = 0; j < m; ++j) A.col(j) = pts[size_t(j)];

    // interior iff every coordinate direction lies in the cone spanned by the points
    bool interior = true;
    Vec3 pole = Vec3::Zero();
    std::vector<Eigen::VectorXd> combos;
    for (int k = 0; k < 3 && interior; ++k)
        for (int sg : {1, -1}) {
            Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
            b[k] = sg;
            Eigen::VectorXd w = nnls(A, b);
            Eigen::VectorXd r = A * w - b;
            if (r.norm() > tol.eps_hull) {
                interior = false;
                pole = Vec3(r[0], r[1], r[2]).normalized();
                break;
            }
            combos.push_back(w);
        }
    if (interior) {
        // robustness margin: every combination must carry positive weight
        std::vector<size_t> U;
        for (const auto& w : combos)
            for (long j = 0; j < m; ++j)
                if (w[j] > 0 && std::find(U.begin(), U.end(), size_t(j)) == U.end()) U.push_back(size_t(j));
        std::sort(U.begin(), U.end());
        // look for a tetrahedron strictly containing o
        for (size_t a = 0; a < U.size() && hs.witness.empty(); ++a)
            for (size_t b = a + 1; b < U.size() && hs.witness.empty(); ++b)
                for (size_t c = b + 1; c < U.size() && hs.witness.empty(); ++c)
                    for (size_t d = c + 1; d < U.size() && hs.witness.empty(); ++d) {
                        Eigen::Matrix4d M;
                        size_t id[4] = {U[a], U[b], U[c], U[d]};
                        for (int q = 0; q < 4; ++q) {
                            M.block<3, 1>(0, q) = pts[id[q]];
                            M(3, q) = 1.0;
                        }
                        Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
                        if (!lu.isInvertible()) continue;
                        Eigen::Vector4d lam = lu.solve(Eigen::Vector4d(0, 0, 0, 1));
                        if (lam.minCoeff() > tol.eps_hull) {
                            hs.witness.assign(id, id + 4);
                            hs.weights.assign(lam.data(), lam.data() + 4);
                        }
                    }
        if (hs.witness.empty()) {
            Eigen::VectorXd tot = Eigen::VectorXd::Zero(m);
            for (const auto& w : combos) tot += w;
            double sum = tot.sum();
            for (size_t j : U) {
                hs.witness.push_back(j);
                hs.weights.push_back(tot[long(j)] / sum);
            }
            if (*std::min_element(hs.weights.begin(), hs.weights.end()) <= tol.eps_hull) interior = false;
        }
        if (interior) {
            hs.status = HullClass::interior;
            hs.distance = 0;
            return hs;
        }
        hs.witness.clear();
        hs.weights.clear();
    }
    Vec3 x = min_norm_point(pts, 1e-15);
    hs.distance = x.norm() * s;
    if (x.norm() > tol.eps_hull) {
        hs.status = HullClass::outside;
        hs.separator = -x.normalized();
        return hs;
    }
    hs.status = HullClass::boundary;
    if (pole.squaredNorm() == 0) pole = Vec3::UnitZ();
    hs.separator = -pole;
    return hs;
}

std::optional<Vec3> hemisphere_pole(const SampledCurve& c, const Tolerances& tol) {
    HullStatus hs = origin_in_hull(c.pts, tol);
    if (hs.status == HullClass::interior) return std::nullopt;
    return Vec3(-hs.separator);
}

double signed_area_left(const SampledCurve& c) {
    static const Vec3 cand[] = {Vec3(1, 0, 0),  Vec3(-1, 0, 0), Vec3(0, 1, 0),   Vec3(0, -1, 0), Vec3(0, 0, 1),
                                Vec3(0, 0, -1), Vec3(1, 1, 1),  Vec3(-1, -1, -1), Vec3(1, -1, 1), Vec3(-1, 1, -1),
                                Vec3(1, 1, -1), Vec3(-1, -1, 1), Vec3(-1, 1, 1),  Vec3(1, -1, -1)};
    Vec3 q = Vec3::UnitZ();
    double best = -1;
    for (const auto& v : cand) {
        Vec3 u = v.normalized();
        double worst = 4;
        for (const auto& p : c.pts) worst = std::min(worst, (u + p).norm());
        if (worst > best) {
            best = worst;
            q = u;
        }
    }
    size_t n = c.size();
    double total = 0;
    for (size_t i = 0; i < n; ++i) {
        const Vec3& a = c.pts[i];
        const Vec3& b = c.pts[(i + 1) % n];
        double num = q.dot(a.cross(b));
        double den = 1.0 + q.dot(a) + a.dot(b) + b.dot(q);
        total += 2.0 * std::atan2(num, den);
    }
    double fourpi = 2 * kTwoPi;
    total = std::fmod(total, fourpi);
    if (total < 0) total += fourpi;
    return total;
}

AreaSplit enclosed_area(const SampledCurve& c, const Tolerances& tol) {
    if (c.ambient != Ambient::sphere || !c.closed) throw Error(ErrorKind::PreconditionViolated, "needs a closed spherical curve");
    if (!is_simple(c, tol)) throw Error(ErrorKind::NotSimple, "curve has self-intersections");
    AreaSplit a;
    a.left = signed_area_left(c);
    a.right = 2 * kTwoPi - a.left;
    a.bisects = std::abs(a.left - kTwoPi) < tol.bisect_tol;
    return a;
}

}  // namespace ck
