#include "curvekit/flow.hpp"

#include "curvekit/incidence.hpp"
#include "curvekit/invariants.hpp"

#include <algorithm>
#include <cmath>

namespace ck {

namespace {

double min_gap(const SampledCurve& c) {
    auto g = chord_gaps(c);
    return *std::min_element(g.begin(), g.end());
}

// Normal component of the discrete curvature vector at every sample.
std::vector<Vec3> curvature_normal(const SampledCurve& c, double& kmax) {
    size_t n = c.size();
    std::vector<Vec3> v(n);
    kmax = 0;
    for (size_t i = 0; i < n; ++i) {
        const Vec3& pm = c.pts[c.wrap(long(i) - 1)];
        const Vec3& p = c.pts[i];
        const Vec3& pp = c.pts[c.wrap(long(i) + 1)];
        double h1 = (p - pm).norm(), h2 = (pp - p).norm();
        if (h1 <= 0 || h2 <= 0) throw Error(ErrorKind::CurveDegenerate, "repeated sample", {double(i)});
        Vec3 lap = 2.0 / (h1 + h2) * ((pp - p) / h2 - (p - pm) / h1);
        Vec3 T = (pp - pm).normalized();
        Vec3 N = p.cross(T).normalized();
        double k = lap.dot(N);
        kmax = std::max(kmax, std::abs(k));
        v[i] = k * N;
    }
    return v;
}

int inflection_count(const SampledCurve& c, const Tolerances& tol) {
    try {
        SignChangeOptions opt;
        opt.scale = 1.0;
        auto r = count_sign_changes(geodesic_curvature(c, tol), tol, c.params, opt);
        return r.finite() ? r.count : -1;
    } catch (const Error&) {
        return -1;
    }
}

int antipodal_count(const SampledCurve& c, const Tolerances& tol) {
    auto [dp, anti] = coincidence_pairs(c, tol);
    (void)dp;
    return anti.status == Sentinel::finite ? anti.count() : -1;
}

// Cheap diameter test: the largest axis extent bounds the diameter from below.
bool below_diameter(const SampledCurve& c, double d) {
    Vec3 lo = c.pts[0], hi = c.pts[0];
    for (const auto& p : c.pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    if ((hi - lo).maxCoeff() >= d) return false;
    return diameter(c) < d;
}

}  // namespace

FlowState make_flow_state(const SampledCurve& c) {
    if (c.ambient != Ambient::sphere || !c.closed)
        throw Error(ErrorKind::PreconditionViolated, "flow needs a closed spherical curve");
    FlowState s;
    s.curve = c;
    s.area = signed_area_left(c);
    s.length = arc_length(c);
    s.gap = s.length / double(c.size());
    return s;
}

double stable_dt(const FlowState& s, double cfl) {
    double g = min_gap(s.curve);
    return cfl * g * g;
}

FlowState csf_step(const FlowState& s, double dt, const Tolerances& tol, size_t resample_every, size_t n_min,
                   double extinction_tol) {
    (void)tol;
    const SampledCurve& c = s.curve;
    if (c.size() < 8) throw Error(ErrorKind::InsufficientSamples, "flow needs at least 8 samples");
    double g = min_gap(c);
    if (dt > 0.5 * g * g) throw Error(ErrorKind::StepTooLarge, "dt exceeds 0.5 * min gap^2", {dt, 0.5 * g * g});
    if (below_diameter(c, extinction_tol)) throw Error(ErrorKind::CurveDegenerate, "diameter below extinction tolerance");

    double kmax = 0;
    auto v = curvature_normal(c, kmax);
    FlowState out;
    out.curve = c;
    for (size_t i = 0; i < c.size(); ++i) out.curve.pts[i] = (c.pts[i] + dt * v[i]).normalized();
    out.t = s.t + dt;
    out.step = s.step + 1;
    out.gap = s.gap;
    if (resample_every > 0 && out.step % resample_every == 0) {
        double L = arc_length(out.curve);
        size_t n = c.size();
        size_t want = size_t(std::lround(L / std::max(s.gap, 1e-300)));
        want = std::clamp(want, n_min, n);
        out.curve = resample_arclength(out.curve, want);
    }
    out.area = signed_area_left(out.curve);
    out.length = arc_length(out.curve);
    return out;
}

FlowTrajectory csf_run(const SampledCurve& c, const StopRule& stop, const Tolerances& tol, const FlowOptions& opt) {
    if (!is_simple(c, tol)) throw Error(ErrorKind::NotSimple, "flow input must be simple");
    FlowTrajectory traj;
    FlowState s = make_flow_state(resample_arclength(c, c.size()));

    auto record = [&](const FlowState& st) {
        traj.states.push_back(st);
        bool near = below_diameter(st.curve, 10 * stop.extinction_tol);
        traj.near_extinction.push_back(near);
        if (opt.track_counts) {
            traj.inflection_counts.push_back(inflection_count(st.curve, tol));
            traj.antipodal_intersection_counts.push_back(antipodal_count(st.curve, tol));
        } else {
            traj.inflection_counts.push_back(-1);
            traj.antipodal_intersection_counts.push_back(-1);
        }
    };
    auto in_hull = [&](const FlowState& st) { return origin_in_hull(st.curve.pts, tol).status == HullClass::interior; };

    if (stop.hemisphere_watch && !in_hull(s)) {
        record(s);
        traj.hemisphere_entry_time = s.t;
        traj.entry_hull_distance = origin_in_hull(s.curve.pts, tol).distance;
        traj.stop_reason = "hemisphere";
        return traj;
    }
    record(s);

    double next_save = opt.save_interval;
    FlowState last_saved = s;
    while (true) {
        if (below_diameter(s.curve, stop.extinction_tol)) {
            traj.extinction_time = s.t;
            traj.stop_reason = "extinction";
            if (traj.states.back().t < s.t) record(s);
            break;
        }
        if (s.t >= stop.max_time) {
            traj.stop_reason = "max_time";
            if (traj.states.back().t < s.t) record(s);
            break;
        }
        double kmax = 0;
        curvature_normal(s.curve, kmax);
        if (kmax > opt.max_curvature) {
            if (below_diameter(s.curve, 10 * stop.extinction_tol)) {
                traj.extinction_time = s.t;
                traj.stop_reason = "extinction";
                if (traj.states.back().t < s.t) record(s);
                break;
            }
            throw Error(ErrorKind::FlowBlowup, "curvature exceeds safety bound", {s.t, kmax});
        }
        double dt = std::min(stable_dt(s, opt.cfl), stop.max_time - s.t);
        dt = std::max(dt, 1e-300);
        FlowState nxt;
        while (true) {
            try {
                nxt = csf_step(s, dt, tol, opt.resample_every, opt.n_min, stop.extinction_tol);
                break;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::StepTooLarge) throw;
                dt *= 0.5;
            }
        }
        s = nxt;
        if (s.t + 1e-15 >= next_save) {
            if (stop.hemisphere_watch && !in_hull(s)) {
                // replay from the last saved state one step at a time to locate the entry
                FlowState r = last_saved;
                while (true) {
                    double d = std::min(stable_dt(r, opt.cfl), s.t - r.t);
                    if (d <= 0) break;
                    FlowState q = csf_step(r, d, tol, opt.resample_every, opt.n_min, stop.extinction_tol);
                    if (!in_hull(q)) {
                        s = q;
                        break;
                    }
                    r = q;
                }
                record(s);
                traj.hemisphere_entry_time = s.t;
                traj.entry_hull_distance = origin_in_hull(s.curve.pts, tol).distance;
                traj.stop_reason = "hemisphere";
                break;
            }
            record(s);
            last_saved = s;
            while (next_save <= s.t + 1e-15) next_save += opt.save_interval;
        }
    }
    return traj;
}

std::vector<Violation> monotonicity_report(const FlowTrajectory& traj) {
    std::vector<Violation> out;
    auto check = [&](const std::vector<int>& counts, const char* name) {
        for (size_t i = 0; i + 1 < counts.size(); ++i) {
            if (traj.near_extinction[i] || traj.near_extinction[i + 1]) continue;
            int a = counts[i], b = counts[i + 1];
            if (a < 0 || b < 0) continue;
            if (b > a) out.push_back({i, name, a, b, traj.states[i + 1].t});
        }
    };
    check(traj.inflection_counts, "inflections");
    check(traj.antipodal_intersection_counts, "antipodal_intersections");
    std::sort(out.begin(), out.end(), [](const Violation& x, const Violation& y) {
        return x.index != y.index ? x.index < y.index : x.quantity < y.quantity;
    });
    return out;
}

std::vector<double> area_law_residuals(const FlowTrajectory& traj, bool skip_near_extinction) {
    std::vector<double> r;
    for (size_t i = 0; i + 1 < traj.states.size(); ++i) {
        if (skip_near_extinction && (traj.near_extinction[i] || traj.near_extinction[i + 1])) continue;
        const auto& a = traj.states[i];
        const auto& b = traj.states[i + 1];
        double dt = b.t - a.t;
        if (dt <= 0) continue;
        double rate = (b.area - a.area) / dt;
        double mid = 0.5 * (a.area + b.area);
        r.push_back(std::abs(rate - (mid - kTwoPi)) / kTwoPi);
    }
    return r;
}

}  // namespace ck
