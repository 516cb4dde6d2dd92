#pragma once

#include "curvekit/core.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace ck {

struct RegTag {
    double lo = 0, hi = 0;
    int order = 2;  // 1 for C1, 2 for C2
};

// y = f(x) sampled on increasing x.
struct GraphArc {
    std::vector<double> x, y;
    std::vector<RegTag> tags;

    size_t size() const { return x.size(); }
    double a() const { return x.front(); }
    double b() const { return x.back(); }
    double eval(double t) const;  // piecewise linear
    std::vector<double> second_derivative() const;

    static GraphArc sample(const std::function<double(double)>& f, double a, double b, size_t n,
                           std::vector<RegTag> tags = {});
};

enum class SpiralClass { convex, concave, semiconvex, unknown };
const char* to_string(SpiralClass c);

// Two arms leaving the vortex o = (0, 0); each arm is ordered outward and starts at o.
struct DoubleSpiral {
    std::vector<Vec2> arm1, arm2;
    double radius = 0;
    SpiralClass classification = SpiralClass::unknown;
};

// Arms x >= 0 and x <= 0 of a graph through the origin.
DoubleSpiral double_spiral_from_graph(const GraphArc& f);

struct SpiralSides {
    // side 0 runs counterclockwise from arm1 to arm2, side 1 is the complement
    int normal_side1 = -1, normal_side2 = -1;
    double width[2] = {0, 0};  // angular width after intersecting over probe radii
    bool proper[2] = {false, false};
};

SpiralSides spiral_sides(const DoubleSpiral& ds, const Tolerances& tol = {});
SpiralClass classify_double_spiral(DoubleSpiral& ds, const Tolerances& tol = {});

struct SurgeryOutcome {
    SampledCurve result;
    int inflections_added = 0;
    int sigma_plus_before = -1, sigma_plus_after = -1;
    std::vector<SpiralClass> classes;  // one per smoothed vortex or sector
    std::vector<int> predicted_added;  // inflections predicted per vortex from its class
    std::vector<size_t> changed;       // indices of result samples not copied from the input
    double curvature_jump = 0;         // max adjacent curvature change over max |k| near the surgery
    bool c2_regular = false;
};

ScalarField mollify_zero_preserving(const ScalarField& f, double eps, const Tolerances& tol = {});
GraphArc bump_perturb(const GraphArc& f, double delta, const Tolerances& tol = {});

// radius <= 0 picks a neighbourhood from the local sample spacing.
SurgeryOutcome desingularize(const SampledCurve& c, double t0, double radius = 0, const Tolerances& tol = {});
std::pair<GraphArc, GraphArc> separate_tangential_intersection(const GraphArc& b1, const GraphArc& b2,
                                                               const Tolerances& tol = {});
// radius <= 0 picks a neighbourhood from the local sample spacing.
SurgeryOutcome resolve_double_point(const SampledCurve& c, std::pair<double, double> p, const Tolerances& tol = {},
                                    double radius = 0);

// Largest adjacent curvature change relative to max |k| over samples [lo, hi] (cyclic).
double curvature_jump(const SampledCurve& c, long lo, long hi, const Tolerances& tol = {});

}  // namespace ck
