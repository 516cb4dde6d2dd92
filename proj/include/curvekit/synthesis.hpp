#pragma once

#include "curvekit/core.hpp"
#include "curvekit/invariants.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ck {

// Unit-speed spherical curve with geodesic curvature k(s), s in [0, L].
SampledCurve curve_from_geodesic_curvature(const std::function<double(double)>& k, double L, size_t n,
                                           const Vec3& p0, const Vec3& t0);
// Same with k given at n equally spaced arclengths over [0, L] (cubic interpolation between samples).
SampledCurve curve_from_geodesic_curvature(const ScalarField& k, double L, const Vec3& p0, const Vec3& t0);

// Closes an open spherical curve whose end nearly meets its start; the correction lives in
// the last `window` fraction of the parameter range.
SampledCurve close_up(const SampledCurve& open, double window, const Tolerances& tol = {});

struct TantrixIntegration {
    SampledCurve curve;
    std::vector<double> speed;
    double closure_residual = 0;
};
TantrixIntegration integrate_tantrix(const SampledCurve& T, const Tolerances& tol = {}, double v_min = 0.1);

// Circular arcs in the stereographic plane, traversed in order.
struct CircularArc {
    std::complex<double> center;
    double radius = 1;
    double start = 0;  // angle of the first point
    double span = 0;   // signed sweep
};

enum class Junction { cusp, c1, c2 };

struct ArcAssembly {
    std::vector<CircularArc> arcs;
    std::vector<Junction> junctions;  // junction after arc i
    int compress = 8;                 // parameter compression near junctions
};

SampledCurve arc_assembly_curve(const ArcAssembly& a, size_t n);
ArcAssembly deltoid_assembly(double R = 3.5);
// Radius of the three-arc base curve, chosen by a scan verified with the invariant report.
double deltoid_radius(const Tolerances& tol = {});

enum class Family { eq3, eq4, eq5 };
const char* to_string(Family f);

using Triple = std::array<int, 3>;
std::vector<Triple> family_triples(Family f);

struct SharpExample {
    SampledCurve curve;
    Triple target;
    int cusps = 0, loops = 0, smoothed = 0;
    double unfold_scale = 0;  // parameter width of the local unfolding
    bool verified = false;    // invariant report matched the target
};

SharpExample sharp_example(Family f, const Triple& target, size_t n = 1024, const Tolerances& tol = {});

struct FourierLoop {
    Ambient ambient = Ambient::sphere;
    uint64_t seed = 0;
    int degree = 1;
    // sphere: latitude z(t) and longitude offset; space/free sphere: per-coordinate series
    double z0 = 0;
    std::vector<double> za, zb, pc;
    std::array<std::vector<double>, 3> ca, cb;
    bool graph = true;  // latitude-graph form on the sphere
    Vec3 eval(double t) const;
    SampledCurve sample(size_t n) const;
};

struct LoopConstraints {
    bool simple = false;
    bool bisecting = false;
    bool symmetric = false;
    bool hull_interior = false;
    double amplitude = 0.5;
    double z_offset = 0.0;  // requested latitude shift before bisection search
    int max_tries = 200;
    size_t n = 1024;
};

struct RandomLoop {
    FourierLoop loop;
    SampledCurve curve;
    int tries = 0;
};

RandomLoop random_fourier_loop(uint64_t seed, int degree, Ambient ambient, const LoopConstraints& c,
                               const Tolerances& tol = {});

}  // namespace ck
