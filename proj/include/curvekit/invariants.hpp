#pragma once

#include "curvekit/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ck {

enum class Sentinel { finite, infinite, degenerate, not_applicable };
const char* to_string(Sentinel s);

struct FrenetData {
    std::vector<Vec3> T, N, B;
    ScalarField kappa, tau;  // tau is NaN where kappa is in the dead band
};

struct CountResult {
    Sentinel status = Sentinel::finite;
    int count = 0;
    int genuine = 0;
    std::vector<double> locations;  // sign-changing events
    std::vector<double> touches;    // zero clusters without a sign change

    bool finite() const { return status == Sentinel::finite; }
    std::string str() const;
    static CountResult make(Sentinel s) {
        CountResult r;
        r.status = s;
        return r;
    }
};

struct InvariantReport {
    CountResult D, D_plus, S, I, V, P, P_plus;
    CountResult curvature_extrema;  // sign changes of the curvature derivative
    std::optional<HullClass> hull;
    std::optional<Vec3> hemisphere_pole;
    std::optional<int> sigma, sigma_plus;
    std::vector<std::string> notes;
};

struct SignChangeOptions {
    bool cyclic = true;
    // floor for the dead band when the field itself is tiny everywhere
    double scale = 0.0;
};

FrenetData frenet(const SampledCurve& c, const Tolerances& tol = {});
SampledCurve tantrix(const SampledCurve& c, const Tolerances& tol = {});

// Samples flagged singular: vanishing speed or a tangent reversal between neighbouring chords.
std::vector<bool> singular_mask(const SampledCurve& c, const Tolerances& tol = {});
CountResult singular_points(const SampledCurve& c, const Tolerances& tol = {});

// Signed geodesic curvature with normal = position × tangent; NaN near singular samples.
ScalarField geodesic_curvature(const SampledCurve& c, const Tolerances& tol = {});
// Signed curvature of a planar curve; NaN near singular samples.
ScalarField planar_curvature(const SampledCurve& c, const Tolerances& tol = {});
// Periodic derivative of a field with respect to the curve parameter; NaN propagates.
ScalarField field_derivative(const SampledCurve& c, const ScalarField& f);

CountResult count_sign_changes(const ScalarField& field, const Tolerances& tol,
                               const std::vector<double>& params = {}, SignChangeOptions opt = {});

InvariantReport invariant_report(const SampledCurve& c, const Tolerances& tol = {});

}  // namespace ck
