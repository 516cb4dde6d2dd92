#pragma once

#include "curvekit/core.hpp"
#include "curvekit/invariants.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ck {

enum class Ineq { eq1, eq2, eq3, eq4, eq5, eq6, eq7, eq8, thm32 };
enum class VerdictStatus { holds, equality, degenerate, violated };
const char* to_string(Ineq i);
const char* to_string(VerdictStatus s);

struct Hypothesis {
    std::string name;
    bool satisfied = false;
    double margin = 0;  // signed distance into the hypothesis region where meaningful
};

struct Verdict {
    Ineq id = Ineq::eq1;
    std::optional<int> lhs;
    int rhs = 0;
    VerdictStatus status = VerdictStatus::degenerate;
    std::vector<std::pair<std::string, std::string>> terms;  // counter name -> value as reported
    std::vector<Hypothesis> hypotheses;
    std::vector<std::string> notes;
};

bool any_violated(const std::vector<Verdict>& v);

// eq1: 2(P + I) + V >= 6, eq2: 2(P+ + I) + V >= 4, with genuine vertices.
std::vector<Verdict> verify_space(const SampledCurve& c, const Tolerances& tol = {});
std::vector<Verdict> verify_space(const SampledCurve& c, const InvariantReport& rep, const Tolerances& tol = {});

// eq3: 2(D + S) + I >= 6 and eq4: 2(D+ + S) + I >= 4 when o lies in the hull (boundary or interior);
// eq5: 2(D+ + S) + I >= 6 when the curve is centrally symmetric. Genuine inflections are used.
std::vector<Verdict> verify_spherical(const SampledCurve& c, const Tolerances& tol = {});
std::vector<Verdict> verify_spherical(const SampledCurve& c, const InvariantReport& rep, const Tolerances& tol = {});

// True when p -> -p maps the curve onto itself within the match tolerance.
bool is_centrally_symmetric(const SampledCurve& c, const Tolerances& tol = {});

enum class LiftKind { double_cover, closed_lift };
const char* to_string(LiftKind k);

// Projective curves given by spherical lifts. A lift may be periodic, or open with its end
// equal to (closed) or opposite to (anti-closed) its start.
// eq6 (noncontractible, double cover): 2(D + S) + I >= 3 on the projective curve.
// eq7 (contractible, closed lift meeting every great circle): 2(D + S) + I >= 6.
std::vector<Verdict> verify_projective(const SampledCurve& lift, LiftKind kind, const Tolerances& tol = {});

// eq8: 2 P_N + V_d >= 6, with P_N the self and antipodal pairs of the principal normal image
// and V_d the sign changes of (tau / kappa)'.
Verdict darboux_report(const SampledCurve& c, const Tolerances& tol = {});

struct InscribedContacts {
    Vec3 pole = Vec3::UnitZ();
    std::vector<Vec3> points;  // contact points with the bounding great circle
    std::vector<double> params;
};

InscribedContacts inscribed_contacts(const SampledCurve& c, const Tolerances& tol = {});
// Sign changes of geodesic curvature >= 2n for a curve in a closed hemisphere touching the
// boundary at n points not all inside an open semicircle.
Verdict inscribed_bound_check(const SampledCurve& c, const Tolerances& tol = {});

// An antipodal pair one of whose points is singular or a double point.
bool has_special_antipodal_pair(const SampledCurve& c, const InvariantReport& rep, const Tolerances& tol = {});

}  // namespace ck
