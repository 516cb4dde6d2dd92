#pragma once

// Reference implementations and fixtures shared by the unit and acceptance tests.
#include "curvekit/core.hpp"
#include "curvekit/incidence.hpp"
#include "curvekit/surgery.hpp"

#include <functional>
#include <string>
#include <vector>

namespace oracle {

using ck::SampledCurve;
using ck::Tolerances;
using ck::Vec3;

struct NamedCurve {
    std::string name;
    SampledCurve curve;
    bool smooth = true;  // no cusps by construction
};

// Sharp suite plus the seeded random families, built once.
const std::vector<NamedCurve>& full_corpus(const Tolerances& tol);
std::vector<NamedCurve> space_curves();

// Every segment pair tested directly, no candidate pruning.
ck::PairScan brute_scan(const SampledCurve& c, bool antipodal, const Tolerances& tol);
// One entry per compared pair set: empty when library and brute force agree.
std::vector<std::string> compare_pairs(const SampledCurve& c, const Tolerances& tol);
std::string compare_sets(const SampledCurve& c, const ck::PairSet& lib, const ck::PairSet& ref, const Tolerances& tol);

// Closed-hull membership by Caratheodory subsets, boundary by supporting planes through pairs.
ck::HullClass hull_by_subsets(const std::vector<Vec3>& pts, double eps);
std::vector<std::vector<Vec3>> hull_point_sets(unsigned seed, int count);

struct ProjectionResult {
    bool vertex_match = false, sign_match = false;
    int vertices = 0, inflections = 0;
    std::string vertex_detail, sign_detail;
};
ProjectionResult projection_check(const SampledCurve& c, const Vec3& pole, const Tolerances& tol);

double tantrix_identity_error(const SampledCurve& c, const Tolerances& tol);
double curvature_round_trip_error(const Tolerances& tol);

SampledCurve inscribed_curve(int touches, size_t n);
// Planar curve f placed on the sphere through the plane z = 1.
SampledCurve lift(const std::function<ck::Vec2(double)>& f, size_t n, double scale);

struct SurgeryCase {
    std::string name;
    std::function<ck::SurgeryOutcome()> run;
};
std::vector<SurgeryCase> surgery_corpus(const Tolerances& tol);
bool connected(const SampledCurve& c);

}  // namespace oracle
