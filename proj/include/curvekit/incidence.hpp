#pragma once

#include "curvekit/core.hpp"
#include "curvekit/invariants.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace ck {

enum class PairKind { coincident, antipodal, tangent_concordant, tangent_discordant };
const char* to_string(PairKind k);

struct PairSet {
    PairKind kind = PairKind::coincident;
    Sentinel status = Sentinel::finite;
    std::vector<std::pair<double, double>> pairs;  // (t, s) with t < s
    int count() const { return int(pairs.size()); }
};

CountResult to_count(const PairSet& p);

// Raw segment-level hit before clustering: segment i (samples i, i+1) against segment j.
struct SegmentHit {
    size_t i, j;
    double a, b;  // fractions along each segment
};

struct PairScan {
    std::vector<SegmentHit> hits;
    size_t n = 0;
};

// Self hits of a curve (antipodal=false) or hits of the curve against its antipodal image.
PairScan scan_pairs(const SampledCurve& c, bool antipodal, const Tolerances& tol);
PairSet cluster_pairs(const SampledCurve& c, const PairScan& scan, PairKind kind, const Tolerances& tol);

std::pair<PairSet, PairSet> coincidence_pairs(const SampledCurve& c, const Tolerances& tol = {});
std::pair<PairSet, PairSet> parallel_tangent_pairs(const SampledCurve& c, const Tolerances& tol = {});
bool is_simple(const SampledCurve& c, const Tolerances& tol = {});

struct HullStatus {
    HullClass status = HullClass::outside;
    Vec3 separator = Vec3::Zero();    // outside/boundary: <separator, p> <= eps for all p
    std::vector<size_t> witness;      // interior: point indices containing o
    std::vector<double> weights;      // matching barycentric weights
    double distance = 0;              // distance from o to the hull
};

HullStatus origin_in_hull(const std::vector<Vec3>& pts, const Tolerances& tol = {});
std::optional<Vec3> hemisphere_pole(const SampledCurve& c, const Tolerances& tol = {});

struct AreaSplit {
    double left = 0, right = 0;
    bool bisects = false;
};

// Areas of the two complementary regions; left is the region to the left of the traversal.
AreaSplit enclosed_area(const SampledCurve& c, const Tolerances& tol = {});
// Same without the simplicity check.
double signed_area_left(const SampledCurve& c);

// Nonnegative least squares: min |A x - b| with x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0);

}  // namespace ck
