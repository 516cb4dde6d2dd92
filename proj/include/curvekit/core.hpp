#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ck {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Ambient { plane, sphere, space };

enum class ErrorKind {
    DegenerateCurve,
    InsufficientSamples,
    NotInHemisphere,
    PoleOnCurve,
    NotSimple,
    SingularCurve,
    StepTooLarge,
    CurveDegenerate,
    FlowBlowup,
    DegenerateField,
    PreconditionViolated,
    AmbiguousClassification,
    MultipleSingularity,
    ClassificationFailed,
    NotDouble,
    DisconnectedResult,
    MismatchTooLarge,
    HullViolation,
    InfeasibleSpeed,
    InvalidTriple,
    ConstraintUnsatisfiable,
    InflectedCurve,
    NotInscribed,
    LiftInvalid,
    SpecParseError,
};

const char* to_string(ErrorKind k);
const char* to_string(Ambient a);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg, std::vector<double> where = {})
        : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind), where_(std::move(where)) {}
    ErrorKind kind() const { return kind_; }
    // offending sample indices or parameter values, depending on the raiser
    const std::vector<double>& where() const { return where_; }

private:
    ErrorKind kind_;
    std::vector<double> where_;
};

// Planar curves store z = 0.
struct SampledCurve {
    Ambient ambient = Ambient::space;
    std::vector<Vec3> pts;
    std::vector<double> params;
    bool closed = true;

    size_t size() const { return pts.size(); }
    const Vec3& operator[](size_t i) const { return pts[i]; }
    Vec3& operator[](size_t i) { return pts[i]; }
    // cyclic index for closed curves
    size_t wrap(long i) const {
        long n = static_cast<long>(pts.size());
        return static_cast<size_t>(((i % n) + n) % n);
    }
    double period() const { return closed ? kTwoPi : params.back() - params.front(); }
    void validate(double eps_unit = 1e-10) const;
};

struct Tolerances {
    double eps_zero = 1e-6;         // relative to max|field|
    double eps_match = 1e-6;        // relative to curve diameter
    double eps_hull = 1e-9;
    double eps_unit = 1e-10;
    double cluster_width = 4.0;     // in sample gaps
    double degenerate_fraction = 0.25;
    double bisect_tol = 1e-2;
    double singular_turn = kPi / 2; // chord turning above this marks a singular sample
    void validate() const;
};

using ScalarField = std::vector<double>;

enum class HullClass { outside, boundary, interior };
const char* to_string(HullClass h);

// Builders

std::vector<double> uniform_params(size_t n, double a = 0.0, double b = kTwoPi, bool closed = true);

template <class F>
SampledCurve sample_closed(Ambient amb, size_t n, F&& f) {
    SampledCurve c;
    c.ambient = amb;
    c.closed = true;
    c.params = uniform_params(n);
    c.pts.reserve(n);
    for (double t : c.params) {
        Vec3 p = f(t);
        if (amb == Ambient::sphere) p.normalize();
        c.pts.push_back(p);
    }
    return c;
}

// Metrics

double diameter(const SampledCurve& c);
double arc_length(const SampledCurve& c);
std::vector<double> chord_gaps(const SampledCurve& c);
double match_eps(const SampledCurve& c, const Tolerances& tol);
bool uniform_spacing(const SampledCurve& c, double rel = 1e-9);

// Operations

SampledCurve resample_arclength(const SampledCurve& c, size_t n);
std::vector<Vec3> differentiate(const SampledCurve& c, int order);
SampledCurve reversed(const SampledCurve& c);
SampledCurve rotated_start(const SampledCurve& c, size_t shift);
SampledCurve transformed(const SampledCurve& c, const Eigen::Matrix3d& R);

struct TangentFrame {
    Vec3 pole, e1, e2;
};
TangentFrame frame_at(const Vec3& pole);

SampledCurve beltrami_project(const SampledCurve& c, const Vec3& pole, const Tolerances& tol = {});
SampledCurve beltrami_unproject(const SampledCurve& plane, const Vec3& pole);
SampledCurve stereographic_project(const SampledCurve& c, const Vec3& pole, const Tolerances& tol = {});
SampledCurve stereographic_unproject(const SampledCurve& plane, const Vec3& pole);

// Signed ∮k ds + Area(left) − 2π; set left=false to measure the right-hand region.
double gauss_bonnet_residual(const SampledCurve& c, bool left = true, const Tolerances& tol = {});

}  // namespace ck
