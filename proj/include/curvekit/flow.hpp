#pragma once

#include "curvekit/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ck {

struct FlowState {
    SampledCurve curve;
    double t = 0;
    size_t step = 0;
    double area = 0;    // area to the left of the traversal
    double length = 0;
    double gap = 0;     // target sample spacing kept by resampling
};

struct StopRule {
    double max_time = 1.0;
    double extinction_tol = 1e-2;
    bool hemisphere_watch = false;
};

struct FlowOptions {
    double save_interval = 0.01;
    size_t resample_every = 10;
    size_t n_min = 32;
    double cfl = 0.25;
    double max_curvature = 1e5;
    bool track_counts = true;
};

struct FlowTrajectory {
    std::vector<FlowState> states;
    std::vector<int> inflection_counts;             // -1 when the counter is a sentinel
    std::vector<int> antipodal_intersection_counts; // -1 when the counter is a sentinel
    std::vector<bool> near_extinction;
    std::optional<double> extinction_time;
    std::optional<double> hemisphere_entry_time;
    double entry_hull_distance = 0;  // distance from o to the hull at the entry step
    std::string stop_reason;
};

struct Violation {
    size_t index = 0;  // transition from states[index] to states[index + 1]
    std::string quantity;
    int before = 0, after = 0;
    double t = 0;
};

FlowState make_flow_state(const SampledCurve& c);
double stable_dt(const FlowState& s, double cfl = 0.25);
// Explicit steps are stable for dt <= 0.5 * (min gap)^2.
FlowState csf_step(const FlowState& s, double dt, const Tolerances& tol = {}, size_t resample_every = 10,
                   size_t n_min = 32, double extinction_tol = 1e-2);
FlowTrajectory csf_run(const SampledCurve& c, const StopRule& stop, const Tolerances& tol = {},
                       const FlowOptions& opt = {});
std::vector<Violation> monotonicity_report(const FlowTrajectory& traj);
// Relative area-law residuals |dA/dt - (A - 2pi)| / 2pi between consecutive saved states.
std::vector<double> area_law_residuals(const FlowTrajectory& traj, bool skip_near_extinction = true);

}  // namespace ck
