#pragma once

#include "curvekit/core.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ck::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSpecSchema = "curvekit.spec/1";
inline constexpr const char* kReportSchema = "curvekit.report/1";

struct Options {
    std::string command;  // analyze, flow, surgery, corpus, verify-all
    std::vector<std::string> spec_files;
    std::optional<size_t> n_samples;
    std::string tol_file;
    std::optional<uint64_t> seed;
    std::string out_dir = ".";
    int jobs = 1;
};

struct CurveSpec {
    std::string id;
    std::string generator;  // samples, fourier, arc_assembly, sharp_example, integrated_tantrix
    json params = json::object();
    size_t n = 1024;
    json tolerances = json::object();  // per-curve overrides as written
    Tolerances tol;
    std::vector<std::string> analyses{"invariants", "verify"};
    json flow = json::object();
    json surgery = json::array();
    std::string base_dir;  // directory of the spec file, for sample files

    json to_json() const;  // canonical form, reproduces the curve when parsed again
};

// Parse one spec document. Throws Error(SpecParseError) naming the line or field.
std::vector<CurveSpec> parse_specs(const std::string& text, const std::string& origin, const Options& opt,
                                   const Tolerances& base);
Tolerances parse_tolerances(const json& j, const Tolerances& base, const std::string& where);

SampledCurve build_curve(const CurveSpec& s);

// Built-in curve sets used when a command gets no spec files.
std::vector<CurveSpec> sharp_suite(const Options& opt, const Tolerances& base);
std::vector<CurveSpec> default_corpus(const Options& opt, const Tolerances& base);

int run(const Options& opt, std::ostream& log, std::ostream& err);
int main_entry(int argc, char** argv);

}  // namespace ck::cli
