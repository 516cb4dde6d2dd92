#include "cli.hpp"

#include "curvekit/flow.hpp"
#include "curvekit/incidence.hpp"
#include "curvekit/invariants.hpp"
#include "curvekit/surgery.hpp"
#include "curvekit/synthesis.hpp"
#include "curvekit/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace ck::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw Error(ErrorKind::SpecParseError, where + ": " + msg);
}

// Object reader that tracks the field path for error messages.
class Obj {
public:
    Obj(const json& j, std::string origin, std::string path) : j_(j), origin_(std::move(origin)), path_(std::move(path)) {
        if (!j_.is_object()) fail(where(), "expected an object");
    }
    std::string where(const std::string& key = "") const {
        std::string p = key.empty() ? path_ : path_ + "/" + key;
        return origin_ + " field " + (p.empty() ? "/" : p);
    }
    std::string sub(const std::string& key) const { return path_ + "/" + key; }
    const std::string& origin() const { return origin_; }
    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) fail(where(it.key()), "unknown field");
    }
    bool has(const std::string& k) const { return j_.contains(k); }
    const json& at(const std::string& k) const {
        if (!has(k)) fail(where(k), "missing required field");
        return j_.at(k);
    }
    double num(const std::string& k, std::optional<double> def = std::nullopt) const {
        if (!has(k)) {
            if (def) return *def;
            fail(where(k), "missing required field");
        }
        const json& v = j_.at(k);
        if (!v.is_number()) fail(where(k), "expected a number");
        double d = v.get<double>();
        if (!std::isfinite(d)) fail(where(k), "expected a finite number");
        return d;
    }
    long long integer(const std::string& k, std::optional<long long> def = std::nullopt) const {
        if (!has(k)) {
            if (def) return *def;
            fail(where(k), "missing required field");
        }
        const json& v = j_.at(k);
        if (!v.is_number_integer()) fail(where(k), "expected an integer");
        return v.get<long long>();
    }
    bool boolean(const std::string& k, bool def) const {
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_boolean()) fail(where(k), "expected true or false");
        return v.get<bool>();
    }
    std::string str(const std::string& k, std::optional<std::string> def = std::nullopt) const {
        if (!has(k)) {
            if (def) return *def;
            fail(where(k), "missing required field");
        }
        const json& v = j_.at(k);
        if (!v.is_string()) fail(where(k), "expected a string");
        return v.get<std::string>();
    }

private:
    const json& j_;
    std::string origin_, path_;
};

Ambient parse_ambient(const std::string& s, const std::string& where) {
    if (s == "sphere") return Ambient::sphere;
    if (s == "plane") return Ambient::plane;
    if (s == "space") return Ambient::space;
    fail(where, "ambient must be sphere, plane or space");
}

Family parse_family(const std::string& s, const std::string& where) {
    if (s == "eq3") return Family::eq3;
    if (s == "eq4") return Family::eq4;
    if (s == "eq5") return Family::eq5;
    fail(where, "family must be eq3, eq4 or eq5");
}

Junction parse_junction(const std::string& s, const std::string& where) {
    if (s == "cusp") return Junction::cusp;
    if (s == "c1") return Junction::c1;
    if (s == "c2") return Junction::c2;
    fail(where, "junction must be cusp, c1 or c2");
}

std::vector<double> read_numbers(const json& v, size_t lo, size_t hi, const std::string& where) {
    if (!v.is_array() || v.size() < lo || v.size() > hi) fail(where, "expected an array of " + std::to_string(lo) + (lo == hi ? "" : "-" + std::to_string(hi)) + " numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(where, "expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<Vec3> read_point_file(const std::string& path, const std::string& where) {
    std::ifstream in(path);
    if (!in) fail(where, "cannot open sample file " + path);
    std::vector<Vec3> pts;
    std::string line;
    size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        std::vector<double> v;
        double x;
        while (is >> x) v.push_back(x);
        if (!is.eof()) fail(where, path + " line " + std::to_string(ln) + ": not a number");
        if (v.empty()) continue;
        if (v.size() != 2 && v.size() != 3) fail(where, path + " line " + std::to_string(ln) + ": expected 2 or 3 coordinates");
        pts.emplace_back(v[0], v[1], v.size() == 3 ? v[2] : 0.0);
    }
    return pts;
}

void check_constraints(const json& j, const Obj& parent, const std::string& key) {
    Obj c(j, parent.origin(), parent.sub(key));
    c.allow({"simple", "bisecting", "symmetric", "hull_interior", "amplitude", "z_offset", "max_tries"});
    c.boolean("simple", false);
    c.boolean("bisecting", false);
    c.boolean("symmetric", false);
    c.boolean("hull_interior", false);
    if (c.num("amplitude", 0.5) <= 0) fail(c.where("amplitude"), "must be positive");
    c.num("z_offset", 0.0);
    if (c.integer("max_tries", 200) < 1) fail(c.where("max_tries"), "must be at least 1");
}

LoopConstraints read_constraints(const json& j) {
    LoopConstraints c;
    if (j.is_null()) return c;
    c.simple = j.value("simple", false);
    c.bisecting = j.value("bisecting", false);
    c.symmetric = j.value("symmetric", false);
    c.hull_interior = j.value("hull_interior", false);
    c.amplitude = j.value("amplitude", 0.5);
    c.z_offset = j.value("z_offset", 0.0);
    c.max_tries = j.value("max_tries", 200);
    return c;
}

void check_generator(const std::string& gen, const json& params, const Obj& parent, const std::string& key,
                     const std::string& base_dir, int depth) {
    Obj p(params, parent.origin(), parent.sub(key));
    if (gen == "sharp_example") {
        p.allow({"family", "triple"});
        parse_family(p.str("family"), p.where("family"));
        const json& t = p.at("triple");
        if (!t.is_array() || t.size() != 3 || !std::all_of(t.begin(), t.end(), [](const json& x) { return x.is_number_integer(); }))
            fail(p.where("triple"), "expected three integers");
    } else if (gen == "fourier") {
        p.allow({"seed", "degree", "ambient", "constraints"});
        if (p.has("seed") && p.integer("seed") < 0) fail(p.where("seed"), "must be nonnegative");
        if (p.integer("degree", 3) < 1) fail(p.where("degree"), "must be at least 1");
        parse_ambient(p.str("ambient", "sphere"), p.where("ambient"));
        if (p.has("constraints")) check_constraints(p.at("constraints"), p, "constraints");
    } else if (gen == "arc_assembly") {
        p.allow({"preset", "R", "arcs", "junctions", "compress"});
        if (p.has("preset")) {
            if (p.str("preset") != "deltoid") fail(p.where("preset"), "only the deltoid preset exists");
            if (p.has("R") && p.num("R") <= 0) fail(p.where("R"), "must be positive");
            if (p.has("arcs")) fail(p.where("arcs"), "give either a preset or arcs");
        } else {
            const json& arcs = p.at("arcs");
            if (!arcs.is_array() || arcs.empty()) fail(p.where("arcs"), "expected a nonempty array");
            for (size_t i = 0; i < arcs.size(); ++i) {
                Obj a(arcs[i], p.origin(), p.sub("arcs") + "/" + std::to_string(i));
                a.allow({"center", "radius", "start", "span"});
                read_numbers(a.at("center"), 2, 2, a.where("center"));
                if (a.num("radius") <= 0) fail(a.where("radius"), "must be positive");
                a.num("start");
                a.num("span");
            }
            if (p.has("junctions")) {
                const json& js = p.at("junctions");
                if (!js.is_array() || js.size() != arcs.size()) fail(p.where("junctions"), "expected one junction per arc");
                for (const auto& x : js) {
                    if (!x.is_string()) fail(p.where("junctions"), "expected strings");
                    parse_junction(x.get<std::string>(), p.where("junctions"));
                }
            }
            if (p.integer("compress", 8) < 1) fail(p.where("compress"), "must be at least 1");
        }
    } else if (gen == "samples") {
        p.allow({"ambient", "closed", "points", "file"});
        parse_ambient(p.str("ambient"), p.where("ambient"));
        p.boolean("closed", true);
        if (p.has("points") == p.has("file")) fail(p.where(), "give exactly one of points or file");
        if (p.has("points")) {
            const json& pts = p.at("points");
            if (!pts.is_array() || pts.size() < 8) fail(p.where("points"), "expected at least 8 points");
            for (size_t i = 0; i < pts.size(); ++i) read_numbers(pts[i], 2, 3, p.where("points") + "/" + std::to_string(i));
        } else {
            fs::path f = fs::path(base_dir) / p.str("file");
            if (!fs::exists(f)) fail(p.where("file"), "file does not exist: " + f.string());
            if (read_point_file(f.string(), p.where("file")).size() < 8) fail(p.where("file"), "expected at least 8 points");
        }
    } else if (gen == "integrated_tantrix") {
        if (depth > 0) fail(p.where(), "integrated_tantrix cannot be nested");
        p.allow({"tantrix", "v_min"});
        Obj t(p.at("tantrix"), p.origin(), p.sub("tantrix"));
        t.allow({"generator", "params"});
        std::string g = t.str("generator");
        check_generator(g, t.has("params") ? t.at("params") : json::object(), t, "params", base_dir, depth + 1);
        double v = p.num("v_min", 0.1);
        if (!(v > 0 && v < 1)) fail(p.where("v_min"), "must lie in (0, 1)");
    } else {
        fail(parent.where("generator"), "unknown generator '" + gen +
                                            "' (samples, fourier, arc_assembly, sharp_example, integrated_tantrix)");
    }
}

const std::set<std::string> kAnalyses{"invariants", "verify", "plot", "inscribed", "projective:double_cover",
                                      "projective:closed_lift", "darboux"};

void check_flow(const json& j, const Obj& parent) {
    Obj f(j, parent.origin(), parent.sub("flow"));
    f.allow({"max_time", "extinction_tol", "hemisphere_watch", "save_interval", "cfl", "n_min", "resample_every"});
    if (f.num("max_time", 1.0) <= 0) fail(f.where("max_time"), "must be positive");
    if (f.num("extinction_tol", 1e-2) <= 0) fail(f.where("extinction_tol"), "must be positive");
    f.boolean("hemisphere_watch", false);
    if (f.num("save_interval", 0.01) <= 0) fail(f.where("save_interval"), "must be positive");
    double cfl = f.num("cfl", 0.25);
    if (!(cfl > 0 && cfl <= 0.5)) fail(f.where("cfl"), "must lie in (0, 0.5]");
    if (f.integer("n_min", 32) < 8) fail(f.where("n_min"), "must be at least 8");
    if (f.integer("resample_every", 10) < 0) fail(f.where("resample_every"), "must be nonnegative");
}

void check_surgery(const json& j, const Obj& parent) {
    if (!j.is_array()) fail(parent.where("surgery"), "expected an array of operations");
    for (size_t i = 0; i < j.size(); ++i) {
        Obj o(j[i], parent.origin(), parent.sub("surgery") + "/" + std::to_string(i));
        std::string op = o.str("op");
        if (op == "auto") {
            o.allow({"op", "max_ops"});
            if (o.integer("max_ops", 16) < 1) fail(o.where("max_ops"), "must be at least 1");
        } else if (op == "desingularize") {
            o.allow({"op", "t0", "radius"});
            o.num("t0");
            o.num("radius", 0.0);
        } else if (op == "resolve_double_point") {
            o.allow({"op", "t", "s", "radius"});
            o.num("t");
            o.num("s");
            o.num("radius", 0.0);
        } else {
            fail(o.where("op"), "unknown operation '" + op + "' (auto, desingularize, resolve_double_point)");
        }
    }
}

const std::regex kIdPattern("[A-Za-z0-9._+-]+");

CurveSpec parse_curve(const json& j, const Obj& parent, const std::string& key, const Options& opt,
                      const Tolerances& base, const json& doc_tol, const std::string& base_dir) {
    Obj c(j, parent.origin(), key);
    c.allow({"id", "generator", "params", "n", "tolerances", "analyses", "flow", "surgery"});
    CurveSpec s;
    s.id = c.str("id");
    if (!std::regex_match(s.id, kIdPattern)) fail(c.where("id"), "ids use letters, digits and . _ + - only");
    s.generator = c.str("generator");
    s.params = c.has("params") ? c.at("params") : json::object();
    s.base_dir = base_dir;
    check_generator(s.generator, s.params, c, "params", base_dir, 0);
    if (s.generator == "fourier" && !s.params.contains("seed")) s.params["seed"] = opt.seed.value_or(0);
    long long n = c.integer("n", 1024);
    if (n < 16 || n > (1 << 22)) fail(c.where("n"), "must lie in [16, 4194304]");
    s.n = size_t(n);
    if (opt.n_samples) s.n = *opt.n_samples;
    Tolerances t = parse_tolerances(doc_tol, base, parent.where("tolerances"));
    s.tolerances = doc_tol;
    if (c.has("tolerances")) {
        t = parse_tolerances(c.at("tolerances"), t, c.where("tolerances"));
        for (auto it = c.at("tolerances").begin(); it != c.at("tolerances").end(); ++it) s.tolerances[it.key()] = it.value();
    }
    s.tol = t;
    if (c.has("analyses")) {
        const json& a = c.at("analyses");
        if (!a.is_array()) fail(c.where("analyses"), "expected an array of strings");
        s.analyses.clear();
        for (const auto& x : a) {
            if (!x.is_string() || !kAnalyses.count(x.get<std::string>()))
                fail(c.where("analyses"), "unknown analysis (invariants, verify, plot, inscribed, darboux, "
                                          "projective:double_cover, projective:closed_lift)");
            s.analyses.push_back(x.get<std::string>());
        }
    }
    if (c.has("flow")) {
        check_flow(c.at("flow"), c);
        s.flow = c.at("flow");
    }
    if (c.has("surgery")) {
        check_surgery(c.at("surgery"), c);
        s.surgery = c.at("surgery");
    }
    return s;
}

std::vector<CurveSpec> expand_group(const json& j, const Obj& parent, const std::string& key, const Options& opt,
                                    const Tolerances& base, const json& doc_tol, const std::string& base_dir) {
    Obj g(j, parent.origin(), key);
    g.allow({"generator", "id_prefix", "count", "seed", "degree", "ambient", "constraints", "n", "families",
             "analyses", "tolerances", "flow"});
    std::string gen = g.str("generator");
    std::vector<json> curves;
    json common = json::object();
    if (g.has("n")) common["n"] = g.at("n");
    if (g.has("analyses")) common["analyses"] = g.at("analyses");
    if (g.has("tolerances")) common["tolerances"] = g.at("tolerances");
    if (g.has("flow")) common["flow"] = g.at("flow");
    if (gen == "fourier") {
        long long count = g.integer("count");
        if (count < 1 || count > 100000) fail(g.where("count"), "must lie in [1, 100000]");
        long long seed0 = opt.seed ? (long long)*opt.seed : g.integer("seed", 0);
        if (seed0 < 0) fail(g.where("seed"), "must be nonnegative");
        std::string prefix = g.str("id_prefix", "fourier");
        for (long long i = 0; i < count; ++i) {
            json c = common;
            c["id"] = prefix + "-" + std::to_string(seed0 + i);
            c["generator"] = "fourier";
            json p = json::object();
            p["seed"] = seed0 + i;
            p["degree"] = g.integer("degree", 3);
            p["ambient"] = g.str("ambient", "sphere");
            if (g.has("constraints")) p["constraints"] = g.at("constraints");
            c["params"] = p;
            curves.push_back(c);
        }
    } else if (gen == "sharp_example") {
        std::vector<std::string> fams{"eq3", "eq4", "eq5"};
        if (g.has("families")) {
            fams.clear();
            const json& f = g.at("families");
            if (!f.is_array()) fail(g.where("families"), "expected an array");
            for (const auto& x : f) {
                if (!x.is_string()) fail(g.where("families"), "expected strings");
                parse_family(x.get<std::string>(), g.where("families"));
                fams.push_back(x.get<std::string>());
            }
        }
        std::string prefix = g.str("id_prefix", "sharp");
        for (const auto& fam : fams)
            for (const auto& t : family_triples(parse_family(fam, g.where("families")))) {
                json c = common;
                c["id"] = prefix + "-" + fam + "-" + std::to_string(t[0]) + std::to_string(t[1]) + std::to_string(t[2]);
                c["generator"] = "sharp_example";
                c["params"] = json{{"family", fam}, {"triple", {t[0], t[1], t[2]}}};
                curves.push_back(c);
            }
    } else {
        fail(g.where("generator"), "corpus groups support fourier and sharp_example");
    }
    std::vector<CurveSpec> out;
    for (size_t i = 0; i < curves.size(); ++i)
        out.push_back(parse_curve(curves[i], g, key + "[" + std::to_string(i) + "]", opt, base, doc_tol, base_dir));
    return out;
}

// ---- JSON views of results ----

json count_json(const CountResult& c) {
    json j;
    j["status"] = to_string(c.status);
    if (c.finite()) {
        j["count"] = c.count;
        j["genuine"] = c.genuine;
        j["locations"] = c.locations;
    }
    return j;
}

json opt_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json report_json(const InvariantReport& r) {
    json j;
    j["D"] = count_json(r.D);
    j["D_plus"] = count_json(r.D_plus);
    j["S"] = count_json(r.S);
    j["I"] = count_json(r.I);
    j["V"] = count_json(r.V);
    j["P"] = count_json(r.P);
    j["P_plus"] = count_json(r.P_plus);
    j["curvature_extrema"] = count_json(r.curvature_extrema);
    j["hull"] = r.hull ? json(to_string(*r.hull)) : json(nullptr);
    j["hemisphere_pole"] = r.hemisphere_pole ? json{r.hemisphere_pole->x(), r.hemisphere_pole->y(), r.hemisphere_pole->z()}
                                             : json(nullptr);
    j["sigma"] = opt_int(r.sigma);
    j["sigma_plus"] = opt_int(r.sigma_plus);
    j["notes"] = r.notes;
    return j;
}

json verdict_json(const Verdict& v) {
    json j;
    j["id"] = to_string(v.id);
    j["lhs"] = opt_int(v.lhs);
    j["rhs"] = v.rhs;
    j["status"] = to_string(v.status);
    json terms = json::object();
    for (const auto& [k, val] : v.terms) terms[k] = val;
    j["terms"] = terms;
    json hyp = json::array();
    for (const auto& h : v.hypotheses) hyp.push_back({{"name", h.name}, {"satisfied", h.satisfied}, {"margin", h.margin}});
    j["hypotheses"] = hyp;
    j["notes"] = v.notes;
    return j;
}

json tolerance_json(const Tolerances& t) {
    return json{{"eps_zero", t.eps_zero},       {"eps_match", t.eps_match},
                {"eps_hull", t.eps_hull},       {"eps_unit", t.eps_unit},
                {"cluster_width", t.cluster_width}, {"degenerate_fraction", t.degenerate_fraction},
                {"bisect_tol", t.bisect_tol},   {"singular_turn", t.singular_turn}};
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ScalarField curvature_field(const SampledCurve& c, const Tolerances& tol) {
    try {
        if (c.ambient == Ambient::sphere) return geodesic_curvature(c, tol);
        if (c.ambient == Ambient::plane) return planar_curvature(c, tol);
        return frenet(c, tol).kappa;
    } catch (const Error&) {
        return ScalarField(c.size(), kNaN);
    }
}

std::string polyline_table(const SampledCurve& c, const Tolerances& tol) {
    auto k = curvature_field(c, tol);
    std::ostringstream os;
    os << "# param x y z curvature\n";
    for (size_t i = 0; i < c.size(); ++i)
        os << num(c.params[i]) << ' ' << num(c.pts[i].x()) << ' ' << num(c.pts[i].y()) << ' ' << num(c.pts[i].z()) << ' '
           << num(k[i]) << '\n';
    return os.str();
}

struct Built {
    SampledCurve curve;
    json info = json::object();
};

Built build(const std::string& gen, const json& p, size_t n, const Tolerances& tol, const std::string& base_dir) {
    Built b;
    if (gen == "sharp_example") {
        Family f = parse_family(p.at("family").get<std::string>(), "family");
        Triple t{p.at("triple")[0].get<int>(), p.at("triple")[1].get<int>(), p.at("triple")[2].get<int>()};
        auto ex = sharp_example(f, t, n, tol);
        b.curve = ex.curve;
        b.info = json{{"cusps", ex.cusps}, {"loops", ex.loops}, {"smoothed", ex.smoothed},
                      {"unfold_scale", ex.unfold_scale}, {"verified", ex.verified}};
    } else if (gen == "fourier") {
        LoopConstraints c = read_constraints(p.value("constraints", json()));
        c.n = n;
        auto rl = random_fourier_loop(p.at("seed").get<uint64_t>(), p.value("degree", 3),
                                      parse_ambient(p.value("ambient", std::string("sphere")), "ambient"), c, tol);
        b.curve = rl.curve;
        b.info = json{{"tries", rl.tries}};
    } else if (gen == "arc_assembly") {
        ArcAssembly a;
        if (p.contains("preset")) {
            double R = p.contains("R") ? p.at("R").get<double>() : deltoid_radius(tol);
            a = deltoid_assembly(R);
            b.info = json{{"R", R}};
        } else {
            for (const auto& x : p.at("arcs")) {
                CircularArc arc;
                arc.center = {x.at("center")[0].get<double>(), x.at("center")[1].get<double>()};
                arc.radius = x.at("radius").get<double>();
                arc.start = x.at("start").get<double>();
                arc.span = x.at("span").get<double>();
                a.arcs.push_back(arc);
            }
            if (p.contains("junctions"))
                for (const auto& x : p.at("junctions")) a.junctions.push_back(parse_junction(x.get<std::string>(), "junctions"));
            a.compress = p.value("compress", 8);
        }
        b.curve = arc_assembly_curve(a, n);
    } else if (gen == "samples") {
        SampledCurve c;
        c.ambient = parse_ambient(p.at("ambient").get<std::string>(), "ambient");
        c.closed = p.value("closed", true);
        if (p.contains("points")) {
            for (const auto& x : p.at("points"))
                c.pts.emplace_back(x[0].get<double>(), x[1].get<double>(), x.size() == 3 ? x[2].get<double>() : 0.0);
        } else {
            c.pts = read_point_file((fs::path(base_dir) / p.at("file").get<std::string>()).string(), "file");
        }
        c.params = uniform_params(c.pts.size(), 0.0, kTwoPi, c.closed);
        c.validate(tol.eps_unit);
        b.curve = c;
    } else if (gen == "integrated_tantrix") {
        const json& t = p.at("tantrix");
        Built T = build(t.at("generator").get<std::string>(), t.value("params", json::object()), n, tol, base_dir);
        auto ti = integrate_tantrix(T.curve, tol, p.value("v_min", 0.1));
        b.curve = ti.curve;
        b.info = json{{"tantrix", T.info}, {"closure_residual", ti.closure_residual}};
    }
    return b;
}

// ---- per-curve processing ----

struct Output {
    std::string name, content;
};

struct Result {
    json report;
    std::vector<Output> files;
    bool violated = false;
    std::string error;
};

bool wants(const CurveSpec& s, const std::string& a) {
    return std::find(s.analyses.begin(), s.analyses.end(), a) != s.analyses.end();
}

json verdicts_for(const CurveSpec& s, const SampledCurve& c, const InvariantReport& rep, bool& violated) {
    json out = json::array();
    std::vector<Verdict> vs;
    json skipped = json::array();
    bool verify = wants(s, "verify");
    if (verify && c.ambient == Ambient::space) {
        auto v = verify_space(c, rep, s.tol);
        vs.insert(vs.end(), v.begin(), v.end());
    }
    if (verify && c.ambient == Ambient::sphere) {
        auto v = verify_spherical(c, rep, s.tol);
        vs.insert(vs.end(), v.begin(), v.end());
    }
    if (c.ambient == Ambient::space && (verify || wants(s, "darboux"))) {
        try {
            vs.push_back(darboux_report(c, s.tol));
        } catch (const Error& e) {
            skipped.push_back(json{{"id", "eq8"}, {"reason", e.what()}});
        }
    }
    if (wants(s, "inscribed")) {
        try {
            vs.push_back(inscribed_bound_check(c, s.tol));
        } catch (const Error& e) {
            skipped.push_back(json{{"id", "thm32"}, {"reason", e.what()}});
        }
    }
    for (auto [name, kind] : {std::pair{"projective:double_cover", LiftKind::double_cover},
                              std::pair{"projective:closed_lift", LiftKind::closed_lift}}) {
        if (!wants(s, name)) continue;
        try {
            auto v = verify_projective(c, kind, s.tol);
            vs.insert(vs.end(), v.begin(), v.end());
        } catch (const Error& e) {
            skipped.push_back(json{{"id", kind == LiftKind::double_cover ? "eq6" : "eq7"}, {"reason", e.what()}});
        }
    }
    for (const auto& v : vs) out.push_back(verdict_json(v));
    violated = any_violated(vs);
    return json{{"verdicts", out}, {"skipped", skipped}};
}

json flow_block(const CurveSpec& s, const SampledCurve& c, std::vector<Output>& files, bool& violated) {
    const json& f = s.flow;
    StopRule stop;
    stop.max_time = f.value("max_time", 1.0);
    stop.extinction_tol = f.value("extinction_tol", 1e-2);
    stop.hemisphere_watch = f.value("hemisphere_watch", false);
    FlowOptions fo;
    fo.save_interval = f.value("save_interval", 0.01);
    fo.cfl = f.value("cfl", 0.25);
    fo.n_min = f.value("n_min", size_t(32));
    fo.resample_every = f.value("resample_every", size_t(10));
    auto traj = csf_run(c, stop, s.tol, fo);
    auto viol = monotonicity_report(traj);
    auto res = area_law_residuals(traj);
    json j;
    j["stop_reason"] = traj.stop_reason;
    j["extinction_time"] = opt_num(traj.extinction_time);
    j["hemisphere_entry_time"] = opt_num(traj.hemisphere_entry_time);
    j["entry_hull_distance"] = traj.entry_hull_distance;
    j["saved_states"] = traj.states.size();
    j["final_time"] = traj.states.back().t;
    j["area_residual_max"] = res.empty() ? json(nullptr) : json(*std::max_element(res.begin(), res.end()));
    j["inflection_counts"] = traj.inflection_counts;
    j["antipodal_intersection_counts"] = traj.antipodal_intersection_counts;
    json vj = json::array();
    for (const auto& v : viol)
        vj.push_back({{"index", v.index}, {"quantity", v.quantity}, {"before", v.before}, {"after", v.after}, {"t", v.t}});
    j["violations"] = vj;
    violated = violated || !viol.empty();
    std::ostringstream os;
    os << "# t area length samples inflections antipodal_intersections near_extinction\n";
    for (size_t i = 0; i < traj.states.size(); ++i) {
        const auto& st = traj.states[i];
        os << num(st.t) << ' ' << num(st.area) << ' ' << num(st.length) << ' ' << st.curve.size() << ' '
           << traj.inflection_counts[i] << ' ' << traj.antipodal_intersection_counts[i] << ' '
           << int(traj.near_extinction[i]) << '\n';
    }
    files.push_back({s.id + ".flow.tsv", os.str()});
    files.push_back({s.id + ".flow_final.tsv", polyline_table(traj.states.back().curve, s.tol)});
    return j;
}

json outcome_json(const std::string& op, const SurgeryOutcome& o) {
    json j;
    j["op"] = op;
    json cls = json::array();
    for (auto c : o.classes) cls.push_back(to_string(c));
    j["classes"] = cls;
    j["predicted_added"] = o.predicted_added;
    j["inflections_added"] = o.inflections_added;
    j["sigma_plus_before"] = o.sigma_plus_before;
    j["sigma_plus_after"] = o.sigma_plus_after;
    j["c2_regular"] = o.c2_regular;
    j["curvature_jump"] = o.curvature_jump;
    j["changed_samples"] = o.changed.size();
    j["samples"] = o.result.size();
    return j;
}

json surgery_block(const CurveSpec& s, const SampledCurve& c0, std::vector<Output>& files, bool& violated) {
    json ops = s.surgery.empty() ? json::array({json{{"op", "auto"}}}) : s.surgery;
    SampledCurve cur = c0;
    json log = json::array();
    auto check = [&](const SurgeryOutcome& o) {
        if (o.sigma_plus_before >= 0 && o.sigma_plus_after > o.sigma_plus_before) violated = true;
    };
    for (const auto& op : ops) {
        std::string name = op.at("op").get<std::string>();
        if (name == "desingularize") {
            auto o = desingularize(cur, op.at("t0").get<double>(), op.value("radius", 0.0), s.tol);
            log.push_back(outcome_json(name, o));
            check(o);
            cur = o.result;
        } else if (name == "resolve_double_point") {
            auto o = resolve_double_point(cur, {op.at("t").get<double>(), op.at("s").get<double>()}, s.tol,
                                          op.value("radius", 0.0));
            log.push_back(outcome_json(name, o));
            check(o);
            cur = o.result;
        } else {
            int budget = op.value("max_ops", 16);
            for (int k = 0; k < budget; ++k) {
                auto sp = singular_points(cur, s.tol);
                if (sp.finite() && sp.count > 0) {
                    auto o = desingularize(cur, sp.locations.front(), 0.0, s.tol);
                    log.push_back(outcome_json("desingularize", o));
                    check(o);
                    cur = o.result;
                    continue;
                }
                auto [dp, anti] = coincidence_pairs(cur, s.tol);
                (void)anti;
                if (dp.status == Sentinel::finite && dp.count() > 0) {
                    auto o = resolve_double_point(cur, dp.pairs.front(), s.tol);
                    log.push_back(outcome_json("resolve_double_point", o));
                    check(o);
                    cur = o.result;
                    continue;
                }
                break;
            }
        }
    }
    files.push_back({s.id + ".surgery.tsv", polyline_table(cur, s.tol)});
    return json{{"operations", log}, {"final_invariants", report_json(invariant_report(cur, s.tol))}};
}

Result process(const CurveSpec& s, const std::string& command) {
    Result r;
    json rep;
    rep["schema"] = kReportSchema;
    rep["id"] = s.id;
    rep["command"] = command;
    json prov;
    prov["generator"] = s.generator;
    prov["params"] = s.params;
    prov["seed"] = s.params.contains("seed") ? s.params.at("seed") : json(nullptr);
    prov["n"] = s.n;
    prov["tolerances"] = tolerance_json(s.tol);
    prov["version"] = kVersion;
    rep["provenance"] = prov;
    try {
        Built b = build(s.generator, s.params, s.n, s.tol, s.base_dir);
        const SampledCurve& c = b.curve;
        rep["generator_info"] = b.info;
        rep["curve"] = json{{"ambient", to_string(c.ambient)},
                            {"closed", c.closed},
                            {"samples", c.size()},
                            {"length", arc_length(c)},
                            {"diameter", diameter(c)}};
        InvariantReport inv = invariant_report(c, s.tol);
        rep["invariants"] = report_json(inv);
        if (command == "analyze" || command == "verify-all" || command == "corpus") {
            bool v = false;
            json vb = verdicts_for(s, c, inv, v);
            rep["verdicts"] = vb["verdicts"];
            rep["skipped_verdicts"] = vb["skipped"];
            r.violated = v;
        }
        if (command == "flow") rep["flow"] = flow_block(s, c, r.files, r.violated);
        if (command == "surgery") rep["surgery"] = surgery_block(s, c, r.files, r.violated);
        if (wants(s, "plot")) r.files.push_back({s.id + ".curve.tsv", polyline_table(c, s.tol)});
    } catch (const Error& e) {
        r.error = e.what();
        rep["error"] = json{{"kind", to_string(e.kind())}, {"message", e.what()}, {"where", e.where()}};
    } catch (const std::exception& e) {
        r.error = e.what();
        rep["error"] = json{{"kind", "internal"}, {"message", e.what()}, {"where", json::array()}};
    }
    rep["violated"] = r.violated;
    r.report = rep;
    return r;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::SpecParseError, path + ": cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        size_t line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorKind::SpecParseError,
                    origin + " line " + std::to_string(line) + " column " + std::to_string(col) + ": malformed JSON");
    }
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::PreconditionViolated, "cannot write " + p.string());
    out << content;
}

}  // namespace

json CurveSpec::to_json() const {
    json j;
    j["id"] = id;
    j["generator"] = generator;
    j["params"] = params;
    j["n"] = n;
    if (!tolerances.empty()) j["tolerances"] = tolerances;
    j["analyses"] = analyses;
    if (!flow.empty()) j["flow"] = flow;
    if (!surgery.empty()) j["surgery"] = surgery;
    return j;
}

Tolerances parse_tolerances(const json& j, const Tolerances& base, const std::string& where) {
    Tolerances t = base;
    if (j.is_null()) return t;
    Obj o(j, where, "");
    o.allow({"schema", "eps_zero", "eps_match", "eps_hull", "eps_unit", "cluster_width", "degenerate_fraction",
             "bisect_tol", "singular_turn"});
    t.eps_zero = o.num("eps_zero", t.eps_zero);
    t.eps_match = o.num("eps_match", t.eps_match);
    t.eps_hull = o.num("eps_hull", t.eps_hull);
    t.eps_unit = o.num("eps_unit", t.eps_unit);
    t.cluster_width = o.num("cluster_width", t.cluster_width);
    t.degenerate_fraction = o.num("degenerate_fraction", t.degenerate_fraction);
    t.bisect_tol = o.num("bisect_tol", t.bisect_tol);
    t.singular_turn = o.num("singular_turn", t.singular_turn);
    try {
        t.validate();
    } catch (const Error& e) {
        fail(where, e.what());
    }
    return t;
}

std::vector<CurveSpec> parse_specs(const std::string& text, const std::string& origin, const Options& opt,
                                   const Tolerances& base) {
    json doc = parse_json_text(text, origin);
    Obj d(doc, origin, "");
    d.allow({"schema", "tolerances", "curves", "corpus"});
    std::string schema = d.str("schema");
    if (schema != kSpecSchema) fail(d.where("schema"), "unsupported schema '" + schema + "', expected " + kSpecSchema);
    json doc_tol = d.has("tolerances") ? d.at("tolerances") : json::object();
    parse_tolerances(doc_tol, base, d.where("tolerances"));
    std::string base_dir = fs::path(origin).parent_path().string();
    std::vector<CurveSpec> out;
    if (!d.has("curves") && !d.has("corpus")) fail(d.where(), "needs curves or corpus");
    if (d.has("curves")) {
        const json& cs = d.at("curves");
        if (!cs.is_array()) fail(d.where("curves"), "expected an array");
        for (size_t i = 0; i < cs.size(); ++i)
            out.push_back(parse_curve(cs[i], d, "/curves/" + std::to_string(i), opt, base, doc_tol, base_dir));
    }
    if (d.has("corpus")) {
        const json& gs = d.at("corpus");
        if (!gs.is_array()) fail(d.where("corpus"), "expected an array");
        for (size_t i = 0; i < gs.size(); ++i) {
            auto e = expand_group(gs[i], d, "/corpus/" + std::to_string(i), opt, base, doc_tol, base_dir);
            out.insert(out.end(), e.begin(), e.end());
        }
    }
    return out;
}

SampledCurve build_curve(const CurveSpec& s) { return build(s.generator, s.params, s.n, s.tol, s.base_dir).curve; }

std::vector<CurveSpec> sharp_suite(const Options& opt, const Tolerances& base) {
    json doc = {{"schema", kSpecSchema}, {"corpus", {{{"generator", "sharp_example"}}}}};
    return parse_specs(doc.dump(), "<sharp suite>", opt, base);
}

std::vector<CurveSpec> default_corpus(const Options& opt, const Tolerances& base) {
    json doc = {{"schema", kSpecSchema},
                {"corpus",
                 {{{"generator", "sharp_example"}},
                  {{"generator", "fourier"}, {"id_prefix", "bisecting"}, {"count", 50}, {"degree", 3},
                   {"constraints", {{"simple", true}, {"bisecting", true}}}},
                  {{"generator", "fourier"}, {"id_prefix", "symmetric"}, {"count", 50}, {"degree", 3},
                   {"constraints", {{"symmetric", true}}}},
                  {{"generator", "fourier"}, {"id_prefix", "hull"}, {"count", 20}, {"degree", 3},
                   {"constraints", {{"simple", true}, {"hull_interior", true}, {"z_offset", 0.2}}}},
                  {{"generator", "fourier"}, {"id_prefix", "space"}, {"count", 10}, {"degree", 3},
                   {"ambient", "space"}}}}};
    return parse_specs(doc.dump(), "<default corpus>", opt, base);
}

int run(const Options& opt, std::ostream& log, std::ostream& err) {
    static const std::set<std::string> commands{"analyze", "flow", "surgery", "corpus", "verify-all"};
    if (!commands.count(opt.command)) {
        err << "unknown command '" << opt.command << "'\n";
        return 1;
    }
    std::vector<CurveSpec> specs;
    try {
        Tolerances base;
        if (!opt.tol_file.empty())
            base = parse_tolerances(parse_json_text(read_file(opt.tol_file), opt.tol_file), Tolerances{}, opt.tol_file);
        for (const auto& f : opt.spec_files) {
            auto s = parse_specs(read_file(f), f, opt, base);
            specs.insert(specs.end(), s.begin(), s.end());
        }
        if (opt.spec_files.empty()) {
            if (opt.command == "verify-all") specs = sharp_suite(opt, base);
            else if (opt.command == "corpus") specs = default_corpus(opt, base);
            else throw Error(ErrorKind::SpecParseError, opt.command + " needs at least one spec file");
        }
        std::set<std::string> ids;
        for (const auto& s : specs)
            if (!ids.insert(s.id).second) throw Error(ErrorKind::SpecParseError, "duplicate curve id '" + s.id + "'");
    } catch (const Error& e) {
        err << e.what() << '\n';
        return 1;
    }

    std::vector<Result> results(specs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < specs.size(); i = next++) results[i] = process(specs[i], opt.command);
    };
    int jobs = std::max(1, opt.jobs);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    bool violated = false, failed = false;
    try {
        fs::path out(opt.out_dir);
        fs::create_directories(out);
        json summary = json::array();
        for (size_t i = 0; i < specs.size(); ++i) {
            const Result& r = results[i];
            write_file(out / (specs[i].id + ".report.json"), r.report.dump(2) + "\n");
            for (const auto& f : r.files) write_file(out / f.name, f.content);
            violated = violated || r.violated;
            if (!r.error.empty()) {
                failed = true;
                err << specs[i].id << ": " << r.error << '\n';
            }
            json e{{"id", specs[i].id}, {"violated", r.violated}, {"error", r.error.empty() ? json(nullptr) : json(r.error)}};
            if (r.report.contains("verdicts")) {
                json st = json::object();
                for (const auto& v : r.report["verdicts"]) st[v["id"].get<std::string>()] = v["status"];
                e["verdicts"] = st;
            }
            summary.push_back(e);
        }
        if (opt.command == "corpus") {
            json m;
            m["schema"] = kSpecSchema;
            json curves = json::array();
            for (const auto& s : specs) curves.push_back(s.to_json());
            m["curves"] = curves;
            write_file(out / "manifest.json", m.dump(2) + "\n");
        }
        if (opt.command == "verify-all" || opt.command == "corpus") {
            json sj{{"schema", kReportSchema}, {"command", opt.command}, {"version", kVersion},
                    {"curves", summary},       {"violated", violated}, {"errors", failed}};
            write_file(out / "summary.json", sj.dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 1;
    }
    log << opt.command << ": " << specs.size() << " curve(s), " << (violated ? "violation found" : "no violations")
        << (failed ? ", with errors" : "") << '\n';
    if (violated) return 2;
    return failed ? 1 : 0;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Counting inflections, singularities and double points of closed curves"};
    Options opt;
    size_t n = 0;
    uint64_t seed = 0;
    app.add_option("command", opt.command, "analyze | flow | surgery | corpus | verify-all")
        ->required()
        ->check(CLI::IsMember({"analyze", "flow", "surgery", "corpus", "verify-all"}));
    app.add_option("specs", opt.spec_files, "curve spec files (JSON)")->check(CLI::ExistingFile);
    auto* nopt = app.add_option("--n-samples", n, "override the sample count of generated curves")->check(CLI::Range(16, 1 << 22));
    app.add_option("--tol-file", opt.tol_file, "JSON file with tolerance overrides")->check(CLI::ExistingFile);
    auto* sopt = app.add_option("--seed", seed, "base seed for generated corpora and unseeded loops");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--jobs", opt.jobs, "worker threads")->check(CLI::Range(1, 256));
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (*nopt) opt.n_samples = n;
    if (*sopt) opt.seed = seed;
    return run(opt, std::cout, std::cerr);
}

}  // namespace ck::cli
