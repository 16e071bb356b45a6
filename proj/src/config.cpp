#include "femlab/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace femlab {

CoefficientSet CoefficientSpec::materialize(const Triangulation& mesh) const {
    return materialize(mesh, formulation);
}

CoefficientSet CoefficientSpec::materialize(const Triangulation& mesh, Formulation f) const {
    MatrixField A = MatrixField::constant(Mat2::Identity());
    switch (a_kind) {
        case AKind::Identity: break;
        case AKind::Diag: {
            Mat2 m = Mat2::Zero();
            m(0, 0) = a11;
            m(1, 1) = a22;
            A = MatrixField::constant(m);
            break;
        }
        case AKind::Checkerboard:
            A = checkerboard_field(mesh, cb_v1, cb_v2, cb_blocks);
            break;
    }
    VectorField b = VectorField::constant(b_const);
    ScalarField gamma = gamma_kind == GammaKind::Const
                            ? ScalarField::constant(gamma_const)
                            : ScalarField::callback([](const Vec2& x) { return 1.0 + x.x(); });
    CoefficientSet c = f == Formulation::Conservative
                           ? CoefficientSet::conservative(A, b, gamma)
                           : CoefficientSet::divergence(A, b, gamma);
    c.formulation = f;
    return c;
}

std::string to_string(CampaignKind k) {
    switch (k) {
        case CampaignKind::Stability: return "stability";
        case CampaignKind::Convergence: return "convergence";
        case CampaignKind::Lemma4: return "lemma4";
        case CampaignKind::Duality: return "duality";
        case CampaignKind::BestApprox: return "bestapprox";
    }
    return "?";
}

void Campaign::validate() const {
    if (levels < 1) throw Error("campaign '" + name + "': levels must be >= 1");
    if (base_m < 1) throw Error("campaign '" + name + "': base_m must be >= 1");
    if (space_kind == SpaceKind::BDM && degree < 1)
        throw Error("campaign '" + name + "': BDM requires degree >= 1");
    if (space_kind == SpaceKind::DG)
        throw Error("campaign '" + name + "': flux space must be RT or BDM");
    if (degree < 0 || degree > 1)
        throw Error("campaign '" + name + "': degree must be 0 or 1");
    if (u_exact != "sinsin" && u_exact != "bubble")
        throw Error("campaign '" + name + "': unknown u_exact preset '" + u_exact + "'");
    const bool needs_slopes = flux_slope.enabled || scalar_slope.enabled ||
                              best_flux_slope.enabled || osc_div_slope.enabled ||
                              osc_u_slope.enabled;
    if (needs_slopes && levels < 3)
        throw Error("campaign '" + name + "': slope assertions need at least 3 levels");
}

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw Error(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& origin, int line, const std::string& v) {
    std::size_t pos = 0;
    double d = 0;
    try {
        d = std::stod(v, &pos);
    } catch (...) {
        fail(origin, line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) fail(origin, line, "trailing characters in number '" + v + "'");
    return d;
}

long parse_int(const std::string& origin, int line, const std::string& v) {
    std::size_t pos = 0;
    long n = 0;
    try {
        n = std::stol(v, &pos);
    } catch (...) {
        fail(origin, line, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) fail(origin, line, "trailing characters in integer '" + v + "'");
    return n;
}

// value like "name(a,b,...)"; returns args, empty name check by caller
std::vector<std::string> parse_args(const std::string& v, std::string& fn) {
    const auto open = v.find('(');
    if (open == std::string::npos || v.back() != ')') {
        fn = v;
        return {};
    }
    fn = trim(v.substr(0, open));
    std::vector<std::string> args;
    std::string inner = v.substr(open + 1, v.size() - open - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) args.push_back(trim(item));
    return args;
}

SlopeWindow parse_window(const std::string& origin, int line, const std::string& v) {
    std::string fn;
    const auto args = parse_args(v, fn);
    if (!fn.empty() || args.size() != 2)
        fail(origin, line, "expected a window '(lo,hi)', got '" + v + "'");
    SlopeWindow w;
    w.enabled = true;
    w.lo = parse_double(origin, line, args[0]);
    w.hi = parse_double(origin, line, args[1]);
    return w;
}

void apply_key(Campaign& c, const std::string& origin, int line, const std::string& key,
               const std::string& value) {
    if (key == "kind") {
        if (value == "stability") c.kind = CampaignKind::Stability;
        else if (value == "convergence") c.kind = CampaignKind::Convergence;
        else if (value == "lemma4") c.kind = CampaignKind::Lemma4;
        else if (value == "duality") c.kind = CampaignKind::Duality;
        else if (value == "bestapprox") c.kind = CampaignKind::BestApprox;
        else fail(origin, line, "unknown campaign kind '" + value + "'");
    } else if (key == "space") {
        if (value == "rt0") { c.space_kind = SpaceKind::RT; c.degree = 0; }
        else if (value == "rt1") { c.space_kind = SpaceKind::RT; c.degree = 1; }
        else if (value == "bdm1") { c.space_kind = SpaceKind::BDM; c.degree = 1; }
        else fail(origin, line, "unknown space '" + value + "' (rt0|rt1|bdm1)");
    } else if (key == "base_m") {
        c.base_m = static_cast<int>(parse_int(origin, line, value));
    } else if (key == "levels") {
        c.levels = static_cast<int>(parse_int(origin, line, value));
    } else if (key == "A") {
        std::string fn;
        const auto args = parse_args(value, fn);
        if (fn == "identity" && args.empty()) {
            c.coeffs.a_kind = CoefficientSpec::AKind::Identity;
        } else if (fn == "diag" && args.size() == 2) {
            c.coeffs.a_kind = CoefficientSpec::AKind::Diag;
            c.coeffs.a11 = parse_double(origin, line, args[0]);
            c.coeffs.a22 = parse_double(origin, line, args[1]);
        } else if (fn == "checkerboard" && args.size() == 3) {
            c.coeffs.a_kind = CoefficientSpec::AKind::Checkerboard;
            c.coeffs.cb_v1 = parse_double(origin, line, args[0]);
            c.coeffs.cb_v2 = parse_double(origin, line, args[1]);
            c.coeffs.cb_blocks = static_cast<int>(parse_int(origin, line, args[2]));
        } else {
            fail(origin, line, "A must be identity, diag(a11,a22) or checkerboard(v1,v2,blocks)");
        }
    } else if (key == "b") {
        if (value == "zero") {
            c.coeffs.b_const = Vec2::Zero();
        } else {
            std::string fn;
            const auto args = parse_args(value, fn);
            if (!fn.empty() || args.size() != 2)
                fail(origin, line, "b must be zero or a pair (bx,by)");
            c.coeffs.b_const =
                Vec2(parse_double(origin, line, args[0]), parse_double(origin, line, args[1]));
        }
    } else if (key == "gamma") {
        if (value == "lipschitz_preset") {
            c.coeffs.gamma_kind = CoefficientSpec::GammaKind::Lipschitz;
        } else {
            std::string fn;
            const auto args = parse_args(value, fn);
            if (fn != "const" || args.size() != 1)
                fail(origin, line, "gamma must be const(c) or lipschitz_preset");
            c.coeffs.gamma_kind = CoefficientSpec::GammaKind::Const;
            c.coeffs.gamma_const = parse_double(origin, line, args[0]);
        }
    } else if (key == "formulation") {
        if (value == "conservative") c.coeffs.formulation = Formulation::Conservative;
        else if (value == "divergence") c.coeffs.formulation = Formulation::Divergence;
        else fail(origin, line, "formulation must be conservative or divergence");
    } else if (key == "u_exact") {
        c.u_exact = value;
    } else if (key == "output") {
        c.output = value;
    } else if (key == "seed") {
        c.seed = static_cast<std::uint64_t>(parse_int(origin, line, value));
    } else if (key == "samples") {
        c.samples = static_cast<int>(parse_int(origin, line, value));
    } else if (key == "stability_tol") {
        c.stability_tol = parse_double(origin, line, value);
    } else if (key == "assert_flux_slope") {
        c.flux_slope = parse_window(origin, line, value);
    } else if (key == "assert_scalar_slope") {
        c.scalar_slope = parse_window(origin, line, value);
    } else if (key == "assert_best_flux_slope") {
        c.best_flux_slope = parse_window(origin, line, value);
    } else if (key == "assert_osc_div_slope") {
        c.osc_div_slope = parse_window(origin, line, value);
    } else if (key == "assert_osc_u_slope") {
        c.osc_u_slope = parse_window(origin, line, value);
    } else {
        fail(origin, line, "unknown key '" + key + "'");
    }
}

}  // namespace

Config parse_config_text(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool in_section = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (const auto hash = s.find('#'); hash != std::string::npos) s = trim(s.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(origin, line, "unterminated section header");
            const std::string name = trim(s.substr(1, s.size() - 2));
            if (name.empty()) fail(origin, line, "empty section name");
            Campaign c;
            c.name = name;
            cfg.campaigns.push_back(std::move(c));
            in_section = true;
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
        if (!in_section) fail(origin, line, "key outside of a [campaign] section");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty()) fail(origin, line, "expected 'key = value'");
        apply_key(cfg.campaigns.back(), origin, line, key, value);
    }
    if (cfg.campaigns.empty()) throw Error(origin + ": no campaign sections found");
    for (const Campaign& c : cfg.campaigns) c.validate();
    return cfg;
}

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace femlab
