#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diraclab/error.hpp"
#include "diraclab/interp.hpp"
#include "diraclab/quadrature.hpp"

namespace diraclab {

using Vec2 = std::array<double, 2>;

inline double norm2(const Vec2& v) { return std::hypot(v[0], v[1]); }

// ---------------------------------------------------------------------------
// Radial electromagnetic field family.
//
// PowerLaw:  V(r) = V0 r^t,  B(r) = B0 r^s.
// Tabulated: v(r), B(r) sampled on a mesh starting at r=0, interpolated with
//            a monotone cubic so B stays positive between samples.
// The energy shift E replaces the potential by v(r) - E everywhere.
// ---------------------------------------------------------------------------

enum class FieldKind { PowerLaw, Tabulated };

struct RadialTable {
    std::vector<double> r;
    std::vector<double> v;
    std::vector<double> B;
};

struct RadialFieldSpec {
    FieldKind kind = FieldKind::PowerLaw;
    double V0 = 1.0;
    double B0 = 1.0;
    double t = 0.0;
    double s = 0.0;
    double E = 0.0;
    std::optional<RadialTable> table;

    static RadialFieldSpec power_law(double V0, double B0, double t, double s, double E = 0.0) {
        RadialFieldSpec spec;
        spec.kind = FieldKind::PowerLaw;
        spec.V0 = V0;
        spec.B0 = B0;
        spec.t = t;
        spec.s = s;
        spec.E = E;
        return spec;
    }

    static RadialFieldSpec tabulated(RadialTable table, double E = 0.0) {
        RadialFieldSpec spec;
        spec.kind = FieldKind::Tabulated;
        spec.table = std::move(table);
        spec.E = E;
        return spec;
    }
};

inline void validate(const RadialFieldSpec& spec) {
    if (spec.kind == FieldKind::PowerLaw) {
        require(spec.V0 > 0.0, "E_SPEC_V0_NONPOSITIVE", "power-law potential needs V0 > 0");
        require(spec.B0 > 0.0, "E_SPEC_B0_NONPOSITIVE", "power-law field needs B0 > 0");
        require(spec.t >= 0.0 && spec.s >= 0.0, "E_SPEC_EXPONENT_NEGATIVE",
                "exponents t, s must be >= 0");
        require(std::isfinite(spec.E), "E_SPEC_SHIFT", "energy shift must be finite");
        return;
    }
    require(spec.table.has_value(), "E_SPEC_TABLE_MISSING", "tabulated spec needs a table");
    const RadialTable& tab = *spec.table;
    require(tab.r.size() >= 2, "E_SPEC_TABLE_SHORT", "tabulated mesh needs >= 2 points");
    require(tab.v.size() == tab.r.size() && tab.B.size() == tab.r.size(),
            "E_SPEC_TABLE_MISMATCH", "table arrays r, v, B must have equal length");
    require(tab.r.front() == 0.0, "E_SPEC_TABLE_ORIGIN", "tabulated mesh must start at r = 0");
    for (std::size_t i = 0; i + 1 < tab.r.size(); ++i)
        require(tab.r[i + 1] > tab.r[i], "E_SPEC_TABLE_NONMONOTONE",
                "tabulated mesh must be strictly increasing");
    for (double b : tab.B)
        require(b > 0.0, "E_SPEC_TABLE_B_NONPOSITIVE", "tabulated B must be positive on its mesh");
}

// ---------------------------------------------------------------------------
// Runtime view: closed forms for power laws, interpolation plus cumulative
// integral tables for tabulated data. All evaluations are pure; a built view
// is immutable and safe to share across threads.
// ---------------------------------------------------------------------------

class RadialFieldView {
public:
    std::function<double(double)> B;    // magnetic field B(r)
    std::function<double(double)> v;    // shifted electric potential v(r) - E
    std::function<double(double)> dv;   // derivative of the shifted potential
    std::function<double(double)> A;    // (1/r) \int_0^r B(s) s ds
    std::function<double(double)> phi;  // \int_0^r A(u) du
    double B_lower = 0.0;               // infimum of B on the working range
    double r_max = std::numeric_limits<double>::infinity();
};

namespace detail {

struct TabulatedEngine {
    PchipCurve Bc, vc;
    std::vector<double> cumBs;   // \int_0^{r_k} B(s) s ds
    std::vector<double> cumA;    // \int_0^{r_k} A(u) du
    double Bmin = 0.0;

    explicit TabulatedEngine(const RadialTable& tab)
        : Bc(tab.r, tab.B), vc(tab.r, tab.v) {
        const std::vector<double>& r = Bc.knots();
        const std::size_t n = r.size();
        cumBs.assign(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            cumBs[k + 1] = cumBs[k] +
                integrate_gauss([this](double s) { return Bc(s) * s; }, r[k], r[k + 1], 8);
        }
        cumA.assign(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            cumA[k + 1] = cumA[k] +
                integrate_gauss([this](double u) { return A(u); }, r[k], r[k + 1], 16);
        }
        Bmin = *std::min_element(tab.B.begin(), tab.B.end());
    }

    std::size_t cell(double x) const {
        const std::vector<double>& r = Bc.knots();
        require(x >= 0.0, "E_DOMAIN_NEGATIVE_R", "radius must be >= 0");
        require(x <= r.back() * (1.0 + 1e-12), "E_TABLE_RANGE",
                "radius beyond the tabulated mesh");
        auto it = std::upper_bound(r.begin(), r.end(), x);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - r.begin() - 1, 0));
        return std::min(i, r.size() - 2);
    }

    double moment(double x) const {  // \int_0^x B(s) s ds
        const std::size_t i = cell(x);
        return cumBs[i] +
               integrate_gauss([this](double s) { return Bc(s) * s; }, Bc.knots()[i], x, 8);
    }

    double A(double x) const {
        if (x <= 0.0) return 0.0;
        const double tiny = 1e-9 * Bc.knots().back();
        if (x < tiny) return 0.5 * Bc(0.0) * x;
        return moment(x) / x;
    }

    double phi(double x) const {
        const std::size_t i = cell(x);
        return cumA[i] +
               integrate_gauss([this](double u) { return A(u); }, Bc.knots()[i], x, 16);
    }
};

} // namespace detail

inline RadialFieldView make_view(const RadialFieldSpec& spec) {
    validate(spec);
    RadialFieldView view;
    if (spec.kind == FieldKind::PowerLaw) {
        const double V0 = spec.V0, B0 = spec.B0, t = spec.t, s = spec.s, E = spec.E;
        view.B = [B0, s](double r) { return B0 * std::pow(r, s); };
        view.v = [V0, t, E](double r) { return V0 * std::pow(r, t) - E; };
        view.dv = [V0, t](double r) { return t == 0.0 ? 0.0 : V0 * t * std::pow(r, t - 1.0); };
        view.A = [B0, s](double r) { return B0 * std::pow(r, s + 1.0) / (s + 2.0); };
        view.phi = [B0, s](double r) {
            return B0 * std::pow(r, s + 2.0) / ((s + 2.0) * (s + 2.0));
        };
        view.B_lower = (s == 0.0) ? B0 : 0.0;
        return view;
    }
    auto eng = std::make_shared<detail::TabulatedEngine>(*spec.table);
    const double E = spec.E;
    view.B = [eng](double r) { return eng->Bc(r); };
    view.v = [eng, E](double r) { return eng->vc(r) - E; };
    view.dv = [eng](double r) { return eng->vc.derivative(r); };
    view.A = [eng](double r) { return eng->A(r); };
    view.phi = [eng](double r) { return eng->phi(r); };
    view.B_lower = eng->Bmin;
    view.r_max = eng->Bc.knots().back();
    return view;
}

inline double eval_radial_A(const RadialFieldSpec& spec, double r) {
    require(r >= 0.0, "E_DOMAIN_NEGATIVE_R", "radius must be >= 0");
    return make_view(spec).A(r);
}

inline double eval_flux_phi(const RadialFieldSpec& spec, double r) {
    require(r >= 0.0, "E_DOMAIN_NEGATIVE_R", "radius must be >= 0");
    return make_view(spec).phi(r);
}

// ---------------------------------------------------------------------------
// Planar lift through the rotational gauge A(x) = A(r)/r (-x2, x1).
// ---------------------------------------------------------------------------

struct Field2DSpec {
    std::function<double(Vec2)> B;
    std::function<double(Vec2)> V;
    std::function<Vec2(Vec2)> gradV;
    std::function<Vec2(Vec2)> gradB;
    std::function<Vec2(Vec2)> A;
    RadialFieldView radial;
};

inline Field2DSpec lift_to_2d(const RadialFieldSpec& spec) {
    RadialFieldView view = make_view(spec);
    Field2DSpec out;
    out.radial = view;
    out.B = [view](Vec2 x) { return view.B(norm2(x)); };
    out.V = [view](Vec2 x) { return view.v(norm2(x)); };
    out.A = [view](Vec2 x) {
        const double r = norm2(x);
        if (r == 0.0) return Vec2{0.0, 0.0};
        const double f = view.A(r) / r;
        return Vec2{-f * x[1], f * x[0]};
    };
    if (spec.kind == FieldKind::PowerLaw) {
        const double V0 = spec.V0, B0 = spec.B0, t = spec.t, s = spec.s;
        out.gradV = [V0, t](Vec2 x) {
            const double r = norm2(x);
            if (r == 0.0 || t == 0.0) return Vec2{0.0, 0.0};
            const double f = V0 * t * std::pow(r, t - 2.0);
            return Vec2{f * x[0], f * x[1]};
        };
        out.gradB = [B0, s](Vec2 x) {
            const double r = norm2(x);
            if (r == 0.0 || s == 0.0) return Vec2{0.0, 0.0};
            const double f = B0 * s * std::pow(r, s - 2.0);
            return Vec2{f * x[0], f * x[1]};
        };
    } else {
        out.gradV = [view](Vec2 x) {
            const double r = norm2(x);
            if (r == 0.0) return Vec2{0.0, 0.0};
            const double f = view.dv(r) / r;
            return Vec2{f * x[0], f * x[1]};
        };
        RadialFieldView v2 = view;
        out.gradB = [v2](Vec2 x) {
            const double r = norm2(x);
            if (r == 0.0) return Vec2{0.0, 0.0};
            const double h = 1e-6 * (1.0 + r);
            const double db = (v2.B(std::min(r + h, v2.r_max)) - v2.B(std::max(r - h, 0.0))) /
                              (std::min(r + h, v2.r_max) - std::max(r - h, 0.0));
            return Vec2{db * x[0] / r, db * x[1] / r};
        };
    }
    return out;
}

// Central-difference curl check for a lifted field: returns the max of
// |curl A - B| / (1 + |B|) over the sample points.
inline double max_curl_mismatch(const Field2DSpec& f, const std::vector<Vec2>& points,
                                double step_scale = 1e-4) {
    double worst = 0.0;
    for (const Vec2& p : points) {
        const double h = step_scale * (1.0 + norm2(p));
        const Vec2 xp{p[0] + h, p[1]}, xm{p[0] - h, p[1]};
        const Vec2 yp{p[0], p[1] + h}, ym{p[0], p[1] - h};
        const double curl =
            (f.A(xp)[1] - f.A(xm)[1]) / (2 * h) - (f.A(yp)[0] - f.A(ym)[0]) / (2 * h);
        const double b = f.B(p);
        worst = std::max(worst, std::abs(curl - b) / (1.0 + std::abs(b)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// JSON serialization: {kind, V0, B0, t, s, E, table?}
// ---------------------------------------------------------------------------

inline RadialFieldSpec spec_from_json(const nlohmann::json& j) {
    RadialFieldSpec spec;
    require(j.is_object() && j.contains("kind"), "E_SPEC_PARSE", "spec must be an object with 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "PowerLaw") {
        spec.kind = FieldKind::PowerLaw;
        require(j.contains("V0") && j.contains("B0"), "E_SPEC_PARSE",
                "power-law spec needs V0 and B0");
        spec.V0 = j.at("V0").get<double>();
        spec.B0 = j.at("B0").get<double>();
        spec.t = j.value("t", 0.0);
        spec.s = j.value("s", 0.0);
    } else if (kind == "Tabulated") {
        spec.kind = FieldKind::Tabulated;
        require(j.contains("table"), "E_SPEC_PARSE", "tabulated spec needs 'table'");
        RadialTable tab;
        tab.r = j.at("table").at("r").get<std::vector<double>>();
        tab.v = j.at("table").at("v").get<std::vector<double>>();
        tab.B = j.at("table").at("B").get<std::vector<double>>();
        spec.table = std::move(tab);
    } else {
        fail("E_SPEC_PARSE", "kind must be 'PowerLaw' or 'Tabulated'");
    }
    spec.E = j.value("E", 0.0);
    validate(spec);
    return spec;
}

inline nlohmann::json spec_to_json(const RadialFieldSpec& spec) {
    nlohmann::json j;
    j["kind"] = spec.kind == FieldKind::PowerLaw ? "PowerLaw" : "Tabulated";
    if (spec.kind == FieldKind::PowerLaw) {
        j["V0"] = spec.V0;
        j["B0"] = spec.B0;
        j["t"] = spec.t;
        j["s"] = spec.s;
    } else {
        j["table"] = {{"r", spec.table->r}, {"v", spec.table->v}, {"B", spec.table->B}};
    }
    j["E"] = spec.E;
    return j;
}

} // namespace diraclab
