#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "constitutive.hpp"
#include "integrator.hpp"
#include "params.hpp"

namespace ischemic {

inline std::string format_double(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string run_csv_header()
{
    std::string h = "t,R,Q,Rdot,dt";
    for (FieldId id : all_fields()) {
        const std::string n = field_name(id);
        h += ",min_" + n + ",max_" + n + ",I_" + n;
    }
    return h;
}

inline std::string run_csv_row(const StepReport& r)
{
    std::string row = format_double(r.t) + "," + format_double(r.R) + "," +
                      format_double(r.Q) + "," + format_double(r.Rdot) + "," +
                      format_double(r.dt);
    for (int k = 0; k < kNumFields; ++k) {
        row += "," + format_double(r.field_min[k]);
        row += "," + format_double(r.field_max[k]);
        row += "," + format_double(r.field_integral[k]);
    }
    return row;
}

inline void write_run_csv(const std::string& path, const std::vector<StepReport>& series)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << run_csv_header() << "\n";
    for (const auto& r : series) out << run_csv_row(r) << "\n";
}

inline std::vector<StepReport> read_run_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != run_csv_header())
        throw std::runtime_error("unexpected CSV header in " + path);
    std::vector<StepReport> series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != 5 + 3 * kNumFields)
            throw std::runtime_error("bad CSV row in " + path);
        StepReport r;
        r.t = vals[0];
        r.R = vals[1];
        r.Q = vals[2];
        r.Rdot = vals[3];
        r.dt = vals[4];
        for (int k = 0; k < kNumFields; ++k) {
            r.field_min[k] = vals[5 + 3 * k];
            r.field_max[k] = vals[6 + 3 * k];
            r.field_integral[k] = vals[7 + 3 * k];
        }
        series.push_back(r);
    }
    return series;
}

inline nlohmann::json outcome_to_json(const Outcome& o)
{
    nlohmann::json j;
    j["kind"] = o.name();
    if (o.kind == Outcome::Kind::Healed) j["t_heal"] = o.t_heal;
    if (o.kind == Outcome::Kind::Stalled) {
        j["R_inf"] = o.R_inf;
        j["t_stall"] = o.t_stall;
    }
    return j;
}

/// Full provenance record for a run: resolved parameters, which kinetic
/// terms and rate constants are reconstructed defaults, scheme identity,
/// and the tolerance budget.
inline nlohmann::json run_metadata(const Parameters& prm, const Outcome& outcome)
{
    nlohmann::json j;
    j["params"] = params_to_json(prm);
    j["outcome"] = outcome_to_json(outcome);
    nlohmann::json recon = nlohmann::json::object();
    const auto origin = kinetics_provenance();
    for (FieldId id : all_fields())
        recon[field_name(id)] =
            origin[static_cast<int>(id)] == KineticOrigin::Attested
                ? "attested"
                : "reconstructed_default";
    j["kinetics_provenance"] = recon;
    j["reconstructed_rate_keys"] = reconstructed_rate_keys();
    j["scheme"] = {
        {"space", "finite-volume, uniform xi cells, upwind advection/taxis, central diffusion"},
        {"time", "IMEX: implicit diffusion (backward Euler), explicit transport and kinetics"},
        {"velocity", "closed-form pressure-integral representation"},
        {"cells", prm.N},
        {"dt_policy", "CFL-limited, audit-and-retry halving"},
    };
    j["tolerance_budget"] = {
        {"decay_tol", prm.decay_tol},
        {"asymptotics_tol", prm.asymptotics_tol},
        {"sandwich_slack", prm.sandwich_slack},
    };
    return j;
}

/// Minimal self-contained SVG polyline of R(t).
inline void write_radius_svg(const std::string& path, const std::vector<StepReport>& series)
{
    const double W = 640, H = 420, pad = 50;
    double t_max = 1e-12, R_max = 1e-12;
    for (const auto& r : series) {
        t_max = std::max(t_max, r.t);
        R_max = std::max(R_max, r.R);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
        << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad
        << "\" y2=\"" << H - pad << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\""
        << H - pad << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-size=\"13\">t</text>\n";
    out << "<text x=\"12\" y=\"" << H / 2 << "\" font-size=\"13\">R</text>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : series) {
        const double x = pad + (W - 2 * pad) * r.t / t_max;
        const double y = H - pad - (H - 2 * pad) * r.R / R_max;
        out << x << "," << y << " ";
    }
    out << "\"/>\n</svg>\n";
}

} // namespace ischemic
