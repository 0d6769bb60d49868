#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace fatou::cli {

std::string number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string number(const Real& x) { return to_decimal(x); }

std::string number(const Complex& z) {
    if (z.imag() == 0) return to_decimal(z.real());
    return to_decimal(z);
}

std::string number(const G& z) { return z.str(); }

std::string point(const SpherePoint& p) {
    if (p.is_infinity()) return "inf";
    if (p.exact) return p.exact->str();
    return number(p.value());
}

Json points(const std::vector<SpherePoint>& ps) {
    Json a = Json::array();
    for (const auto& p : ps) a.push_back(point(p));
    return a;
}

Json qd(const RationalQD& q) {
    Json j;
    j["exact"] = q.is_exact();
    Json num = Json::array(), den = Json::array();
    if (q.is_exact()) {
        for (const auto& c : q.exact_num().coeffs()) num.push_back(number(c));
        for (const auto& c : q.exact_den().coeffs()) den.push_back(number(c));
        j["expression"] = "(" + print_poly(q.exact_num()) + ")/(" + print_poly(q.exact_den()) + ")";
    } else {
        for (const auto& c : q.num().coeffs()) num.push_back(number(c));
        for (const auto& c : q.den().coeffs()) den.push_back(number(c));
    }
    j["num"] = num;
    j["den"] = den;
    return j;
}

Json map(const RationalMap& f) {
    Json j;
    j["expression"] = print_map(f);
    j["degree"] = f.degree();
    j["mode"] = f.is_exact() ? "exact" : "float";
    return j;
}

Json tolerances(const Tolerances& t) {
    Json j;
    j["k_root"] = t.k_root;
    j["degree_cap"] = t.degree_cap;
    j["eps_rank"] = number(t.eps_rank);
    j["eps_cluster"] = number(t.eps_cluster);
    j["eps_orbit"] = number(t.eps_orbit);
    j["eps_super"] = number(t.eps_super);
    j["eps_ind"] = number(t.eps_ind);
    j["eps_unity"] = number(t.eps_unity);
    j["eps_beta"] = number(t.eps_beta);
    j["eps_push"] = number(t.eps_push);
    j["eps_series"] = number(t.eps_series);
    j["eps_coprime"] = number(t.eps_coprime);
    return j;
}

Json parabolic(const ParabolicData& d) {
    Json j;
    j["n"] = d.n;
    j["N"] = d.N;
    j["nu"] = d.nu;
    j["iota"] = d.iota_exact ? number(*d.iota_exact) : number(d.iota);
    j["beta"] = d.beta_exact ? number(*d.beta_exact) : number(d.beta);
    j["exact"] = d.beta_exact.has_value();
    j["subtype"] = std::string(to_string(d.subtype));
    j["within_tolerance"] = d.within_tolerance;
    j["truncation_order"] = d.truncation_order;
    return j;
}

Json cycle(const Cycle& c) {
    Json j;
    j["period"] = c.period;
    j["points"] = points(c.points);
    j["multiplier"] = c.multiplier_exact ? number(*c.multiplier_exact) : number(c.multiplier);
    j["abs_multiplier"] = number(Real(abs(c.multiplier)));
    j["class"] = std::string(to_string(c.cls));
    if (c.cls == CycleClass::Parabolic) j["rotation_order"] = c.rotation_order;
    if (c.gamma) j["gamma"] = *c.gamma;
    if (c.parabolic) j["parabolic"] = parabolic(*c.parabolic);
    if (!c.annotation.empty()) j["annotation"] = c.annotation;
    return j;
}

Json gamma(const GammaReport& g) {
    Json j;
    j["period_max"] = g.pmax;
    j["gamma_partial"] = g.gamma_partial;
    j["lower_bound"] = true;
    Json cs = Json::array();
    for (const auto& c : g.cycles) cs.push_back(cycle(c));
    j["cycles"] = cs;
    return j;
}

Json delta(const DeltaReport& d) {
    Json j;
    j["delta"] = d.count;
    j["iter_cap"] = d.iter_cap;
    Json os = Json::array();
    for (std::size_t i = 0; i < d.orbits.size(); ++i) {
        const auto& o = d.orbits[i];
        Json e;
        e["index"] = i;
        e["critical_value"] = point(o.value);
        e["fate"] = std::string(to_string(o.fate));
        e["steps"] = o.steps;
        if (o.fate == OrbitFate::Periodic || o.fate == OrbitFate::Preperiodic) {
            e["cycle_entry"] = o.cycle_entry;
            e["cycle_length"] = o.cycle_length;
        }
        if (o.fate == OrbitFate::Merged) {
            e["merged_into"] = o.merged_into;
            e["merge_step"] = o.merge_step;
            e["merge_target_step"] = o.merge_target_step;
        }
        if (o.fate != OrbitFate::InfiniteTail) e["exact"] = o.exact;
        if (o.heuristic) e["note"] = "heuristic at cap T";
        if (o.converging) e["note"] = "converges to a cycle without landing";
        os.push_back(e);
    }
    j["orbits"] = os;
    return j;
}

Json fs(const FSReport& r) {
    Json j;
    j["period_max"] = r.pmax;
    j["iter_cap"] = r.iter_cap;
    j["gamma_partial"] = r.gamma.gamma_partial;
    j["gamma_is_lower_bound"] = true;
    j["delta"] = r.delta.count;
    j["verdict"] = r.pass ? "PASS" : "FAIL";
    j["equality"] = r.gamma.gamma_partial == r.delta.count;
    j["classical_count"] = r.classical_count;
    j["classical_bound"] = r.classical_bound;
    j["classical_verdict"] = r.classical_pass ? "PASS" : "FAIL";
    j["cycles"] = gamma(r.gamma)["cycles"];
    j["critical_orbits"] = delta(r.delta)["orbits"];
    if (r.dimension) {
        Json d;
        d["points"] = points(r.dimension->points);
        d["flat_dimension"] = r.dimension->flat_dimension;
        d["new_points"] = r.dimension->new_points;
        d["injective"] = r.dimension->injective;
        d["sigma_ratio"] = number(r.dimension->sigma_ratio);
        if (!r.dimension->failure.empty()) d["failure"] = r.dimension->failure;
        j["dimension_check"] = d;
    }
    return j;
}

Json integral(const IntegralValue& v) {
    Json j;
    j["value"] = number(v.value);
    j["error"] = number(v.error);
    j["evaluations"] = v.evaluations;
    return j;
}

Json residue(const ResidueReport& r) {
    Json j;
    j["cycle"] = cycle(r.cycle);
    Json polar = Json::array();
    for (const auto& c : r.polar) polar.push_back(number(c));
    j["polar_part"] = polar;
    j["coefficient"] = number(r.coefficient);
    j["closed_form"] = number(r.closed_form);
    Json steps = Json::array();
    for (std::size_t k = 0; k < r.radii.size(); ++k)
        steps.push_back(Json{{"radius", number(r.radii[k])}, {"flux", number(r.flux[k])}});
    j["schedule"] = steps;
    j["limit"] = number(r.limit);
    j["exponent"] = number(r.exponent);
    j["gap"] = number(r.gap);
    j["extrapolation"] = r.extrapolation;
    return j;
}

Json balance(const BalanceReport& r) {
    Json j;
    j["dec"] = integral(r.dec);
    j["nabla_norm"] = integral(r.nabla);
    j["res_total"] = number(r.res_total);
    j["slack"] = number(r.slack);
    Json cs = Json::array();
    for (const auto& c : r.cycles) {
        Json e;
        e["cycle"] = cycle(c.cycle);
        e["coefficient"] = number(c.coefficient);
        e["residue"] = number(c.residue);
        cs.push_back(e);
    }
    j["divergent_cycles"] = cs;
    return j;
}

Json lattes(const LattesVerdict& v) {
    Json j;
    j["verdict"] = v.lattes ? "Lattes" : "NotLattes";
    if (v.witness) j["witness"] = qd(*v.witness);
    if (!v.pole_set.empty()) j["pole_set"] = points(v.pole_set);
    j["evidence"] = v.evidence;
    return j;
}

Json nabla(const OperatorMatrix& op) {
    Json j;
    j["domain_points"] = points(op.domain.points);
    j["codomain_points"] = points(op.codomain.points);
    j["domain_dimension"] = op.domain.dimension();
    j["codomain_dimension"] = op.codomain.dimension();
    Json sv = Json::array();
    for (double s : op.singular_values) sv.push_back(number(s));
    j["singular_values"] = sv;
    j["rank"] = op.rank;
    j["injective"] = op.injective;
    j["sigma_ratio"] = number(op.sigma_ratio);
    j["solve_residual"] = number(op.solve_residual);
    if (!op.added_critical_values.empty()) j["added_critical_values"] = points(op.added_critical_values);
    if (!op.warnings.empty()) j["warnings"] = op.warnings;
    return j;
}

namespace {

std::string scalar_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "-";
    return v.dump();
}

bool is_scalar_array(const Json& v) {
    return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_primitive(); });
}

void render(std::ostringstream& out, const std::string& prefix, const Json& v);

void render_rows(std::ostringstream& out, const std::string& name, const Json& rows) {
    std::vector<std::string> cols;
    for (const auto& r : rows)
        for (auto it = r.begin(); it != r.end(); ++it)
            if ((it->is_primitive() || is_scalar_array(*it)) && std::find(cols.begin(), cols.end(), it.key()) == cols.end())
                cols.push_back(it.key());
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width;
    for (const auto& c : cols) width.push_back(c.size());
    for (const auto& r : rows) {
        std::vector<std::string> line;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            std::string s = "-";
            if (r.contains(cols[k])) {
                const Json& v = r[cols[k]];
                if (v.is_array()) {
                    s.clear();
                    for (const auto& e : v) s += (s.empty() ? "" : ", ") + scalar_text(e);
                } else {
                    s = scalar_text(v);
                }
            }
            width[k] = std::max(width[k], s.size());
            line.push_back(s);
        }
        cells.push_back(line);
    }
    out << name << ":\n";
    auto row = [&](const std::vector<std::string>& line) {
        out << " ";
        for (std::size_t k = 0; k < line.size(); ++k) out << " " << line[k] << std::string(width[k] - line[k].size(), ' ');
        out << "\n";
    };
    row(cols);
    for (const auto& line : cells) row(line);
    // Nested objects inside rows are listed after the table.
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (auto it = rows[i].begin(); it != rows[i].end(); ++it)
            if (!it->is_primitive() && !is_scalar_array(*it))
                render(out, name + "[" + std::to_string(i) + "]." + it.key(), *it);
}

void render(std::ostringstream& out, const std::string& prefix, const Json& v) {
    if (v.is_object()) {
        for (auto it = v.begin(); it != v.end(); ++it)
            render(out, prefix.empty() ? it.key() : prefix + "." + it.key(), *it);
    } else if (is_scalar_array(v)) {
        std::string s;
        for (const auto& e : v) s += (s.empty() ? "" : ", ") + scalar_text(e);
        out << prefix << ": " << s << "\n";
    } else if (v.is_array()) {
        if (std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_object(); })) {
            render_rows(out, prefix, v);
        } else {
            for (std::size_t i = 0; i < v.size(); ++i) render(out, prefix + "[" + std::to_string(i) + "]", v[i]);
        }
    } else {
        out << prefix << ": " << scalar_text(v) << "\n";
    }
}

}  // namespace

std::string table(const Json& report) {
    std::ostringstream out;
    render(out, "", report);
    return out.str();
}

}  // namespace fatou::cli
