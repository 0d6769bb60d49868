#include "fatoulab/fscount.hpp"

#include <algorithm>

namespace fatou {

std::string_view to_string(OrbitFate f) {
    switch (f) {
    case OrbitFate::Periodic: return "periodic";
    case OrbitFate::Preperiodic: return "preperiodic";
    case OrbitFate::Merged: return "merged";
    case OrbitFate::InfiniteTail: return "infinite-tail";
    }
    return "?";
}

namespace {

void add_point(std::vector<SpherePoint>& set, const SpherePoint& p, double eps) {
    for (const auto& q : set)
        if (same_point(q, p, eps)) return;
    set.push_back(p);
}

SpherePoint lifted(const SpherePoint& p, const std::vector<SpherePoint>& candidates) {
    if (p.exact) return SpherePoint::affine(p.exact->to_complex());
    if (p.is_infinity()) return SpherePoint::infinity();
    const SpherePoint* best = &candidates.front();
    for (const auto& c : candidates)
        if (chordal_distance(c, p) < chordal_distance(*best, p)) best = &c;
    return SpherePoint{best->z0, best->z1, std::nullopt, false};
}

// Recomputes both orbits from their critical values at 2p and 4p bits: an
// orbit relation stays at the rounding level, convergence has a true distance.
bool relation_persists(const RationalMap& f, const SpherePoint& a, int sa, const SpherePoint& b, int sb,
                       const Tolerances& tol) {
    if (!f.has_exact_coefficients()) return true;
    for (unsigned bits : {2 * tol.bits, 4 * tol.bits}) {
        PrecisionScope scope(bits);
        const Tolerances t = Tolerances::for_bits(bits);
        const RationalMap g = f.at_current_precision().to_float();
        const auto values = critical_values(g, t);
        auto walk = [&](const SpherePoint& start, int steps) {
            SpherePoint x = lifted(start, values);
            for (int k = 0; k < steps; ++k) x = g(x);
            return x;
        };
        if (chordal_distance(walk(a, sa), walk(b, sb)) > ldexp(Real(1), -static_cast<int>(3 * bits / 4))) return false;
    }
    return true;
}

}  // namespace

DeltaReport delta(const RationalMap& f, int iter_cap, const Tolerances& tol) {
    if (f.degree() < 2) throw Error(ErrorKind::DegreeTooSmall, "delta needs degree at least 2");
    // Float coincidences count only at the rounding level and only when they
    // survive recomputation at higher precision; an orbit converging to a
    // cycle passes eps_orbit long before that.
    const double eps_land = tol.eps_cluster * tol.eps_cluster * tol.eps_cluster;
    auto confirm = [&](const std::vector<OrbitRecord>& recs, int o1, int s1, int o2, int s2) {
        const auto& a = recs[static_cast<std::size_t>(o1)];
        const auto& b = recs[static_cast<std::size_t>(o2)];
        return chordal_distance(a.points[static_cast<std::size_t>(s1)], b.points[static_cast<std::size_t>(s2)]) <=
                   eps_land &&
               relation_persists(f, a.points.front(), s1, b.points.front(), s2, tol);
    };
    const auto records = postcritical_prefix(f, iter_cap, tol, confirm);

    DeltaReport out;
    out.iter_cap = iter_cap;
    for (const auto& rec : records) {
        CriticalOrbit o;
        o.value = rec.points.front();
        o.prefix = rec.points;
        o.steps = static_cast<int>(rec.points.size()) - 1;
        if (rec.revisit_step >= 0) {
            o.fate = rec.revisit_target == 0 ? OrbitFate::Periodic : OrbitFate::Preperiodic;
            o.cycle_entry = rec.revisit_target;
            o.cycle_length = rec.revisit_step - rec.revisit_target;
            o.exact = rec.points.back().is_exact();
        } else if (rec.merge_orbit >= 0) {
            o.fate = OrbitFate::Merged;
            o.merged_into = rec.merge_orbit;
            o.merge_step = rec.merge_step;
            o.merge_target_step = rec.merge_target_step;
            o.exact = rec.points.back().is_exact();
        } else {
            o.converging = rec.converging;
            o.heuristic = !rec.converging;
        }
        if (o.fate == OrbitFate::InfiniteTail) ++out.count;
        out.orbits.push_back(std::move(o));
    }
    const int bound = 2 * f.degree() - 2;
    if (out.count > bound)
        throw Error(ErrorKind::VerificationFailed,
                    std::to_string(out.count) + " critical tails exceed 2D - 2 = " + std::to_string(bound));
    return out;
}

GammaReport gamma(const RationalMap& f, int pmax, const Tolerances& tol) {
    if (f.degree() < 2) throw Error(ErrorKind::DegreeTooSmall, "gamma needs degree at least 2");
    if (pmax < 1) throw Error(ErrorKind::Usage, "period bound must be positive");
    unsigned long long d = 1;
    for (int k = 0; k < pmax; ++k) {
        d *= static_cast<unsigned long long>(f.degree());
        if (d > tol.degree_cap)
            throw Error(ErrorKind::DegreeCapExceeded, "D^Pmax exceeds the degree cap " + std::to_string(tol.degree_cap));
    }
    GammaReport out;
    out.pmax = pmax;
    out.cycles = enumerate_cycles(f, pmax, tol);
    for (auto& c : out.cycles) {
        if (c.cls == CycleClass::Parabolic) parabolic_invariants(f, c, tol);
        c.gamma = gamma_of_cycle(c);
        out.gamma_partial += *c.gamma;
    }
    return out;
}

DimensionCheck dimension_check(const RationalMap& f, const GammaReport& g, const DeltaReport& d, const Tolerances& tol) {
    DimensionCheck out;
    const double eps = tol.eps_cluster;
    for (const auto& c : g.cycles) {
        if (c.cls == CycleClass::Repelling) continue;
        for (const auto& p : c.points) add_point(out.points, p, eps);
    }
    // Prefix lengths: whole orbit when finite, up to the merge point when merged,
    // and far enough along a tail to contain every merge target.
    std::vector<std::size_t> keep(d.orbits.size(), 1);
    for (std::size_t i = 0; i < d.orbits.size(); ++i) {
        const auto& o = d.orbits[i];
        if (o.fate == OrbitFate::Periodic || o.fate == OrbitFate::Preperiodic) keep[i] = o.prefix.size();
        if (o.fate == OrbitFate::Merged) {
            keep[i] = static_cast<std::size_t>(o.merge_step) + 1;
            auto& k = keep[static_cast<std::size_t>(o.merged_into)];
            k = std::max(k, static_cast<std::size_t>(o.merge_target_step) + 1);
        }
    }
    for (std::size_t i = 0; i < d.orbits.size(); ++i)
        for (std::size_t s = 0; s < std::min(keep[i], d.orbits[i].prefix.size()); ++s)
            add_point(out.points, d.orbits[i].prefix[s], eps);

    std::vector<SpherePoint> plus = out.points;
    for (const auto& p : out.points) add_point(plus, f(p), eps);
    for (const auto& v : critical_values(f, tol)) add_point(plus, v, eps);
    out.new_points = static_cast<int>(plus.size() - out.points.size());

    try {
        for (auto c : g.cycles) {
            if (c.cls == CycleClass::Repelling) continue;
            out.flat_dimension += invariant_divergence_basis(f, c, tol).flat_dimension();
        }
        if (out.points.size() < 4) {
            out.injective = true;  // Q(A) = 0
            out.sigma_ratio = 1;
        } else {
            const auto op = nabla_matrix(f, out.points, tol);
            out.injective = op.injective;
            out.sigma_ratio = op.sigma_ratio;
        }
    } catch (const Error& e) {
        out.failure = e.what();
    }
    return out;
}

FSReport check_fs(const RationalMap& f, int pmax, int iter_cap, const Tolerances& tol, bool with_dimension) {
    FSReport r;
    r.map = f;
    r.pmax = pmax;
    r.iter_cap = iter_cap;
    r.gamma = gamma(f, pmax, tol);
    r.delta = delta(f, iter_cap, tol);
    r.pass = r.gamma.gamma_partial <= r.delta.count;
    r.classical_bound = 2 * f.degree() - 2;
    r.classical_count = static_cast<int>(std::count_if(r.gamma.cycles.begin(), r.gamma.cycles.end(),
                                                       [](const Cycle& c) { return c.cls != CycleClass::Repelling; }));
    r.classical_pass = r.classical_count <= r.classical_bound;
    if (with_dimension) r.dimension = dimension_check(f, r.gamma, r.delta, tol);
    return r;
}

}  // namespace fatou
