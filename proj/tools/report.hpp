#pragma once

#include <json.hpp>

#include <string>

#include "fatoulab/expr.hpp"
#include "fatoulab/fscount.hpp"
#include "fatoulab/residues.hpp"

namespace fatou::cli {

using Json = nlohmann::ordered_json;

std::string number(double x);
std::string number(const Real& x);
std::string number(const Complex& z);
std::string number(const G& z);
std::string point(const SpherePoint& p);

Json points(const std::vector<SpherePoint>& ps);
Json qd(const RationalQD& q);
Json map(const RationalMap& f);
Json tolerances(const Tolerances& t);
Json parabolic(const ParabolicData& d);
Json cycle(const Cycle& c);
Json gamma(const GammaReport& g);
Json delta(const DeltaReport& d);
Json fs(const FSReport& r);
Json integral(const IntegralValue& v);
Json residue(const ResidueReport& r);
Json balance(const BalanceReport& r);
Json lattes(const LattesVerdict& v);
Json nabla(const OperatorMatrix& op);

/// Scalars as "key: value" lines, arrays of objects as aligned tables.
std::string table(const Json& report);

}  // namespace fatou::cli
