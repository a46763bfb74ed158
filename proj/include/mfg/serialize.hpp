#pragma once

#include "mfg/control.hpp"
#include "mfg/equilibrium.hpp"
#include "mfg/json_out.hpp"
#include "mfg/measure.hpp"
#include "mfg/monotonicity.hpp"
#include "mfg/randvar.hpp"

namespace mfg::ser {

using out::Json;

Json to_json(const DiscreteMeasure& m);
Json to_json(const RandomVariable& x);  // {weights, values, dim}
Json to_json(const Pick& p);
Json to_json(const Witness& w);
Json to_json(const MonotonicityReport& r);
Json to_json(const EquilibriumResult& e);
Json to_json(const EquilibriumSet& s);
Json to_json(const ShockCertificate& c);

DiscreteMeasure measure_from_json(const Json& j);
Pick pick_from_json(const Json& j);
/// Random variables of a witness share one sample space; it is rebuilt from
/// the weights of the first one present.
Witness witness_from_json(const Json& j);

}  // namespace mfg::ser
