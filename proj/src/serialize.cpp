#include "mfg/serialize.hpp"

#include "mfg/error.hpp"

namespace mfg::ser {

Json to_json(const DiscreteMeasure& m) {
    Json j;
    j["dim"] = m.dim();
    j["atoms"] = m.atoms();
    j["weights"] = m.weights();
    return j;
}

Json to_json(const RandomVariable& x) {
    Json j;
    j["dim"] = x.dim();
    j["weights"] = x.space()->weights();
    j["values"] = x.values();
    return j;
}

Json to_json(const Pick& p) {
    Json j;
    j["name"] = pick_name(p);
    switch (p.kind) {
        case Pick::Kind::lower: j["kind"] = "lower"; break;
        case Pick::Kind::upper: j["kind"] = "upper"; break;
        case Pick::Kind::hull: j["kind"] = "hull"; j["c"] = p.c; break;
        case Pick::Kind::branch: j["kind"] = "branch"; j["index"] = p.index; break;
        case Pick::Kind::aligned: j["kind"] = "aligned"; j["c"] = p.c; break;
    }
    return j;
}

Json to_json(const Witness& w) {
    Json j;
    j["condition"] = condition_name(w.condition);
    j["lhs"] = w.lhs;
    j["rhs"] = w.rhs;
    j["margin"] = w.margin;
    switch (w.condition) {
        case Condition::LL:
            j["m1"] = to_json(*w.m1);
            j["m2"] = to_json(*w.m2);
            break;
        case Condition::D:
            j["x1"] = to_json(*w.x1);
            j["x2"] = to_json(*w.x2);
            break;
        case Condition::sigma:
        case Condition::neg_sigma:
            j["T"] = w.T;
            j["m0"] = to_json(*w.m0);
            j["s1"] = w.s1;
            j["s2"] = w.s2;
            j["pick1"] = to_json(w.pick1);
            j["pick2"] = to_json(w.pick2);
            break;
        case Condition::L2:
        case Condition::neg_L2:
            j["T"] = w.T;
            j["x0"] = to_json(*w.x0);
            j["x1"] = to_json(*w.x1);
            j["x2"] = to_json(*w.x2);
            j["pick1"] = to_json(w.pick1);
            j["pick2"] = to_json(w.pick2);
            break;
    }
    return j;
}

Json to_json(const MonotonicityReport& r) {
    Json j;
    j["condition"] = condition_name(r.condition);
    j["seed"] = r.seed;
    j["violated"] = r.violated;
    j["samples"] = r.samples;
    j["skipped"] = r.skipped;
    j["worst_margin"] = r.worst_margin();
    j["witness"] = r.witness ? to_json(*r.witness) : Json();
    j["shrunk"] = r.shrunk ? to_json(*r.shrunk) : Json();
    return j;
}

Json to_json(const EquilibriumResult& e) {
    Json j;
    j["sigma"] = e.sigma;
    j["measure"] = to_json(e.measure);
    j["selection"] = e.selection;
    j["split_c"] = e.split_c ? Json(*e.split_c) : Json();
    j["split_atom"] = e.split_atom ? Json(*e.split_atom) : Json();
    j["multiplicity"] = multiplicity_name(e.multiplicity);
    j["admits_mixtures"] = e.admits_mixtures;
    j["consistency_residual"] = e.consistency_residual;
    j["atom_values"] = e.atom_values;
    j["value_certificate"] = e.value_certificate;
    j["max_foc_residual"] = e.max_foc_residual;
    return j;
}

Json to_json(const EquilibriumSet& s) {
    Json j;
    j["count"] = s.equilibria.size();
    j["crossings"] = s.crossings;
    j["scan_monotone"] = s.scan_monotone;
    j["undefined_points"] = s.undefined_points;
    Json arr = Json::array();
    for (const auto& e : s.equilibria) arr.push_back(to_json(e));
    j["equilibria"] = std::move(arr);
    return j;
}

Json to_json(const ShockCertificate& c) {
    Json j;
    j["t"] = c.t;
    j["x"] = c.x;
    j["y_lower"] = c.y_lower;
    j["y_upper"] = c.y_upper;
    j["value_lower"] = c.value_lower;
    j["value_upper"] = c.value_upper;
    j["separation"] = c.y_upper - c.y_lower;
    j["value_gap"] = std::abs(c.value_upper - c.value_lower);
    j["a"] = c.a;
    j["probe_x0"] = c.probe_x0;
    j["probe_h"] = c.probe_h;
    return j;
}

namespace {

const Json& field(const Json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw DomainError(std::string("missing field '") + name + "'");
    return j.at(name);
}

std::vector<double> numbers(const Json& j, const char* name) {
    const Json& a = field(j, name);
    if (!a.is_array()) throw DomainError(std::string("field '") + name + "' must be an array");
    std::vector<double> v;
    for (const auto& e : a) {
        if (!e.is_number()) throw DomainError(std::string("field '") + name + "' must hold numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

double number(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number()) throw DomainError(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

RandomVariable rv_from_json(const Json& j, const SpacePtr& space) {
    return RandomVariable(space, numbers(j, "values"), field(j, "dim").get<std::size_t>());
}

}  // namespace

DiscreteMeasure measure_from_json(const Json& j) {
    return DiscreteMeasure(numbers(j, "atoms"), numbers(j, "weights"), field(j, "dim").get<std::size_t>());
}

Pick pick_from_json(const Json& j) {
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind == "lower") return Pick::lower();
    if (kind == "upper") return Pick::upper();
    if (kind == "hull") return Pick::hull(number(j, "c"));
    if (kind == "aligned") return Pick::aligned(number(j, "c"));
    if (kind == "branch") return Pick::branch(field(j, "index").get<std::size_t>());
    throw DomainError("unknown pick kind '" + kind + "'");
}

Witness witness_from_json(const Json& j) {
    const auto cond = parse_condition(field(j, "condition").get<std::string>());
    if (!cond) throw DomainError("unknown condition in witness");
    Witness w;
    w.condition = *cond;
    w.lhs = number(j, "lhs");
    w.rhs = number(j, "rhs");
    w.margin = number(j, "margin");
    switch (w.condition) {
        case Condition::LL:
            w.m1 = measure_from_json(field(j, "m1"));
            w.m2 = measure_from_json(field(j, "m2"));
            break;
        case Condition::D: {
            const auto space = SampleSpace::make(numbers(field(j, "x1"), "weights"));
            w.x1 = rv_from_json(field(j, "x1"), space);
            w.x2 = rv_from_json(field(j, "x2"), space);
            break;
        }
        case Condition::sigma:
        case Condition::neg_sigma:
            w.T = number(j, "T");
            w.m0 = measure_from_json(field(j, "m0"));
            w.s1 = number(j, "s1");
            w.s2 = number(j, "s2");
            w.pick1 = pick_from_json(field(j, "pick1"));
            w.pick2 = pick_from_json(field(j, "pick2"));
            break;
        case Condition::L2:
        case Condition::neg_L2: {
            w.T = number(j, "T");
            const auto space = SampleSpace::make(numbers(field(j, "x0"), "weights"));
            w.x0 = rv_from_json(field(j, "x0"), space);
            w.x1 = rv_from_json(field(j, "x1"), space);
            w.x2 = rv_from_json(field(j, "x2"), space);
            w.pick1 = pick_from_json(field(j, "pick1"));
            w.pick2 = pick_from_json(field(j, "pick2"));
            break;
        }
    }
    return w;
}

}  // namespace mfg::ser
