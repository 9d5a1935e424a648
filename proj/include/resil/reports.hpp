#pragma once

#include <nlohmann/json.hpp>

#include "field_vector.hpp"
#include "goodness.hpp"
#include "halasz.hpp"
#include "numbers.hpp"
#include "resilience.hpp"
#include "sign_matrix.hpp"

namespace resil {

using json = nlohmann::ordered_json;

inline json to_json(const FieldVector& a) { return json(a.coords()); }

inline json to_json(const FlipSet& flips) {
    json out = json::array();
    for (const auto& pos : flips) out.push_back({pos.row, pos.col});
    return out;
}

inline json to_json(const CalibrationResult& r) {
    return {{"k", r.k},
            {"M", r.big_m},
            {"sample_size", r.sample_size},
            {"p", r.p},
            {"n", r.n},
            {"C_min", r.c_min},
            {"C_min_unrounded", r.c_min_exact},
            {"worst_index", r.worst_index},
            {"worst_vector", to_json(r.worst_vector)}};
}

inline json to_json(const BadSetReport& r) {
    return {{"n", r.params.n},
            {"p", r.params.p},
            {"k", r.params.k},
            {"s", r.params.s},
            {"t", r.params.t},
            {"alpha", to_string(r.params.alpha)},
            {"exact_count", r.exact_count},
            {"bound", r.bound},
            {"pass", r.pass}};
}

inline json to_json(const ResilienceReport& r) {
    json out{{"n", r.n},
             {"m", r.m},
             {"exact", r.exact ? json(*r.exact) : json(nullptr)},
             {"lower_bound", r.lower_bound},
             {"lb_kind", r.lb_kind},
             {"upper_bound", r.upper_bound},
             {"ub_kind", r.ub_kind},
             {"witness_flips", to_json(r.upper_witness)},
             {"budget_exhausted", r.budget_exhausted}};
    if (r.exact) out["exact_witness"] = to_json(r.exact_witness);
    if (r.kernel_witness) {
        json a = json::array();
        for (const auto& x : r.kernel_witness->kernel_vector) a.push_back(to_string(x));
        out["kernel_vector"] = a;
    }
    return out;
}

inline json to_json(const GoodnessReport& r) {
    json out{{"h", r.h ? json(to_string(*r.h)) : json("inf")}, {"upper_bound_only", r.upper_bound_only}};
    if (r.h) out["h_approx"] = to_double(*r.h);
    if (r.witness) {
        out["witness_indices"] = r.witness->indices;
        out["witness_values"] = to_json(r.witness->values);
    }
    return out;
}

} // namespace resil
