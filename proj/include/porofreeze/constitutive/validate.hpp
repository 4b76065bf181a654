#pragma once

#include <string>
#include <vector>

#include "porofreeze/constitutive/laws.hpp"
#include "porofreeze/hysteresis/density.hpp"
#include "porofreeze/plasticity/elastic.hpp"
#include "porofreeze/plasticity/yield_surface.hpp"

namespace porofreeze::constitutive {

struct ClauseResult {
    std::string id;           ///< "(i)" ... "(xi)", "density-envelope", "density-mass", "constants"
    std::string description;
    bool evaluated = true;    ///< false when the clause depends on scenario data not supplied here
    bool passed = true;
    std::string witness;      ///< failing sample point or violated inequality
};

struct ValidationReport {
    std::vector<ClauseResult> clauses;

    bool all_passed() const;
    const ClauseResult* find(const std::string& id) const;
    ClauseResult& get(const std::string& id);
    std::string to_text() const;
};

struct ModelParameters {
    MaterialLaws laws;
    PhysicalConstants constants;
    hysteresis::PreisachDensity density = hysteresis::PreisachDensity::uniform(0.2, 1.0, -1.0, 1.0);
    plasticity::ElasticTensors tensors;
    plasticity::YieldSurface yield;
    int dim = 1;
};

/// Checks every structural assumption on the material data. Clauses (ii)-(v) concern
/// forcing, boundary and initial data; they are listed unevaluated and filled in by the caller.
ValidationReport validate_hypotheses(const ModelParameters& params);

}  // namespace porofreeze::constitutive
