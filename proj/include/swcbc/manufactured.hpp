#pragma once

#include "swcbc/schemes.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace swcbc::studies {

using schemes::SpaceTimeFunction;

/// An exact solution with the source terms that make it solve its scheme's continuous
/// problem. `exact_eta`/`exact_u` are the physical fields; `exact_first`/`exact_second`
/// are the same solution in the variables the scheme evolves ((v, w) for the diagonal
/// scheme, deviations from the far field for the homogenized one).
struct ManufacturedCase
{
    std::string name;
    schemes::SchemeConfig cfg; // cfg.forcing holds the source terms
    SpaceTimeFunction exact_eta;
    SpaceTimeFunction exact_u;
    SpaceTimeFunction exact_first;
    SpaceTimeFunction exact_second;
    /// Closed-form boundary time functions (A, B, a, b) keyed by name.
    std::vector<std::pair<std::string, std::function<double(double)>>> boundary_data;

    const std::function<double(double)>& boundary(std::string_view key) const;
};

/// Names accepted by mms_catalog.
std::vector<std::string> mms_case_names();

/// supercritical | subcritical_direct | subcritical_diagonal | subcritical_linearized.
/// Throws UnknownCase otherwise.
ManufacturedCase mms_catalog(std::string_view name);

/// The supercritical case re-expressed for the homogenized (deviation) variant.
ManufacturedCase homogenized(const ManufacturedCase& supercritical);

} // namespace swcbc::studies
