#pragma once
#include <string>

#include "ryd/field.hpp"

namespace ryd::presets {

// Published coefficient tables for the two trap geometries.
field::CoefficientTable builtin_coefficients();

// Geometry + drive settings of the three published operating points.
struct TrapPreset {
    std::string name;
    field::HarmonicPotential potential;
    field::DriveSettings drive;
    double mirror_spacing_m = 1e-3;  // cavity formed by the two chip planes
    double atom_height_m = 0.5e-3;   // trap origin above the lower plane
};

// name: trapA | trapB-alpha | trapB-beta
TrapPreset trap_preset(const std::string& name);

// Assemble from a user-supplied coefficient CSV.
TrapPreset custom_preset(const std::string& csv_path, const std::string& geometry,
                         double eta, const field::DriveSettings& drive);

} // namespace ryd::presets
