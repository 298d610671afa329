#pragma once
#include "ryd/level.hpp"

namespace ryd::estimates {

struct BlockadeInput {
    int n = 50;
    double r12_m = 1e-6;       // interatomic distance
    double delta_dd_hz = 3e9;  // doubly-excited splitting
};

struct BlockadeResult {
    double w_dd_hz = 0.0;      // dipole-dipole coupling
    double shift_hz = 0.0;     // W^2 / delta
};

// h W = n^4 e^2 a0^2 / (8 pi eps0 R^3)
BlockadeResult blockade_shift(const BlockadeInput& in);

struct PatchInput {
    double grain_m = 100e-9;   // crystallite size a
    double dv_volt = 0.0;      // inter-grain voltage; 0 = calibrate from the
                               // reference measurement below
    double distance_m = 0.5e-3;
    double excursion_m = 15e-6;
};

// Reference measurement used to calibrate dV when not given:
// 1e4 V/m at d inner = 0.25 um with 30 nm grains.
double calibrated_patch_dv();

struct PatchResult {
    double e_patch_vpm = 0.0;     // a dV / d^2
    double de_patch_vpm = 0.0;    // a dV dr / d^3
};
PatchResult patch_field(const PatchInput& in);

} // namespace ryd::estimates
