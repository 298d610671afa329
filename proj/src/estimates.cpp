#include "ryd/estimates.hpp"

#include <cmath>

#include "ryd/constants.hpp"

namespace ryd::estimates {

BlockadeResult blockade_shift(const BlockadeInput& in) {
    if (in.n < 1 || in.r12_m <= 0.0 || in.delta_dd_hz <= 0.0)
        throw DomainError("blockade_shift: invalid input");
    const double n4 = double(in.n) * in.n * in.n * in.n;
    const double num = n4 * si::qe * si::qe * si::a0 * si::a0;
    const double den = 8.0 * pi * si::eps0 * in.r12_m * in.r12_m * in.r12_m;
    BlockadeResult out;
    out.w_dd_hz = num / den / si::h;
    out.shift_hz = out.w_dd_hz * out.w_dd_hz / in.delta_dd_hz;
    return out;
}

double calibrated_patch_dv() {
    // E = a dV / d^2 inverted at the reference point
    const double e_ref = 1e4, d_ref = 0.25e-6, a_ref = 30e-9;
    return e_ref * d_ref * d_ref / a_ref;
}

PatchResult patch_field(const PatchInput& in) {
    if (in.grain_m <= 0.0 || in.distance_m <= in.grain_m || in.excursion_m <= 0.0)
        throw DomainError("patch_field: invalid geometry");
    const double dv = in.dv_volt > 0.0 ? in.dv_volt : calibrated_patch_dv();
    PatchResult out;
    out.e_patch_vpm = in.grain_m * dv / (in.distance_m * in.distance_m);
    out.de_patch_vpm = out.e_patch_vpm * in.excursion_m / in.distance_m;
    return out;
}

} // namespace ryd::estimates
