#include "ryd/presets.hpp"

#include <cmath>

#include "ryd/constants.hpp"

namespace ryd::presets {

field::CoefficientTable builtin_coefficients() {
    using Row = field::CoefficientTable::Row;
    field::CoefficientTable t;
    auto add = [&t](const std::string& geo, int k, double eta,
                    std::initializer_list<double> v, double z0, double rad) {
        Row row;
        row.geometry = geo;
        row.k = k;
        row.eta = eta;
        int i = 0;
        for (double x : v) row.v(0, i++) = x;
        row.z0_m = z0;
        row.validity_radius_m = rad;
        t.rows.push_back(row);
    };
    const double nan = std::nan("");
    // trap A: z0 = 1 mm, model valid to 1% within 400 um
    add("trapA", 1, nan, {4.09, 0, 0, 0, 0, 0, 0}, 1e-3, 400e-6);
    add("trapA", 2, nan, {0, -3.12, 0, -0.63, 0, 3.73, 0}, 1e-3, 400e-6);
    add("trapA", 3, 1.0, {2.60, 0, 5.48, 0, -3.66, 0, -5.75}, 1e-3, 400e-6);
    add("trapA", 3, 4.49, {0, 0, 15.04, 0, -10.05, 0, -15.76}, 1e-3, 400e-6);
    // trap B: z0 = 100 um, model valid to 0.1% within 50 um
    add("trapB", 1, nan, {0.409, 0, 0, 0, 0, 0, 0}, 100e-6, 50e-6);
    add("trapB", 2, nan, {0.457, -0.220, 0.037, 0.010, -0.010, 0.001, 2e-6}, 100e-6, 50e-6);
    add("trapB", 3, 1.0, {-0.369, 0.002, 0.250, -0.241, 0.155, -0.075, -0.027}, 100e-6, 50e-6);
    add("trapB", 3, 0.05, {0, 0.001, 0.131, -0.127, 0.082, -0.039, -0.014}, 100e-6, 50e-6);
    return t;
}

TrapPreset trap_preset(const std::string& name) {
    const auto table = builtin_coefficients();
    TrapPreset p;
    p.name = name;
    if (name == "trapA") {
        p.potential = table.assemble("trapA", 4.49);
        p.drive = {0.2, -3e-3, 0.056, two_pi * 430.0};
        p.atom_height_m = 0.5e-3;
    } else if (name == "trapB-alpha") {
        p.potential = table.assemble("trapB", 0.05);
        p.drive = {1.5, 0.0, 0.5, two_pi * 20700.0};
        p.atom_height_m = 120e-6;
    } else if (name == "trapB-beta") {
        p.potential = table.assemble("trapB", 0.05);
        p.drive = {0.2, -0.45e-3, 0.14, two_pi * 2860.0};
        p.atom_height_m = 120e-6;
    } else {
        throw std::runtime_error("unknown geometry preset '" + name +
                                 "' (expected trapA, trapB-alpha or trapB-beta)");
    }
    p.mirror_spacing_m = 1e-3;
    return p;
}

TrapPreset custom_preset(const std::string& csv_path, const std::string& geometry,
                         double eta, const field::DriveSettings& drive) {
    TrapPreset p;
    p.name = geometry;
    p.potential = field::load_coefficients_csv(csv_path).assemble(geometry, eta);
    p.drive = drive;
    return p;
}

} // namespace ryd::presets
