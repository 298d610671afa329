#pragma once

namespace ryd {

// SI constants (CODATA 2018 where not fixed by definition).
namespace si {
inline constexpr double h       = 6.62607015e-34;   // J s
inline constexpr double hbar    = h / 6.283185307179586476925286766559;
inline constexpr double kB      = 1.380649e-23;     // J/K
inline constexpr double c       = 2.99792458e8;     // m/s
inline constexpr double eps0    = 8.8541878128e-12; // F/m
inline constexpr double qe      = 1.602176634e-19;  // C
inline constexpr double a0      = 0.529177210903e-10; // m
inline constexpr double amu     = 1.66053906660e-27;  // kg
inline constexpr double g_earth = 9.80665;          // m/s^2

inline constexpr double mass_rb87 = 86.909180531 * amu; // kg
} // namespace si

// Atomic-unit conversions. The energy and field values are the ones used
// throughout the level-structure calculations; they are treated as exact.
struct UnitSystem {
    static constexpr double energy_au_joule = 4.360e-18;   // J per hartree
    static constexpr double field_au_vpm    = 514.2e9;     // (V/m) per a.u. field

    // Derived, exact given the above.
    static constexpr double freq_au_hz = energy_au_joule / si::h;       // Hz per hartree
    static constexpr double time_au_s  = si::hbar / energy_au_joule;    // s per a.u. time

    static constexpr double au_to_hz(double e_au) { return e_au * freq_au_hz; }
    static constexpr double hz_to_au(double f_hz) { return f_hz / freq_au_hz; }
    static constexpr double field_to_au(double e_vpm) { return e_vpm / field_au_vpm; }
    static constexpr double field_to_si(double e_au) { return e_au * field_au_vpm; }

    // Energy slope a.u. -> Hz/(V/m); curvature a.u. -> Hz/(V/m)^2.
    static constexpr double slope_au_to_si = freq_au_hz / field_au_vpm;
    static constexpr double curv_au_to_si  = freq_au_hz / (field_au_vpm * field_au_vpm);
};

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

} // namespace ryd
