#ifndef OFEM_UNITS_HPP
#define OFEM_UNITS_HPP

// Internal unit system: lengths in nm, energies in keV, times in s.
// Field expressions follow Gaussian conventions (intensity I0 = c|E|^2/2pi),
// with |E|^2 carried in keV/nm^3 so that phases come out in radians without
// further factors.  All conversions to practical I/O units (W, mm, um,
// degrees) live here.

namespace ofem::units {

inline constexpr double electron_rest_keV = 510.99895;     // m_e c^2
inline constexpr double hbar_c_keV_nm = 0.19732698;        // hbar c (197.32698 eV nm)
inline constexpr double inv_alpha = 137.035999;            // 1/alpha (fine structure)
inline constexpr double alpha = 1.0 / inv_alpha;
inline constexpr double c_nm_per_s = 2.99792458e17;        // speed of light
inline constexpr double keV_per_s_in_W = 1.602176634e-16;  // 1 keV/s expressed in W

inline constexpr double pi = 3.14159265358979323846;

inline constexpr double mm_to_nm = 1.0e6;
inline constexpr double um_to_nm = 1.0e3;
inline constexpr double deg_to_rad = pi / 180.0;

inline constexpr double watt_to_keV_per_s = 1.0 / keV_per_s_in_W;

}  // namespace ofem::units

#endif
