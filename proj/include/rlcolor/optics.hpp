#pragma once

// Transfer-matrix reflectance of the Si-nanodisk / Si3N4 / Si-substrate stack
// at normal incidence. The patterned disk layer is homogenised with an
// effective-medium mixing rule at the lattice fill fraction.
// Complex index convention: N = n - i*k with k >= 0.

#include <complex>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlcolor/color.hpp"
#include "rlcolor/tables.hpp"

namespace rlcolor {

using cplx = std::complex<double>;

struct MaterialTable {
    std::string name;
    std::vector<double> wavelengths_nm;
    std::vector<double> n, k;
};

struct Layer {
    cplx index;
    double thickness_nm;
};

struct LayerStack {
    cplx ambient = {1.0, 0.0};
    std::vector<Layer> layers; // incidence side first
    cplx substrate = {1.0, 0.0};
};

enum class MixingRule { VolumeAverage, MaxwellGarnett };

struct EffectiveLayerModel {
    MixingRule rule = MixingRule::VolumeAverage;
};

inline MaterialTable load_dispersion(std::istream& in, std::string name) {
    auto rows = detail::parse_rows(in, 3);
    MaterialTable t;
    t.name = std::move(name);
    for (auto& r : rows) {
        if (r[1] <= 0) throw TableError("non-physical index n <= 0 at wavelength " + std::to_string(r[0]));
        if (r[2] < 0) throw TableError("negative extinction at wavelength " + std::to_string(r[0]));
        t.wavelengths_nm.push_back(r[0]);
        t.n.push_back(r[1]);
        t.k.push_back(r[2]);
    }
    return t;
}

inline cplx refractive_index(const MaterialTable& table, double lambda_nm) {
    return {interp_linear(table.wavelengths_nm, table.n, lambda_nm),
            -interp_linear(table.wavelengths_nm, table.k, lambda_nm)};
}

// Area fraction of disks of diameter D on a square lattice of pitch D+L.
inline double fill_fraction(double d_nm, double l_nm) {
    if (d_nm <= 0) throw std::invalid_argument("disk diameter must be positive");
    if (l_nm < 0) throw std::invalid_argument("disk spacing must be non-negative");
    double pitch = d_nm + l_nm;
    return M_PI * d_nm * d_nm / (4.0 * pitch * pitch);
}

inline cplx effective_index(cplx n_inclusion, cplx n_host, double f, MixingRule rule) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("fill fraction outside [0, 1]");
    cplx ei = n_inclusion * n_inclusion;
    cplx eh = n_host * n_host;
    cplx eeff;
    if (rule == MixingRule::VolumeAverage) {
        eeff = f * ei + (1.0 - f) * eh;
    } else {
        // Maxwell-Garnett, spherical inclusions in the host
        eeff = eh * (ei * (1.0 + 2.0 * f) + 2.0 * eh * (1.0 - f)) /
               (ei * (1.0 - f) + eh * (2.0 + f));
    }
    cplx n = std::sqrt(eeff);
    if (n.imag() > 0) n = -n;
    return n;
}

// Characteristic-matrix reflectance at normal incidence, R = |r|^2.
inline double tmm_reflectance(const LayerStack& stack, double lambda_nm) {
    if (lambda_nm <= 0) throw std::invalid_argument("wavelength must be positive");
    cplx m00 = 1, m01 = 0, m10 = 0, m11 = 1;
    for (const Layer& layer : stack.layers) {
        cplx delta = 2.0 * M_PI * layer.index * layer.thickness_nm / lambda_nm;
        cplx c = std::cos(delta);
        cplx s = std::sin(delta);
        cplx a00 = c, a01 = cplx(0, 1) * s / layer.index;
        cplx a10 = cplx(0, 1) * layer.index * s, a11 = c;
        cplx t00 = m00 * a00 + m01 * a10;
        cplx t01 = m00 * a01 + m01 * a11;
        cplx t10 = m10 * a00 + m11 * a10;
        cplx t11 = m10 * a01 + m11 * a11;
        m00 = t00; m01 = t01; m10 = t10; m11 = t11;
    }
    cplx B = m00 + m01 * stack.substrate;
    cplx C = m10 + m11 * stack.substrate;
    cplx r = (stack.ambient * B - C) / (stack.ambient * B + C);
    double R = std::norm(r);
    return R < 0.0 ? 0.0 : (R > 1.0 ? 1.0 : R);
}

struct MaterialSet {
    MaterialTable silicon;
    MaterialTable nitride;
};

// Geometry of one design: disk gap L, diameter D, disk thickness NT,
// antireflective-layer thickness AT, all in nanometres.
struct Geometry {
    double l_nm, d_nm, nt_nm, at_nm;
};

inline Spectrum simulate_spectrum(const Geometry& g, const std::vector<double>& grid_nm,
                                  const MaterialSet& materials, const EffectiveLayerModel& model) {
    double f = fill_fraction(g.d_nm, g.l_nm);
    Spectrum spec;
    spec.wavelengths_nm = grid_nm;
    spec.reflectance.reserve(grid_nm.size());
    for (double lambda : grid_nm) {
        cplx n_si = refractive_index(materials.silicon, lambda);
        cplx n_sin = refractive_index(materials.nitride, lambda);
        LayerStack stack;
        stack.ambient = {1.0, 0.0};
        stack.layers = {{effective_index(n_si, {1.0, 0.0}, f, model.rule), g.nt_nm},
                        {n_sin, g.at_nm}};
        stack.substrate = n_si;
        spec.reflectance.push_back(tmm_reflectance(stack, lambda));
    }
    return spec;
}

} // namespace rlcolor
