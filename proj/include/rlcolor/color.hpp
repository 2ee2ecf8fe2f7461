#pragma once

// Reflectance spectrum -> CIE XYZ -> CIE L*a*b* -> CIEDE2000 colour
// difference. Relative colorimetry: the perfect reflector has Y = 100 and the
// Lab white point is the illuminant's own XYZ under the same normalisation.

#include <algorithm>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <vector>

#include "rlcolor/tables.hpp"

namespace rlcolor {

struct Spectrum {
    std::vector<double> wavelengths_nm;
    std::vector<double> reflectance;

    void validate() const {
        if (wavelengths_nm.size() != reflectance.size() || wavelengths_nm.size() < 2)
            throw std::invalid_argument("spectrum needs >= 2 equal-length samples");
        for (std::size_t i = 1; i < wavelengths_nm.size(); ++i)
            if (wavelengths_nm[i] <= wavelengths_nm[i - 1])
                throw std::invalid_argument("spectrum wavelengths not strictly increasing");
        for (double r : reflectance)
            if (!(r >= 0.0 && r <= 1.0))
                throw std::invalid_argument("reflectance outside [0, 1]");
    }
};

struct CmfTable {
    std::vector<double> wavelengths_nm;
    std::vector<double> xbar, ybar, zbar;
};

struct IlluminantSpectrum {
    std::vector<double> wavelengths_nm;
    std::vector<double> power;
};

struct XyzColor {
    double x = 0, y = 0, z = 0;
};

struct LabColor {
    double l = 0, a = 0, b = 0;
};

inline CmfTable load_cmf(std::istream& in) {
    auto rows = detail::parse_rows(in, 4);
    CmfTable t;
    for (auto& r : rows) {
        if (r[1] < 0 || r[2] < 0 || r[3] < 0)
            throw TableError("negative colour-matching value at wavelength " + std::to_string(r[0]));
        t.wavelengths_nm.push_back(r[0]);
        t.xbar.push_back(r[1]);
        t.ybar.push_back(r[2]);
        t.zbar.push_back(r[3]);
    }
    return t;
}

inline IlluminantSpectrum load_illuminant(std::istream& in) {
    auto rows = detail::parse_rows(in, 2);
    IlluminantSpectrum s;
    for (auto& r : rows) {
        if (r[1] < 0) throw TableError("negative power at wavelength " + std::to_string(r[0]));
        s.wavelengths_nm.push_back(r[0]);
        s.power.push_back(r[1]);
    }
    return s;
}

// X = k * sum R(l) S(l) xbar(l) dl by the trapezoid rule on the spectrum grid,
// with k fixed so that R == 1 gives Y = 100.
inline XyzColor spectrum_to_xyz(const Spectrum& spec, const CmfTable& cmf,
                                const IlluminantSpectrum& illum) {
    spec.validate();
    const auto& wl = spec.wavelengths_nm;
    if (wl.front() < cmf.wavelengths_nm.front() || wl.back() > cmf.wavelengths_nm.back() ||
        wl.front() < illum.wavelengths_nm.front() || wl.back() > illum.wavelengths_nm.back())
        throw std::invalid_argument("spectrum range not covered by CMF/illuminant tables");

    const std::size_t n = wl.size();
    double sx = 0, sy = 0, sz = 0, norm = 0;
    double prev_w[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        double s = interp_linear(illum.wavelengths_nm, illum.power, wl[i]);
        double w[4] = {
            s * interp_linear(cmf.wavelengths_nm, cmf.xbar, wl[i]),
            s * interp_linear(cmf.wavelengths_nm, cmf.ybar, wl[i]),
            s * interp_linear(cmf.wavelengths_nm, cmf.zbar, wl[i]),
            0,
        };
        w[3] = w[1]; // normalisation integrand, R == 1
        w[0] *= spec.reflectance[i];
        w[1] *= spec.reflectance[i];
        w[2] *= spec.reflectance[i];
        if (i > 0) {
            double h = 0.5 * (wl[i] - wl[i - 1]);
            sx += h * (prev_w[0] + w[0]);
            sy += h * (prev_w[1] + w[1]);
            sz += h * (prev_w[2] + w[2]);
            norm += h * (prev_w[3] + w[3]);
        }
        prev_w[0] = w[0];
        prev_w[1] = w[1];
        prev_w[2] = w[2];
        prev_w[3] = w[3];
    }
    if (norm <= 0) throw std::invalid_argument("illuminant/CMF overlap integrates to zero");
    double k = 100.0 / norm;
    return {k * sx, k * sy, k * sz};
}

namespace detail {

inline double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    if (t > delta * delta * delta) return std::cbrt(t);
    return t / (3.0 * delta * delta) + 4.0 / 29.0;
}

} // namespace detail

inline LabColor xyz_to_lab(const XyzColor& xyz, const XyzColor& white) {
    if (white.x <= 0 || white.y <= 0 || white.z <= 0)
        throw std::invalid_argument("white point must have strictly positive components");
    double fx = detail::lab_f(xyz.x / white.x);
    double fy = detail::lab_f(xyz.y / white.y);
    double fz = detail::lab_f(xyz.z / white.z);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

// CIEDE2000 colour difference, kL = kC = kH = 1.
inline double ciede2000(const LabColor& c1, const LabColor& c2) {
    constexpr double deg2rad = M_PI / 180.0;
    const double pow25_7 = 6103515625.0; // 25^7

    double C1 = std::hypot(c1.a, c1.b);
    double C2 = std::hypot(c2.a, c2.b);
    double Cbar = 0.5 * (C1 + C2);
    double Cbar7 = std::pow(Cbar, 7);
    double G = 0.5 * (1.0 - std::sqrt(Cbar7 / (Cbar7 + pow25_7)));

    double a1p = (1.0 + G) * c1.a;
    double a2p = (1.0 + G) * c2.a;
    double C1p = std::hypot(a1p, c1.b);
    double C2p = std::hypot(a2p, c2.b);

    auto hue = [](double a, double b) {
        if (a == 0.0 && b == 0.0) return 0.0;
        double h = std::atan2(b, a);
        if (h < 0) h += 2.0 * M_PI;
        return h;
    };
    double h1p = hue(a1p, c1.b);
    double h2p = hue(a2p, c2.b);

    double dLp = c2.l - c1.l;
    double dCp = C2p - C1p;

    double dhp = 0.0;
    if (C1p * C2p != 0.0) {
        dhp = h2p - h1p;
        if (dhp > M_PI) dhp -= 2.0 * M_PI;
        else if (dhp < -M_PI) dhp += 2.0 * M_PI;
    }
    double dHp = 2.0 * std::sqrt(C1p * C2p) * std::sin(0.5 * dhp);

    double Lbarp = 0.5 * (c1.l + c2.l);
    double Cbarp = 0.5 * (C1p + C2p);

    double hbarp;
    if (C1p * C2p == 0.0) {
        hbarp = h1p + h2p;
    } else if (std::fabs(h1p - h2p) <= M_PI) {
        hbarp = 0.5 * (h1p + h2p);
    } else if (h1p + h2p < 2.0 * M_PI) {
        hbarp = 0.5 * (h1p + h2p) + M_PI;
    } else {
        hbarp = 0.5 * (h1p + h2p) - M_PI;
    }

    double T = 1.0 - 0.17 * std::cos(hbarp - 30.0 * deg2rad) + 0.24 * std::cos(2.0 * hbarp) +
               0.32 * std::cos(3.0 * hbarp + 6.0 * deg2rad) -
               0.20 * std::cos(4.0 * hbarp - 63.0 * deg2rad);

    double dtheta = 30.0 * deg2rad *
                    std::exp(-std::pow((hbarp / deg2rad - 275.0) / 25.0, 2));
    double Cbarp7 = std::pow(Cbarp, 7);
    double RC = 2.0 * std::sqrt(Cbarp7 / (Cbarp7 + pow25_7));
    double RT = -RC * std::sin(2.0 * dtheta);

    double Lm50sq = (Lbarp - 50.0) * (Lbarp - 50.0);
    double SL = 1.0 + 0.015 * Lm50sq / std::sqrt(20.0 + Lm50sq);
    double SC = 1.0 + 0.045 * Cbarp;
    double SH = 1.0 + 0.015 * Cbarp * T;

    double tL = dLp / SL;
    double tC = dCp / SC;
    double tH = dHp / SH;
    return std::sqrt(tL * tL + tC * tC + tH * tH + RT * tC * tH);
}

// Lab of an sRGB primary at full intensity, via the IEC 61966-2-1 matrix and
// this module's own xyz_to_lab. White point = matrix applied to (1,1,1).
inline LabColor srgb_primary_lab(double r, double g, double b) {
    auto mul = [](double r_, double g_, double b_, int row) {
        static const double m[3][3] = {
            {0.4124564, 0.3575761, 0.1804375},
            {0.2126729, 0.7151522, 0.0721750},
            {0.0193339, 0.1191920, 0.9503041},
        };
        return 100.0 * (m[row][0] * r_ + m[row][1] * g_ + m[row][2] * b_);
    };
    XyzColor xyz{mul(r, g, b, 0), mul(r, g, b, 1), mul(r, g, b, 2)};
    XyzColor white{mul(1, 1, 1, 0), mul(1, 1, 1, 1), mul(1, 1, 1, 2)};
    return xyz_to_lab(xyz, white);
}

} // namespace rlcolor
