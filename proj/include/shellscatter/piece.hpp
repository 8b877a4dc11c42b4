#pragma once

#include <cmath>
#include <complex>

#include "shellscatter/units.hpp"

namespace shellscatter {

/// Value and slope of a solution at one radius.
struct CauchyData {
    cplx value;
    cplx slope;
};

namespace detail {

/// sin(q x) / q, continuous through q = 0.
inline cplx sinc_length(cplx q, double x) {
    const cplx qx = q * x;
    if (std::abs(qx) < 1e-4) {
        const cplx q2x2 = qx * qx;
        return x * (1.0 - q2x2 / 6.0 + q2x2 * q2x2 / 120.0);
    }
    return std::sin(qx) / q;
}

/// exp(+i q x) and exp(-i q x), with a cheap path for real q.
inline void exp_pair(cplx q, double x, cplx& ep, cplx& em) {
    if (q.imag() == 0.0) {
        const double ph = q.real() * x;
        const double c = std::cos(ph), s = std::sin(ph);
        ep = {c, s};
        em = {c, -s};
    } else {
        ep = std::exp(I * q * x);
        em = std::exp(-I * q * x);
    }
}

} // namespace detail

/// One analytic segment of a solution of u'' = -q^2 u, stored relative to a
/// reference radius r_ref so that exponents stay bounded by the segment length.
///
///   exponential form: u = c1 e^{iq(r-r_ref)} + c2 e^{-iq(r-r_ref)}
///   cauchy form:      u = c1 cos(q(r-r_ref)) + c2 sin(q(r-r_ref))/q
///
/// The cauchy form stays regular as q -> 0 and is used for the shell piece
/// when E is within the removable-singularity window around V0.
struct WavePiece {
    enum class Form { exponential, cauchy };

    Form form = Form::exponential;
    cplx q{};
    double r_ref = 0.0;
    cplx c1{};
    cplx c2{};

    cplx value(double r) const {
        const double x = r - r_ref;
        if (form == Form::exponential) {
            cplx ep, em;
            detail::exp_pair(q, x, ep, em);
            return c1 * ep + c2 * em;
        }
        if (q.imag() == 0.0) {
            const double qx = q.real() * x;
            const double sinc = std::abs(qx) < 1e-4 ? detail::sinc_length(q, x).real()
                                                    : std::sin(qx) / q.real();
            return c1 * std::cos(qx) + c2 * sinc;
        }
        return c1 * std::cos(q * x) + c2 * detail::sinc_length(q, x);
    }

    cplx derivative(double r) const {
        const double x = r - r_ref;
        if (form == Form::exponential) {
            cplx ep, em;
            detail::exp_pair(q, x, ep, em);
            return I * q * (c1 * ep - c2 * em);
        }
        const cplx sinc = detail::sinc_length(q, x);
        return -c1 * q * q * sinc + c2 * std::cos(q * x);
    }

    cplx second_derivative(double r) const { return -q * q * value(r); }

    CauchyData cauchy_at(double r) const { return {value(r), derivative(r)}; }

    WavePiece scaled(cplx f) const {
        WavePiece p = *this;
        p.c1 *= f;
        p.c2 *= f;
        return p;
    }

    static WavePiece exponential(cplx q, double r_ref, cplx c1, cplx c2) {
        return {Form::exponential, q, r_ref, c1, c2};
    }

    static WavePiece cauchy(cplx q, double r_ref, CauchyData d) {
        return {Form::cauchy, q, r_ref, d.value, d.slope};
    }

    /// Exponential-form piece matching the Cauchy data at r_ref:
    /// c1 = (u + u'/(iq))/2, c2 = (u - u'/(iq))/2.
    static WavePiece split(cplx q, double r_ref, CauchyData d) {
        const cplx t = d.slope / (I * q);
        return {Form::exponential, q, r_ref, 0.5 * (d.value + t), 0.5 * (d.value - t)};
    }
};

} // namespace shellscatter
