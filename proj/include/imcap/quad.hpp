// SPDX-License-Identifier: MIT

#ifndef IMCAP_QUAD_HPP
#define IMCAP_QUAD_HPP

#include <cmath>
#include <queue>
#include <vector>

#include "imcap/errors.hpp"

namespace imcap {
namespace detail {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1]
inline constexpr double gk_x[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
                                   0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double gk_wk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
                                    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gk_wg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct QuadPiece {
    double a, b, value, error;
    bool operator<(const QuadPiece &o) const { return error < o.error; }
};

template <class F> inline QuadPiece gk15(const F &f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double kron = gk_wk[7] * f(c);
    double gauss = gk_wg[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * gk_x[i];
        const double fv = f(c - dx) + f(c + dx);
        kron += gk_wk[i] * fv;
        if (i % 2 == 1) gauss += gk_wg[i / 2] * fv;
    }
    kron *= h;
    gauss *= h;
    return {a, b, kron, std::abs(kron - gauss)};
}

struct QuadResult {
    double value;
    double error; // absolute error estimate
    int subdivisions;
};

// Adaptive bisection on [a, b]: split the worst interval until the summed
// error estimate drops under tol_abs or the subdivision budget runs out.
// Always returns its best estimate; the caller owns the tolerance contract.
template <class F>
inline QuadResult integrate_adaptive(const F &f, double a, double b, double tol_abs, int max_subdivisions,
                                     int initial_pieces = 8) {
    std::priority_queue<QuadPiece> heap;
    double total = 0.0, err = 0.0;
    double left = a;
    for (int i = 1; i <= initial_pieces; ++i) {
        const double right = (i == initial_pieces) ? b : a + (b - a) * i / initial_pieces;
        auto p = gk15(f, left, right);
        total += p.value;
        err += p.error;
        heap.push(p);
        left = right;
    }
    int splits = initial_pieces;
    while (err > tol_abs && splits < max_subdivisions && !heap.empty()) {
        const auto worst = heap.top();
        heap.pop();
        total -= worst.value;
        err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) { // interval exhausted by rounding
            total += worst.value;
            err += worst.error;
            break;
        }
        for (auto p : {gk15(f, worst.a, mid), gk15(f, mid, worst.b)}) {
            total += p.value;
            err += p.error;
            heap.push(p);
        }
        ++splits;
    }
    return {total, err, splits};
}

} // namespace detail
} // namespace imcap

#endif
