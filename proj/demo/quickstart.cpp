// SPDX-License-Identifier: MIT
//
// Minimal tour of the library: instantaneous capacity of one fixed channel
// by every estimator, then the ergodic closed form next to a Monte-Carlo
// average over the matching ensemble.

#include <cmath>
#include <cstdio>

#include "imcap/imcap.hpp"

int main() {
    using namespace imcap;

    ChannelMatrix h(2, 2);
    h << std::complex<double>(0.6, -0.3), std::complex<double>(-1.1, 0.2),
        std::complex<double>(0.4, 0.9), std::complex<double>(0.1, -0.7);

    std::printf("instantaneous capacity, fixed 2x2 channel\n");
    std::printf("%8s %10s %10s %10s %12s\n", "snr_db", "order0", "order2", "order4", "integral");
    for (double db : {-10.0, 0.0, 10.0, 20.0}) {
        const double gamma = std::pow(10.0, db / 10.0);
        const auto s = sigma_vector(h, gamma);
        const double exact = mutual_info_symbol(s) + index_mi_quadrature(s);
        std::printf("%8.1f %10.6f %10.6f %10.6f %12.6f\n", db,
                    capacity_closed_form(s, 0).value, capacity_closed_form(s, 2).value,
                    capacity_closed_form(s, 4).value, exact);
    }

    std::printf("\nergodic capacity, rayleigh pair selection, r = 2\n");
    std::printf("%8s %12s %14s\n", "snr_db", "closed_form", "monte_carlo");
    FadingSpec fading;
    EnsembleSpec ensemble;
    for (double db : {0.0, 10.0, 20.0}) {
        const double gamma = std::pow(10.0, db / 10.0);
        const double cf = ergodic_capacity(fading, gamma).value;
        const auto mc = ergodic_mc(ensemble, gamma, Method::order2, 20000, 20170301);
        std::printf("%8.1f %12.6f %11.6f +- %.4f\n", db, cf, mc.value, mc.std_error);
    }
    return 0;
}
