#pragma once

#include <cmath>
#include <vector>

#include "tatrec/operator.hpp"

namespace tatrec {

/// Energy of a Cauchy pair (u, u_t) over one region at one time:
/// e_hd is the Dirichlet part (gradient + potential), e_kin the weighted
/// kinetic part, total their sum.
struct EnergyReport {
    double t = 0.0;
    double e_hd = 0.0;
    double e_kin = 0.0;
    double total = 0.0;
    Region region = Region::full;
};

inline EnergyReport energy_of(const OperatorTable& T, const ScalarField& u, const ScalarField& ut,
                              Region region, double t) {
    EnergyReport r;
    r.t = t;
    r.region = region;
    r.e_hd = dirichlet_form(T, u, u, region);
    r.e_kin = inner_l2(T, ut, ut, region);
    r.total = r.e_hd + r.e_kin;
    return r;
}

inline EnergyReport energy_of(const Medium& m, const ScalarField& u, const ScalarField& ut,
                              Region region, double t) {
    return energy_of(OperatorTable(m), u, ut, region, t);
}

/// sqrt of the Dirichlet form; no boundary condition is imposed.
inline double hd_seminorm(const OperatorTable& T, const ScalarField& f,
                          Region region = Region::omega) {
    require_finite(f, "hd_seminorm");
    return std::sqrt(std::max(0.0, dirichlet_form(T, f, f, region)));
}

inline double hd_seminorm(const Medium& m, const ScalarField& f, Region region = Region::omega) {
    return hd_seminorm(OperatorTable(m), f, region);
}

/// H_D norm of a field vanishing on the region boundary.
inline double hd_norm(const OperatorTable& T, const ScalarField& f, Region region = Region::omega) {
    require_finite(f, "hd_norm");
    return std::sqrt(std::max(0.0, inner_hd(T, f, f, region)));
}

inline double hd_norm(const Medium& m, const ScalarField& f, Region region = Region::omega) {
    return hd_norm(OperatorTable(m), f, region);
}

inline double l2_norm(const OperatorTable& T, const ScalarField& f, Region region = Region::full) {
    require_finite(f, "l2_norm");
    return std::sqrt(std::max(0.0, inner_l2(T, f, f, region)));
}

inline double l2_norm(const Medium& m, const ScalarField& f, Region region = Region::full) {
    return l2_norm(OperatorTable(m), f, region);
}

/// Energy norm of a Cauchy pair: sqrt(E_region(f, psi)).
inline double cauchy_norm(const OperatorTable& T, const ScalarField& f, const ScalarField& psi,
                          Region region = Region::omega) {
    require_finite(f, "cauchy_norm");
    require_finite(psi, "cauchy_norm");
    return std::sqrt(std::max(0.0, energy_of(T, f, psi, region, 0.0).total));
}

inline double cauchy_norm(const Medium& m, const ScalarField& f, const ScalarField& psi,
                          Region region = Region::omega) {
    return cauchy_norm(OperatorTable(m), f, psi, region);
}

}  // namespace tatrec
