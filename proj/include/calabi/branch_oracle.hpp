#pragma once

#include <cmath>

#include "calabi/params.hpp"
#include "calabi/profile.hpp"
#include "calabi/quadrature.hpp"
#include "calabi/roots.hpp"

namespace calabi {

/// Independent reconstruction of the profile from the two-branch picture:
/// du = dpsi / (G_i(e^{mu psi} - C) - lambda), with G2 on the divisor side
/// (u < u0) and G1 past the nexus (u > u0). Kept separate from the
/// t-parametrized solver and used only as a cross-check oracle.
///
/// The integrable 1/sqrt singularity at psi -> psi0 is removed by the
/// substitution x = psi0 - w^2.
class BranchOracle {
  public:
    enum class Side { Divisor, Apex };  // u < u0 resp. u > u0

    BranchOracle(const DerivedConstants& consts, double u_nexus)
        : c_(consts), F_(StructureFunction{consts}), u0_(u_nexus) {
        psi0_ = std::log(c_.F_at_lambda() + c_.C_beta) / c_.mu;
    }

    double psi_nexus() const { return psi0_; }

    /// u as a function of psi on the chosen side (psi < psi0).
    double u_of_psi(double psi, Side side) const {
        if (!(psi < psi0_)) throw RangeError("branch oracle: psi must lie below psi0");
        const double W = std::sqrt(psi0_ - psi);
        // at the nexus t - lambda ~ +-w * slope0; guard the 0/0 with the limit
        const double slope0 =
            std::sqrt(2.0 * (c_.F_at_lambda() + c_.C_beta) /
                      std::pow(c_.lambda, c_.geom.n - 1));
        const double w_switch = 1e-5 * std::max(1.0, W);
        auto integrand = [&](double w) {
            if (w < w_switch) return 2.0 / slope0;
            const double x = psi0_ - w * w;
            const double s = std::exp(c_.mu * x) - c_.C_beta;
            double dt;
            if (side == Side::Divisor)
                dt = F_.invert(StructureFunction::Branch::G2, s) - c_.lambda;
            else
                dt = c_.lambda - F_.invert(StructureFunction::Branch::G1, s);
            if (!(dt > 0.0)) return 2.0 / slope0;
            return 2.0 * w / dt;
        };
        const double I = integrate(integrand, 0.0, W, 1e-12, 1e-15).value;
        return (side == Side::Divisor) ? u0_ - I : u0_ + I;
    }

    /// psi(u) by bracketed inversion of u_of_psi.
    double psi_at_u(double uu, Side side) const {
        if (side == Side::Divisor && !(uu < u0_))
            throw RangeError("branch oracle: divisor side needs u < u0");
        if (side == Side::Apex && !(uu > u0_))
            throw RangeError("branch oracle: apex side needs u > u0");

        auto f = [&](double psi) { return u_of_psi(psi, side) - uu; };
        double hi = psi0_ - 1e-13 * std::max(1.0, std::fabs(psi0_));
        double lo;
        if (side == Side::Divisor) {
            // u(psi) ~ u0 + (psi - psi0)/(alpha - lambda) far out
            lo = psi0_ - 2.0 * (c_.alpha() - c_.lambda) * (u0_ - uu) - 1.0;
        } else {
            lo = psi0_ - 1.0;
            if (c_.C_beta > 0.0) {
                const double psi_beta = std::log(c_.C_beta) / c_.mu;
                lo = std::max(lo, psi_beta + 1e-12 * std::fabs(psi_beta));
            }
            // walk down until bracketed
            for (int i = 0; i < 200 && f(lo) < 0.0; ++i) {
                const double next = psi0_ - 2.0 * (psi0_ - lo);
                if (c_.C_beta > 0.0) {
                    const double psi_beta = std::log(c_.C_beta) / c_.mu;
                    lo = 0.5 * (lo + psi_beta);
                } else {
                    lo = next;
                }
                if (psi0_ - lo > 1e6) break;
            }
        }
        return brent(f, lo, hi, 1e-13);
    }

  private:
    DerivedConstants c_;
    StructureFunction F_;
    double u0_;
    double psi0_;
};

}  // namespace calabi
