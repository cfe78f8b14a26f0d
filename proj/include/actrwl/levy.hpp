#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace actrwl {

/// Parametric outer Levy process A_t:
///  - brownian(mu, A):        E[e^{iuA_t}] = exp[t(i mu u - A u^2 / 2)]
///  - symmetric_stable(beta, scale): exponent -scale |u|^beta, beta in (0,2]
///  - poisson(lambda):        counting process
///  - compound_poisson(lambda, normal jumps (jump_mean, jump_sd))
struct LevyFamily {
    enum class Kind { Brownian, SymmetricStable, Poisson, CompoundPoisson };

    Kind kind = Kind::Brownian;
    double mu = 0.0;        // brownian drift
    double A = 1.0;         // brownian variance coefficient
    double beta = 2.0;      // stable index
    double scale = 1.0;     // stable scale
    double lambda = 1.0;    // poisson / compound poisson rate
    double jump_mean = 0.0; // compound poisson normal jumps
    double jump_sd = 1.0;

    static LevyFamily brownian(double mu, double A) {
        if (!(A > 0.0)) throw std::invalid_argument("LevyFamily::brownian: A must be positive");
        LevyFamily f;
        f.kind = Kind::Brownian;
        f.mu = mu;
        f.A = A;
        return f;
    }

    static LevyFamily symmetric_stable(double beta, double scale = 1.0) {
        if (!(beta > 0.0 && beta <= 2.0))
            throw std::invalid_argument("LevyFamily::symmetric_stable: beta in (0,2] required");
        if (!(scale > 0.0))
            throw std::invalid_argument("LevyFamily::symmetric_stable: scale must be positive");
        LevyFamily f;
        f.kind = Kind::SymmetricStable;
        f.beta = beta;
        f.scale = scale;
        return f;
    }

    static LevyFamily poisson(double lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("LevyFamily::poisson: lambda > 0");
        LevyFamily f;
        f.kind = Kind::Poisson;
        f.lambda = lambda;
        return f;
    }

    static LevyFamily compound_poisson(double lambda, double jump_mean, double jump_sd) {
        if (!(lambda > 0.0) || !(jump_sd >= 0.0))
            throw std::invalid_argument("LevyFamily::compound_poisson: bad parameters");
        LevyFamily f;
        f.kind = Kind::CompoundPoisson;
        f.lambda = lambda;
        f.jump_mean = jump_mean;
        f.jump_sd = jump_sd;
        return f;
    }

    /// True when P(A_u = 0) = 0 for u > 0 (the process has a density).
    bool has_density() const {
        return kind == Kind::Brownian || kind == Kind::SymmetricStable;
    }

    bool is_lattice() const { return kind == Kind::Poisson; }

    /// Strictly stable self-similarity index: A_{au} = a^{1/hurst_beta} A_u in law.
    /// Brownian without drift is the beta = 2 case.
    double stability_index() const {
        if (kind == Kind::Brownian && mu == 0.0) return 2.0;
        if (kind == Kind::SymmetricStable) return beta;
        throw std::invalid_argument("LevyFamily: not a strictly stable family");
    }

    std::string label() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::Brownian: os << "brownian(" << mu << "," << A << ")"; break;
            case Kind::SymmetricStable:
                os << "symmetric_stable(" << beta << "," << scale << ")";
                break;
            case Kind::Poisson: os << "poisson(" << lambda << ")"; break;
            case Kind::CompoundPoisson:
                os << "compound_poisson(" << lambda << ",normal(" << jump_mean << ","
                   << jump_sd << "))";
                break;
        }
        return os.str();
    }
};

/// The symbol psi(-k) entering the Fourier-Laplace solution
/// s^{alpha-1} / (s^alpha - psi(-k)):
///   brownian:  -i mu k - A k^2 / 2
///   stable:    -scale |k|^beta
///   poisson:   lambda (e^{-ik} - 1)
///   compound:  lambda (E[e^{-ikJ}] - 1)
inline std::complex<double> levy_symbol(const LevyFamily& fam, double k) {
    using namespace std::complex_literals;
    switch (fam.kind) {
        case LevyFamily::Kind::Brownian:
            return std::complex<double>(-0.5 * fam.A * k * k, -fam.mu * k);
        case LevyFamily::Kind::SymmetricStable:
            return std::complex<double>(-fam.scale * std::pow(std::abs(k), fam.beta), 0.0);
        case LevyFamily::Kind::Poisson:
            return fam.lambda * (std::exp(std::complex<double>(0.0, -k)) - 1.0);
        case LevyFamily::Kind::CompoundPoisson: {
            const std::complex<double> cf =
                std::exp(std::complex<double>(-0.5 * fam.jump_sd * fam.jump_sd * k * k,
                                              -fam.jump_mean * k));
            return fam.lambda * (cf - 1.0);
        }
    }
    throw std::logic_error("levy_symbol: unsupported family");
}

} // namespace actrwl
