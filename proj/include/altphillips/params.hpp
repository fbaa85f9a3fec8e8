#pragma once

#include <stdexcept>
#include <string>

namespace ap {

/// Growth exponent beta = 2/(2 - gamma). Admissible range is gamma in (1,2),
/// where beta > 2; solutions grow like dist^beta from the free boundary.
inline double beta_of(double gamma) {
    if (!(gamma > 1.0 && gamma < 2.0)) {
        throw std::invalid_argument("gamma = " + std::to_string(gamma) +
                                    " is outside the admissible interval (1, 2)");
    }
    return 2.0 / (2.0 - gamma);
}

/// Scalar parameters shared by all modules. Immutable after construction.
struct Params {
    double gamma;   ///< exponent of the reaction term u^{gamma-1}
    double beta;    ///< 2/(2-gamma), derived
    double lambda;  ///< ellipticity constant, >= 1

    explicit Params(double gamma_, double lambda_ = 1.0)
        : gamma(gamma_), beta(beta_of(gamma_)), lambda(lambda_) {
        if (!(lambda_ >= 1.0))
            throw std::invalid_argument("ellipticity constant lambda must be >= 1, got " +
                                        std::to_string(lambda_));
    }
};

}  // namespace ap
