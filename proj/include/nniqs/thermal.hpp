// Gibbs-state condensate expectations from sector-decomposed spectra.
// The whole spectrum plus per-level diagonal matrix elements of the
// condensate operator are flattened into one list; thermal traces then
// reduce over it with the minimum energy subtracted before exponentiation.
#ifndef NNIQS_THERMAL_HPP
#define NNIQS_THERMAL_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/eigen.hpp"
#include "nniqs/model.hpp"

namespace nniqs::thermal {

struct EigenSystem {
    spin::SectorBasis sector;
    std::vector<double> eigenvalues; // ascending, units of g
    Matrix eigenvectors;             // orthonormal columns
};

inline EigenSystem diagonalize(const spin::HamiltonianBlock& block) {
    auto dec = eig::symmetric_eigensolve(block.matrix);
    return EigenSystem{block.sector, std::move(dec.eigenvalues), std::move(dec.eigenvectors)};
}

// (E_k, O_kk) pairs over all sectors with O_kk = sum_i v_ik^2 d(i), plus the
// global minimum energy and the physical-units scale.
struct SpectralObservable {
    std::vector<double> energies;
    std::vector<double> diag_elements;
    double e_min = 0.0;
    double scale = 1.0;
};

inline SpectralObservable make_observable(const std::vector<EigenSystem>& systems,
                                          const spin::CondensateDiagonal& condensate) {
    SpectralObservable obs;
    obs.scale = condensate.scale;
    obs.e_min = std::numeric_limits<double>::infinity();
    std::size_t total = 0;
    for (const auto& s : systems) total += s.eigenvalues.size();
    obs.energies.reserve(total);
    obs.diag_elements.reserve(total);

    for (const auto& sys : systems) {
        const std::size_t dim = sys.eigenvalues.size();
        for (std::size_t k = 0; k < dim; ++k) {
            double o = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                const double v = sys.eigenvectors(i, k);
                o += v * v * condensate.values[sys.sector.states[i]];
            }
            obs.energies.push_back(sys.eigenvalues[k]);
            obs.diag_elements.push_back(o);
            if (sys.eigenvalues[k] < obs.e_min) obs.e_min = sys.eigenvalues[k];
        }
    }
    return obs;
}

// scale * sum_k w_k O_kk / sum_k w_k with w_k = exp(-(E_k - E_min)/t).
// t = +inf degenerates to the unweighted mean (maximally mixed state).
inline double thermal_expectation(const SpectralObservable& obs, double t_over_g) {
    if (!(t_over_g > 0.0))
        throw invariant_error("thermal_expectation: temperature must be positive");
    if (obs.energies.empty())
        throw invariant_error("thermal_expectation: empty spectrum");

    double num = 0.0;
    double den = 0.0;
    if (std::isinf(t_over_g)) {
        for (double o : obs.diag_elements) num += o;
        den = static_cast<double>(obs.energies.size());
    } else {
        for (std::size_t k = 0; k < obs.energies.size(); ++k) {
            const double w = std::exp(-(obs.energies[k] - obs.e_min) / t_over_g);
            num += w * obs.diag_elements[k];
            den += w;
        }
    }
    return obs.scale * num / den;
}

// Diagonalize every sector of `params` once and bundle the condensate
// observable; reused across a whole temperature sweep.
inline SpectralObservable prepare_observable(const spin::ModelParams& params) {
    params.validate();
    const auto sectors = spin::enumerate_sectors(params);
    const auto condensate = spin::build_condensate_diagonal(params);
    std::vector<EigenSystem> systems;
    systems.reserve(sectors.size());
    for (const auto& sector : sectors)
        systems.push_back(diagonalize(spin::build_block(params, sector)));
    return make_observable(systems, condensate);
}

// Condensate vs temperature for one (N, w/g, mu/g); one diagonalization set
// for the whole axis.
inline std::vector<double> sweep(const spin::ModelParams& params,
                                 const std::vector<double>& t_axis) {
    if (t_axis.empty()) throw invariant_error("sweep: empty temperature axis");
    for (std::size_t i = 0; i < t_axis.size(); ++i) {
        if (t_axis[i] < 0.1)
            throw invariant_error("sweep: temperatures below 0.1 are outside the modeled range");
        if (i > 0 && t_axis[i] <= t_axis[i - 1])
            throw invariant_error("sweep: temperature axis must be strictly increasing");
    }
    const auto obs = prepare_observable(params);
    std::vector<double> out(t_axis.size());
    for (std::size_t i = 0; i < t_axis.size(); ++i)
        out[i] = thermal_expectation(obs, t_axis[i]);
    return out;
}

} // namespace nniqs::thermal

#endif
