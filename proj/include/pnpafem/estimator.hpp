#pragma once

#include <vector>

#include "pnpafem/pnp.hpp"

namespace pnpafem {

/// Per-element and per-edge contributions of the residual estimator.
/// eta_edge is indexed by global edge id and is zero on boundary edges.
/// element_indicator combines eta_elem with half of each incident interior
/// edge term, so that the squared indicators sum to eta_global^2.
struct EstimatorBreakdown {
    std::vector<double> eta_elem;
    std::vector<double> eta_edge;
    std::vector<double> osc_elem;
    std::vector<double> element_indicator;
    double eta_global = 0.0;
    double osc_global = 0.0;
};

struct EstimatorOptions {
    /// When set, the potential jump term uses [eps grad(psi).n] instead of
    /// the plain [grad(psi).n].
    bool scale_psi_jump_by_epsilon = false;
};

/**
 * Residual error estimator. Element terms, with f_{T,i} the elementwise
 * quadrature mean of f_i:
 *
 *   eta_T^2 = h_T^2/eps * ( ||grad p_h . grad psi_h + f_{T,1}||_T^2
 *                         + ||grad n_h . grad psi_h - f_{T,2}||_T^2
 *                         + ||n_h - p_h - f_{T,3}||_T^2 )
 *
 * interior edge terms (jumps across E, zero on the boundary):
 *
 *   eta_E^2 = h_E/eps * ( ||[grad p_h.n] + [p_h grad psi_h.n]||_E^2
 *                       + ||[grad n_h.n] - [n_h grad psi_h.n]||_E^2
 *                       + ||[grad psi_h.n]||_E^2 )
 *
 * and the data oscillation osc_T^2 = h_T^2/eps * sum_i ||f_i - f_{T,i}||_T^2.
 */
EstimatorBreakdown estimate(const PNPState& state, const ProblemSpec& spec,
                            const EstimatorOptions& options = {});

/// Maximum strategy: elements whose indicator reaches theta times the
/// largest indicator. Empty only when every indicator is zero.
std::vector<int> mark_maximum(const EstimatorBreakdown& breakdown, double theta = 0.5);

/// Bulk (Dorfler) criterion: greedily collects elements by descending
/// indicator until their squared sum reaches theta^2 * eta_global^2; ties at
/// the cutoff are all included.
std::vector<int> mark_dorfler(const EstimatorBreakdown& breakdown, double theta = 0.3);

}  // namespace pnpafem
