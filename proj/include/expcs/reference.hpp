#pragma once

// Straightforward single-threaded versions of the parallel kernels. They use
// a different loop structure (scatter instead of gather, one odometer instead
// of per-lead chunks) and serve as test oracles and benchmark baselines.

#include <cstdint>
#include <span>
#include <vector>

#include "expcs/expander.hpp"

namespace expcs::reference {

/// (A x) / d by scattering each column into its neighbours.
std::vector<double> apply(const ExpanderGraph& g, std::span<const double> x);

/// (A^T r) / d by scattering each right node into its left neighbours.
std::vector<double> apply_adjoint(const ExpanderGraph& g, std::span<const double> r);

/// Exact-mode expansion check by a single size-major lexicographic scan.
ExpansionCertificate verify_expansion_exact(const ExpanderGraph& g, std::size_t k,
                                            double epsilon, std::uint64_t budget);

/// Kraft sum of the support-code penalty grouped by support size:
/// sum_s C(n, s) (2^B)^s exp(-pen_s).
double kraft_sum_support_code(std::size_t n, unsigned bits);

}  // namespace expcs::reference
