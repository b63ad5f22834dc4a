#pragma once

// Two-sample chi-square test of homogeneity for a pair of count vectors over
// the same cells. Cells empty in both samples are dropped from the table and
// from the degrees of freedom.

#include <cstdint>

#include "floret/estimation.hpp"
#include "floret/gof.hpp"

namespace floret::testing {

struct Homogeneity {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

inline Homogeneity two_sample_chi_square(const ObservedCounts& a, const ObservedCounts& b) {
  const double na = static_cast<double>(a.total());
  const double nb = static_cast<double>(b.total());
  Homogeneity out;
  int cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double pooled = static_cast<double>(a[i] + b[i]);
    if (pooled == 0.0) continue;
    ++cells;
    const double ea = pooled * na / (na + nb);
    const double eb = pooled * nb / (na + nb);
    out.statistic += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
  }
  out.df = cells - 1;
  out.p_value = out.df > 0 ? chisq_upper_tail(out.statistic, out.df) : 1.0;
  return out;
}

}  // namespace floret::testing
