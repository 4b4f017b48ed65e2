#pragma once

// Plot-ready CSV output for trade-off profiles. Numbers use 12 significant
// digits so that regression tests can diff the files byte for byte.

#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "chdisguise/disguise.hpp"

namespace chdisguise {

/// Parses "log:<lo>:<hi>:<count>" into log_beta_grid(lo, hi, count).
/// Throws ValidationError on any other form.
std::vector<double> parse_beta_grid(std::string_view text);

/// One row per sample in grid order:
///   beta,alpha_lo,alpha_hi,p_lo,q_lo,p_hi,q_hi,tight[,alpha_exact]
/// The last column is written only when `alpha_exact` is given; it must
/// then hold one value per sample.
void write_profile_csv(std::ostream& out, const ProfileCurve& curve,
                       const std::optional<std::vector<double>>& alpha_exact = std::nullopt);

/// "p,q" rows.
void write_points_csv(std::ostream& out, std::span<const TradeoffPoint> points);

}  // namespace chdisguise
