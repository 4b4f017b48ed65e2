#include "chdisguise/profile_io.hpp"

#include <charconv>
#include <cstdio>
#include <string>

#include "chdisguise/errors.hpp"

namespace chdisguise {

namespace {

std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

double to_double(std::string_view s, std::string_view text) {
  const std::string copy(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(copy, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (copy.empty() || used != copy.size()) {
    throw ValidationError("bad beta grid '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_beta_grid(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 4 || parts[0] != "log") {
    throw ValidationError("beta grid must look like log:<lo>:<hi>:<count>, got '" +
                          std::string(text) + "'");
  }
  const double lo = to_double(parts[1], text);
  const double hi = to_double(parts[2], text);
  std::size_t count = 0;
  const auto [ptr, ec] = std::from_chars(parts[3].data(), parts[3].data() + parts[3].size(), count);
  if (ec != std::errc() || ptr != parts[3].data() + parts[3].size()) {
    throw ValidationError("bad beta grid count in '" + std::string(text) + "'");
  }
  return log_beta_grid(lo, hi, count);
}

void write_profile_csv(std::ostream& out, const ProfileCurve& curve,
                       const std::optional<std::vector<double>>& alpha_exact) {
  if (alpha_exact && alpha_exact->size() != curve.samples.size()) {
    throw ValidationError("write_profile_csv: one exact alpha per sample required");
  }
  out << "beta,alpha_lo,alpha_hi,p_lo,q_lo,p_hi,q_hi,tight";
  if (alpha_exact) out << ",alpha_exact";
  out << '\n';
  for (std::size_t i = 0; i < curve.samples.size(); ++i) {
    const BetaSample& s = curve.samples[i];
    const TradeoffPoint lo = curve.raw_lower[i];
    const TradeoffPoint hi = curve.raw_upper[i];
    out << fmt12(s.beta) << ',' << fmt12(s.alpha_lower) << ',' << fmt12(s.alpha_upper) << ','
        << fmt12(lo.p) << ',' << fmt12(lo.q) << ',' << fmt12(hi.p) << ',' << fmt12(hi.q) << ','
        << (s.tight ? 1 : 0);
    if (alpha_exact) out << ',' << fmt12((*alpha_exact)[i]);
    out << '\n';
  }
}

void write_points_csv(std::ostream& out, std::span<const TradeoffPoint> points) {
  out << "p,q\n";
  for (const auto& pt : points) out << fmt12(pt.p) << ',' << fmt12(pt.q) << '\n';
}

}  // namespace chdisguise
