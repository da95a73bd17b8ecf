#pragma once

#include "cbimc/curves.hpp"

#include <string>

namespace cbimc {

// CSV readers/writers for the pillar-curve and vol-quote interchange
// formats.  All files are comma-separated with a mandatory header row:
//   discount curve: tenor_years,discount_factor
//   forward curve:  tenor_years,forward_rate     (tenor passed separately)
//   vol surface:    expiry_years,strike,tenor_years,normal_vol_abs
// Parse failures carry file:line context in the exception message.

DiscountCurve load_discount_csv(const std::string& path);
ForwardCurve load_forward_csv(const std::string& path, double tenor);
VolSurface load_vol_csv(const std::string& path);

void save_discount_csv(const std::string& path, const DiscountCurve& curve);
void save_forward_csv(const std::string& path, const ForwardCurve& curve);
void save_vol_csv(const std::string& path, const VolSurface& surface);

} // namespace cbimc
