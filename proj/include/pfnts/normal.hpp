#pragma once

namespace pfnts {

double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;

// Inverse standard normal CDF. Acklam's rational approximation (relative
// error below 1.2e-9) followed by one Halley step against erfc, which brings
// the result to within a few ulps. Throws ParamError unless 0 < p < 1.
double normal_quantile(double p);

}  // namespace pfnts
