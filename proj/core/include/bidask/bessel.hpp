#pragma once

namespace bidask {

// log I0(x) for x >= 0, where I0 is the modified Bessel function of the
// first kind of order zero. Uses the power series up to x = 700 and the
// large-argument asymptotic expansion
//     ln I0(x) = x - ln(2 pi x)/2 + ln(1 + 1/(8x) + 9/(2(8x)^2) + ...)
// beyond, so the result never overflows even where I0 itself would
// (I0(710) > DBL_MAX). Absolute error <= 1e-10 across the series range.
// Throws invalid_input for negative or NaN arguments.
double log_bessel_i0(double x);

} // namespace bidask
