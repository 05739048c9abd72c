#include "snlab/specfun.hpp"

namespace snlab {

// glibc's erf is correctly rounded to within an ulp over the whole line; the
// independent series oracle in tests/test_specfun.cpp guards that assumption.
double erf(double x) {
  if (!std::isfinite(x)) throw std::domain_error("erf: argument must be finite");
  return std::erf(x);
}

EllipticModulus::EllipticModulus(double k) : k_(k) {
  if (!(k >= 0) || !(k < 1)) throw std::domain_error("EllipticModulus: k must satisfy 0 <= k < 1");
}

}  // namespace snlab
