#include "stefan/core/config.hpp"

#include <cmath>
#include <string>

#include "stefan/core/errors.hpp"

namespace stefan {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid StefanConfig: ") + what);
}

}  // namespace

void StefanConfig::validate() const {
  for (double v : {fo, ste, delta, theta_l, theta_r, t0, t1, x0, x1}) {
    require(std::isfinite(v), "all fields must be finite");
  }
  require(fo > 0.0, "fo must be positive");
  require(ste > 0.0, "ste must be positive");
  require(delta > 0.0, "delta must be positive");
  require(t0 >= 0.0, "t0 must be non-negative");
  require(t1 > t0, "t1 must exceed t0");
  require(x1 > x0, "x1 must exceed x0");
  require(theta_l > 0.0, "theta_l must be positive (liquid at the left wall)");
  require(theta_r < 0.0, "theta_r must be negative (solid far field)");
}

}  // namespace stefan
