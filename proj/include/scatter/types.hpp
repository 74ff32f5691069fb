#ifndef SCATTER_TYPES_HPP
#define SCATTER_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace scatter {

using cd = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cd iu{0.0, 1.0};

/// Error categories raised by the library.  Each operation documents which
/// of these it can throw.
enum class Errc {
  domain,             // argument outside the operation's domain
  data,               // malformed or non-finite input data
  accuracy,           // quadrature/tail estimate exceeds the requested tolerance
  zero_set,           // evaluation requested inside a flagged zero neighborhood
  pole,               // vanishing denominator in the rank-one recursion
  range,              // root search hit the scan boundary
  grid_refinement,    // sampling too coarse to resolve a feature
  inconsistent_data,  // scattering data violates a hard consistency condition
  degenerate_data,    // data carries no information (e.g. zero phase)
  parse,              // config/text parsing failure
  io                  // filesystem failure
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

}  // namespace scatter

#endif
