#ifndef LIEJET_ERROR_HPP
#define LIEJET_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liejet {

/// Error taxonomy used across the library.
///
/// - parse:      malformed expression text (carries a byte offset)
/// - config:     structurally invalid configuration (dimensions, names, ranges)
/// - domain:     scalar evaluation left the domain of an elementary function
/// - shape:      incompatible scalar shapes (mixed Taylor degrees, jet order too low)
/// - regularity: fiber Hessian too close to singular to advance the dynamics
/// - invalid:    invalid argument to an API entry point
class Error : public std::runtime_error {
public:
  enum class Kind { parse, config, domain, shape, regularity, invalid };

  Error(Kind kind, const std::string& message, std::size_t offset = npos)
      : std::runtime_error(message), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }

  /// Byte offset into the offending source text; npos when not applicable.
  std::size_t offset() const { return offset_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  Kind kind_;
  std::size_t offset_;
};

[[noreturn]] inline void throw_parse(const std::string& msg, std::size_t offset) {
  throw Error(Error::Kind::parse, msg + " at offset " + std::to_string(offset), offset);
}
[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(Error::Kind::config, msg);
}
[[noreturn]] inline void throw_domain(const std::string& msg) {
  throw Error(Error::Kind::domain, msg);
}
[[noreturn]] inline void throw_shape(const std::string& msg) {
  throw Error(Error::Kind::shape, msg);
}
[[noreturn]] inline void throw_regularity(const std::string& msg) {
  throw Error(Error::Kind::regularity, msg);
}
[[noreturn]] inline void throw_invalid(const std::string& msg) {
  throw Error(Error::Kind::invalid, msg);
}

} // namespace liejet

#endif
