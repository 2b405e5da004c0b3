#ifndef VERSTORE_ERRORS_HPP
#define VERSTORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace verstore {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define VERSTORE_DEFINE_ERROR(Name)                       \
  struct Name : Error {                                   \
    explicit Name(const std::string& msg) : Error(msg) {} \
  }

VERSTORE_DEFINE_ERROR(InfeasibleError);
VERSTORE_DEFINE_ERROR(InvalidSolutionError);
VERSTORE_DEFINE_ERROR(UnreachableNodeError);
VERSTORE_DEFINE_ERROR(TooLargeError);
VERSTORE_DEFINE_ERROR(ParseError);
VERSTORE_DEFINE_ERROR(DuplicateEdgeError);
VERSTORE_DEFINE_ERROR(UnknownNodeError);
VERSTORE_DEFINE_ERROR(CyclicHistoryError);
VERSTORE_DEFINE_ERROR(InvalidDecompositionError);
VERSTORE_DEFINE_ERROR(CyclicAncError);
VERSTORE_DEFINE_ERROR(WidthExceededError);
VERSTORE_DEFINE_ERROR(OverflowError);
VERSTORE_DEFINE_ERROR(IOError);

#undef VERSTORE_DEFINE_ERROR

// Cost arithmetic is 64-bit; overflow is a hard error, never wraparound.
inline long long checked_add(long long a, long long b) {
  long long out;
  if (__builtin_add_overflow(a, b, &out)) throw OverflowError("cost addition overflow");
  return out;
}

inline long long checked_mul(long long a, long long b) {
  long long out;
  if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("cost multiplication overflow");
  return out;
}

}  // namespace verstore

#endif
