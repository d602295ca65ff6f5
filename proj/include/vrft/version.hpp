#ifndef VRFT_VERSION_HPP_
#define VRFT_VERSION_HPP_

namespace vrft {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vrft

#endif  // VRFT_VERSION_HPP_
