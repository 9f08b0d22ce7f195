#ifndef BOHMFLUX_VERSION_HPP
#define BOHMFLUX_VERSION_HPP

namespace bohmflux {

inline constexpr const char* kVersionString = "bohmflux 0.1.0";

}

#endif
