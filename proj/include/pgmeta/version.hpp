#ifndef PGMETA_VERSION_HPP
#define PGMETA_VERSION_HPP

namespace pgmeta {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pgmeta

#endif  // PGMETA_VERSION_HPP
