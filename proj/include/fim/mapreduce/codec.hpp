#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "fim/error.hpp"

namespace fim::mr {

// Little-endian binary encoding used by the spill files.
template <class T, class = void>
struct Codec;

namespace detail {

template <class U>
void put_le(std::string& out, U v) {
  using UU = std::make_unsigned_t<U>;
  auto u = static_cast<UU>(v);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

template <class U>
U get_le(const char*& p, const char* end) {
  if (static_cast<std::size_t>(end - p) < sizeof(U)) throw IoError("truncated spill record");
  using UU = std::make_unsigned_t<U>;
  UU u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<UU>(static_cast<unsigned char>(p[i])) << (8 * i);
  p += sizeof(U);
  return static_cast<U>(u);
}

}  // namespace detail

// Integral values occupy 8 bytes regardless of width.
template <class T>
struct Codec<T, std::enable_if_t<std::is_integral_v<T>>> {
  static void write(std::string& out, T v) { detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(v)); }
  static T read(const char*& p, const char* end) { return static_cast<T>(detail::get_le<std::uint64_t>(p, end)); }
};

template <>
struct Codec<std::string> {
  static void write(std::string& out, const std::string& s) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
  }
  static std::string read(const char*& p, const char* end) {
    const auto n = detail::get_le<std::uint32_t>(p, end);
    if (static_cast<std::size_t>(end - p) < n) throw IoError("truncated spill record");
    std::string s(p, n);
    p += n;
    return s;
  }
};

// Vectors of 32-bit integers are packed; other element types recurse.
template <class T>
struct Codec<std::vector<T>> {
  static void write(std::string& out, const std::vector<T>& v) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
    if constexpr (std::is_integral_v<T> && sizeof(T) == 4) {
      for (T x : v) detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x));
    } else {
      for (const auto& x : v) Codec<T>::write(out, x);
    }
  }
  static std::vector<T> read(const char*& p, const char* end) {
    const auto n = detail::get_le<std::uint32_t>(p, end);
    std::vector<T> v;
    v.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      if constexpr (std::is_integral_v<T> && sizeof(T) == 4)
        v.push_back(static_cast<T>(detail::get_le<std::uint32_t>(p, end)));
      else
        v.push_back(Codec<T>::read(p, end));
    }
    return v;
  }
};

template <class A, class B>
struct Codec<std::pair<A, B>> {
  static void write(std::string& out, const std::pair<A, B>& v) {
    Codec<A>::write(out, v.first);
    Codec<B>::write(out, v.second);
  }
  static std::pair<A, B> read(const char*& p, const char* end) {
    A a = Codec<A>::read(p, end);
    B b = Codec<B>::read(p, end);
    return {std::move(a), std::move(b)};
  }
};

}  // namespace fim::mr
