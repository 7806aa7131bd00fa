#ifndef SPI_NAME_HPP_
#define SPI_NAME_HPP_

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace spi {

/// An identifier with a process-wide identity.
///
/// Free names are interned by their text: `Name::free("k")` always yields the
/// same identity. Binders are created with `Name::fresh`, which allocates a new
/// identity that merely shares the display text. Two names are equal iff their
/// identities are equal; the text is only used for printing.
class Name {
public:
  Name() = default;

  static Name free(std::string_view text);
  static Name fresh(std::string_view text);

  /// A new binder identity with the same display text.
  Name freshen() const { return fresh(text()); }

  const std::string& text() const;
  std::uint32_t id() const { return id_; }
  bool valid() const { return id_ != 0; }
  /// True for names obtained from `free`, i.e. identified by their text.
  bool interned() const;

  friend bool operator==(Name a, Name b) { return a.id_ == b.id_; }
  friend std::strong_ordering operator<=>(Name a, Name b) { return a.id_ <=> b.id_; }

private:
  explicit Name(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = 0;
};

/// Orders names by display text first, then identity. Used wherever output
/// must not depend on allocation order.
struct NameTextLess {
  bool operator()(Name a, Name b) const;
};

} // namespace spi

template <>
struct std::hash<spi::Name> {
  std::size_t operator()(spi::Name n) const noexcept { return std::hash<std::uint32_t>{}(n.id()); }
};

#endif // SPI_NAME_HPP_
