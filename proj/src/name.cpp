#include "spi/name.hpp"

#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace spi {
namespace {

struct Entry {
  std::unique_ptr<const std::string> text;
  bool interned;
};

class NameTable {
public:
  NameTable() { entries_.push_back({std::make_unique<const std::string>("<invalid>"), false}); }

  std::uint32_t intern(std::string_view text) {
    std::lock_guard lock(mutex_);
    auto it = by_text_.find(std::string(text));
    if (it != by_text_.end()) return it->second;
    auto id = push(text, true);
    by_text_.emplace(std::string(text), id);
    return id;
  }

  std::uint32_t fresh(std::string_view text) {
    std::lock_guard lock(mutex_);
    return push(text, false);
  }

  const std::string& text(std::uint32_t id) {
    std::lock_guard lock(mutex_);
    return *entries_.at(id).text;
  }

  bool interned(std::uint32_t id) {
    std::lock_guard lock(mutex_);
    return entries_.at(id).interned;
  }

private:
  std::uint32_t push(std::string_view text, bool interned) {
    if (entries_.size() >= UINT32_MAX) throw std::length_error("name table exhausted");
    entries_.push_back({std::make_unique<const std::string>(text), interned});
    return static_cast<std::uint32_t>(entries_.size() - 1);
  }

  std::mutex mutex_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::uint32_t> by_text_;
};

NameTable& table() {
  static NameTable t;
  return t;
}

} // namespace

Name Name::free(std::string_view text) { return Name(table().intern(text)); }

Name Name::fresh(std::string_view text) { return Name(table().fresh(text)); }

const std::string& Name::text() const { return table().text(id_); }

bool Name::interned() const { return table().interned(id_); }

bool NameTextLess::operator()(Name a, Name b) const {
  if (a == b) return false;
  const auto& ta = a.text();
  const auto& tb = b.text();
  if (ta != tb) return ta < tb;
  return a.id() < b.id();
}

} // namespace spi
