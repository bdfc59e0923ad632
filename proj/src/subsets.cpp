#include "bvm/subsets.hpp"

#include <charconv>

namespace bvm {

std::vector<int> subset_members(Subset s) {
  std::vector<int> out;
  for (int i = 0; s != 0; ++i, s >>= 1) {
    if (s & 1U) out.push_back(i);
  }
  return out;
}

std::string subset_key(Subset s) {
  std::string out;
  for (int i : subset_members(s)) {
    if (!out.empty()) out += ',';
    out += std::to_string(i);
  }
  return out;
}

bool parse_subset_key(std::string_view text, int size, Subset& out) {
  out = 0;
  if (text.empty()) return true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view part = text.substr(pos, comma - pos);
    int value = -1;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || value < 0 ||
        value >= size) {
      return false;
    }
    if (subset_contains(out, value)) return false;
    out |= Subset{1} << value;
    pos = comma + 1;
  }
  return true;
}

std::vector<Subset> subsets_of(Subset s) {
  std::vector<Subset> out;
  // Enumerate submasks in increasing order.
  Subset sub = 0;
  while (true) {
    out.push_back(sub);
    if (sub == s) break;
    sub = (sub - s) & s;
  }
  return out;
}

}  // namespace bvm
