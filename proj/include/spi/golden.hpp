#ifndef SPI_GOLDEN_HPP_
#define SPI_GOLDEN_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace spi {

/// The worked examples shipped with the tool, as `.spi` sources.
struct GoldenExample {
  std::string name;
  std::string source;
};

const std::vector<GoldenExample>& golden_examples();
/// Throws std::out_of_range for an unknown name.
const std::string& golden_source(std::string_view name);

struct SelfCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the analyses on the golden examples and compares with the expected
/// verdicts and graph shapes.
std::vector<SelfCheck> run_selftest();

} // namespace spi

#endif // SPI_GOLDEN_HPP_
