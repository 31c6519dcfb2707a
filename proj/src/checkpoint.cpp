#include "fraceig/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fraceig/config.hpp"
#include "fraceig/error.hpp"

namespace fraceig {
namespace {

constexpr char kMagic[] = "FSEV1";

std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((bits >> (8 * i)) & 0xffU) << (8 * (7 - i));
    return out;
  }
  return bits;
}

[[noreturn]] void fail(const std::string& section, const std::string& what) {
  throw FormatError("corrupt checkpoint: " + section + " section: " + what);
}

std::string read_line(std::istream& in, const std::string& section) {
  std::string line;
  if (!std::getline(in, line)) fail(section, "unexpected end of file");
  return line;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ModeSnapshot& snapshot) {
  const Architecture& a = snapshot.params.arch();
  out << kMagic << '\n';
  out << a.d << ' ' << a.l << ' ' << a.m << ' ' << snapshot.features.size() << '\n';
  for (const FeatureSpec& f : snapshot.features) out << token(f.kind) << ' ' << format_double(f.exponent) << '\n';
  for (double v : snapshot.params.values()) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
  out << format_double(snapshot.lambda_hat) << ' ' << format_double(snapshot.lambda_se) << ' '
      << format_double(snapshot.l2_norm_sq) << '\n';
}

void save_checkpoint(const std::filesystem::path& path, const ModeSnapshot& snapshot) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  write_checkpoint(out, snapshot);
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

ModeSnapshot read_checkpoint(std::istream& in) {
  if (read_line(in, "magic") != kMagic) fail("magic", "expected FSEV1");

  Architecture arch;
  long long count = 0;
  {
    std::istringstream header(read_line(in, "header"));
    std::string rest;
    if (!(header >> arch.d >> arch.l >> arch.m >> count) || (header >> rest)) fail("header", "expected 'd l m featcount'");
    if (arch.d < 1 || arch.l < 1 || arch.m < 1 || arch.d > 64 || arch.l > 64 || arch.m > 4096) {
      fail("header", "dimensions out of range");
    }
    if (count != arch.m) fail("header", "feature count must equal the width");
  }

  ModeSnapshot snapshot;
  for (long long j = 0; j < count; ++j) {
    std::istringstream line(read_line(in, "features"));
    std::string name, rest;
    double p = 0.0;
    if (!(line >> name >> p) || (line >> rest)) fail("features", "expected 'type p' on feature " + std::to_string(j + 1));
    try {
      snapshot.features.push_back({parse_feature_kind(name), p});
    } catch (const FormatError& e) {
      fail("features", e.what());
    }
  }

  snapshot.params = NetworkParams(arch);
  for (double& v : snapshot.params.values()) {
    char bytes[8];
    if (!in.read(bytes, 8)) fail("parameters", "truncated parameter block");
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes, 8);
    v = std::bit_cast<double>(to_little(bits));
  }

  std::istringstream footer(read_line(in, "footer"));
  std::string rest;
  if (!(footer >> snapshot.lambda_hat >> snapshot.lambda_se >> snapshot.l2_norm_sq) || (footer >> rest)) {
    fail("footer", "expected 'lambda_hat lambda_se l2_norm_sq'");
  }
  if (in.peek() != std::char_traits<char>::eof()) fail("footer", "trailing data");
  return snapshot;
}

ModeSnapshot load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace fraceig
