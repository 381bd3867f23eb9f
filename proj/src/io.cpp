#include "wgm/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wgm/errors.hpp"

namespace wgm {

static_assert(std::endian::native == std::endian::little,
              "mode files are written in host order, which must be little-endian");

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string provenance(const std::string& config_hash) {
  return std::string("wgm ") + kToolVersion + " config fnv1a:" + config_hash;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

namespace {

constexpr char kMagic[8] = {'W', 'G', 'M', 'M', 'O', 'D', 'E', '\0'};

// Arrays in file order with their node-set dimensions.
struct ArraySlot {
  NodeArray ModeProfile::*member;
  NodeSet set;
};

constexpr ArraySlot kSlots[12] = {
    {&ModeProfile::ex, NodeSet::ex}, {&ModeProfile::ey, NodeSet::ey}, {&ModeProfile::ez, NodeSet::ez},
    {&ModeProfile::hx, NodeSet::ey}, {&ModeProfile::hy, NodeSet::ex}, {&ModeProfile::hz, NodeSet::hz},
    {&ModeProfile::dx, NodeSet::ex}, {&ModeProfile::dy, NodeSet::ey}, {&ModeProfile::dz, NodeSet::ez},
    {&ModeProfile::bx, NodeSet::ey}, {&ModeProfile::by, NodeSet::ex}, {&ModeProfile::bz, NodeSet::hz},
};

void put_double(std::string& out, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

double get_double(std::string_view in, std::size_t& pos) {
  double v;
  std::memcpy(&v, in.data() + pos, 8);
  pos += 8;
  return v;
}

}  // namespace

std::string encode_mode(const ModeProfile& m) {
  std::string out(kMagic, 8);
  for (double v : {kModeFormatVersion, double(m.grid.nx), double(m.grid.ny), m.grid.hx(), m.grid.hy(),
                   m.omega, m.k})
    put_double(out, v);
  for (const auto& slot : kSlots) {
    const NodeArray& a = m.*slot.member;
    const auto [nx, ny] = node_dims(m.grid, slot.set);
    if (a.nx != nx || a.ny != ny) throw ValidationError("mode array has the wrong node dimensions");
    for (const cplx& v : a.v) {
      put_double(out, v.real());
      put_double(out, v.imag());
    }
  }
  return out;
}

ModeProfile decode_mode(std::string_view in) {
  if (in.size() < 64 || std::memcmp(in.data(), kMagic, 8) != 0)
    throw ValidationError("not a mode file (bad magic)");
  std::size_t pos = 8;
  const double version = get_double(in, pos);
  if (version != kModeFormatVersion)
    throw ValidationError("unsupported mode format version " + std::to_string(version));
  const double nx = get_double(in, pos), ny = get_double(in, pos);
  const double hx = get_double(in, pos), hy = get_double(in, pos);
  ModeProfile m;
  m.omega = get_double(in, pos);
  m.k = get_double(in, pos);
  if (!(nx >= 1 && ny >= 1 && nx < 1e7 && ny < 1e7 && hx > 0 && hy > 0))
    throw ValidationError("mode file header has an invalid grid");
  m.grid = Grid2D(0.0, nx * hx, 0.0, ny * hy, static_cast<int>(nx), static_cast<int>(ny));
  m.eta = m.k * si::c0 / m.omega;
  for (const auto& slot : kSlots) {
    const auto [ax, ay] = node_dims(m.grid, slot.set);
    NodeArray a(ax, ay);
    if (in.size() < pos + a.v.size() * 16) throw ValidationError("mode file is truncated");
    for (auto& v : a.v) {
      const double re = get_double(in, pos);
      v = {re, get_double(in, pos)};
    }
    m.*slot.member = std::move(a);
  }
  if (pos != in.size()) throw ValidationError("mode file has trailing bytes");
  return m;
}

void write_mode_binary(const std::string& path, const ModeProfile& m) {
  write_text_file(path, encode_mode(m));
}

ModeProfile read_mode_binary(const std::string& path) { return decode_mode(read_text_file(path)); }

std::string mode_scalars_csv(const std::vector<ModeProfile>& modes, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "index,eta,k,xiE,xiM,residual,decay,cluster\n" << std::setprecision(17);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    os << i << ',' << m.eta << ',' << m.k << ',' << m.xi_e << ',' << m.xi_m << ',' << m.residual << ','
       << m.decay << ',' << m.cluster << '\n';
  }
  return os.str();
}

}  // namespace wgm
