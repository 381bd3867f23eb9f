#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wgm/fdsolver.hpp"

namespace wgm {

inline constexpr const char* kToolVersion = "0.1.0";

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// "wgm <version> config fnv1a:<hash>", the first line of every text output.
std::string provenance(const std::string& config_hash);

std::string read_text_file(const std::string& path);
/// Creates parent directories; throws IoError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& content);

/// Mode binary layout (little-endian):
///   bytes 0-7   "WGMMODE\0"
///   bytes 8-63  doubles: format version, Nx, Ny, hx, hy, omega, k
///   then ex, ey, ez, hx, hy, hz, dx, dy, dz, bx, by, bz, each row-major on
///   its native Yee node set (Ex-type nx x (ny+1), Ey-type (nx+1) x ny,
///   Ez-type (nx+1) x (ny+1), Hz-type nx x ny) as interleaved (re, im).
/// The window origin is not stored; a read profile starts at (0, 0).
inline constexpr double kModeFormatVersion = 1.0;

std::string encode_mode(const ModeProfile& m);
/// Throws ValidationError on a bad magic, version or length.
ModeProfile decode_mode(std::string_view bytes);

void write_mode_binary(const std::string& path, const ModeProfile& m);
ModeProfile read_mode_binary(const std::string& path);

/// One row per mode: index, eta, k, xiE, xiM, residual, decay, cluster.
std::string mode_scalars_csv(const std::vector<ModeProfile>& modes, const std::string& header_comment);

}  // namespace wgm
