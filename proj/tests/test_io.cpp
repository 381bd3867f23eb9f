#include <gtest/gtest.h>

#include <filesystem>
#include <regex>

#include "wgm/config.hpp"
#include "wgm/errors.hpp"
#include "wgm/io.hpp"
#include "wgm/validation.hpp"

using namespace wgm;

namespace {

const std::string kBox = R"(
[run]
name = "box"

[materials.air]
kind = "constant"
indices = [1.0]

[geometry]
background = "air"

[grid]
nx = 16
ny = 16
center_um = [0.5, 0.5]
size_um = [1.0, 1.0]

[solver]
lambda_um = 1.0
n_eigs = 2
eta_min = 0.0
eta_max = 1.0
decay_max = 10.0
)";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kBox;
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

std::string validation_message(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected ValidationError";
  return {};
}

}  // namespace

TEST(Provenance, HashAndHeader) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_TRUE(std::regex_match(provenance("0123"), std::regex(R"(wgm \S+ config fnv1a:0123)")));
}

TEST(ModeBinary, RoundTripIsBitExact) {
  const ModeSet ms = solve_at(vacuum_box_model(16), omega_from_lambda_um(1.0));
  const ModeProfile& m = ms.modes.at(0);
  const ModeProfile r = decode_mode(encode_mode(m));
  EXPECT_EQ(r.grid.nx, m.grid.nx);
  EXPECT_EQ(r.grid.ny, m.grid.ny);
  EXPECT_EQ(r.omega, m.omega);
  EXPECT_EQ(r.k, m.k);
  EXPECT_EQ(r.ex.v, m.ex.v);
  EXPECT_EQ(r.hz.v, m.hz.v);
  EXPECT_EQ(r.bx.v, m.bx.v);
  EXPECT_EQ(r.dz.v, m.dz.v);

  const auto path = std::filesystem::temp_directory_path() / "wgm_test_mode.bin";
  write_mode_binary(path.string(), m);
  EXPECT_EQ(read_mode_binary(path.string()).ey.v, m.ey.v);
  std::filesystem::remove(path);
}

TEST(ModeBinary, CorruptInputRejected) {
  const ModeSet ms = solve_at(vacuum_box_model(16), omega_from_lambda_um(1.0));
  std::string bytes = encode_mode(ms.modes.at(0));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_mode(bad_magic), ValidationError);
  EXPECT_THROW(decode_mode(bytes.substr(0, bytes.size() - 8)), ValidationError);
  EXPECT_THROW(decode_mode(bytes.substr(0, 20)), ValidationError);
}

TEST(TextFiles, UnwritablePathIsIoError) {
  EXPECT_THROW(write_text_file("/proc/wgm/nope.txt", "x"), IoError);
  EXPECT_THROW(read_text_file("/nonexistent/wgm.toml"), IoError);
}

TEST(ModeCsv, OneRowPerMode) {
  const ModeSet ms = solve_at(vacuum_box_model(16, 1.0, 2), omega_from_lambda_um(1.0));
  const std::string csv = mode_scalars_csv(ms.modes, provenance("ab"));
  EXPECT_EQ(csv.rfind("# wgm", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), ms.modes.size() + 2);
}

TEST(Config, ParsesBoxAndHashesText) {
  const RunConfig c = parse_run_config(kBox);
  ASSERT_TRUE(c.model.has_value());
  EXPECT_EQ(c.model->grid.nx, 16);
  EXPECT_EQ(c.model->search.n_eigs, 2);
  EXPECT_DOUBLE_EQ(*c.solve_lambda_um, 1.0);
  EXPECT_EQ(c.hash, fnv1a_hex(kBox));
  EXPECT_EQ(c.workers, 1);
}

TEST(Config, InvertedWindowNamesBothFields) {
  const std::string msg = validation_message(with("eta_min = 0.0", "eta_min = 1.5"));
  EXPECT_NE(msg.find("eta_min"), std::string::npos);
  EXPECT_NE(msg.find("eta_max"), std::string::npos);
}

TEST(Config, UnknownKeyAndMaterialRejected) {
  EXPECT_NE(validation_message(with("n_eigs = 2", "n_eigs = 2\nn_eig = 3")).find("n_eig"), std::string::npos);
  EXPECT_NE(validation_message(with("background = \"air\"", "background = \"glass\"")).find("glass"),
            std::string::npos);
  validation_message(with("nx = 16", "nx = 4"));
  validation_message(with("n_eigs = 2", "n_eigs = \"two\""));
}

TEST(Config, BundledConfigsLoad) {
  for (const char* name : {"vacuum_box", "slab", "tfln", "pulse_dispersion", "pulse_single_photon"}) {
    SCOPED_TRACE(name);
    EXPECT_NO_THROW(load_run_config(std::string(WGM_SOURCE_DIR) + "/configs/" + name + ".toml"));
  }
}

TEST(Config, PulseSpecBuildsAmplitude) {
  const RunConfig c = load_run_config(std::string(WGM_SOURCE_DIR) + "/configs/pulse_single_photon.toml");
  ASSERT_EQ(c.pulses.size(), 1u);
  const PulseSpec& p = c.pulses[0];
  EXPECT_EQ(p.normalization, AmplitudeTag::quantum);
  const auto branch = make_pulse_branch(p);
  const SpectralAmplitude a = make_pulse_amplitude(p, branch);
  EXPECT_NO_THROW(a.validate());
  EXPECT_NEAR(photon_number({a}).value, p.photons, 1e-9);
}
