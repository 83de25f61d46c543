#include <doctest.h>

#include "usar/encoder.hpp"
#include "usar/io.hpp"
#include "usar/training.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace usar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("usar_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

ForwardModel sample_model(int N = 3, int M = 4) {
  ForwardModel fm;
  fm.kappa = 1.5;
  fm.entries = CMatrix(N, M);
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < M; ++c)
      fm.entries(r, c) = std::polar(1.5, 0.7 * r - 1.3 * c);
  return fm;
}

}  // namespace

TEST_CASE("model files round-trip bit-exactly") {
  TempDir tmp;
  const ForwardModel fm = sample_model();
  const std::string path = tmp.file("model.usar");
  io::write_model(path, fm);

  const io::TrainedCheckpoint ckpt = io::read_checkpoint(path);
  CHECK(!ckpt.has_encoder);
  CHECK(ckpt.model.kappa == fm.kappa);
  REQUIRE(ckpt.model.entries.rows() == fm.entries.rows());
  REQUIRE(ckpt.model.entries.cols() == fm.entries.cols());
  CHECK((ckpt.model.entries - fm.entries).cwiseAbs().maxCoeff() == 0.0);

  // writing the same content twice produces identical bytes
  const std::string path2 = tmp.file("model2.usar");
  io::write_model(path2, fm);
  CHECK(io::read_file(path) == io::read_file(path2));
}

TEST_CASE("trained checkpoints carry every scalar field") {
  TempDir tmp;
  io::TrainedCheckpoint out;
  out.model = sample_model();
  out.Q = CMatrix(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.Q(r, c) = Complex(0.1 * r, -0.2 * c);
  out.tau = 0.034;
  out.alpha = 2.5e-5;
  out.lambda = 60.0;
  out.penalty = Penalty::L0;
  out.layers = 16;
  out.has_encoder = true;

  const std::string path = tmp.file("trained.usar");
  io::write_trained(path, out);
  const io::TrainedCheckpoint in = io::read_checkpoint(path);

  CHECK(in.has_encoder);
  CHECK((in.model.entries - out.model.entries).cwiseAbs().maxCoeff() == 0.0);
  CHECK((in.Q - out.Q).cwiseAbs().maxCoeff() == 0.0);
  CHECK(in.tau == out.tau);
  CHECK(in.alpha == out.alpha);
  CHECK(in.lambda == out.lambda);
  CHECK(in.penalty == Penalty::L0);
  CHECK(in.layers == 16);

  const EncoderParams p = io::to_encoder_params(in);
  CHECK(p.tau == out.tau);
  CHECK(p.alpha == out.alpha);
  CHECK(p.layers == 16);
  CHECK(p.penalty == Penalty::L0);
  CHECK(p.c == 1e-5);  // fixed library convention, not serialized
  CHECK((p.Q - out.Q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("corrupt checkpoints are rejected") {
  TempDir tmp;
  const ForwardModel fm = sample_model();
  const std::string path = tmp.file("model.usar");
  io::write_model(path, fm);
  const std::string good = io::read_file(path);

  // truncation
  io::write_file(tmp.file("trunc.usar"), good.substr(0, good.size() - 5));
  CHECK_THROWS_AS(io::read_checkpoint(tmp.file("trunc.usar")), UsarError);

  // trailing garbage
  io::write_file(tmp.file("trail.usar"), good + "x");
  CHECK_THROWS_AS(io::read_checkpoint(tmp.file("trail.usar")), UsarError);

  // wrong magic
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  io::write_file(tmp.file("magic.usar"), bad_magic);
  CHECK_THROWS_AS(io::read_checkpoint(tmp.file("magic.usar")), UsarError);

  // unsupported version: byte 4 starts the little-endian version word
  std::string bad_version = good;
  bad_version[4] = char(99);
  io::write_file(tmp.file("ver.usar"), bad_version);
  CHECK_THROWS_AS(io::read_checkpoint(tmp.file("ver.usar")), UsarError);

  // missing file
  CHECK_THROWS_AS(io::read_checkpoint(tmp.file("absent.usar")), UsarError);
}

TEST_CASE("measurements round-trip exactly, including infinite SNR") {
  TempDir tmp;
  Measurement m;
  m.data = CVector(3);
  m.data << Complex(1.25, -2.5), Complex(0.0, 1e-300), Complex(M_PI, std::exp(1.0));
  m.snr_db = std::numeric_limits<double>::infinity();
  m.seed = 0xDEADBEEFCAFEBABEull;

  const std::string path = tmp.file("m.umea");
  io::write_measurement(path, m);
  const Measurement in = io::read_measurement(path);
  CHECK((in.data - m.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::isinf(in.snr_db));
  CHECK(in.seed == m.seed);

  io::write_file(tmp.file("short.umea"), io::read_file(path).substr(0, 10));
  CHECK_THROWS_AS(io::read_measurement(tmp.file("short.umea")), UsarError);
}

TEST_CASE("scene text files round-trip") {
  TempDir tmp;
  Scene s;
  s.grid = GridShape{3, 4};
  s.reflectivity = RVector(12);
  for (int i = 0; i < 12; ++i) s.reflectivity(i) = i / 16.0;

  const std::string path = tmp.file("scene.txt");
  io::write_scene(path, s);
  const Scene in = io::read_scene(path);
  CHECK(in.grid == s.grid);
  CHECK((in.reflectivity - s.reflectivity).cwiseAbs().maxCoeff() <= 1e-15);

  io::write_file(tmp.file("bad.txt"), "2 3\n0 0 0 0\n");  // too few values
  CHECK_THROWS_AS(io::read_scene(tmp.file("bad.txt")), UsarError);
}

TEST_CASE("history CSV layout") {
  TempDir tmp;
  std::vector<EpochRecord> hist(2);
  hist[0] = {0, 0.95, 1e-9, 1e-5, 1e-14, 0.03, 1.25, 0};
  hist[1] = {1, 0.91, 5e-10, 5e-6, 5e-15, 0.031, 1.5, 1};

  const std::string path = tmp.file("history.csv");
  io::write_history_csv(path, hist);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "epoch,avg_L_d,eta_Q,eta_F,eta_tau,tau,wall_seconds");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) {
      ++rows;
      // the epoch is the first field, as an integer
      CHECK(line.find(std::to_string(rows - 1) + ",") == 0);
    }
  CHECK(rows == 2);
}

TEST_CASE("generic CSV preserves doubles to full precision") {
  TempDir tmp;
  const std::string path = tmp.file("data.csv");
  const double tricky = 0.1 + 0.2;  // not representable as decimal exactly
  io::write_csv(path, {"a", "b"}, {{tricky, 1e-300}, {-M_PI, 3.0}});

  std::ifstream in(path);
  std::string header, row1, row2;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row1));
  REQUIRE(std::getline(in, row2));
  CHECK(header == "a,b");

  std::istringstream ss(row1);
  std::string cell;
  std::getline(ss, cell, ',');
  CHECK(std::stod(cell) == tricky);
  std::getline(ss, cell, ',');
  CHECK(std::stod(cell) == 1e-300);
}

TEST_CASE("PGM output is clamped 16-bit big-endian with a standard header") {
  TempDir tmp;
  RVector img(4);
  img << -0.5, 0.0, 0.5, 2.0;  // clamps to 0, 0, mid, full
  const std::string path = tmp.file("img.pgm");
  io::write_pgm(path, img, GridShape{2, 2});

  const std::string bytes = io::read_file(path);
  const std::string header = "P5\n2 2\n65535\n";
  REQUIRE(bytes.size() == header.size() + 8);
  CHECK(bytes.compare(0, header.size(), header) == 0);

  const auto sample = [&](int i) {
    const unsigned hi = static_cast<unsigned char>(bytes[header.size() + 2 * i]);
    const unsigned lo = static_cast<unsigned char>(bytes[header.size() + 2 * i + 1]);
    return hi * 256 + lo;
  };
  CHECK(sample(0) == 0);
  CHECK(sample(1) == 0);
  CHECK(sample(2) == 32768);  // lround(0.5 * 65535)
  CHECK(sample(3) == 65535);
}

TEST_CASE("image CSV grids round-trip exactly") {
  TempDir tmp;
  RVector img(6);
  img << 0.0, 1.0, 1e-300, M_PI, -0.25, 0.1 + 0.2;
  const std::string path = tmp.file("img.csv");
  io::write_image_csv(path, img, GridShape{2, 3});

  const auto [back, grid] = io::read_image_csv(path);
  CHECK(grid == GridShape{2, 3});
  REQUIRE(back.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(back(i) == img(i));
}

TEST_CASE("hash function matches the reference test vectors") {
  CHECK(io::fnv1a("") == 0xCBF29CE484222325ull);
  CHECK(io::fnv1a("a") == 0xAF63DC4C8601EC8Cull);
  CHECK(io::fnv1a("foobar") == 0x85944171F73967E8ull);
}

TEST_CASE("little-endian primitive encoders") {
  std::string out;
  io::put_u32(out, 0x01020304u);
  REQUIRE(out.size() == 4);
  CHECK(static_cast<unsigned char>(out[0]) == 0x04);
  CHECK(static_cast<unsigned char>(out[3]) == 0x01);

  out.clear();
  io::put_u64(out, 0x0102030405060708ull);
  REQUIRE(out.size() == 8);
  CHECK(static_cast<unsigned char>(out[0]) == 0x08);
  CHECK(static_cast<unsigned char>(out[7]) == 0x01);

  out.clear();
  io::put_f64(out, 1.0);  // IEEE-754: 0x3FF0000000000000
  REQUIRE(out.size() == 8);
  CHECK(static_cast<unsigned char>(out[7]) == 0x3F);
  CHECK(static_cast<unsigned char>(out[6]) == 0xF0);
  CHECK(static_cast<unsigned char>(out[0]) == 0x00);
}
