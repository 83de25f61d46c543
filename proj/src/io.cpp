#include "usar/io.hpp"

#include "usar/version.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace usar::io {

namespace {

constexpr char kModelMagic[4] = {'U', 'S', 'A', 'R'};
constexpr char kMeasurementMagic[4] = {'U', 'M', 'E', 'A'};

// Cursor over an in-memory file image; all reads are little-endian.
struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;
  std::string path;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw UsarError(path + ": truncated file");
  }
  void expect_magic(const char (&magic)[4]) {
    need(4);
    if (std::memcmp(bytes.data() + pos, magic, 4) != 0)
      throw UsarError(path + ": bad magic; not a " + std::string(magic, 4) + " file");
    pos += 4;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)]);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
      v = (v << 8) | static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)]);
    pos += 8;
    return v;
  }
  double f64() {
    const std::uint64_t raw = u64();
    double v;
    std::memcpy(&v, &raw, 8);
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<unsigned char>(bytes[pos++]);
  }
  bool at_end() const { return pos == bytes.size(); }
};

void put_complex(std::string& out, const Complex& z) {
  put_f64(out, z.real());
  put_f64(out, z.imag());
}

void put_matrix_row_major(std::string& out, const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_complex(out, m(i, j));
}

CMatrix read_matrix_row_major(Reader& r, Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = r.f64();
      const double im = r.f64();
      m(i, j) = Complex(re, im);
    }
  return m;
}

}  // namespace

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  std::uint64_t raw;
  std::memcpy(&raw, &v, 8);
  put_u64(out, raw);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsarError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw UsarError("failed reading " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsarError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw UsarError("failed writing " + path);
}

void write_model(const std::string& path, const ForwardModel& model) {
  std::string out;
  out.reserve(32 + static_cast<std::size_t>(model.entries.size()) * 16);
  out.append(kModelMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, static_cast<std::uint64_t>(model.entries.rows()));
  put_u64(out, static_cast<std::uint64_t>(model.entries.cols()));
  put_f64(out, model.kappa);
  put_matrix_row_major(out, model.entries);
  write_file(path, out);
}

void write_trained(const std::string& path, const TrainedCheckpoint& ckpt) {
  if (ckpt.Q.rows() != ckpt.Q.cols() || ckpt.Q.rows() != ckpt.model.entries.cols())
    throw DimensionError("checkpoint: filter size does not match the model");
  std::string out;
  const std::size_t fcount = static_cast<std::size_t>(ckpt.model.entries.size());
  const std::size_t qcount = static_cast<std::size_t>(ckpt.Q.size());
  out.reserve(64 + (fcount + qcount) * 16);
  out.append(kModelMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, static_cast<std::uint64_t>(ckpt.model.entries.rows()));
  put_u64(out, static_cast<std::uint64_t>(ckpt.model.entries.cols()));
  put_f64(out, ckpt.model.kappa);
  put_matrix_row_major(out, ckpt.model.entries);
  put_matrix_row_major(out, ckpt.Q);
  put_f64(out, ckpt.tau);
  put_f64(out, ckpt.alpha);
  put_f64(out, ckpt.lambda);
  out.push_back(static_cast<char>(ckpt.penalty == Penalty::L1 ? 0 : 1));
  put_u32(out, ckpt.layers);
  write_file(path, out);
}

TrainedCheckpoint read_checkpoint(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader r{bytes, 0, path};
  r.expect_magic(kModelMagic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw UsarError(path + ": unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t N = r.u64();
  const std::uint64_t M = r.u64();
  if (N == 0 || M == 0) throw UsarError(path + ": empty model");
  if (N > (1ULL << 24) || M > (1ULL << 24) || N * M * 16 > bytes.size())
    throw UsarError(path + ": header does not match file size");

  TrainedCheckpoint ckpt;
  ckpt.model.kappa = r.f64();
  ckpt.model.entries =
      read_matrix_row_major(r, static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
  if (r.at_end()) return ckpt;  // plain forward model

  ckpt.Q = read_matrix_row_major(r, static_cast<Eigen::Index>(M),
                                 static_cast<Eigen::Index>(M));
  ckpt.tau = r.f64();
  ckpt.alpha = r.f64();
  ckpt.lambda = r.f64();
  const std::uint8_t pen = r.u8();
  if (pen > 1) throw UsarError(path + ": unknown penalty code");
  ckpt.penalty = pen == 0 ? Penalty::L1 : Penalty::L0;
  ckpt.layers = r.u32();
  if (ckpt.layers < 1) throw UsarError(path + ": layer count must be at least 1");
  if (!r.at_end()) throw UsarError(path + ": trailing bytes after checkpoint");
  ckpt.has_encoder = true;
  return ckpt;
}

EncoderParams to_encoder_params(const TrainedCheckpoint& ckpt) {
  if (!ckpt.has_encoder)
    throw UsarError("checkpoint holds only a forward model, not a trained encoder");
  EncoderParams p;
  p.F = ckpt.model;
  p.Q = ckpt.Q;
  p.tau = ckpt.tau;
  p.alpha = ckpt.alpha;
  p.penalty = ckpt.penalty;
  p.layers = static_cast<int>(ckpt.layers);
  p.validate();
  return p;
}

void write_measurement(const std::string& path, const Measurement& m) {
  std::string out;
  out.reserve(32 + static_cast<std::size_t>(m.data.size()) * 16);
  out.append(kMeasurementMagic, 4);
  put_u64(out, static_cast<std::uint64_t>(m.data.size()));
  put_f64(out, m.snr_db);
  put_u64(out, m.seed);
  for (Eigen::Index i = 0; i < m.data.size(); ++i) put_complex(out, m.data(i));
  write_file(path, out);
}

Measurement read_measurement(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader r{bytes, 0, path};
  r.expect_magic(kMeasurementMagic);
  const std::uint64_t N = r.u64();
  Measurement m;
  m.snr_db = r.f64();
  m.seed = r.u64();
  if (N > (1ULL << 32) || N * 16 != bytes.size() - 28)
    throw UsarError(path + ": header does not match file size");
  m.data.resize(static_cast<Eigen::Index>(N));
  for (std::uint64_t i = 0; i < N; ++i) {
    const double re = r.f64();
    const double im = r.f64();
    m.data(static_cast<Eigen::Index>(i)) = Complex(re, im);
  }
  return m;
}

void write_scene(const std::string& path, const Scene& scene) {
  scene.validate();
  std::ostringstream out;
  out.precision(17);
  out << scene.grid.rows << " " << scene.grid.cols << "\n";
  for (int i = 0; i < scene.grid.rows; ++i) {
    for (int j = 0; j < scene.grid.cols; ++j) {
      if (j) out << " ";
      out << scene.reflectivity(static_cast<Eigen::Index>(i) * scene.grid.cols + j);
    }
    out << "\n";
  }
  write_file(path, out.str());
}

Scene read_scene(const std::string& path) {
  std::istringstream in(read_file(path));
  Scene scene;
  if (!(in >> scene.grid.rows >> scene.grid.cols))
    throw UsarError(path + ": expected 'rows cols' on the first line");
  if (scene.grid.rows < 1 || scene.grid.cols < 1)
    throw UsarError(path + ": grid dimensions must be positive");
  scene.reflectivity.resize(scene.grid.pixel_count());
  for (Eigen::Index i = 0; i < scene.reflectivity.size(); ++i)
    if (!(in >> scene.reflectivity(i)))
      throw UsarError(path + ": expected " + std::to_string(scene.grid.pixel_count()) +
                      " reflectivity values");
  double extra;
  if (in >> extra) throw UsarError(path + ": more values than rows*cols");
  scene.validate();
  return scene;
}

namespace {

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << "epoch,avg_L_d,eta_Q,eta_F,eta_tau,tau,wall_seconds\n";
  for (const EpochRecord& rec : history)
    out << rec.epoch << "," << format_double(rec.avg_mismatch) << ","
        << format_double(rec.eta_Q) << "," << format_double(rec.eta_F) << ","
        << format_double(rec.eta_tau) << "," << format_double(rec.tau) << ","
        << format_double(rec.wall_seconds) << "\n";
  write_file(path, out.str());
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ",";
    out << header[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw DimensionError("write_csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << format_double(row[i]);
    }
    out << "\n";
  }
  write_file(path, out.str());
}

void write_pgm(const std::string& path, const RVector& image, GridShape grid) {
  if (image.size() != grid.pixel_count())
    throw DimensionError("write_pgm: image size does not match grid");
  std::string out = "P5\n" + std::to_string(grid.cols) + " " + std::to_string(grid.rows) +
                    "\n65535\n";
  out.reserve(out.size() + static_cast<std::size_t>(image.size()) * 2);
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image(i), 0.0, 1.0);
    const unsigned value = static_cast<unsigned>(std::lround(v * 65535.0));
    out.push_back(static_cast<char>((value >> 8) & 0xFF));  // PGM is big-endian
    out.push_back(static_cast<char>(value & 0xFF));
  }
  write_file(path, out);
}

void write_image_csv(const std::string& path, const RVector& image, GridShape grid) {
  if (image.size() != grid.pixel_count())
    throw DimensionError("write_image_csv: image size does not match grid");
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      if (j) out << ",";
      out << image(static_cast<Eigen::Index>(i) * grid.cols + j);
    }
    out << "\n";
  }
  write_file(path, out.str());
}

std::pair<RVector, GridShape> read_image_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<double> values;
  int rows = 0, cols = -1;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    int count = 0;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw UsarError(path + ": bad number '" + cell + "'");
      }
      if (used != cell.size()) throw UsarError(path + ": bad number '" + cell + "'");
      values.push_back(v);
      ++count;
    }
    if (cols == -1) cols = count;
    if (count != cols) throw UsarError(path + ": ragged rows");
    ++rows;
  }
  if (rows == 0 || cols < 1) throw UsarError(path + ": empty image");
  RVector image(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    image(static_cast<Eigen::Index>(i)) = values[i];
  return {image, GridShape{rows, cols}};
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace usar::io
