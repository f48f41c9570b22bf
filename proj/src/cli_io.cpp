#include "trav/cli_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace trav {

using json = nlohmann::json;

namespace {

constexpr std::string_view kMagic = "TRAV1";
constexpr std::size_t kHeaderFixed = 7;  // magic + dtype + ndim

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(std::string_view bytes, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  return v;
}

std::size_t element_size(DType d) { return d == DType::F32 ? 4 : 8; }

}  // namespace

std::size_t Tensor::count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

std::string encode_tensor(const Tensor& t) {
  if (t.dims.size() > 255) throw DimensionError("tensor has more than 255 dimensions");
  if (t.data.size() != t.count()) throw DimensionError("tensor data does not match its dims");
  std::string out(kMagic);
  out.push_back(static_cast<char>(t.dtype));
  out.push_back(static_cast<char>(t.dims.size()));
  for (std::uint32_t d : t.dims) put_u32(out, d);
  out.reserve(out.size() + t.data.size() * element_size(t.dtype));
  for (double v : t.data) {
    if (t.dtype == DType::F32)
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    else
      put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Tensor decode_tensor(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic)
    throw ParseError("bad magic", 0);
  if (bytes.size() < kHeaderFixed) throw ParseError("truncated header", bytes.size());
  Tensor t;
  const auto code = static_cast<unsigned char>(bytes[5]);
  if (code != 1 && code != 2) throw ParseError("unknown dtype code " + std::to_string(code), 5);
  t.dtype = static_cast<DType>(code);
  const std::size_t ndim = static_cast<unsigned char>(bytes[6]);
  std::size_t at = kHeaderFixed;
  if (bytes.size() < at + 4 * ndim) throw ParseError("truncated dims", bytes.size());
  for (std::size_t i = 0; i < ndim; ++i, at += 4)
    t.dims.push_back(static_cast<std::uint32_t>(get_le(bytes, at, 4)));
  const std::size_t n = t.count();
  const std::size_t width = element_size(t.dtype);
  if (bytes.size() - at != n * width) {
    throw ParseError("payload length " + std::to_string(bytes.size() - at) + " bytes, expected " +
                         std::to_string(n * width),
                     at);
  }
  t.data.resize(n);
  for (std::size_t i = 0; i < n; ++i, at += width) {
    if (t.dtype == DType::F32)
      t.data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, at, 4)));
    else
      t.data[i] = std::bit_cast<double>(get_le(bytes, at, 8));
  }
  return t;
}

void write_bytes(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_tensor(const fs::path& path, const Tensor& t) { write_bytes(path, encode_tensor(t)); }

Tensor read_tensor(const fs::path& path) {
  try {
    return decode_tensor(read_bytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

Tensor field_tensor(const Field& f, DType dtype) {
  Tensor t;
  t.dtype = dtype;
  t.dims = {static_cast<std::uint32_t>(f.rows()), static_cast<std::uint32_t>(f.cols())};
  t.data.assign(f.values().begin(), f.values().end());
  return t;
}

Field tensor_field(const Tensor& t) {
  if (t.dims.size() != 2) throw DimensionError("expected a 2-d tensor");
  Field f(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
  std::copy(t.data.begin(), t.data.end(), f.values().begin());
  return f;
}

// ---- dataset -------------------------------------------------------------------

namespace {

json trajectory_json(const Trajectory& traj) {
  json steps = json::array();
  for (const Step& s : traj.steps) steps.push_back({s.cell.row, s.cell.col, action_code(s.action)});
  return steps;
}

std::string sample_line(const Sample& s, const std::string& prefix) {
  json j;
  j["id"] = s.id;
  j["features"] = prefix + "_features.trav";
  j["imu"] = prefix + "_imu.trav";
  j["trajectory"] = trajectory_json(s.trajectory);
  j["terminal"] = {s.trajectory.terminal.row, s.trajectory.terminal.col};
  j["aec"] = s.trajectory.aec ? json(*s.trajectory.aec) : json(nullptr);
  j["split"] = split_name(s.split);
  if (s.gt_cost) j["gt_cost"] = prefix + "_gt.trav";
  return j.dump();
}

}  // namespace

void write_dataset(const fs::path& dir, const std::vector<Sample>& samples) {
  std::error_code ec;
  fs::create_directories(dir / "tensors", ec);
  if (ec) throw IoError("cannot create " + (dir / "tensors").string() + ": " + ec.message());
  std::string manifest;
  for (const Sample& s : samples) {
    const std::string prefix = "tensors/" + s.id;
    Tensor feat;
    feat.dims = {FeatureStack::kChannels, static_cast<std::uint32_t>(s.rows()),
                 static_cast<std::uint32_t>(s.cols())};
    feat.data = s.features.data;
    write_tensor(dir / (prefix + "_features.trav"), feat);
    Tensor imu;
    imu.dims = {static_cast<std::uint32_t>(s.imu.length), ImuWindow::kChannels};
    imu.data = s.imu.samples;
    write_tensor(dir / (prefix + "_imu.trav"), imu);
    if (s.gt_cost) write_tensor(dir / (prefix + "_gt.trav"), field_tensor(*s.gt_cost));
    manifest += sample_line(s, prefix);
    manifest += '\n';
  }
  write_bytes(dir / kManifestName, manifest);
}

Sample parse_manifest_line(const std::string& line, const fs::path& base) {
  const json j = json::parse(line);
  Sample s;
  s.id = j.at("id").get<std::string>();

  const Tensor feat = read_tensor(base / j.at("features").get<std::string>());
  if (feat.dims.size() != 3 || feat.dims[0] != FeatureStack::kChannels)
    throw DimensionError("features tensor must be 5 x rows x cols");
  s.features = FeatureStack(static_cast<int>(feat.dims[1]), static_cast<int>(feat.dims[2]));
  s.features.data = feat.data;

  const Tensor imu = read_tensor(base / j.at("imu").get<std::string>());
  if (imu.dims.size() != 2 || imu.dims[1] != ImuWindow::kChannels)
    throw DimensionError("imu tensor must be T x 6");
  s.imu = ImuWindow(static_cast<int>(imu.dims[0]));
  s.imu.samples = imu.data;

  for (const json& step : j.at("trajectory")) {
    if (!step.is_array() || step.size() != 3) throw DomainError("trajectory step must be [row, col, action]");
    s.trajectory.steps.push_back(
        {{step[0].get<int>(), step[1].get<int>()}, action_from_code(step[2].get<int>())});
  }
  const json& term = j.at("terminal");
  if (!term.is_array() || term.size() != 2) throw DomainError("terminal must be [row, col]");
  s.trajectory.terminal = {term[0].get<int>(), term[1].get<int>()};
  if (j.contains("aec") && !j["aec"].is_null()) s.trajectory.aec = j["aec"].get<double>();

  const std::string split = j.at("split").get<std::string>();
  if (split == "train")
    s.split = Split::Train;
  else if (split == "test")
    s.split = Split::Test;
  else
    throw DomainError("split must be \"train\" or \"test\"");
  if (j.contains("gt_cost") && !j["gt_cost"].is_null())
    s.gt_cost = tensor_field(read_tensor(base / j["gt_cost"].get<std::string>()));

  GridSpec spec;
  spec.rows = s.rows();
  spec.cols = s.cols();
  require_valid(GridMdp(spec), s.trajectory);
  if (s.gt_cost && (s.gt_cost->rows() != s.rows() || s.gt_cost->cols() != s.cols()))
    throw DimensionError("gt_cost shape differs from features");
  return s;
}

std::vector<Sample> read_dataset(const fs::path& dir_or_manifest) {
  const fs::path manifest =
      fs::is_directory(dir_or_manifest) ? dir_or_manifest / kManifestName : dir_or_manifest;
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot read " + manifest.string());
  const fs::path base = manifest.parent_path();
  std::vector<Sample> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_manifest_line(line, base));
    } catch (const IoError& e) {
      throw IoError(manifest.string() + " line " + std::to_string(number) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ParseError(manifest.string() + " line " + std::to_string(number) + ": " + e.what(),
                       number);
    }
  }
  return out;
}

// ---- checkpoints -----------------------------------------------------------------

void write_checkpoint(const fs::path& dir, const ModelConfig& config, const ParamVector& params) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  json m;
  m["model"] = model_kind_name(config.kind);
  m["rows"] = config.rows;
  m["cols"] = config.cols;
  m["imu_length"] = config.imu_length;
  m["positional"] = config.positional;
  m["dropout"] = config.dropout;
  json layers = json::array();
  const auto& manifest = params.manifest();
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const LayerShape& l = manifest[i];
    const std::string file = l.name + ".trav";
    Tensor t;
    for (std::size_t d : l.shape) t.dims.push_back(static_cast<std::uint32_t>(d));
    const auto vals = params.layer(i);
    t.data.assign(vals.begin(), vals.end());
    write_tensor(dir / file, t);
    layers.push_back({{"name", l.name}, {"file", file}, {"shape", l.shape}});
  }
  m["layers"] = layers;
  write_bytes(dir / "manifest.json", m.dump(2) + "\n");
}

Checkpoint read_checkpoint(const fs::path& dir) {
  json m;
  try {
    m = json::parse(read_bytes(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint manifest: ") + e.what(), 0);
  }
  Checkpoint ck;
  try {
    ck.config.kind = model_kind_from_name(m.at("model").get<std::string>());
    ck.config.rows = m.at("rows").get<int>();
    ck.config.cols = m.at("cols").get<int>();
    ck.config.imu_length = m.at("imu_length").get<int>();
    ck.config.positional = m.at("positional").get<bool>();
    ck.config.dropout = m.value("dropout", 0.0);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint manifest: ") + e.what(), 0);
  }
  ck.params = param_layout(ck.config);
  const auto& layers = m.at("layers");
  if (layers.size() != ck.params.manifest().size())
    throw DimensionError("checkpoint layer count does not match the model");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerShape& l = ck.params.manifest()[i];
    if (layers[i].at("name").get<std::string>() != l.name)
      throw DimensionError("checkpoint layer " + std::to_string(i) + " is not " + l.name);
    const Tensor t = read_tensor(dir / layers[i].at("file").get<std::string>());
    if (t.data.size() != l.count)
      throw DimensionError("checkpoint layer " + l.name + " has the wrong size");
    std::copy(t.data.begin(), t.data.end(), ck.params.layer(i).begin());
  }
  return ck;
}

// ---- reports -----------------------------------------------------------------------

namespace {

std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

std::string train_report_csv(const TrainReport& report) {
  std::string out = "iter,nll_proxy,rank_loss,grad_norm,millis\n";
  for (const StepRecord& r : report.records) {
    out += std::to_string(r.iter) + "," + num(r.nll_proxy) + "," + num(r.rank_loss) + "," +
           num(r.grad_norm) + "," + num(r.millis) + "\n";
  }
  return out;
}

std::string eval_report_csv(const EvalReport& r) {
  return "nll,hd,rank_acc,mean_aec,spearman\n" + num(r.nll) + "," + num(r.hd) + "," +
         num(r.rank_acc) + "," + num(r.mean_aec) + "," + num(r.spearman) + "\n";
}

std::string eval_report_json(const EvalReport& r) {
  json j;
  j["nll"] = std::isfinite(r.nll) ? json(r.nll) : json("inf");
  j["hd"] = r.hd;
  j["rank_acc"] = r.rank_acc;
  j["mean_aec"] = r.mean_aec;
  j["spearman"] = r.spearman;
  return j.dump(2) + "\n";
}

// ---- rendering ---------------------------------------------------------------------

std::string encode_pgm(const Field& f, bool* degenerate) {
  std::string out = "P5\n" + std::to_string(f.cols()) + " " + std::to_string(f.rows()) + "\n255\n";
  const auto vals = f.values();
  const auto [lo_it, hi_it] = std::minmax_element(vals.begin(), vals.end());
  const double lo = vals.empty() ? 0.0 : *lo_it;
  const double hi = vals.empty() ? 0.0 : *hi_it;
  const bool flat = !(hi > lo) || !std::isfinite(hi - lo);
  if (degenerate != nullptr) *degenerate = flat;
  for (double v : vals) {
    int g = 128;
    if (!flat) g = static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo)));
    out.push_back(static_cast<char>(std::clamp(g, 0, 255)));
  }
  return out;
}

std::string encode_overlay_ppm(const FeatureStack& features, const Trajectory& traj) {
  const int rows = features.rows;
  const int cols = features.cols;
  std::vector<unsigned char> rgb(static_cast<std::size_t>(rows) * cols * 3);
  auto to_byte = [](double v) {
    return static_cast<unsigned char>(std::clamp<long>(std::lround(255.0 * v), 0, 255));
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t k = (static_cast<std::size_t>(r) * cols + c) * 3;
      rgb[k] = to_byte(features.at(FeatureStack::Red, r, c));
      rgb[k + 1] = to_byte(features.at(FeatureStack::Green, r, c));
      rgb[k + 2] = to_byte(features.at(FeatureStack::Blue, r, c));
    }
  }
  auto paint = [&](const Cell& cell, unsigned char red, unsigned char green, unsigned char blue) {
    if (cell.row < 0 || cell.row >= rows || cell.col < 0 || cell.col >= cols)
      throw DomainError("trajectory leaves the image");
    const std::size_t k = (static_cast<std::size_t>(cell.row) * cols + cell.col) * 3;
    rgb[k] = red;
    rgb[k + 1] = green;
    rgb[k + 2] = blue;
  };
  for (const Step& s : traj.steps) paint(s.cell, 255, 0, 0);
  paint(traj.terminal, 0, 255, 255);
  std::string out = "P6\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  return out;
}

}  // namespace trav
