#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trav/common.hpp"
#include "trav/metrics.hpp"
#include "trav/reward_model.hpp"
#include "trav/sample.hpp"
#include "trav/trainer.hpp"

namespace trav {

namespace fs = std::filesystem;

/// Malformed file content. `offset` is a byte offset for binary formats and
/// a 1-based line number for line-oriented ones.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Unreadable or unwritable path.
class IoError : public Error {
 public:
  using Error::Error;
};

// ---- tensor container ------------------------------------------------------

enum class DType : std::uint8_t { F32 = 1, F64 = 2 };

/// "TRAV1" | dtype u8 | ndim u8 | dims u32 LE x ndim | row-major LE payload.
/// Values are held as double; f32 tensors round-trip exactly.
struct Tensor {
  DType dtype = DType::F64;
  std::vector<std::uint32_t> dims;
  std::vector<double> data;

  std::size_t count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::string_view bytes);  // throws ParseError

void write_tensor(const fs::path& path, const Tensor& t);
Tensor read_tensor(const fs::path& path);

Tensor field_tensor(const Field& f, DType dtype = DType::F64);
Field tensor_field(const Tensor& t);

// ---- dataset manifest --------------------------------------------------------

/// JSON-lines manifest; tensor paths are relative to the manifest's folder.
inline constexpr const char* kManifestName = "manifest.jsonl";

/// Writes `dir/manifest.jsonl` and `dir/tensors/<id>_*.trav`.
void write_dataset(const fs::path& dir, const std::vector<Sample>& samples);

/// Accepts the dataset folder or the manifest file itself.
std::vector<Sample> read_dataset(const fs::path& dir_or_manifest);

/// Parses one manifest line; tensor paths resolve against `base`.
Sample parse_manifest_line(const std::string& line, const fs::path& base);

// ---- checkpoints ---------------------------------------------------------------

struct Checkpoint {
  ModelConfig config;
  ParamVector params;
};

/// `dir/manifest.json` plus one f64 tensor file per layer.
void write_checkpoint(const fs::path& dir, const ModelConfig& config, const ParamVector& params);
Checkpoint read_checkpoint(const fs::path& dir);

// ---- reports ---------------------------------------------------------------------

std::string train_report_csv(const TrainReport& report);
std::string eval_report_csv(const EvalReport& report);
std::string eval_report_json(const EvalReport& report);

// ---- rendering -------------------------------------------------------------------

/// Binary PGM (P5, maxval 255), min-max normalized. A constant map renders as
/// mid-gray 128 and sets *degenerate.
std::string encode_pgm(const Field& f, bool* degenerate = nullptr);

/// Binary PPM (P6) of the RGB feature channels with the trajectory's path
/// cells in pure red and its terminal cell in pure cyan.
std::string encode_overlay_ppm(const FeatureStack& features, const Trajectory& traj);

void write_bytes(const fs::path& path, std::string_view bytes);
std::string read_bytes(const fs::path& path);

}  // namespace trav
