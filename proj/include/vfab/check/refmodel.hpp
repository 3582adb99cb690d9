#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vfab/uvc/frame.hpp"

namespace vfab::check {

using AttributeSet = std::map<std::string, std::int64_t>;

/// Infrastructure failure of a reference model (bad schema, crashed
/// process, unreadable output). Distinct from a data mismatch.
class RefModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RefModel {
 public:
  RefModel(std::string id, std::vector<std::string> schema) : id_(std::move(id)), schema_(std::move(schema)) {}
  virtual ~RefModel() = default;

  const std::string& id() const { return id_; }
  const std::vector<std::string>& schema() const { return schema_; }
  virtual uvc::Frame evaluate(const uvc::Frame& input, const AttributeSet& attrs) const = 0;

 private:
  std::string id_;
  std::vector<std::string> schema_;
};

/// Checks `attrs` against the schema, evaluates, and checks the result is a
/// valid frame of the input geometry.
uvc::Frame run_reference(const RefModel& model, const uvc::Frame& input, const AttributeSet& attrs);

/// In-process model applying a per-pixel function.
class PixelModel : public RefModel {
 public:
  using PixelFn = std::function<std::uint32_t(std::uint32_t, const AttributeSet&)>;
  PixelModel(std::string id, std::vector<std::string> schema, PixelFn fn)
      : RefModel(std::move(id), std::move(schema)), fn_(std::move(fn)) {}
  uvc::Frame evaluate(const uvc::Frame& input, const AttributeSet& attrs) const override;

 private:
  PixelFn fn_;
};

/// Runs `command input.pgm attrs.txt output.pgm` in a scratch directory.
/// attrs.txt holds one `name=value` line per attribute.
class ExternalModel : public RefModel {
 public:
  ExternalModel(std::string id, std::vector<std::string> schema, std::string command)
      : RefModel(std::move(id), std::move(schema)), command_(std::move(command)) {}
  uvc::Frame evaluate(const uvc::Frame& input, const AttributeSet& attrs) const override;
  const std::string& command() const { return command_; }

 private:
  std::string command_;
};

/// Applies stages in order. Each stage sees the attributes stored under
/// `<prefix>.<name>`; the chain's schema is the union of prefixed names.
class ChainModel : public RefModel {
 public:
  using Stage = std::pair<std::string, std::shared_ptr<const RefModel>>;
  ChainModel(std::string id, std::vector<Stage> stages);
  uvc::Frame evaluate(const uvc::Frame& input, const AttributeSet& attrs) const override;

 private:
  std::vector<Stage> stages_;
};

/// Gain/offset pixel function: clip(((pix * gain) >> 4) + int8(offset)).
/// With enable == 0 the pixel passes through.
std::uint32_t ganc_pixel(std::uint32_t pix, std::uint32_t gain, std::uint32_t offset, bool enable = true);
/// Threshold pixel function: 255 when pix >= thresh, else 0.
std::uint32_t thr_pixel(std::uint32_t pix, std::uint32_t thresh, bool enable = true);

/// Schema {enable, gain, offset}.
std::shared_ptr<const RefModel> ganc_model();
/// Schema {enable, thresh}.
std::shared_ptr<const RefModel> thr_model();

// Binary PGM (P5, maxval <= 255).
void write_pgm(std::ostream& out, const uvc::Frame& frame);
uvc::Frame read_pgm(std::istream& in);
void write_attrs(std::ostream& out, const AttributeSet& attrs);
AttributeSet read_attrs(std::istream& in);

}  // namespace vfab::check
