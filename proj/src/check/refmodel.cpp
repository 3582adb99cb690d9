#include "vfab/check/refmodel.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace vfab::check {

namespace fs = std::filesystem;

uvc::Frame run_reference(const RefModel& model, const uvc::Frame& input, const AttributeSet& attrs) {
  std::vector<std::string> missing;
  for (const auto& name : model.schema()) {
    if (attrs.count(name) == 0) missing.push_back(name);
  }
  if (!missing.empty()) {
    throw RefModelError(fmt::format("reference model '{}' missing attribute(s): {}", model.id(),
                                    fmt::join(missing, ", ")));
  }
  uvc::Frame out = model.evaluate(input, attrs);
  if (out.width != input.width || out.height != input.height) {
    throw RefModelError(fmt::format("reference model '{}' returned {}x{} for a {}x{} input", model.id(), out.width,
                                    out.height, input.width, input.height));
  }
  try {
    out.validate();
  } catch (const std::invalid_argument& e) {
    throw RefModelError(fmt::format("reference model '{}' returned a bad frame: {}", model.id(), e.what()));
  }
  return out;
}

uvc::Frame PixelModel::evaluate(const uvc::Frame& input, const AttributeSet& attrs) const {
  uvc::Frame out = input;
  for (auto& p : out.pixels) p = fn_(p, attrs);
  return out;
}

uvc::Frame ExternalModel::evaluate(const uvc::Frame& input, const AttributeSet& attrs) const {
  static std::atomic<unsigned> counter{0};
  const fs::path dir =
      fs::temp_directory_path() / fmt::format("vfab-ref-{}-{}", static_cast<long>(::getpid()), counter++);
  fs::create_directories(dir);
  const fs::path in_pgm = dir / "input.pgm";
  const fs::path attrs_txt = dir / "attrs.txt";
  const fs::path out_pgm = dir / "output.pgm";
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{dir};
  {
    std::ofstream f(in_pgm, std::ios::binary);
    write_pgm(f, input);
    std::ofstream a(attrs_txt);
    write_attrs(a, attrs);
  }
  const std::string cmd =
      fmt::format("{} '{}' '{}' '{}'", command_, in_pgm.string(), attrs_txt.string(), out_pgm.string());
  const int rc = std::system(cmd.c_str());
  if (rc != 0) throw RefModelError(fmt::format("reference model '{}' exited with status {}", id(), rc));
  std::ifstream f(out_pgm, std::ios::binary);
  if (!f) throw RefModelError(fmt::format("reference model '{}' wrote no output", id()));
  try {
    return read_pgm(f);
  } catch (const std::runtime_error& e) {
    throw RefModelError(fmt::format("reference model '{}' output: {}", id(), e.what()));
  }
}

namespace {

std::vector<std::string> chain_schema(const std::vector<ChainModel::Stage>& stages) {
  std::vector<std::string> out;
  for (const auto& [prefix, model] : stages) {
    for (const auto& n : model->schema()) out.push_back(prefix + "." + n);
  }
  return out;
}

}  // namespace

ChainModel::ChainModel(std::string id, std::vector<Stage> stages)
    : RefModel(std::move(id), chain_schema(stages)), stages_(std::move(stages)) {}

uvc::Frame ChainModel::evaluate(const uvc::Frame& input, const AttributeSet& attrs) const {
  uvc::Frame cur = input;
  for (const auto& [prefix, model] : stages_) {
    AttributeSet local;
    const std::string lead = prefix + ".";
    for (const auto& [k, v] : attrs) {
      if (k.rfind(lead, 0) == 0) local[k.substr(lead.size())] = v;
    }
    cur = run_reference(*model, cur, local);
  }
  return cur;
}

std::uint32_t ganc_pixel(std::uint32_t pix, std::uint32_t gain, std::uint32_t offset, bool enable) {
  if (!enable) return pix;
  const auto off = static_cast<std::int8_t>(static_cast<std::uint8_t>(offset & 0xFF));
  const std::int64_t v = ((std::int64_t{pix} * (gain & 0xFF)) >> 4) + off;
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(v, 0, 255));
}

std::uint32_t thr_pixel(std::uint32_t pix, std::uint32_t thresh, bool enable) {
  if (!enable) return pix;
  return pix >= (thresh & 0xFF) ? 255 : 0;
}

std::shared_ptr<const RefModel> ganc_model() {
  return std::make_shared<PixelModel>("ganc", std::vector<std::string>{"enable", "gain", "offset"},
                                      [](std::uint32_t p, const AttributeSet& a) {
                                        return ganc_pixel(p, static_cast<std::uint32_t>(a.at("gain")),
                                                          static_cast<std::uint32_t>(a.at("offset")),
                                                          a.at("enable") != 0);
                                      });
}

std::shared_ptr<const RefModel> thr_model() {
  return std::make_shared<PixelModel>("thr", std::vector<std::string>{"enable", "thresh"},
                                      [](std::uint32_t p, const AttributeSet& a) {
                                        return thr_pixel(p, static_cast<std::uint32_t>(a.at("thresh")),
                                                         a.at("enable") != 0);
                                      });
}

void write_pgm(std::ostream& out, const uvc::Frame& frame) {
  if (frame.bpp > 8) throw std::invalid_argument("PGM output supports 8-bit frames only");
  out << "P5\n" << frame.width << " " << frame.height << "\n" << frame.max_value() << "\n";
  for (auto p : frame.pixels) out.put(static_cast<char>(p));
}

namespace {

std::string pgm_token(std::istream& in) {
  std::string tok;
  for (;;) {
    const int c = in.get();
    if (c == EOF) return tok;
    if (c == '#' && tok.empty()) {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(c)) {
      if (tok.empty()) continue;
      return tok;
    }
    tok.push_back(static_cast<char>(c));
  }
}

unsigned pgm_number(std::istream& in, const char* what) {
  const std::string tok = pgm_token(in);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); })) {
    throw std::runtime_error(fmt::format("PGM header: bad {} '{}'", what, tok));
  }
  return static_cast<unsigned>(std::stoul(tok));
}

}  // namespace

uvc::Frame read_pgm(std::istream& in) {
  if (pgm_token(in) != "P5") throw std::runtime_error("PGM: not a P5 file");
  const unsigned w = pgm_number(in, "width");
  const unsigned h = pgm_number(in, "height");
  const unsigned maxval = pgm_number(in, "maxval");
  if (w == 0 || h == 0) throw std::runtime_error("PGM: empty geometry");
  if (maxval == 0 || maxval > 255) throw std::runtime_error(fmt::format("PGM: unsupported maxval {}", maxval));
  uvc::Frame f(w, h);
  std::string bytes(f.pixels.size(), '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw std::runtime_error(fmt::format("PGM: expected {} pixel bytes, got {}", bytes.size(), in.gcount()));
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) f.pixels[i] = static_cast<unsigned char>(bytes[i]);
  return f;
}

void write_attrs(std::ostream& out, const AttributeSet& attrs) {
  for (const auto& [k, v] : attrs) out << k << "=" << v << "\n";
}

AttributeSet read_attrs(std::istream& in) {
  AttributeSet out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::runtime_error(fmt::format("attrs line {}: expected name=value", n));
    }
    try {
      out[line.substr(0, eq)] = std::stoll(line.substr(eq + 1), nullptr, 0);
    } catch (const std::logic_error&) {
      throw std::runtime_error(fmt::format("attrs line {}: bad value", n));
    }
  }
  return out;
}

}  // namespace vfab::check
