#include <fmt/format.h>
#include <fmt/ranges.h>

#include "byte_io.hpp"
#include "geofuse/error.hpp"
#include "geofuse/fcn.hpp"

namespace geofuse {
namespace {

enum class LayerKind : std::uint8_t {
  input_norm = 0,
  stem = 1,
  down = 2,
  decoder = 3,
  head = 4,
};

void write_record(detail::ByteWriter& w, LayerKind kind, const Tensor& weights,
                  const Tensor& bias) {
  w.u8(static_cast<std::uint8_t>(kind));
  for (std::size_t d = 0; d < 4; ++d)
    w.u32(static_cast<std::uint32_t>(weights.dim(d)));
  for (double v : weights.values()) w.f32(static_cast<float>(v));
  for (double v : bias.values()) w.f32(static_cast<float>(v));
}

struct Record {
  LayerKind kind;
  Tensor weights;
  Tensor bias;
  std::size_t offset;
};

Record read_record(detail::ByteReader& r) {
  Record rec;
  rec.offset = r.position();
  const std::uint8_t kind = r.u8();
  if (kind > 4) throw FormatError("unknown layer kind", rec.offset);
  rec.kind = static_cast<LayerKind>(kind);
  std::vector<std::size_t> shape(4);
  for (auto& d : shape) {
    d = r.u32();
    if (d == 0) throw FormatError("zero weight extent", rec.offset);
  }
  const std::size_t count = shape[0] * shape[1] * shape[2] * shape[3];
  r.require((count + shape[0]) * sizeof(float), "truncated layer payload");
  std::vector<double> w(count), b(shape[0]);
  for (double& v : w) v = r.f32();
  for (double& v : b) v = r.f32();
  rec.weights = Tensor(shape, std::move(w));
  rec.bias = Tensor({shape[0]}, std::move(b));
  return rec;
}

void expect_shape(const Record& rec, std::vector<std::size_t> shape) {
  if (rec.weights.shape() != shape)
    throw FormatError(fmt::format("layer shape [{}] does not match header",
                                  fmt::join(rec.weights.shape(), ",")),
                      rec.offset);
}

}  // namespace

std::vector<std::uint8_t> encode_model(const FcnModel& model) {
  const FcnConfig& c = model.config;
  detail::ByteWriter w;
  w.magic("GFM1");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(c.in_channels));
  w.u32(static_cast<std::uint32_t>(c.num_classes));
  w.u32(static_cast<std::uint32_t>(c.depth));
  w.u32(static_cast<std::uint32_t>(c.base_filters));
  w.u64(c.seed);

  write_record(w, LayerKind::input_norm,
               Tensor({c.in_channels, 1, 1, 1}, model.input_norm.scale),
               Tensor({c.in_channels}, model.input_norm.shift));
  for (std::size_t d = 0; d < model.encoder.size(); ++d)
    write_record(w, d == 0 ? LayerKind::stem : LayerKind::down,
                 model.encoder[d].weights, model.encoder[d].bias);
  for (const DecoderStage& s : model.decoder)
    write_record(w, LayerKind::decoder, s.conv.weights, s.conv.bias);
  write_record(w, LayerKind::head, model.head.weights, model.head.bias);
  return std::move(w).take();
}

FcnModel decode_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("GFM1");
  if (r.u32() != 1) throw FormatError("unsupported version", 4);
  FcnConfig config;
  config.in_channels = r.u32();
  config.num_classes = r.u32();
  config.depth = r.u32();
  config.base_filters = r.u32();
  config.seed = r.u64();
  try {
    config.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid header: ") + e.what(), 8);
  }

  // Start from a built model so stride/padding/scale come from the fixed
  // architecture, then overwrite every parameter from the file.
  FcnModel model = build_fcn(config);
  const std::size_t F = config.base_filters;

  Record norm = read_record(r);
  if (norm.kind != LayerKind::input_norm)
    throw FormatError("expected input normalization record", norm.offset);
  expect_shape(norm, {config.in_channels, 1, 1, 1});
  model.input_norm.scale = norm.weights.values();
  model.input_norm.shift = norm.bias.values();

  for (std::size_t d = 0; d < model.encoder.size(); ++d) {
    Record rec = read_record(r);
    const LayerKind want = d == 0 ? LayerKind::stem : LayerKind::down;
    if (rec.kind != want)
      throw FormatError("unexpected layer kind", rec.offset);
    expect_shape(rec, model.encoder[d].weights.shape());
    model.encoder[d].weights = std::move(rec.weights);
    model.encoder[d].bias = std::move(rec.bias);
  }
  for (DecoderStage& stage : model.decoder) {
    Record rec = read_record(r);
    if (rec.kind != LayerKind::decoder)
      throw FormatError("unexpected layer kind", rec.offset);
    expect_shape(rec, {F, 2 * F, stage.conv.kernel_h(), stage.conv.kernel_w()});
    stage.conv.weights = std::move(rec.weights);
    stage.conv.bias = std::move(rec.bias);
  }
  Record head = read_record(r);
  if (head.kind != LayerKind::head)
    throw FormatError("expected head record", head.offset);
  expect_shape(head, {config.num_classes, F, 1, 1});
  model.head.weights = std::move(head.weights);
  model.head.bias = std::move(head.bias);
  if (!r.at_end()) throw FormatError("trailing bytes", r.position());
  return model;
}

void write_model(const FcnModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, encode_model(model));
}

FcnModel read_model(const std::filesystem::path& path) {
  return decode_model(read_file_bytes(path));
}

}  // namespace geofuse
