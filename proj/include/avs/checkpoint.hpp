// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "avs/binary_io.hpp"
#include "avs/model.hpp"

namespace avs {

// Checkpoint container, all integers u32 little-endian:
//   "AVSM" | version | variant | input_dim | encoder_hidden | encoder_layers |
//   decoder_hidden | decoder_layers | attention_hidden | attention_scale |
//   tensor_count | per tensor: rows, cols, rows*cols f64 row-major
// Tensors follow AvsParams declaration order.
inline constexpr std::string_view kCheckpointMagic = "AVSM";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline std::string encode_checkpoint(const AvsModel& model) {
  ByteWriter w;
  const ModelConfig& c = model.config;
  w.put_bytes(kCheckpointMagic);
  w.put_u32(kCheckpointVersion);
  w.put_u32(static_cast<std::uint32_t>(c.variant));
  for (std::size_t v : {c.input_dim, c.encoder_hidden, c.encoder_layers, c.decoder_hidden, c.decoder_layers,
                        c.attention_hidden, c.attention_scale})
    w.put_u32(static_cast<std::uint32_t>(v));
  std::uint32_t count = 0;
  model.params.for_each([&count](const Matrix&) { ++count; });
  w.put_u32(count);
  model.params.for_each([&w](const Matrix& m) {
    w.put_u32(static_cast<std::uint32_t>(m.rows()));
    w.put_u32(static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) w.put_f64(v);
  });
  return w.bytes();
}

inline AvsModel decode_checkpoint(ByteReader& r) {
  if (r.bytes(4) != kCheckpointMagic) r.fail("bad checkpoint magic");
  if (const std::uint32_t version = r.u32(); version != kCheckpointVersion)
    r.fail("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t variant = r.u32();
  if (variant > static_cast<std::uint32_t>(Variant::plain)) r.fail("unknown variant tag " + std::to_string(variant));
  ModelConfig c;
  c.variant = static_cast<Variant>(variant);
  for (std::size_t* field : {&c.input_dim, &c.encoder_hidden, &c.encoder_layers, &c.decoder_hidden,
                             &c.decoder_layers, &c.attention_hidden, &c.attention_scale})
    *field = r.u32();
  // Guard against absurd shapes before allocating.
  if (c.input_dim == 0 || c.input_dim > (1u << 20) || c.encoder_hidden == 0 || c.encoder_hidden > (1u << 16) ||
      c.decoder_hidden == 0 || c.decoder_hidden > (1u << 16) || c.encoder_layers == 0 || c.encoder_layers > 64 ||
      c.decoder_layers == 0 || c.decoder_layers > 64 || c.attention_hidden > (1u << 16) ||
      (c.variant == Variant::additive && c.attention_hidden == 0))
    r.fail("implausible model dimensions");
  if (c.attention_scale % 2 == 0 && c.attention_scale != 0)
    r.fail("attention scale " + std::to_string(c.attention_scale) + " is even");
  AvsModel model = init_model(c, 0);
  std::uint32_t expected = 0;
  model.params.for_each([&expected](const Matrix&) { ++expected; });
  if (const std::uint32_t count = r.u32(); count != expected)
    r.fail("tensor count " + std::to_string(count) + " does not match " + std::to_string(expected));
  model.params.for_each([&r](Matrix& m) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != m.rows() || cols != m.cols())
      r.fail("tensor shape (" + std::to_string(rows) + "x" + std::to_string(cols) + ") does not match expected " +
             m.shape_string());
    for (double& v : m.data()) {
      v = r.f64();
      if (!std::isfinite(v)) r.fail("non-finite parameter");
    }
  });
  if (r.remaining() != 0) r.fail("trailing bytes after checkpoint");
  return model;
}

inline void save_checkpoint(const std::filesystem::path& path, const AvsModel& model) {
  ByteWriter w;
  w.put_bytes(encode_checkpoint(model));
  w.write_file(path);
}

inline AvsModel load_checkpoint(const std::filesystem::path& path) {
  ByteReader r = ByteReader::from_file(path);
  return decode_checkpoint(r);
}

}  // namespace avs
