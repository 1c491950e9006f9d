// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "selflabel/encoder.hpp"
#include "selflabel/errors.hpp"

namespace selflabel {
namespace {

constexpr char kMagic[4] = {'E', 'N', 'C', '1'};
constexpr std::size_t kHeaderBytes = 20;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

void put_values(std::string& out, std::span<const double> values) {
  for (double v : values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::size_t get_values(const std::string& in, std::size_t offset, std::span<double> values) {
  for (double& v : values) {
    v = static_cast<double>(std::bit_cast<float>(get_u32(in, offset)));
    offset += 4;
  }
  return offset;
}

}  // namespace

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const EncoderParams& e = checkpoint.encoder;
  std::string bytes(kMagic, 4);
  put_u32(bytes, static_cast<std::uint32_t>(e.input_dim()));
  put_u32(bytes, static_cast<std::uint32_t>(e.hidden_dim()));
  put_u32(bytes, static_cast<std::uint32_t>(e.embedding_dim()));
  put_u32(bytes, static_cast<std::uint32_t>(checkpoint.head ? checkpoint.head->classes() : 0));
  put_values(bytes, e.w1.values());
  put_values(bytes, e.b1);
  put_values(bytes, e.w2.values());
  put_values(bytes, e.b2);
  if (checkpoint.head) {
    put_values(bytes, checkpoint.head->w.values());
    put_values(bytes, checkpoint.head->b);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() < kHeaderBytes || bytes.compare(0, 4, kMagic, 4) != 0)
    throw MalformedHeaderError("malformed ENC1 header in " + path.string());
  const std::size_t input = get_u32(bytes, 4), hidden = get_u32(bytes, 8), embed = get_u32(bytes, 12),
                    classes = get_u32(bytes, 16);
  if (input == 0 || hidden == 0 || embed == 0)
    throw MalformedHeaderError("zero dimension in ENC1 header of " + path.string());

  Checkpoint c{EncoderParams::zeros(input, hidden, embed), std::nullopt};
  std::size_t values = c.encoder.parameter_count();
  if (classes > 0) {
    c.head = ClassifierHead::zeros(embed, classes);
    values += c.head->parameter_count();
  }
  const std::size_t expected = kHeaderBytes + 4 * values;
  if (bytes.size() < expected) throw TruncatedPayloadError("truncated payload in " + path.string());
  if (bytes.size() > expected) throw MalformedHeaderError("trailing bytes in " + path.string());

  std::size_t at = kHeaderBytes;
  at = get_values(bytes, at, c.encoder.w1.values());
  at = get_values(bytes, at, c.encoder.b1);
  at = get_values(bytes, at, c.encoder.w2.values());
  at = get_values(bytes, at, c.encoder.b2);
  if (c.head) {
    at = get_values(bytes, at, c.head->w.values());
    get_values(bytes, at, c.head->b);
  }
  return c;
}

void write_training_log(const std::vector<EpochLog>& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch\tmean_loss\taccuracy\n";
  char buf[96];
  for (const auto& e : log) {
    if (std::isnan(e.accuracy))
      std::snprintf(buf, sizeof buf, "%zu\t%.9f\tnan\n", e.epoch, e.mean_loss);
    else
      std::snprintf(buf, sizeof buf, "%zu\t%.9f\t%.6f\n", e.epoch, e.mean_loss, e.accuracy);
    out << buf;
  }
}

}  // namespace selflabel
