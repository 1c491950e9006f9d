// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "selflabel/config.hpp"
#include "selflabel/errors.hpp"
#include "selflabel/synthdata.hpp"

namespace selflabel {
namespace {

constexpr char kEmbMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::size_t kEmbHeaderBytes = 12;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

void write_embeddings(const Matrix& rows, const std::filesystem::path& path) {
  std::string bytes;
  bytes.reserve(kEmbHeaderBytes + rows.size() * 4);
  bytes.append(kEmbMagic, 4);
  put_u32(bytes, static_cast<std::uint32_t>(rows.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(rows.cols()));
  for (double v : rows.values()) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  spill(path, bytes);
}

Matrix read_embeddings(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < kEmbHeaderBytes || bytes.compare(0, 4, kEmbMagic, 4) != 0)
    throw MalformedHeaderError("malformed EMB1 header in " + path.string());
  const std::uint32_t rows = get_u32(bytes, 4);
  const std::uint32_t dim = get_u32(bytes, 8);
  const std::size_t expected = kEmbHeaderBytes + std::size_t{rows} * dim * 4;
  if (bytes.size() < expected)
    throw TruncatedPayloadError("truncated payload in " + path.string() + ": expected " +
                                std::to_string(expected) + " bytes, found " +
                                std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw MalformedHeaderError("trailing bytes after EMB1 payload in " + path.string());
  Matrix m(rows, dim);
  auto values = m.values();
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, kEmbHeaderBytes + 4 * i)));
  return m;
}

void write_corpus(const MultiModalCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string meta = "sample_id\tgroup_id\tidentity_gt\n";
  for (const auto& s : corpus.samples)
    meta += s.sample_id + '\t' + s.group_id + '\t' + std::to_string(s.identity_gt) + '\n';
  spill(dir / "meta.tsv", meta);
  write_embeddings(feature_matrix(corpus, Modality::kAudio), dir / "audio.emb");
  write_embeddings(feature_matrix(corpus, Modality::kVisual), dir / "visual.emb");
  spill(dir / "synth.cfg", to_config_text(corpus.config, ""));
}

MultiModalCorpus read_corpus(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.tsv";
  std::istringstream meta(slurp(meta_path));
  std::string line;
  if (!std::getline(meta, line) || line != "sample_id\tgroup_id\tidentity_gt")
    throw MalformedHeaderError("malformed header in " + meta_path.string());

  MultiModalCorpus corpus;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(meta, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
      throw DataError(meta_path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    Sample s;
    s.sample_id = fields[0];
    s.group_id = fields[1];
    const auto& gt = fields[2];
    const auto [ptr, ec] = std::from_chars(gt.data(), gt.data() + gt.size(), s.identity_gt);
    if (ec != std::errc{} || ptr != gt.data() + gt.size())
      throw DataError(meta_path.string() + ":" + std::to_string(line_no) + ": bad identity_gt");
    if (!seen.insert(s.sample_id).second)
      throw ConsistencyError(meta_path.string() + ": duplicate sample id " + s.sample_id);
    corpus.samples.push_back(std::move(s));
  }

  for (const Modality m : {Modality::kAudio, Modality::kVisual}) {
    const auto path = dir / (std::string(to_string(m)) + ".emb");
    const Matrix x = read_embeddings(path);
    if (x.rows() != corpus.size())
      throw ConsistencyError("row count mismatch: " + meta_path.string() + " has " +
                             std::to_string(corpus.size()) + " samples, " + path.string() + " has " +
                             std::to_string(x.rows()) + " rows");
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto row = x.row(i);
      Vector& dst = m == Modality::kAudio ? corpus.samples[i].audio : corpus.samples[i].visual;
      dst.assign(row.begin(), row.end());
    }
  }

  const auto cfg_path = dir / "synth.cfg";
  if (std::filesystem::exists(cfg_path)) {
    apply_config(KeyValueConfig::load(cfg_path), "", corpus.config);
  } else {
    corpus.config.num_identities = 1;
    corpus.config.groups_per_identity = 1;
    corpus.config.segments_per_group = corpus.size();
    if (!corpus.samples.empty()) {
      corpus.config.audio_dim = corpus.samples.front().audio.size();
      corpus.config.visual_dim = corpus.samples.front().visual.size();
    }
  }
  return corpus;
}

}  // namespace selflabel
