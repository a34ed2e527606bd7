#include "ahmca/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <nlohmann/json.hpp>

namespace ahmca {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kHeaderSize = 8 + 4 + 8;

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

[[noreturn]] void corrupt(const std::string& why) {
  throw Error(ErrorKind::CorruptPayload, why);
}

struct Parts {
  std::string_view metadata;
  std::string_view payload;
};

Parts split(std::string_view bytes) {
  if (bytes.size() < kCheckpointMagic.size() || bytes.substr(0, 8) != kCheckpointMagic) {
    throw Error(ErrorKind::BadMagic, "not a model file (bad magic bytes)");
  }
  if (bytes.size() < 12) corrupt("truncated header");
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::VersionMismatch, "model format version " + std::to_string(version) +
                                                ", expected " + std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < kHeaderSize) corrupt("truncated header");
  const std::uint64_t meta_len = get_le(bytes, 12, 8);
  if (meta_len > bytes.size() - kHeaderSize) corrupt("metadata length exceeds file size");
  return {bytes.substr(kHeaderSize, meta_len), bytes.substr(kHeaderSize + meta_len)};
}

json parse_metadata(std::string_view text) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) corrupt("metadata is not a JSON object");
    return j;
  } catch (const json::exception& e) {
    corrupt(std::string("metadata is not valid JSON: ") + e.what());
  }
}

std::vector<ManifestEntry> read_manifest(const json& meta) {
  std::vector<ManifestEntry> out;
  try {
    for (const auto& a : meta.at("arrays")) {
      const auto& shape = a.at("shape");
      if (shape.size() != 2) corrupt("array shape must have two entries");
      out.push_back({a.at("name").get<std::string>(), shape[0].get<std::size_t>(),
                     shape[1].get<std::size_t>(), a.at("offset").get<std::uint64_t>()});
    }
  } catch (const json::exception& e) {
    corrupt(std::string("bad array manifest: ") + e.what());
  }
  return out;
}

}  // namespace

std::string save_checkpoint(const Checkpoint& ckpt) {
  ordered_json meta;
  meta["config"] = ordered_json::parse(config_to_json(ckpt.config));
  meta["taxonomy_hash"] = ckpt.taxonomy.hash();
  meta["taxonomy"] = ordered_json::parse(serialize_taxonomy(ckpt.taxonomy));
  ordered_json labels = ordered_json::array();
  for (const Label* l : ckpt.taxonomy.ordered_labels()) labels.push_back(l->id);
  meta["labels"] = labels;
  meta["vocab"] = ckpt.vocab.tokens();
  ordered_json arrays = ordered_json::array();
  std::uint64_t offset = 0;
  const auto named = ckpt.params.named();
  for (const auto& [name, m] : named) {
    arrays.push_back({{"name", name}, {"shape", {m->rows(), m->cols()}}, {"offset", offset}});
    offset += 4 * m->size();
  }
  meta["arrays"] = arrays;
  const std::string meta_text = meta.dump();

  std::string out(kCheckpointMagic);
  put_le(out, kCheckpointVersion, 4);
  put_le(out, meta_text.size(), 8);
  out += meta_text;
  out.reserve(out.size() + offset);
  for (const auto& [name, m] : named) {
    for (const float v : m->data()) put_le(out, std::bit_cast<std::uint32_t>(v), 4);
  }
  return out;
}

std::string checkpoint_metadata(std::string_view bytes) {
  return std::string(split(bytes).metadata);
}

std::vector<ManifestEntry> checkpoint_manifest(std::string_view bytes) {
  return read_manifest(parse_metadata(split(bytes).metadata));
}

Checkpoint load_checkpoint(std::string_view bytes) {
  const Parts parts = split(bytes);
  const json meta = parse_metadata(parts.metadata);

  Checkpoint ckpt;
  try {
    ckpt.config = config_from_json(meta.at("config").dump());
    ckpt.taxonomy = load_taxonomy(meta.at("taxonomy").dump());
    ckpt.vocab = Vocabulary(meta.at("vocab").get<std::vector<std::string>>());
    if (meta.at("taxonomy_hash").get<std::string>() != ckpt.taxonomy.hash()) {
      corrupt("stored taxonomy hash does not match the stored taxonomy");
    }
    std::vector<std::string> ordered;
    for (const Label* l : ckpt.taxonomy.ordered_labels()) ordered.push_back(l->id);
    if (meta.at("labels").get<std::vector<std::string>>() != ordered) {
      corrupt("stored label ordering does not match the taxonomy");
    }
  } catch (const json::exception& e) {
    corrupt(std::string("bad metadata: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptPayload) throw;
    corrupt(std::string("bad metadata: ") + e.what());
  }

  // Shapes follow from the config, taxonomy and vocabulary.
  const HeadShape shape = head_shape(ckpt.taxonomy, ckpt.config.k, ckpt.config.g, ckpt.config.d_l,
                                     ckpt.config.use_x0_in_global);
  ModelParams<float>& p = ckpt.params;
  p.embeddings = MatrixF(ckpt.vocab.size() + 1, ckpt.config.k);
  for (LstmDirection<float>* d : {&p.lstm.forward, &p.lstm.backward}) {
    d->weights = MatrixF(4 * ckpt.config.k, 2 * ckpt.config.k);
    d->bias = MatrixF(4 * ckpt.config.k, 1);
  }
  Rng unused(0);
  p.head = init_head<float>(shape, unused);

  const auto manifest = read_manifest(meta);
  auto named = p.named();
  if (manifest.size() != named.size()) {
    corrupt("manifest lists " + std::to_string(manifest.size()) + " arrays, expected " +
            std::to_string(named.size()));
  }
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < named.size(); ++i) {
    const ManifestEntry& e = manifest[i];
    MatrixF& m = *named[i].second;
    if (e.name != named[i].first || e.rows != m.rows() || e.cols != m.cols() || e.offset != offset) {
      corrupt("array '" + e.name + "' does not match the expected '" + named[i].first + "' " +
              shape_string(m) + " at offset " + std::to_string(offset));
    }
    if (parts.payload.size() < offset + 4 * m.size()) corrupt("array payload is truncated");
    for (std::size_t j = 0; j < m.size(); ++j) {
      m[j] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(parts.payload, offset + 4 * j, 4)));
    }
    offset += 4 * m.size();
  }
  if (parts.payload.size() != offset) corrupt("trailing bytes after the last array");
  for (const auto& [name, m] : named) {
    for (const float v : m->data()) {
      if (!std::isfinite(v)) corrupt("array '" + name + "' holds a non-finite value");
    }
  }
  return ckpt;
}

}  // namespace ahmca
