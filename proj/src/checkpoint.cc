// Copyright 2026 The Sciex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sciex/checkpoint.h"

#include "sciex/bytes.h"
#include "sciex/common.h"

namespace sciex {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "SCXCKPT1";

std::string JoinLines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    out += s;
    out.push_back('\n');
  }
  return out;
}

std::vector<std::string> VocabOf(const SpanRelationModel& model) {
  if (const auto* toy = dynamic_cast<const ToyEncoder*>(&model.encoder())) return toy->vocab();
  return {};
}

json Digests(const ExtractionSchema& schema, const PosTagset& tagset,
             const std::vector<std::string>& vocab, const json& overlay) {
  return {{"schema", Crc32Hex(schema.ToJson().dump())},
          {"tagset", Crc32Hex(JoinLines(tagset.tags()))},
          {"vocab", Crc32Hex(JoinLines(vocab))},
          {"tagger_lexicon", Crc32Hex(overlay.dump())}};
}

}  // namespace

std::string SerializeCheckpoint(const SpanRelationModel& const_model) {
  // Parameters() is non-const only because it hands out mutable pointers.
  auto& model = const_cast<SpanRelationModel&>(const_model);
  const std::vector<std::string> vocab = VocabOf(model);
  const json overlay = model.tagger_overlay();

  std::string payload;
  json manifest = json::array();
  for (const Parameter* p : model.Parameters()) {
    const size_t offset = payload.size();
    std::string blob;
    blob.reserve(p->size() * 4);
    for (double v : p->value) AppendF32(&blob, static_cast<float>(v));
    manifest.push_back({{"name", p->name},
                        {"shape", p->shape},
                        {"offset", offset},
                        {"count", p->size()},
                        {"crc32", Crc32Hex(blob)}});
    payload += blob;
  }

  json header = {
      {"format", "sciex-checkpoint"},
      {"format_version", kCheckpointFormatVersion},
      {"model_version", model.version()},
      {"config", model.config().ToJson()},
      {"schema", model.schema().ToJson()},
      {"tagset", model.tagset().tags()},
      {"tagger_lexicon", overlay},
      {"vocab", vocab},
      {"digests", Digests(model.schema(), model.tagset(), vocab, overlay)},
      {"tensors", manifest},
      {"payload_bytes", payload.size()},
      {"payload_crc32", Crc32Hex(payload)},
      {"metadata", model.metadata()},
  };
  const std::string h = header.dump();
  std::string out(kMagic);
  AppendU64(&out, h.size());
  out += h;
  out += payload;
  return out;
}

std::unique_ptr<SpanRelationModel> ParseCheckpoint(std::string_view bytes,
                                                   const std::string& origin) {
  if (bytes.size() < 16 || bytes.substr(0, 8) != kMagic) {
    throw IntegrityError(origin + ": not a model checkpoint");
  }
  const uint64_t header_len = ReadU64(bytes, 8);
  if (header_len > bytes.size() - 16) throw IntegrityError(origin + ": truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(16, header_len));
  } catch (const json::parse_error& e) {
    throw IntegrityError(origin + ": corrupt header: " + e.what());
  }
  const std::string_view payload = bytes.substr(16 + header_len);

  try {
    if (header.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw IntegrityError(origin + ": unsupported checkpoint format version " +
                           header.at("format_version").dump());
    }
    const ExtractionSchema schema = ExtractionSchema::FromJson(header.at("schema"));
    const PosTagset tagset(header.at("tagset").get<std::vector<std::string>>());
    const auto vocab = header.at("vocab").get<std::vector<std::string>>();
    const json overlay = header.at("tagger_lexicon");
    const json expected = Digests(schema, tagset, vocab, overlay);
    const json& stored = header.at("digests");
    for (const auto& [key, value] : expected.items()) {
      if (!stored.contains(key) || stored.at(key) != value) {
        throw IntegrityError(origin + ": " + key + " digest mismatch");
      }
    }
    if (payload.size() != header.at("payload_bytes").get<size_t>()) {
      throw IntegrityError(origin + ": payload is " + std::to_string(payload.size()) +
                           " bytes, header says " + header.at("payload_bytes").dump());
    }
    if (Crc32Hex(payload) != header.at("payload_crc32").get<std::string>()) {
      throw IntegrityError(origin + ": payload digest mismatch");
    }

    ModelConfig config = ModelConfig::FromJson(header.at("config"));
    std::unique_ptr<Encoder> encoder;
    if (config.encoder.kind == EncoderKind::kToy) {
      encoder = std::make_unique<ToyEncoder>(config.encoder, vocab);
    } else {
      encoder = LoadPrecomputed(config.encoder.precomputed_path);
    }
    auto model = std::make_unique<SpanRelationModel>(
        schema, tagset, config, std::move(encoder),
        overlay.get<std::map<std::string, std::string>>());
    model->set_version(header.at("model_version").get<int>());
    model->set_metadata(header.value("metadata", json::object()));

    const json& manifest = header.at("tensors");
    const auto params = model->Parameters();
    if (manifest.size() != params.size()) {
      throw IntegrityError(origin + ": tensor manifest lists " + std::to_string(manifest.size()) +
                           " tensors, model has " + std::to_string(params.size()));
    }
    for (size_t i = 0; i < params.size(); ++i) {
      Parameter* p = params[i];
      const json& entry = manifest[i];
      if (entry.at("name").get<std::string>() != p->name ||
          entry.at("shape").get<std::vector<size_t>>() != p->shape) {
        throw IntegrityError(origin + ": tensor " + std::to_string(i) + " (" +
                             entry.at("name").get<std::string>() + ") does not match " + p->name);
      }
      const size_t offset = entry.at("offset").get<size_t>();
      const size_t count = entry.at("count").get<size_t>();
      if (count != p->size() || offset + 4 * count > payload.size()) {
        throw IntegrityError(origin + ": tensor " + p->name + " out of payload bounds");
      }
      const std::string_view blob = payload.substr(offset, 4 * count);
      if (Crc32Hex(blob) != entry.at("crc32").get<std::string>()) {
        throw IntegrityError(origin + ": tensor " + p->name + " digest mismatch");
      }
      for (size_t k = 0; k < count; ++k) p->value[k] = ReadF32(blob, 4 * k);
    }
    return model;
  } catch (const json::exception& e) {
    throw IntegrityError(origin + ": malformed header: " + e.what());
  } catch (const SchemaError& e) {
    throw IntegrityError(origin + ": " + e.what());
  }
}

void SaveCheckpoint(const SpanRelationModel& model, const std::string& path) {
  WriteFileAtomic(path, SerializeCheckpoint(model));
}

std::unique_ptr<SpanRelationModel> LoadCheckpoint(const std::string& path) {
  return ParseCheckpoint(ReadFileBytes(path), path);
}

}  // namespace sciex
