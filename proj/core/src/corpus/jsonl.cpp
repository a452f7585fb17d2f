#include "emfend/corpus/jsonl.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "emfend/error.hpp"
#include "json.hpp"

namespace emfend::corpus {

using nlohmann::json;

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::person: return "person";
    case EntityKind::location: return "location";
    case EntityKind::context: return "context";
  }
  return "context";
}

std::optional<EntityKind> parse_entity_kind(std::string_view text) {
  if (text == "person") return EntityKind::person;
  if (text == "location") return EntityKind::location;
  if (text == "context") return EntityKind::context;
  return std::nullopt;
}

std::vector<EntityMention> entities_of_kind(const std::vector<EntityMention>& mentions,
                                            EntityKind kind) {
  std::vector<EntityMention> out;
  for (const auto& m : mentions) {
    if (m.kind == kind) out.push_back(m);
  }
  return out;
}

namespace {

class RecordReader {
 public:
  explicit RecordReader(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw DataError("line " + std::to_string(line_) + ": field '" + field + "': " + message);
  }

  Tokens tokens(const json& value, const std::string& field) const {
    if (!value.is_array()) fail(field, "expected an array of strings");
    Tokens out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!value[i].is_string()) fail(field + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(value[i].get<std::string>());
    }
    return out;
  }

  FeatureMatrix matrix(const json& value, const std::string& field) const {
    if (!value.is_array()) fail(field, "expected an array of number arrays");
    FeatureMatrix out;
    out.rows = value.size();
    for (std::size_t r = 0; r < value.size(); ++r) {
      const json& row = value[r];
      const std::string row_field = field + "[" + std::to_string(r) + "]";
      if (!row.is_array()) fail(row_field, "expected an array of numbers");
      if (r == 0) {
        out.cols = row.size();
        if (out.cols == 0) fail(row_field, "empty feature row");
        out.values.reserve(out.rows * out.cols);
      } else if (row.size() != out.cols) {
        fail(row_field, "row width " + std::to_string(row.size()) + " differs from " +
                            std::to_string(out.cols));
      }
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (!row[c].is_number()) fail(row_field + "[" + std::to_string(c) + "]", "expected a number");
        const double v = row[c].get<double>();
        if (!std::isfinite(v)) fail(row_field + "[" + std::to_string(c) + "]", "non-finite number");
        out.values.push_back(static_cast<float>(v));
      }
    }
    return out;
  }

  std::vector<EntityMention> entities(const json& value, const std::string& field,
                                      bool textual) const {
    if (!value.is_array()) fail(field, "expected an array of entity objects");
    std::vector<EntityMention> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const std::string item = field + "[" + std::to_string(i) + "]";
      const json& obj = value[i];
      if (!obj.is_object()) fail(item, "expected an object");
      EntityMention mention;
      if (!obj.contains("surface")) fail(item + ".surface", "missing");
      mention.surface = tokens(obj["surface"], item + ".surface");
      if (mention.surface.empty()) fail(item + ".surface", "entity surface is empty");
      if (!obj.contains("kind") || !obj["kind"].is_string()) fail(item + ".kind", "missing or not a string");
      const auto kind = parse_entity_kind(obj["kind"].get<std::string>());
      if (!kind) fail(item + ".kind", "expected person, location or context");
      mention.kind = *kind;
      if (obj.contains("confidence")) {
        if (!obj["confidence"].is_number()) fail(item + ".confidence", "expected a number");
        mention.confidence = obj["confidence"].get<double>();
      }
      if (textual && mention.confidence != 1.0) {
        fail(item + ".confidence", "textual entities must have confidence 1");
      }
      if (!(mention.confidence > 0.0 && mention.confidence <= 1.0)) {
        fail(item + ".confidence", "confidence must lie in (0, 1]");
      }
      out.push_back(std::move(mention));
    }
    return out;
  }

 private:
  std::size_t line_;
};

void append_number(std::string& out, double v, const char* format) {
  char buf[40];
  std::snprintf(buf, sizeof buf, format, v);
  out += buf;
}

void append_tokens(std::string& out, const Tokens& tokens) {
  out += '[';
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ',';
    out += json(tokens[i]).dump();
  }
  out += ']';
}

void append_matrix(std::string& out, const FeatureMatrix& m) {
  out += '[';
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (r) out += ',';
    out += '[';
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out += ',';
      append_number(out, m.at(r, c), "%.9g");
    }
    out += ']';
  }
  out += ']';
}

void append_entities(std::string& out, const std::vector<EntityMention>& entities) {
  out += '[';
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (i) out += ',';
    out += "{\"surface\":";
    append_tokens(out, entities[i].surface);
    out += ",\"kind\":\"";
    out += to_string(entities[i].kind);
    out += "\",\"confidence\":";
    append_number(out, entities[i].confidence, "%.17g");
    out += '}';
  }
  out += ']';
}

}  // namespace

NewsPost parse_record(std::string_view line, std::size_t line_number, const ParseOptions& options) {
  RecordReader reader(line_number);
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError("line " + std::to_string(line_number) + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) reader.fail("<record>", "expected a JSON object");

  NewsPost post;
  if (!doc.contains("id")) reader.fail("id", "missing");
  if (!doc["id"].is_string()) reader.fail("id", "expected a string");
  post.id = doc["id"].get<std::string>();
  if (post.id.empty()) reader.fail("id", "empty id");

  if (!doc.contains("text")) reader.fail("text", "missing");
  post.text = reader.tokens(doc["text"], "text");
  if (doc.contains("ocr_text") && !doc["ocr_text"].is_null()) {
    post.ocr_text = reader.tokens(doc["ocr_text"], "ocr_text");
  }
  if (doc.contains("textual_entities") && !doc["textual_entities"].is_null()) {
    post.textual_entities = reader.entities(doc["textual_entities"], "textual_entities", true);
  }
  if (doc.contains("visual_entities") && !doc["visual_entities"].is_null()) {
    post.visual_entities = reader.entities(doc["visual_entities"], "visual_entities", false);
  }

  if (!doc.contains("label")) reader.fail("label", "missing");
  const json& label = doc["label"];
  if (!label.is_number_integer()) reader.fail("label", "expected integer 0 or 1");
  const auto label_value = label.get<long long>();
  if (label_value != kLabelReal && label_value != kLabelFake) reader.fail("label", "label out of range");
  post.label = static_cast<int>(label_value);

  if (!doc.contains("visual_regions")) reader.fail("visual_regions", "missing");
  post.visual_regions = reader.matrix(doc["visual_regions"], "visual_regions");
  if (post.visual_regions.rows != options.region_count) {
    reader.fail("visual_regions", "expected " + std::to_string(options.region_count) +
                                      " regions, got " + std::to_string(post.visual_regions.rows));
  }
  if (options.visual_width && post.visual_regions.cols != *options.visual_width) {
    reader.fail("visual_regions", "region width " + std::to_string(post.visual_regions.cols) +
                                      " does not match configured " +
                                      std::to_string(*options.visual_width));
  }

  if (doc.contains("text_features") && !doc["text_features"].is_null()) {
    post.text_features = reader.matrix(doc["text_features"], "text_features");
    if (post.text_features->rows == 0) reader.fail("text_features", "no token rows");
  }
  if (doc.contains("event_id") && !doc["event_id"].is_null()) {
    if (!doc["event_id"].is_number_integer()) reader.fail("event_id", "expected an integer");
    post.event_id = doc["event_id"].get<int>();
  }
  return post;
}

std::string serialize_record(const NewsPost& post) {
  std::string out = "{\"id\":";
  out += json(post.id).dump();
  out += ",\"text\":";
  append_tokens(out, post.text);
  out += ",\"ocr_text\":";
  append_tokens(out, post.ocr_text);
  out += ",\"textual_entities\":";
  append_entities(out, post.textual_entities);
  out += ",\"visual_entities\":";
  append_entities(out, post.visual_entities);
  out += ",\"visual_regions\":";
  append_matrix(out, post.visual_regions);
  if (post.text_features) {
    out += ",\"text_features\":";
    append_matrix(out, *post.text_features);
  }
  out += ",\"label\":";
  out += std::to_string(post.label);
  if (post.event_id) {
    out += ",\"event_id\":";
    out += std::to_string(*post.event_id);
  }
  out += '}';
  return out;
}

std::vector<NewsPost> read_dataset(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  std::vector<NewsPost> posts;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    NewsPost post = parse_record(line, line_number, options);
    if (!ids.insert(post.id).second) {
      throw DataError("line " + std::to_string(line_number) + ": field 'id': duplicate id '" +
                      post.id + "'");
    }
    posts.push_back(std::move(post));
  }
  return posts;
}

void write_dataset(const std::filesystem::path& path, const std::vector<NewsPost>& posts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  for (const auto& post : posts) out << serialize_record(post) << '\n';
}

}  // namespace emfend::corpus
