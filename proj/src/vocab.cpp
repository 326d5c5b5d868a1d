#include "lem/vocab.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lem {

using nlohmann::json;

TypeVocabulary TypeVocabulary::from_json(const std::string& json_text) {
  json doc = json::parse(json_text);

  TypeVocabulary v;
  v.json_text_ = json_text;
  v.version_ = doc.at("version").get<std::string>();

  const auto& types = doc.at("types");
  if (static_cast<int>(types.size()) != kTypeCount) {
    throw std::runtime_error("type mapping must define exactly 33 types, got " +
                             std::to_string(types.size()));
  }

  v.types_.resize(kTypeCount);
  std::set<int> seen_ids;
  for (const auto& t : types) {
    TypeInfo info;
    info.id = t.at("id").get<int>();
    info.name = t.at("name").get<std::string>();
    info.category = t.value("category", std::string("other"));
    for (const auto& raw : t.at("raw")) {
      info.raw_labels.push_back(raw.get<std::string>());
    }
    if (info.id < 0 || info.id >= kTypeCount) {
      throw std::runtime_error("type id out of range: " + std::to_string(info.id));
    }
    if (!seen_ids.insert(info.id).second) {
      throw std::runtime_error("duplicate type id: " + std::to_string(info.id));
    }
    if (v.by_name_.count(info.name)) {
      throw std::runtime_error("duplicate type name: " + info.name);
    }
    v.by_name_[info.name] = info.id;
    for (const auto& raw : info.raw_labels) {
      if (v.by_raw_.count(raw)) {
        throw std::runtime_error("raw label mapped twice: " + raw);
      }
      v.by_raw_[raw] = info.id;
    }
    v.types_[info.id] = std::move(info);
  }

  for (const auto& name : doc.at("goal_capable")) {
    int id = v.id_of(name.get<std::string>());
    v.types_[id].goal_capable = true;
  }
  v.kickoff_type_ = v.id_of(doc.at("kickoff_type").get<std::string>());
  return v;
}

TypeVocabulary TypeVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open type mapping file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

const TypeVocabulary::TypeInfo& TypeVocabulary::info(int id) const {
  if (id < 0 || id >= static_cast<int>(types_.size())) {
    throw std::out_of_range("type id out of range: " + std::to_string(id));
  }
  return types_[static_cast<std::size_t>(id)];
}

int TypeVocabulary::id_of(const std::string& name) const {
  int id = find(name);
  if (id < 0) throw std::runtime_error("unknown type name: " + name);
  return id;
}

int TypeVocabulary::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

int TypeVocabulary::resolve_raw(const std::string& raw_label) const {
  auto it = by_raw_.find(raw_label);
  return it == by_raw_.end() ? -1 : it->second;
}

}  // namespace lem
