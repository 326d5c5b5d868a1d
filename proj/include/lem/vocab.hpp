#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace lem {

// The event-type vocabulary: a fixed bijection between the 33 type ids and
// their names, loaded from a versioned mapping file. The mapping also carries
// the raw-label spellings used by the ingestion parser, a per-type category
// used by the stats reducers, the goal-capable subset and the kickoff type.
class TypeVocabulary {
 public:
  static constexpr int kTypeCount = 33;

  struct TypeInfo {
    int id = -1;
    std::string name;
    std::vector<std::string> raw_labels;
    std::string category;
    bool goal_capable = false;
  };

  TypeVocabulary() = default;

  static TypeVocabulary from_json(const std::string& json_text);
  static TypeVocabulary load(const std::filesystem::path& path);

  const std::string& version() const { return version_; }
  const std::string& json_text() const { return json_text_; }

  const TypeInfo& info(int id) const;
  const std::string& name(int id) const { return info(id).name; }
  int id_of(const std::string& name) const;           // throws on unknown
  int find(const std::string& name) const;            // -1 on unknown
  int resolve_raw(const std::string& raw_label) const;  // -1 on unknown

  bool goal_capable(int id) const { return info(id).goal_capable; }
  const std::string& category(int id) const { return info(id).category; }
  int kickoff_type() const { return kickoff_type_; }

 private:
  std::string version_;
  std::string json_text_;
  std::vector<TypeInfo> types_;
  std::unordered_map<std::string, int> by_name_;
  std::unordered_map<std::string, int> by_raw_;
  int kickoff_type_ = 0;
};

}  // namespace lem
