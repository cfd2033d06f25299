#include "statlens/serialize.hpp"

namespace statlens {

Json space_to_json(const FiniteSpace& space) {
  if (space.is_unit()) return Json::array();
  Json out = Json::array();
  for (const auto& o : space.outcomes()) out.push_back(o);
  return out;
}

FiniteSpace space_from_json(const Json& j, const std::string& label) {
  if (!j.is_array()) throw InvalidValue("space must be an array of outcome labels");
  if (j.empty()) return FiniteSpace::unit();
  std::vector<std::string> outcomes;
  outcomes.reserve(j.size());
  for (const auto& item : j) {
    if (!item.is_string()) throw InvalidValue("space outcomes must be strings");
    outcomes.push_back(item.get<std::string>());
  }
  return FiniteSpace::make(label, std::move(outcomes));
}

}  // namespace statlens
