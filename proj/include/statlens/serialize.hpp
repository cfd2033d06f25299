#pragma once

#include <string>

#include "json.hpp"
#include "statlens/lens.hpp"

namespace statlens {

using Json = nlohmann::ordered_json;

// JSON encodings:
//   space   — array of outcome labels; the unit space I is the empty array
//   Dist    — {"space": [...], "weights": {outcome: w, ...}}
//   Kernel  — {"dom": [...], "cod": [...], "rows": {x: {y: w, ...}, ...}}
//   lens    — {"tag": "exact", "forward": <kernel>}; only exact lenses and
//             named builtins are serializable, arbitrary update rules are not
// Rational weights are "p/q" strings, float weights are JSON numbers.
// Missing outcomes in a weights map mean weight zero; unknown keys are
// rejected.

Json space_to_json(const FiniteSpace& space);
FiniteSpace space_from_json(const Json& j, const std::string& label);

template <typename R>
Json weight_to_json(const R& w) {
  if constexpr (num_traits<R>::exact) {
    return Json(statlens::to_string(w));
  } else {
    return Json(w);
  }
}

template <typename R>
R weight_from_json(const Json& j) {
  if constexpr (num_traits<R>::exact) {
    if (!j.is_string()) throw InvalidValue("rational weight must be a \"p/q\" string");
    return parse_rational(j.get<std::string>());
  } else {
    if (!j.is_number()) throw InvalidValue("float weight must be a number");
    return j.get<double>();
  }
}

template <typename R>
Json dist_to_json(const Dist<R>& d) {
  Json weights = Json::object();
  for (std::size_t i = 0; i < d.size(); ++i) {
    weights[d.space().outcome(i)] = weight_to_json<R>(d.weights()[i]);
  }
  return Json{{"space", space_to_json(d.space())}, {"weights", weights}};
}

template <typename R>
Dist<R> dist_from_json(const Json& j, const std::string& label = "X") {
  if (!j.is_object() || !j.contains("space") || !j.contains("weights") ||
      !j.at("weights").is_object()) {
    throw InvalidValue("distribution must be {\"space\": [...], \"weights\": {...}}");
  }
  FiniteSpace space = space_from_json(j.at("space"), label);
  std::vector<R> w(space.size(), num_traits<R>::zero());
  for (const auto& [key, value] : j.at("weights").items()) {
    w[space.index_of(key)] = weight_from_json<R>(value);
  }
  return Dist<R>(std::move(space), std::move(w));
}

template <typename R>
Json kernel_to_json(const Kernel<R>& k) {
  Json rows = Json::object();
  for (std::size_t x = 0; x < k.dom().size(); ++x) {
    if (!k.row_defined(x)) continue;  // partial kernels serialize their defined rows
    Json row = Json::object();
    const Dist<R>& d = k.row(x);
    for (std::size_t y = 0; y < d.size(); ++y) {
      row[k.cod().outcome(y)] = weight_to_json<R>(d.weights()[y]);
    }
    rows[k.dom().outcome(x)] = std::move(row);
  }
  return Json{{"dom", space_to_json(k.dom())}, {"cod", space_to_json(k.cod())}, {"rows", rows}};
}

template <typename R>
Kernel<R> kernel_from_json(const Json& j, const std::string& dom_label = "X",
                           const std::string& cod_label = "Y") {
  if (!j.is_object() || !j.contains("dom") || !j.contains("cod") || !j.contains("rows")) {
    throw InvalidValue("kernel must be {\"dom\": [...], \"cod\": [...], \"rows\": {...}}");
  }
  FiniteSpace dom = space_from_json(j.at("dom"), dom_label);
  FiniteSpace cod = space_from_json(j.at("cod"), cod_label);
  std::vector<Dist<R>> rows;
  rows.reserve(dom.size());
  const Json& jrows = j.at("rows");
  if (!jrows.is_object()) throw InvalidValue("kernel rows must be an object");
  for (std::size_t x = 0; x < dom.size(); ++x) {
    const std::string& name = dom.outcome(x);
    if (!jrows.contains(name) || !jrows.at(name).is_object()) {
      throw InvalidValue("kernel is missing row \"" + name + "\"");
    }
    std::vector<R> w(cod.size(), num_traits<R>::zero());
    for (const auto& [key, value] : jrows.at(name).items()) {
      w[cod.index_of(key)] = weight_from_json<R>(value);
    }
    rows.emplace_back(cod, std::move(w));
  }
  return Kernel<R>(std::move(dom), std::move(cod), std::move(rows));
}

template <typename R>
Json exact_lens_to_json(const BayesianLens<R>& lens) {
  return Json{{"tag", "exact"}, {"forward", kernel_to_json(lens.forward())}};
}

template <typename R>
BayesianLens<R> lens_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("tag")) {
    throw InvalidValue("lens must carry a \"tag\"");
  }
  const std::string tag = j.at("tag").get<std::string>();
  if (tag == "exact") {
    return exact_lens(kernel_from_json<R>(j.at("forward")));
  }
  if (tag == "identity") {
    FiniteSpace x = space_from_json(j.at("space"), "X");
    return identity_lens<R>(x);
  }
  throw InvalidValue("unknown lens tag \"" + tag + "\"");
}

}  // namespace statlens
