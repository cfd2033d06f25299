#include "statlens/space.hpp"

#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "statlens/errors.hpp"

namespace statlens {

struct FiniteSpace::Data {
  std::string label;
  std::vector<std::string> outcomes;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> factor_sizes;
  bool unit = false;
  std::shared_ptr<const FiniteSpace> tensor_left;
  std::shared_ptr<const FiniteSpace> tensor_right;
};

FiniteSpace::FiniteSpace(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

FiniteSpace::FiniteSpace() : data_(unit().data_) {}

const FiniteSpace& FiniteSpace::unit() {
  static const FiniteSpace instance = [] {
    auto d = std::make_shared<Data>();
    d->label = "I";
    d->outcomes = {"()"};
    d->index = {{"()", 0}};
    d->unit = true;
    return FiniteSpace{std::move(d)};
  }();
  return instance;
}

FiniteSpace FiniteSpace::make(std::string label, std::vector<std::string> outcomes) {
  if (outcomes.empty()) {
    throw InvalidValue("space \"" + label + "\" must have at least one outcome");
  }
  auto d = std::make_shared<Data>();
  d->label = std::move(label);
  d->index.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!d->index.emplace(outcomes[i], i).second) {
      throw InvalidValue("space \"" + d->label + "\" has duplicate outcome \"" + outcomes[i] + "\"");
    }
  }
  d->outcomes = std::move(outcomes);
  d->factor_sizes = {d->outcomes.size()};
  return FiniteSpace{std::move(d)};
}

const std::string& FiniteSpace::label() const { return data_->label; }
std::size_t FiniteSpace::size() const { return data_->outcomes.size(); }
const std::vector<std::string>& FiniteSpace::outcomes() const { return data_->outcomes; }

const std::string& FiniteSpace::outcome(std::size_t i) const {
  if (i >= size()) {
    throw UnknownOutcome("outcome index " + std::to_string(i) + " out of range for space " + label());
  }
  return data_->outcomes[i];
}

std::size_t FiniteSpace::index_of(std::string_view outcome) const {
  auto it = data_->index.find(std::string(outcome));
  if (it == data_->index.end()) {
    throw UnknownOutcome("outcome \"" + std::string(outcome) + "\" not in space " + label());
  }
  return it->second;
}

bool FiniteSpace::contains(std::string_view outcome) const {
  return data_->index.count(std::string(outcome)) > 0;
}

bool FiniteSpace::is_unit() const { return data_->unit; }
bool FiniteSpace::is_product() const { return data_->tensor_left != nullptr; }

const FiniteSpace& FiniteSpace::left() const {
  if (!is_product()) throw NotAProductSpace("space " + label() + " is not a product");
  return *data_->tensor_left;
}

const FiniteSpace& FiniteSpace::right() const {
  if (!is_product()) throw NotAProductSpace("space " + label() + " is not a product");
  return *data_->tensor_right;
}

const std::vector<std::size_t>& FiniteSpace::factor_sizes() const { return data_->factor_sizes; }

std::vector<FiniteSpace> FiniteSpace::factors() const {
  if (is_unit()) return {};
  if (!is_product()) return {*this};
  auto out = data_->tensor_left->factors();
  auto rhs = data_->tensor_right->factors();
  out.insert(out.end(), rhs.begin(), rhs.end());
  return out;
}

bool FiniteSpace::operator==(const FiniteSpace& other) const {
  if (data_ == other.data_) return true;
  return data_->unit == other.data_->unit && data_->outcomes == other.data_->outcomes;
}

FiniteSpace tensor(const FiniteSpace& a, const FiniteSpace& b) {
  if (a.is_unit()) return b;
  if (b.is_unit()) return a;
  auto d = std::make_shared<FiniteSpace::Data>();
  d->label = a.label() + "⊗" + b.label();
  d->outcomes.reserve(a.size() * b.size());
  for (const auto& oa : a.outcomes()) {
    for (const auto& ob : b.outcomes()) {
      d->outcomes.push_back(oa + "," + ob);
    }
  }
  d->index.reserve(d->outcomes.size());
  for (std::size_t i = 0; i < d->outcomes.size(); ++i) {
    if (!d->index.emplace(d->outcomes[i], i).second) {
      throw InvalidValue("tensor of " + a.label() + " and " + b.label() +
                         " produces duplicate outcome label \"" + d->outcomes[i] + "\"");
    }
  }
  d->factor_sizes = a.factor_sizes();
  const auto& bf = b.factor_sizes();
  d->factor_sizes.insert(d->factor_sizes.end(), bf.begin(), bf.end());
  d->tensor_left = std::make_shared<FiniteSpace>(a);
  d->tensor_right = std::make_shared<FiniteSpace>(b);
  return FiniteSpace{std::move(d)};
}

FiniteSpace tensor_all(const std::vector<FiniteSpace>& factors) {
  FiniteSpace acc = FiniteSpace::unit();
  for (const auto& f : factors) acc = tensor(acc, f);
  return acc;
}

}  // namespace statlens
