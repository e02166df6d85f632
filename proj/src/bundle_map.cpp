#include "fiberlin/bundle_map.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace fiberlin {

namespace {
constexpr double kZeroSectionTol = 1e-10;
constexpr std::size_t kZeroSectionSamples = 9;
}  // namespace

std::vector<std::string> default_variable_names(const std::string& stem, std::size_t count) {
  if (count == 1) return {stem};
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= count; ++i) names.push_back(stem + std::to_string(i));
  return names;
}

BundleMap::BundleMap(TrivialBundle source, TrivialBundle target, Fn fn, Domain domain, bool check_zero_section)
    : source_(source), target_(target), fn_(std::move(fn)), domain_(std::move(domain)) {
  if (domain_.base_lo.size() != source_.base_dim || domain_.base_hi.size() != source_.base_dim)
    throw ConfigError("domain base box does not match the base dimension");
  if (!(domain_.fiber_radius > 0.0)) throw ConfigError("domain fiber radius must be positive");
  for (std::size_t i = 0; i < source_.base_dim; ++i)
    if (domain_.base_lo[i] > domain_.base_hi[i]) throw ConfigError("domain base box is empty");
  if (check_zero_section) {
    const double defect = zero_section_defect();
    if (!(defect <= kZeroSectionTol))
      throw ConfigError("map does not send the zero section to the zero section (|b(x,0)| = " +
                        std::to_string(defect) + ")");
  }
}

BundleMap BundleMap::from_expressions(std::size_t base_dim, std::size_t fiber_dim, const std::vector<std::string>& a,
                                      const std::vector<std::string>& b, Domain domain,
                                      std::vector<std::string> base_vars, std::vector<std::string> fiber_vars) {
  if (base_vars.empty()) base_vars = default_variable_names("x", base_dim);
  if (fiber_vars.empty()) fiber_vars = default_variable_names("v", fiber_dim);
  if (base_dim == 0) base_vars.clear();
  if (base_vars.size() != base_dim || fiber_vars.size() != fiber_dim)
    throw ConfigError("variable name lists do not match the bundle dimensions");
  if (b.empty()) throw ConfigError("target fiber dimension must be positive");

  std::vector<std::string> slots(base_vars);
  slots.insert(slots.end(), fiber_vars.begin(), fiber_vars.end());
  auto compiled = std::make_shared<std::vector<CompiledExpr>>();
  std::vector<std::string> texts;
  for (const auto* list : {&a, &b}) {
    for (const auto& text : *list) {
      try {
        compiled->emplace_back(parse(text), slots);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("component '" + text + "': " + e.what());
      }
      texts.push_back(text);
    }
  }
  Fn fn = [compiled](std::span<const double> coords) {
    Vector out(compiled->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*compiled)[i](coords);
    return out;
  };
  BundleMap map(TrivialBundle(base_dim, fiber_dim), TrivialBundle(a.size(), b.size()), std::move(fn),
                std::move(domain));
  map.expressions_ = std::move(texts);
  return map;
}

BundlePoint BundleMap::operator()(const BundlePoint& p) const {
  return BundlePoint::split(fn_(p.coords()), target_.base_dim);
}

BundleMap BundleMap::with_codomain(Domain codomain) const {
  BundleMap copy(*this);
  copy.codomain_ = std::move(codomain);
  return copy;
}

double BundleMap::zero_section_defect() const {
  const std::size_t m = source_.base_dim;
  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) total *= kZeroSectionSamples;
  Vector coords(source_.total_dim(), 0.0);
  double worst = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = m; i-- > 0;) {
      const std::size_t k = rest % kZeroSectionSamples;
      rest /= kZeroSectionSamples;
      const double s = static_cast<double>(k) / static_cast<double>(kZeroSectionSamples - 1);
      coords[i] = domain_.base_lo[i] + s * (domain_.base_hi[i] - domain_.base_lo[i]);
    }
    const Vector img = fn_(coords);
    for (std::size_t j = target_.base_dim; j < img.size(); ++j) worst = std::max(worst, std::fabs(img[j]));
  }
  return worst;
}

}  // namespace fiberlin
