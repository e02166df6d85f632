#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fiberlin/bundle.hpp"
#include "fiberlin/expr.hpp"

namespace fiberlin {

/// A map h = (a, b) from a region of the source bundle into the target
/// bundle, with b(x, 0) = 0 (the zero section goes to the zero section).
///
/// Evaluation works on concatenated coordinates (x, v) and returns the
/// concatenated image (a, b). Instances are immutable and cheap to copy.
class BundleMap {
public:
  using Fn = std::function<Vector(std::span<const double> coords)>;

  /// Wraps an arbitrary evaluator. When `check_zero_section` is set the
  /// constructor samples the base box and throws ConfigError if
  /// |b(x, 0)| > 1e-10 anywhere.
  BundleMap(TrivialBundle source, TrivialBundle target, Fn fn, Domain domain, bool check_zero_section = true);

  /// Builds a map from component expressions. Variables default to `x`/`v`
  /// for one-dimensional base/fiber and `x1..`/`v1..` otherwise.
  static BundleMap from_expressions(std::size_t base_dim, std::size_t fiber_dim, const std::vector<std::string>& a,
                                    const std::vector<std::string>& b, Domain domain,
                                    std::vector<std::string> base_vars = {},
                                    std::vector<std::string> fiber_vars = {});

  Vector operator()(std::span<const double> coords) const { return fn_(coords); }
  BundlePoint operator()(const BundlePoint& p) const;

  const TrivialBundle& source() const noexcept { return source_; }
  const TrivialBundle& target() const noexcept { return target_; }
  const Domain& domain() const noexcept { return domain_; }
  const Fn& function() const noexcept { return fn_; }

  /// Region the image is required to stay in (used by the delta search);
  /// unset means "no constraint".
  const std::optional<Domain>& codomain() const noexcept { return codomain_; }
  BundleMap with_codomain(Domain codomain) const;

  /// Component expressions when built from_expressions (a then b); empty otherwise.
  const std::vector<std::string>& expressions() const noexcept { return expressions_; }

  /// Max |b(x, 0)| over a small grid of the base box.
  double zero_section_defect() const;

private:
  TrivialBundle source_;
  TrivialBundle target_;
  Fn fn_;
  Domain domain_;
  std::optional<Domain> codomain_;
  std::vector<std::string> expressions_;
};

std::vector<std::string> default_variable_names(const std::string& stem, std::size_t count);

}  // namespace fiberlin
