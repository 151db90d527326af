#pragma once

#include "skewcrit/config.hpp"

#include <string>
#include <vector>

namespace skewcrit {

struct BuiltinExample {
  std::string name;
  std::string description;
  std::string json_text;
};

/// Registry of built-in configs, in a fixed order.
const std::vector<BuiltinExample>& builtin_examples();

/// Parsed config of a built-in example; ConfigError for unknown names.
ProblemConfig builtin_config(const std::string& name);

/// Loads "builtin:NAME" from the registry, anything else from disk.
ProblemConfig resolve_config(const std::string& spec);

}  // namespace skewcrit
