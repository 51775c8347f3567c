#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "greenchain/chain.hpp"
#include "greenchain/tree.hpp"

namespace greenchain {

// Coefficient rule for chains given by formula instead of explicit rows
// (the classifier needs values over all of Z, not a finite window).
struct FormulaSpec {
  enum class Family { Uniform, InverseDrift };
  Family family = Family::Uniform;
  // Uniform: the same (l, a, r) everywhere.
  double l = 0.5;
  double a = 0.0;
  double r = 0.5;
  // InverseDrift: r_n = clamp(base + amplitude/n, floor, 1 - floor) for
  // n != 0 and r_0 = base; a_n = 0, l_n = 1 - r_n. Models near-critical
  // drifts that decay like 1/n.
  double base = 0.5;
  double amplitude = 0.0;
  double floor = 1e-6;

  CoefficientFn coefficients() const;
};

struct LoadedSpec {
  std::string kind;  // "line" | "tree" | "formula"
  std::string digest;
  // FormulaSpec first: it is the only default-constructible alternative.
  std::variant<FormulaSpec, BirthDeathChain, TreeChain> payload;

  const BirthDeathChain& chain() const;  // throws spec_error on wrong kind
  const TreeChain& tree() const;
  const FormulaSpec& formula() const;
};

// Parsers for the three spec dialects. All throw spec_error with a
// line/column position for malformed JSON and a named-state message for
// structurally invalid content. Parsing validates; callers receive
// ready-to-use objects.
BirthDeathChain chain_from_json(const std::string& text);
TreeChain tree_from_json(const std::string& text);
FormulaSpec formula_from_json(const std::string& text);

// Reads the file, hashes it, and dispatches on the top-level "kind".
LoadedSpec load_spec_file(const std::string& path);
LoadedSpec parse_spec(const std::string& text);

// FNV-1a 64-bit content hash, rendered "fnv1a64:<16 hex digits>".
std::string fnv1a64_hex(std::string_view bytes);

std::string read_file(const std::string& path);

}  // namespace greenchain
