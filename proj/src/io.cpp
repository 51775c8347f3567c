#include "greenchain/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "greenchain/errors.hpp"
#include "greenchain/network.hpp"

namespace greenchain {

using nlohmann::json;

namespace {

[[noreturn]] void fail_parse(const std::string& text, std::size_t byte,
                             const std::string& what) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  std::ostringstream os;
  os << "JSON parse error at line " << line << ", column " << column << ": "
     << what;
  throw spec_error(os.str());
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Keep only the explanation; the position is recomputed from the byte
    // offset so the library's own "at line ..., column ..." prefix would
    // repeat it.
    std::string what = e.what();
    const std::size_t col = what.find("column ");
    if (col != std::string::npos) {
      const std::size_t sep = what.find(": ", col);
      if (sep != std::string::npos) what = what.substr(sep + 2);
    }
    fail_parse(text, e.byte > 0 ? e.byte - 1 : 0, what);
  }
}

const json& require_field(const json& obj, const char* key,
                          const char* context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw spec_error(std::string("missing field \"") + key + "\" in " +
                     context);
  }
  return *it;
}

double require_number(const json& obj, const char* key, const char* context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_number()) {
    throw spec_error(std::string("field \"") + key + "\" in " + context +
                     " must be a number");
  }
  return v.get<double>();
}

std::int64_t require_integer(const json& obj, const char* key,
                             const char* context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_number_integer()) {
    throw spec_error(std::string("field \"") + key + "\" in " + context +
                     " must be an integer");
  }
  return v.get<std::int64_t>();
}

}  // namespace

BirthDeathChain chain_from_json(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) {
    throw spec_error("chain spec must be a JSON object");
  }
  if (doc.contains("kind") && doc.at("kind") != "line") {
    throw spec_error("chain spec has kind \"" +
                     doc.at("kind").get<std::string>() +
                     "\", expected \"line\"");
  }
  const State lo = require_integer(doc, "lo", "chain spec");
  const State hi = require_integer(doc, "hi", "chain spec");
  if (hi < lo) {
    throw spec_error("chain spec window is empty: hi < lo");
  }

  bool absorb_lo = false;
  bool absorb_hi = false;
  if (doc.contains("absorbing")) {
    const json& ab = doc.at("absorbing");
    if (!ab.is_array()) {
      throw spec_error("\"absorbing\" must be an array of window endpoints");
    }
    for (const json& v : ab) {
      if (!v.is_number_integer()) {
        throw spec_error("\"absorbing\" entries must be integers");
      }
      const State s = v.get<State>();
      if (s == lo) {
        absorb_lo = true;
      } else if (s == hi) {
        absorb_hi = true;
      } else {
        throw spec_error("absorbing state " + std::to_string(s) +
                         " is not a window endpoint");
      }
    }
  }

  const std::size_t count = static_cast<std::size_t>(hi - lo + 1);
  std::vector<ProbabilityTriple> rows(count, ProbabilityTriple{0.0, 0.0, 0.0});
  const json& rows_field = require_field(doc, "rows", "chain spec");
  if (rows_field.is_object() && rows_field.contains("uniform")) {
    const json& u = rows_field.at("uniform");
    const ProbabilityTriple row{require_number(u, "l", "uniform row"),
                                require_number(u, "a", "uniform row"),
                                require_number(u, "r", "uniform row")};
    std::fill(rows.begin(), rows.end(), row);
  } else if (rows_field.is_array()) {
    std::vector<bool> seen(count, false);
    for (const json& entry : rows_field) {
      if (!entry.is_object()) {
        throw spec_error("row entries must be objects {n, l, a, r}");
      }
      const State n = require_integer(entry, "n", "row entry");
      if (n < lo || n > hi) {
        throw spec_error("row for state " + std::to_string(n) +
                         " lies outside the window");
      }
      const auto idx = static_cast<std::size_t>(n - lo);
      if (seen[idx]) {
        throw spec_error("duplicate row for state " + std::to_string(n));
      }
      seen[idx] = true;
      rows[idx] = ProbabilityTriple{require_number(entry, "l", "row entry"),
                                    require_number(entry, "a", "row entry"),
                                    require_number(entry, "r", "row entry")};
    }
    for (State n = lo; n <= hi; ++n) {
      const auto idx = static_cast<std::size_t>(n - lo);
      const bool absorbing = (absorb_lo && n == lo) || (absorb_hi && n == hi);
      if (!seen[idx] && !absorbing) {
        throw spec_error("missing row for state " + std::to_string(n));
      }
    }
  } else {
    throw spec_error(
        "\"rows\" must be an array of row objects or {\"uniform\": {...}}");
  }

  BirthDeathChain chain(lo, hi, std::move(rows), absorb_lo, absorb_hi);
  chain.require_valid();
  return chain;
}

TreeChain tree_from_json(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) {
    throw spec_error("tree spec must be a JSON object");
  }
  if (doc.contains("kind") && doc.at("kind") != "tree") {
    throw spec_error("tree spec has kind \"" +
                     doc.at("kind").get<std::string>() +
                     "\", expected \"tree\"");
  }

  std::vector<Vertex> vertices;
  for (const json& v : require_field(doc, "vertices", "tree spec")) {
    if (!v.is_number_integer()) {
      throw spec_error("\"vertices\" entries must be integers");
    }
    vertices.push_back(v.get<Vertex>());
  }

  std::vector<std::pair<Vertex, Vertex>> edges;
  for (const json& e : require_field(doc, "edges", "tree spec")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw spec_error("\"edges\" entries must be [u, v] integer pairs");
    }
    edges.emplace_back(e[0].get<Vertex>(), e[1].get<Vertex>());
  }

  std::map<Vertex, TransitionRow> rows;
  for (const json& t : require_field(doc, "transitions", "tree spec")) {
    if (!t.is_object()) {
      throw spec_error("\"transitions\" entries must be objects");
    }
    const Vertex v = require_integer(t, "v", "transition entry");
    if (rows.count(v)) {
      throw spec_error("duplicate transition row for vertex " +
                       std::to_string(v));
    }
    TransitionRow row;
    if (t.contains("self")) {
      row.self = require_number(t, "self", "transition entry");
    }
    const json& to = require_field(t, "to", "transition entry");
    if (!to.is_object()) {
      throw spec_error("\"to\" must map neighbor ids to probabilities");
    }
    for (const auto& [key, p] : to.items()) {
      Vertex w = 0;
      try {
        std::size_t used = 0;
        w = std::stoll(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw spec_error("\"to\" key \"" + key +
                         "\" is not an integer vertex id");
      }
      if (!p.is_number()) {
        throw spec_error("\"to\" probabilities must be numbers");
      }
      row.to[w] = p.get<double>();
    }
    rows[v] = std::move(row);
  }

  std::optional<std::set<Vertex>> leaves;
  if (doc.contains("leaves")) {
    std::set<Vertex> explicit_leaves;
    for (const json& v : doc.at("leaves")) {
      if (!v.is_number_integer()) {
        throw spec_error("\"leaves\" entries must be integers");
      }
      explicit_leaves.insert(v.get<Vertex>());
    }
    leaves = std::move(explicit_leaves);
  }

  TreeChain tc(std::move(vertices), std::move(edges), std::move(rows),
               std::move(leaves));
  tc.require_valid();
  return tc;
}

FormulaSpec formula_from_json(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) {
    throw spec_error("formula spec must be a JSON object");
  }
  if (doc.contains("kind") && doc.at("kind") != "formula") {
    throw spec_error("formula spec has kind \"" +
                     doc.at("kind").get<std::string>() +
                     "\", expected \"formula\"");
  }
  const std::string family =
      require_field(doc, "family", "formula spec").get<std::string>();
  FormulaSpec spec;
  if (family == "uniform") {
    spec.family = FormulaSpec::Family::Uniform;
    spec.l = require_number(doc, "l", "formula spec");
    spec.a = doc.contains("a") ? require_number(doc, "a", "formula spec")
                               : 0.0;
    spec.r = require_number(doc, "r", "formula spec");
    if (!(spec.l > 0.0) || !(spec.r > 0.0) || spec.a < 0.0 ||
        std::abs(spec.l + spec.a + spec.r - 1.0) > 1e-12) {
      throw spec_error("uniform formula row must satisfy l, r > 0, a >= 0, "
                       "l + a + r = 1");
    }
  } else if (family == "inverse_drift") {
    spec.family = FormulaSpec::Family::InverseDrift;
    spec.base = require_number(doc, "base", "formula spec");
    spec.amplitude = require_number(doc, "amplitude", "formula spec");
    if (doc.contains("floor")) {
      spec.floor = require_number(doc, "floor", "formula spec");
    }
    if (!(spec.base > 0.0) || !(spec.base < 1.0)) {
      throw spec_error("inverse_drift base must lie in (0, 1)");
    }
    if (!(spec.floor > 0.0) || !(spec.floor < 0.5)) {
      throw spec_error("inverse_drift floor must lie in (0, 0.5)");
    }
  } else {
    throw spec_error("unknown formula family \"" + family +
                     "\"; expected \"uniform\" or \"inverse_drift\"");
  }
  return spec;
}

CoefficientFn FormulaSpec::coefficients() const {
  if (family == Family::Uniform) {
    const ProbabilityTriple row{l, a, r};
    return [row](State) { return row; };
  }
  const double b = base;
  const double amp = amplitude;
  const double lo = floor;
  return [b, amp, lo](State n) {
    double rn = b;
    if (n != 0) rn = b + amp / static_cast<double>(n);
    rn = std::clamp(rn, lo, 1.0 - lo);
    return ProbabilityTriple{1.0 - rn, 0.0, rn};
  };
}

const BirthDeathChain& LoadedSpec::chain() const {
  if (const auto* c = std::get_if<BirthDeathChain>(&payload)) return *c;
  throw spec_error("spec kind \"" + kind + "\" is not a line chain");
}

const TreeChain& LoadedSpec::tree() const {
  if (const auto* t = std::get_if<TreeChain>(&payload)) return *t;
  throw spec_error("spec kind \"" + kind + "\" is not a tree chain");
}

const FormulaSpec& LoadedSpec::formula() const {
  if (const auto* f = std::get_if<FormulaSpec>(&payload)) return *f;
  throw spec_error("spec kind \"" + kind + "\" is not a coefficient formula");
}

LoadedSpec parse_spec(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object() || !doc.contains("kind") ||
      !doc.at("kind").is_string()) {
    throw spec_error(
        "spec needs a top-level \"kind\": \"line\", \"tree\" or \"formula\"");
  }
  LoadedSpec spec;
  spec.kind = doc.at("kind").get<std::string>();
  spec.digest = fnv1a64_hex(text);
  if (spec.kind == "line") {
    spec.payload = chain_from_json(text);
  } else if (spec.kind == "tree") {
    spec.payload = tree_from_json(text);
  } else if (spec.kind == "formula") {
    spec.payload = formula_from_json(text);
  } else {
    throw spec_error("unknown spec kind \"" + spec.kind + "\"");
  }
  return spec;
}

LoadedSpec load_spec_file(const std::string& path) {
  return parse_spec(read_file(path));
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw spec_error("cannot read file: " + path);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ConductanceNetwork network_from_json(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) {
    throw spec_error("network dump must be a JSON object");
  }
  ConductanceNetwork net;
  if (doc.contains("vertices")) {
    for (const json& v : doc.at("vertices")) {
      if (!v.is_number_integer()) {
        throw spec_error("\"vertices\" entries must be integers");
      }
      net.add_vertex(v.get<Vertex>());
    }
  }
  for (const json& e : require_field(doc, "edges", "network dump")) {
    net.add_edge(require_integer(e, "u", "network edge"),
                 require_integer(e, "v", "network edge"),
                 require_number(e, "C", "network edge"));
  }
  if (doc.contains("loops")) {
    for (const json& e : doc.at("loops")) {
      net.set_loop(require_integer(e, "v", "network loop"),
                   require_number(e, "C", "network loop"));
    }
  }
  return net;
}

}  // namespace greenchain
