#include "crnkit/network.hpp"

#include "crnkit/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace crn {

namespace {

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

std::string coordinate_violation(double v, ValidationMode mode) {
  if (!std::isfinite(v) || v < 0.0) return "stoichiometric coefficient must be nonnegative";
  if (mode == ValidationMode::Integer && !is_integer(v))
    return "non-integer stoichiometric coefficient in integer validation mode";
  if (mode == ValidationMode::Real && v > 0.0 && v < 1.0)
    return "stoichiometric coefficient in (0,1) violates the vertex restriction";
  return {};
}

}  // namespace

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, Eigen::MatrixXd complexes,
                                 std::vector<Reaction> reactions, ValidationMode mode)
    : species_(std::move(species)),
      complexes_(std::move(complexes)),
      reactions_(std::move(reactions)),
      mode_(mode) {
  const int n = num_species();
  const int m = num_complexes();
  if (complexes_.rows() != n)
    throw ValidationError("complex matrix has " + std::to_string(complexes_.rows()) +
                          " rows but there are " + std::to_string(n) + " species");
  if (reactions_.empty()) throw ValidationError("network has no reactions");

  std::set<std::string> names;
  for (const auto& s : species_) {
    if (s.empty()) throw ValidationError("empty species name");
    if (!names.insert(s).second) throw ValidationError("duplicate species '" + s + "'");
  }

  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < n; ++k) {
      const double v = complexes_(k, i);
      if (auto why = coordinate_violation(v, mode_); !why.empty()) throw ValidationError(why);
      integral_ = integral_ && is_integer(v);
    }
  }

  std::set<std::vector<double>> seen;
  for (int i = 0; i < m; ++i) {
    std::vector<double> key(complexes_.col(i).data(), complexes_.col(i).data() + n);
    if (!seen.insert(std::move(key)).second)
      throw ValidationError("duplicate complex at vertex " + std::to_string(i));
  }

  std::vector<bool> touched(static_cast<std::size_t>(m), false);
  std::set<std::pair<int, int>> edges;
  for (const auto& r : reactions_) {
    if (r.source < 0 || r.source >= m || r.target < 0 || r.target >= m)
      throw ValidationError("reaction refers to a vertex out of range");
    if (r.source == r.target) throw ValidationError("self-loop reaction");
    if (!edges.insert({r.source, r.target}).second) throw ValidationError("duplicate reaction");
    touched[static_cast<std::size_t>(r.source)] = true;
    touched[static_cast<std::size_t>(r.target)] = true;
  }
  for (int i = 0; i < m; ++i)
    if (!touched[static_cast<std::size_t>(i)])
      throw ValidationError("isolated vertex " + std::to_string(i));
}

Eigen::VectorXd ReactionNetwork::reaction_vector(int edge) const {
  const auto& r = reaction(edge);
  return complexes_.col(r.target) - complexes_.col(r.source);
}

Eigen::MatrixXd ReactionNetwork::stoichiometric_matrix() const {
  Eigen::MatrixXd s(num_species(), num_reactions());
  for (int e = 0; e < num_reactions(); ++e) s.col(e) = reaction_vector(e);
  return s;
}

int ReactionNetwork::find_complex(const Eigen::Ref<const Eigen::VectorXd>& coords) const {
  if (coords.size() != num_species()) return -1;
  for (int i = 0; i < num_complexes(); ++i)
    if (complexes_.col(i) == coords) return i;
  return -1;
}

int ReactionNetwork::find_reaction(int source, int target) const {
  for (int e = 0; e < num_reactions(); ++e)
    if (reactions_[static_cast<std::size_t>(e)] == Reaction{source, target}) return e;
  return -1;
}

int ReactionNetwork::species_index(std::string_view name) const {
  for (int k = 0; k < num_species(); ++k)
    if (species_[static_cast<std::size_t>(k)] == name) return k;
  return -1;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

using SparseComplex = std::map<int, double>;  // species index -> coefficient

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  int line = 0;
  int base_column = 1;  // column of text[0] within the original line

  int column() const { return base_column + static_cast<int>(pos); }
  bool done() const { return pos >= text.size(); }
  char peek() const { return done() ? '\0' : text[pos]; }
  void skip_ws() {
    while (!done() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r')) ++pos;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, column()); }
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

double parse_number(Cursor& cur) {
  const char* first = cur.text.data() + cur.pos;
  const char* last = cur.text.data() + cur.text.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{}) cur.fail("expected a number");
  cur.pos += static_cast<std::size_t>(ptr - first);
  return value;
}

// Species resolution differs between network parsing (new species are
// registered) and key lookup (species must already exist).
template <typename Resolve>
SparseComplex parse_complex(Cursor& cur, ValidationMode mode, Resolve&& resolve) {
  SparseComplex out;
  cur.skip_ws();
  const int start_col = cur.column();
  if (cur.peek() == '0') {
    // "0" alone is the zero complex; "0X" or "0.5X" are coefficients.
    const std::size_t save = cur.pos;
    ++cur.pos;
    cur.skip_ws();
    const char c = cur.peek();
    if (c == '\0' || c == '-' || c == '<' || c == ':') return out;
    cur.pos = save;
  }
  while (true) {
    cur.skip_ws();
    const int term_col = cur.column();
    double coeff = 1.0;
    const char c = cur.peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      coeff = parse_number(cur);
      cur.skip_ws();
    }
    if (!ident_start(cur.peek())) cur.fail("expected a species name");
    const std::size_t name_start = cur.pos;
    while (!cur.done() && ident_char(cur.peek())) ++cur.pos;
    const std::string_view name = cur.text.substr(name_start, cur.pos - name_start);
    if (coeff == 0.0) throw ParseError("zero stoichiometric coefficient", cur.line, term_col);
    if (auto why = coordinate_violation(coeff, mode); !why.empty())
      throw ParseError(why, cur.line, term_col);
    const int idx = resolve(name, term_col);
    out[idx] += coeff;
    cur.skip_ws();
    if (cur.peek() != '+') break;
    ++cur.pos;
  }
  for (const auto& [idx, v] : out)
    if (auto why = coordinate_violation(v, mode); !why.empty())
      throw ParseError(why, cur.line, start_col);
  return out;
}

enum class Arrow { Forward, Reversible };

Arrow parse_arrow(Cursor& cur) {
  cur.skip_ws();
  if (cur.text.substr(cur.pos).starts_with("<->")) {
    cur.pos += 3;
    return Arrow::Reversible;
  }
  if (cur.text.substr(cur.pos).starts_with("->")) {
    cur.pos += 2;
    return Arrow::Forward;
  }
  cur.fail("expected '->' or '<->'");
}

std::string_view strip_comment(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  return line;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

Eigen::MatrixXd densify(const std::vector<SparseComplex>& vertices, int n) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (const auto& [k, v] : vertices[i]) y(k, static_cast<Eigen::Index>(i)) = v;
  return y;
}

}  // namespace

ParsedNetwork parse_network_text(std::string_view text, ValidationMode mode) {
  std::vector<std::string> species;
  std::vector<SparseComplex> vertices;
  std::vector<Reaction> reactions;
  std::vector<double> rates;
  int lines_with_rates = 0;
  int statements = 0;
  std::set<std::pair<int, int>> edge_set;

  auto vertex_of = [&](const SparseComplex& c) {
    for (std::size_t i = 0; i < vertices.size(); ++i)
      if (vertices[i] == c) return static_cast<int>(i);
    vertices.push_back(c);
    return static_cast<int>(vertices.size() - 1);
  };

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    std::string_view body = strip_comment(raw);
    if (blank(body)) {
      if (end == text.size()) break;
      continue;
    }
    ++statements;

    Cursor cur{body, 0, line_no, 1};
    auto resolve = [&](std::string_view name, int) {
      for (std::size_t k = 0; k < species.size(); ++k)
        if (species[k] == name) return static_cast<int>(k);
      species.emplace_back(name);
      return static_cast<int>(species.size() - 1);
    };

    const SparseComplex lhs = parse_complex(cur, mode, resolve);
    const int arrow_col = (cur.skip_ws(), cur.column());
    const Arrow arrow = parse_arrow(cur);
    const SparseComplex rhs = parse_complex(cur, mode, resolve);

    std::vector<double> line_rates;
    cur.skip_ws();
    if (cur.peek() == ':') {
      ++cur.pos;
      while (true) {
        cur.skip_ws();
        line_rates.push_back(parse_number(cur));
        if (!(line_rates.back() > 0.0) || !std::isfinite(line_rates.back()))
          cur.fail("rate constant must be positive");
        cur.skip_ws();
        if (cur.peek() != ',') break;
        ++cur.pos;
      }
      const std::size_t expected = arrow == Arrow::Reversible ? 2 : 1;
      if (line_rates.size() != expected)
        cur.fail("expected " + std::to_string(expected) + " inline rate constant(s)");
      ++lines_with_rates;
    }
    cur.skip_ws();
    if (!cur.done()) cur.fail("unexpected trailing text");

    if (lhs == rhs) throw ParseError("self-loop reaction", line_no, arrow_col);
    const int s = vertex_of(lhs);
    const int t = vertex_of(rhs);
    auto add_edge = [&](int a, int b) {
      if (!edge_set.insert({a, b}).second)
        throw ParseError("duplicate reaction", line_no, arrow_col);
      reactions.push_back({a, b});
    };
    add_edge(s, t);
    if (arrow == Arrow::Reversible) add_edge(t, s);
    rates.insert(rates.end(), line_rates.begin(), line_rates.end());
    if (end == text.size()) break;
  }

  if (statements == 0) throw ParseError("network has no reactions", 1, 1);
  if (lines_with_rates != 0 && lines_with_rates != statements)
    throw ParseError("inline rate constants must be given for every reaction or for none", 0, 0);

  const int n = static_cast<int>(species.size());
  ParsedNetwork out{ReactionNetwork(std::move(species), densify(vertices, n), std::move(reactions), mode),
                    std::nullopt};
  if (lines_with_rates != 0) out.inline_rates = std::move(rates);
  return out;
}

int find_reaction_by_text(const ReactionNetwork& net, std::string_view text) {
  Cursor cur{text, 0, 0, 1};
  auto resolve = [&](std::string_view name, int col) {
    const int idx = net.species_index(name);
    if (idx < 0) throw ParseError("unknown species '" + std::string(name) + "' in '" + std::string(text) + "'", 0, col);
    return idx;
  };
  // Real mode accepts every coordinate the network can hold.
  const SparseComplex lhs = parse_complex(cur, ValidationMode::Real, resolve);
  if (parse_arrow(cur) != Arrow::Forward)
    throw ParseError("reaction key must use '->': '" + std::string(text) + "'", 0, 0);
  const SparseComplex rhs = parse_complex(cur, ValidationMode::Real, resolve);
  cur.skip_ws();
  if (!cur.done()) throw ParseError("unexpected trailing text in '" + std::string(text) + "'", 0, 0);

  auto dense = [&](const SparseComplex& c) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(net.num_species());
    for (const auto& [k, x] : c) v(k) = x;
    return v;
  };
  const int s = net.find_complex(dense(lhs));
  const int t = net.find_complex(dense(rhs));
  const int e = (s < 0 || t < 0) ? -1 : net.find_reaction(s, t);
  if (e < 0) throw ValidationError("reaction '" + std::string(text) + "' is not in the network");
  return e;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_coefficient(double v) {
  if (is_integer(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string format_complex(const ReactionNetwork& net, int vertex) {
  std::string out;
  const auto y = net.complex(vertex);
  for (int k = 0; k < net.num_species(); ++k) {
    if (y(k) == 0.0) continue;
    if (!out.empty()) out += '+';
    if (y(k) != 1.0) out += format_coefficient(y(k));
    out += net.species()[static_cast<std::size_t>(k)];
  }
  return out.empty() ? "0" : out;
}

std::string format_reaction(const ReactionNetwork& net, int edge) {
  const auto& r = net.reaction(edge);
  return format_complex(net, r.source) + " -> " + format_complex(net, r.target);
}

std::string print_network(const ReactionNetwork& net) {
  std::ostringstream os;
  for (int e = 0; e < net.num_reactions(); ++e) os << format_reaction(net, e) << '\n';
  return os.str();
}

}  // namespace crn
