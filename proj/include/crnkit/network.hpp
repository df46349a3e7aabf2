#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crn {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Which complexes are admissible. Integer: every coordinate is a nonnegative
/// integer. Real: every coordinate is 0 or at least 1. Both keep the open
/// positive orthant forward-invariant.
enum class ValidationMode { Integer, Real };

/// A directed edge between two complexes, by vertex index.
struct Reaction {
  int source = 0;
  int target = 0;

  friend bool operator==(const Reaction&, const Reaction&) = default;
};

/// Directed graph whose vertices are complexes (nonnegative vectors over a fixed
/// species list) and whose edges are reactions. Immutable after construction;
/// the constructor enforces no self-loops, no duplicate edges, no duplicate or
/// isolated vertices, and the configured coordinate restriction.
class ReactionNetwork {
 public:
  ReactionNetwork(std::vector<std::string> species, Eigen::MatrixXd complexes,
                  std::vector<Reaction> reactions, ValidationMode mode = ValidationMode::Integer);

  int num_species() const { return static_cast<int>(species_.size()); }
  int num_complexes() const { return static_cast<int>(complexes_.cols()); }
  int num_reactions() const { return static_cast<int>(reactions_.size()); }

  const std::vector<std::string>& species() const { return species_; }
  /// n x m matrix whose columns are the complexes.
  const Eigen::MatrixXd& complexes() const { return complexes_; }
  auto complex(int vertex) const { return complexes_.col(vertex); }
  std::span<const Reaction> reactions() const { return reactions_; }
  const Reaction& reaction(int edge) const { return reactions_[static_cast<std::size_t>(edge)]; }
  ValidationMode mode() const { return mode_; }

  /// y_target - y_source for one edge.
  Eigen::VectorXd reaction_vector(int edge) const;
  /// n x r matrix of reaction vectors.
  Eigen::MatrixXd stoichiometric_matrix() const;

  /// True when every coordinate is an integer.
  bool integral() const { return integral_; }

  int find_complex(const Eigen::Ref<const Eigen::VectorXd>& coords) const;
  int find_reaction(int source, int target) const;
  int species_index(std::string_view name) const;

 private:
  std::vector<std::string> species_;
  Eigen::MatrixXd complexes_;
  std::vector<Reaction> reactions_;
  ValidationMode mode_;
  bool integral_ = true;
};

/// Parse result carrying rate constants written inline as "A -> B : k"
/// (or "A <-> B : kf, kb"). Inline rates are all-or-nothing per file.
struct ParsedNetwork {
  ReactionNetwork network;
  std::optional<std::vector<double>> inline_rates;
};

/// Parse the line-oriented network text. Species are ordered by first
/// appearance, vertices likewise; "<->" expands to a forward and a backward edge.
ParsedNetwork parse_network_text(std::string_view text, ValidationMode mode = ValidationMode::Integer);

inline ReactionNetwork parse_network(std::string_view text,
                                     ValidationMode mode = ValidationMode::Integer) {
  return parse_network_text(text, mode).network;
}

/// Resolve reaction text such as "3X -> X+Y+Z" to an edge index of `net`.
/// Whitespace and term order are irrelevant; unknown species or edges throw.
int find_reaction_by_text(const ReactionNetwork& net, std::string_view text);

std::string format_complex(const ReactionNetwork& net, int vertex);
/// Canonical reaction text, the key format used by rate files.
std::string format_reaction(const ReactionNetwork& net, int edge);
/// Canonical network text: one edge per line in edge order.
std::string print_network(const ReactionNetwork& net);

}  // namespace crn
