#pragma once

#include "coarse/space.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coarse {

/// Indexed family of nonempty subsets whose union is the whole space.
///
/// An optional coloring assigns each piece to one of the families
/// U_0, ..., U_k of a (k, L)-separated decomposition.
class Cover {
 public:
  /// Throws InputError on empty pieces, out-of-range points, a coloring of the
  /// wrong length, or when the union misses a point (named in the message).
  Cover(SpacePtr space, std::vector<PointSet> pieces,
        std::optional<std::vector<int>> coloring = std::nullopt);

  const FiniteMetricSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  int size() const { return static_cast<int>(pieces_.size()); }
  const std::vector<PointSet>& pieces() const { return pieces_; }
  const PointSet& piece(int i) const { return pieces_[static_cast<std::size_t>(i)]; }
  const std::optional<std::vector<int>>& coloring() const { return coloring_; }

  bool contains(int piece, Point x) const { return membership_(piece, x); }
  /// Pieces containing x, ascending.
  std::vector<int> pieces_containing(Point x) const;

 private:
  SpacePtr space_;
  std::vector<PointSet> pieces_;
  std::optional<std::vector<int>> coloring_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> membership_;
};

int multiplicity(const Cover& cover);
/// max_x |{i : U_i meets B(x, R)}|.
int r_multiplicity(const Cover& cover, double radius);

struct LebesgueNumber {
  /// Largest realized distance r such that every B(x, r) lies in some piece.
  double value = 0.0;
  /// First realized distance that fails, if any.
  std::optional<double> smallest_failing;
};

LebesgueNumber lebesgue_number(const Cover& cover);
/// True iff every closed ball of the given radius lies inside some piece.
bool balls_fit(const Cover& cover, double radius);

/// Pairwise set distances strictly exceed L.
bool is_l_separated(const FiniteMetricSpace& space, const std::vector<PointSet>& family, double L);
/// Every color class is L-separated. Throws PreconditionError when the cover has
/// no coloring or uses a color outside 0..k.
bool check_kl_separated(const Cover& cover, int k, double L);

/// Replaces every piece by its closed L-neighborhood; keeps the coloring.
Cover enlarge(const Cover& cover, double L);

struct AsdimCover {
  Cover cover;
  /// Largest piece diameter.
  double diameter_bound = 0.0;
  std::string strategy;
};

/// Finite-scale search for a cover with Lebesgue number >= L and multiplicity
/// <= k_max + 1. Uses block constructions on interval, cycle and grid layouts
/// and net-based Voronoi cells otherwise. Throws SearchExhausted when every
/// attempt fails; that outcome says nothing about the asymptotic dimension.
AsdimCover asdim_cover_search(const SpacePtr& space, double L, int k_max);

/// X_1 <= X_2 <= ... <= X_N inside an ambient space with X_N the whole space.
struct ChainOfSubspaces {
  SpacePtr ambient;
  std::vector<PointSet> members;

  /// Throws InputError unless the chain is nonempty, increasing, and ends at
  /// the ambient space.
  void validate() const;
};

struct DirectLimitCover {
  /// Chain positions n_1 < n_2 < ... selected by the 3L-inclusion rule.
  std::vector<int> subsequence;
  Cover cover;
  /// Per piece: meets the outermost shell X_N \ X_{N-1} of the truncation.
  std::vector<bool> truncation_affected;
};

/// Pieces U_0 = B(X_{n_1}, L) and U_k = B(X_{n_{k+1}} \ X_{n_k}, L).
DirectLimitCover direct_limit_cover(const ChainOfSubspaces& chain, double L);

/// B(X_{n_k}, L) misses B(X_{n_{k+2}} \ X_{n_{k+1}}, L) for every k.
bool direct_limit_disjointness(const ChainOfSubspaces& chain, const DirectLimitCover& result,
                               double L);

}  // namespace coarse
