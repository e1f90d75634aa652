#pragma once

#include "coarse/check.hpp"
#include "coarse/cover.hpp"
#include "coarse/partition.hpp"
#include "coarse/space.hpp"
#include "coarse/witness.hpp"

#include <functional>
#include <span>
#include <vector>

namespace coarse {

/// Supplies a witness on a materialized piece (its ids are the piece's ids).
using PieceWitnessProvider = std::function<Witness(const SpacePtr& piece_space, int piece)>;

PieceWitnessProvider dirac_provider();
PieceWitnessProvider uniform_ball_provider(double radius);

// ---------------------------------------------------------------------------
// Subspaces

struct SubspaceConstruction {
  /// Nearest-point retraction X -> Y, as parent positions; identity on Y.
  std::vector<Point> retraction;
  /// Y with the restricted metric; local position i is subspace[i].
  SpacePtr space;
  PointSet subspace;
  /// xi_y over Y x X: entry (tag s, at p(s)) carries beta_y(s).
  Witness tagged;
  /// eta_y(t) = ||xi_y(t, .)||.
  Witness collapsed;
  /// Unit norms, ||xi_y - xi_y'|| = ||beta_y - beta_y'||, and
  /// ||eta_y - eta_y'|| <= ||xi_y - xi_y'|| over all pairs of Y.
  std::vector<Inequality> identities;
};

/// Restricts a bare-index witness on X to the subspace Y. Throws InputError on
/// an empty Y or a tagged input.
SubspaceConstruction subspace_witness(const Witness& beta, const PointSet& subspace);
std::vector<SubspaceConstruction> subspace_witness(const WitnessFamily& family,
                                                   const std::vector<PointSet>& subspaces);

/// tail_eta(S) <= tail_beta(floor(S / 3)) + tail_beta(S) at each scale.
std::vector<Inequality> subspace_tail_checks(const Witness& beta, const SubspaceConstruction& c,
                                             std::span<const double> scales);

// ---------------------------------------------------------------------------
// Nets

struct NetConstruction {
  /// q : X -> net, nearest net point (as ambient positions).
  std::vector<Point> projection;
  Witness witness;
};

/// xi_x = beta_{q(x)} re-indexed into the ambient space. `beta` lives on the
/// materialized net. Throws PreconditionError when the net condition fails.
NetConstruction net_witness(const Witness& beta, const SpacePtr& ambient, const PointSet& net, double c);

/// variation_xi(R) <= variation_beta(R + 2c) and tail_xi(S) <= tail_beta(S - c) for S > c.
std::vector<Inequality> net_checks(const Witness& beta, const NetConstruction& net, double c,
                                   std::span<const double> radii, std::span<const double> scales);

// ---------------------------------------------------------------------------
// Gluing

struct GlueResult {
  /// Index entries (tag i, at u): the coordinate u of piece i.
  Witness witness;
  /// Pair bound ||xi_x - xi_y||^2 <= 2 sum|dphi| + 2 max_i ||beta^i_x - beta^i_y||^2
  /// (worst pair) and tail domination by the piece family at each scale.
  std::vector<Inequality> checks;
};

/// xi_x(i, u) = sqrt(phi_i(x)) beta^i_x(u). Member i must be a bare-index
/// witness on exactly the points of U_i; a missing point is an InputError
/// naming the point and the piece.
GlueResult glue(const PartitionOfUnity& partition, const WitnessFamily& pieces,
                std::span<const double> tail_scales);

WitnessFamily provide_pieces(const Cover& cover, const PieceWitnessProvider& provider);

// ---------------------------------------------------------------------------
// Pipelines

struct FiberingResult {
  PulledBackPartition pulled;
  /// S = l(R): image scale of source pairs within R.
  double image_scale = 0.0;
  double target_variation = 0.0;
  double pulled_variation = 0.0;
  GlueResult glued;
  std::vector<Inequality> checks;
};

/// Pulls the partition back along f, then glues the preimage witnesses.
FiberingResult fibering_pipeline(const CoarseMapCert& f, const PartitionOfUnity& on_target,
                                 const PieceWitnessProvider& provider, double R,
                                 std::span<const double> tail_scales);

struct SeparatedParams {
  int k = 0;
  double L = 0.0;
  double sigma = 0.0;
  double R = 1.0;
  double epsilon = 0.0;
};

struct SeparatedResult {
  Cover enlarged;
  BellPartition bell;
  double variation_at_R = 0.0;
  GlueResult glued;
  std::vector<Inequality> checks;
  /// Intermediate constants of the original argument; reported, not enforced.
  std::vector<Inequality> informational;
};

/// Enlarges a (k, 2L)-separated cover by L, builds the Bell partition, glues.
/// Throws PreconditionError naming the failing hypothesis.
SeparatedResult separated_cover_pipeline(const Cover& colored, const SeparatedParams& params,
                                         const PieceWitnessProvider& provider,
                                         std::span<const double> tail_scales);

}  // namespace coarse
