#pragma once

#include "coarse/check.hpp"
#include "coarse/construct.hpp"
#include "coarse/cover.hpp"
#include "coarse/partition.hpp"
#include "coarse/space.hpp"
#include "coarse/witness.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace coarse {

/// Element of a GroupModel, by position.
using Element = int;

/// A finite group, or the ball B(e, N) of a free group, with a symmetric
/// generating set and a partial multiplication table (-1 where the product
/// leaves the stored elements).
class GroupModel {
 public:
  /// Z_n with generators {1, n - 1}. Labels "0".."n-1".
  static GroupModel cyclic(int n);
  /// Z_{n1} x ... x Z_{nk} with the standard generators and their inverses.
  /// Labels "a,b,...".
  static GroupModel product(const std::vector<int>& orders);
  /// Ball of radius N in the free group on `letters` (lowercase; the inverse
  /// of a letter is its uppercase form). Labels are reduced words, "e" for
  /// the identity.
  static GroupModel free_ball(const std::vector<char>& letters, int radius);

  int size() const { return static_cast<int>(labels_.size()); }
  Element identity() const { return identity_; }
  const std::vector<Element>& generators() const { return generators_; }
  const std::string& label(Element g) const { return labels_[static_cast<std::size_t>(g)]; }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Throws InputError for an unknown label.
  Element element(const std::string& label) const;

  /// g h, or nullopt when the product is not stored.
  std::optional<Element> mul(Element g, Element h) const {
    const int v = mult_(g, h);
    return v < 0 ? std::nullopt : std::optional<Element>(v);
  }
  Element inverse(Element g) const { return inverse_[static_cast<std::size_t>(g)]; }

  /// Integer coordinates feeding homomorphism rules: residues for cyclic and
  /// product groups, exponent sums per letter for free balls.
  const std::vector<long>& coordinates(Element g) const { return coords_[static_cast<std::size_t>(g)]; }
  int coordinate_count() const { return coord_count_; }

  /// Set for truncated balls; finite groups are complete.
  std::optional<int> truncation_radius() const { return truncation_; }
  bool finite() const { return !truncation_; }
  /// Word length |g|.
  int length(Element g) const { return lengths_[static_cast<std::size_t>(g)]; }
  /// Elements whose pairwise distances are exact: everything for finite
  /// groups, |g| <= N/2 for truncations.
  bool in_exact_region(Element g) const;

 private:
  GroupModel() = default;
  void finish();

  std::vector<std::string> labels_;
  std::vector<Element> generators_;
  Eigen::MatrixXi mult_;
  std::vector<Element> inverse_;
  std::vector<std::vector<long>> coords_;
  std::vector<int> lengths_;
  int coord_count_ = 0;
  Element identity_ = 0;
  std::optional<int> truncation_;
};

using GroupPtr = std::shared_ptr<const GroupModel>;

/// Shortest-path metric of the Cayley graph (edges g -- g s). Throws InputError
/// when the stored elements are disconnected.
SpacePtr word_metric_space(const GroupModel& group);

/// Per element, the image of every point.
using ActionMaps = std::vector<std::vector<Point>>;

/// f_g(x) = x + sum_j weights[j] * coord_j(g): modulo n on a cycle, clamped
/// to the ends on an interval. Throws InputError for other layouts.
ActionMaps translation_maps(const GroupModel& group, const FiniteMetricSpace& space,
                            const std::vector<long>& weights);
/// Shifts every image by offsets[g][x] along the layout coordinate (same
/// wrapping rules as translation_maps).
ActionMaps perturb_maps(const ActionMaps& base, const FiniteMetricSpace& space,
                        const std::vector<std::vector<long>>& offsets);
/// Seeded offsets uniform in [-amplitude, amplitude].
std::vector<std::vector<long>> random_offsets(int elements, int points, long amplitude, std::uint64_t seed);

struct QuasiActionCeilings {
  std::optional<double> A;
  std::optional<double> B;
  /// l(r) <= slope * r + intercept on every sampled radius.
  std::optional<std::pair<double, double>> modulus;
};

struct CoarseQuasiAction {
  GroupPtr group;
  SpacePtr group_space;
  SpacePtr space;
  ActionMaps maps;

  /// Minimal uniform modulus on the sampled radii (ascending).
  std::vector<double> radii;
  std::vector<double> modulus;
  /// Largest image distance of any f_g; bounds l beyond the last sample.
  double global_bound = 0.0;

  /// sup_x d(f_e(x), x), attained at a_point.
  double A = 0.0;
  Point a_point = 0;
  /// sup over stored g h of d(f_g(f_h(x)), f_gh(x)), attained at (b_g, b_h, b_x).
  double B = 0.0;
  Element b_g = 0;
  Element b_h = 0;
  Point b_x = 0;
  /// sup_x d(f_g(f_{g^-1}(x)), x); at most A + B when every inverse pair is stored.
  double inverse_defect = 0.0;

  Point apply(Element g, Point x) const {
    return maps[static_cast<std::size_t>(g)][static_cast<std::size_t>(x)];
  }
  /// Step extension of the sampled modulus.
  double modulus_at(double r) const;
};

/// Exhaustive tight constants. Throws CeilingExceeded naming the witnesses when
/// a supplied ceiling is violated, InputError when the maps are not total.
CoarseQuasiAction certify_quasi_action(GroupPtr group, SpacePtr space, ActionMaps maps,
                                       std::vector<double> sampled_radii,
                                       const QuasiActionCeilings& ceilings = {});

struct QuasiStabilizer {
  Point x0 = 0;
  double T = 0.0;
  /// {g : d(f_g(x0), x0) <= T} inside the word-metric space.
  SubspaceRef members;
};

QuasiStabilizer quasi_stabilizer(const CoarseQuasiAction& action, Point x0, double T);

struct OrbitMap {
  /// pi(g) = f_g(x0) as a certified map from the word-metric space.
  CoarseMapCert cert;
  double lambda = 0.0;
  /// l(lambda) + B.
  double constant = 0.0;
  /// max d(pi(g), pi(g s)) over stored products, attained at (g, s).
  double max_step = 0.0;
  Element step_g = 0;
  Element step_s = 0;
  Inequality check;
};

OrbitMap orbit_map(const CoarseQuasiAction& action, Point x0);

struct GroupPipelineParams {
  Point x0 = 0;
  double R = 1.0;
  double epsilon = 1.0;
};

struct GroupPiece {
  /// g_i with x_i = pi(g_i) the center of V_i.
  Element center_element = 0;
  Point center = 0;
  double radius = 0.0;
  /// pi^{-1}(V_i) as group elements.
  PointSet preimage;
};

struct GroupPipelineResult {
  OrbitMap orbit;
  Cover enlarged;
  BellPartition bell;
  int k = 0;
  double L = 0.0;
  double required_L = 0.0;
  /// T = max_i radius and the stabilizer threshold A + 2B + l(T).
  double T = 0.0;
  double stabilizer_threshold = 0.0;
  QuasiStabilizer stabilizer;
  std::vector<GroupPiece> pieces;
  /// phi_i o pi on the group, subordinated to the preimages of V.
  std::optional<PartitionOfUnity> partition;
  std::optional<GlueResult> glued;
  /// Piece witnesses fed to the glue step, one per preimage.
  std::optional<WitnessFamily> piece_witnesses;
  /// Max over the verification pairs of sum_i |phi_i(g) - phi_i(g')|.
  double variation_at_R = 0.0;
  std::vector<Inequality> checks;
  std::vector<Inequality> informational;
};

/// Runs the quasi-action pipeline. The provider receives the materialized
/// quasi-stabilizer. Throws PreconditionError when the cover's Lebesgue number
/// is below the required L, when the enlarged cover's multiplicity exceeds
/// k + 1, or when a truncated group lacks a product the construction needs.
GroupPipelineResult group_pipeline(const CoarseQuasiAction& action, const Cover& cover,
                                   const GroupPipelineParams& params, const PieceWitnessProvider& provider);

}  // namespace coarse
