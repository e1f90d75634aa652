#include "coarse/construct.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coarse {

namespace {

// Tracks the pair with the largest lhs - rhs.
class WorstPair {
 public:
  void offer(double lhs, double rhs, Point x, Point y) {
    if (x_ < 0 || lhs - rhs > lhs_ - rhs_) {
      lhs_ = lhs;
      rhs_ = rhs;
      x_ = x;
      y_ = y;
    }
  }
  Inequality finish(std::string name, const FiniteMetricSpace& space, double tol = kTolerance) const {
    if (x_ < 0) return check_le(std::move(name), 0.0, 0.0, tol);
    return check_le(std::move(name), lhs_, rhs_, {space.id(x_), space.id(y_)}, tol);
  }

 private:
  double lhs_ = 0.0;
  double rhs_ = 0.0;
  Point x_ = -1;
  Point y_ = -1;
};

std::string fmt_scale(const char* label, double s) {
  std::ostringstream out;
  out << label << "=" << s;
  return out.str();
}

}  // namespace

PieceWitnessProvider dirac_provider() {
  return [](const SpacePtr& space, int) { return dirac_witness(space); };
}

PieceWitnessProvider uniform_ball_provider(double radius) {
  return [radius](const SpacePtr& space, int) { return uniform_ball_witness(space, radius); };
}

SubspaceConstruction subspace_witness(const Witness& beta, const PointSet& subspace_in) {
  if (beta.tagged()) throw InputError("subspace construction needs a bare-index witness");
  const auto& X = beta.space();
  const PointSet Y = normalized(subspace_in);
  if (Y.empty()) throw InputError("subspace must be nonempty");
  SubspaceRef ref(beta.space_ptr(), Y);
  SpacePtr y_space = ref.materialize();

  std::vector<Point> p(static_cast<std::size_t>(X.size()));
  for (Point x = 0; x < X.size(); ++x) p[static_cast<std::size_t>(x)] = nearest_point(X, x, Y);

  // Entry s of xi's index is (tag s, at p(s)); beta's entry at s feeds it.
  std::vector<IndexEntry> index;
  for (Point s = 0; s < X.size(); ++s)
    index.push_back({static_cast<long>(s), *ref.local_index(p[static_cast<std::size_t>(s)])});
  std::vector<Coefficients> vectors;
  for (Point y : Y) {
    Coefficients v(X.size());
    for (Coefficients::InnerIterator it(beta.at(y)); it; ++it) v.insert(beta.entry(it.index()).at) = it.value();
    vectors.push_back(std::move(v));
  }
  Witness tagged(y_space, std::move(index), std::move(vectors));
  Witness eta = collapse(tagged);

  WorstPair norm_defect, isometry_defect, contraction;
  for (Point a = 0; a < y_space->size(); ++a) {
    norm_defect.offer(std::abs(tagged.at(a).norm() - 1.0), 0.0, a, a);
    for (Point b = a; b < y_space->size(); ++b) {
      const double xi = witness_distance(tagged, a, b);
      const double be = witness_distance(beta, Y[static_cast<std::size_t>(a)], Y[static_cast<std::size_t>(b)]);
      const double et = witness_distance(eta, a, b);
      isometry_defect.offer(std::abs(xi - be), 0.0, a, b);
      contraction.offer(et, xi, a, b);
    }
  }
  std::vector<Inequality> identities{
      norm_defect.finish("subspace: | ||xi_y|| - 1 |", *y_space),
      isometry_defect.finish("subspace: | ||xi_y - xi_y'|| - ||beta_y - beta_y'|| |", *y_space),
      contraction.finish("subspace: ||eta_y - eta_y'|| <= ||xi_y - xi_y'||", *y_space, 1e-12),
  };
  return SubspaceConstruction{std::move(p), std::move(y_space), Y, std::move(tagged), std::move(eta),
                              std::move(identities)};
}

std::vector<SubspaceConstruction> subspace_witness(const WitnessFamily& family,
                                                   const std::vector<PointSet>& subspaces) {
  if (family.members.size() != subspaces.size())
    throw InputError("one subspace per family member is required");
  std::vector<SubspaceConstruction> out;
  for (std::size_t i = 0; i < subspaces.size(); ++i) out.push_back(subspace_witness(family.members[i], subspaces[i]));
  return out;
}

std::vector<Inequality> subspace_tail_checks(const Witness& beta, const SubspaceConstruction& c,
                                             std::span<const double> scales) {
  std::vector<Inequality> out;
  const Profile eta_tail = tail_profile(c.collapsed, scales);
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double S = scales[i];
    const std::vector<double> probe{std::floor(S / 3.0), S};
    const Profile beta_tail = tail_profile(beta, probe);
    out.push_back(check_le("subspace tail: tail_eta(" + fmt_scale("S", S) + ") <= tail_beta(S/3) + tail_beta(S)",
                           eta_tail[i].value, beta_tail[0].value + beta_tail[1].value));
  }
  return out;
}

NetConstruction net_witness(const Witness& beta, const SpacePtr& ambient, const PointSet& net_in, double c) {
  const PointSet net = normalized(net_in);
  if (!is_c_net(*ambient, net, c)) {
    Point worst = 0;
    for (Point x = 0; x < ambient->size(); ++x)
      if (dist_to_set(*ambient, x, net) > dist_to_set(*ambient, worst, net)) worst = x;
    std::ostringstream msg;
    msg << "not a " << c << "-net: point '" << ambient->id(worst) << "' is at distance "
        << dist_to_set(*ambient, worst, net);
    throw PreconditionError(msg.str());
  }
  const auto& Y = beta.space();
  if (Y.size() != static_cast<int>(net.size())) throw InputError("net witness must live on the net points");
  for (std::size_t i = 0; i < net.size(); ++i)
    if (Y.id(static_cast<Point>(i)) != ambient->id(net[i]))
      throw InputError("net witness point '" + Y.id(static_cast<Point>(i)) + "' is not the net point '" +
                       ambient->id(net[i]) + "'");

  std::vector<Point> q(static_cast<std::size_t>(ambient->size()));
  std::vector<IndexEntry> index;
  for (const auto& e : beta.index()) index.push_back({e.tag, net[static_cast<std::size_t>(e.at)]});
  std::vector<Coefficients> vectors;
  for (Point x = 0; x < ambient->size(); ++x) {
    const Point qx = nearest_point(*ambient, x, net);
    q[static_cast<std::size_t>(x)] = qx;
    const auto local = static_cast<Point>(std::lower_bound(net.begin(), net.end(), qx) - net.begin());
    vectors.push_back(beta.at(local));
  }
  return NetConstruction{std::move(q), Witness(ambient, std::move(index), std::move(vectors))};
}

std::vector<Inequality> net_checks(const Witness& beta, const NetConstruction& net, double c,
                                   std::span<const double> radii, std::span<const double> scales) {
  std::vector<Inequality> out;
  const Profile xi_var = variation_profile(net.witness, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const std::vector<double> probe{radii[i] + 2.0 * c};
    const double bound = variation_profile(beta, probe)[0].value;
    auto q = check_le("net: variation_xi(" + fmt_scale("R", radii[i]) + ") <= variation_beta(R + 2c)",
                      xi_var[i].value, bound);
    if (xi_var[i].x >= 0) q.witness_pair = {net.witness.space().id(xi_var[i].x), net.witness.space().id(xi_var[i].y)};
    out.push_back(std::move(q));
  }
  const Profile xi_tail = tail_profile(net.witness, scales);
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > c)) continue;
    const std::vector<double> probe{scales[i] - c};
    out.push_back(check_le("net: tail_xi(" + fmt_scale("S", scales[i]) + ") <= tail_beta(S - c)",
                           xi_tail[i].value, tail_profile(beta, probe)[0].value));
  }
  return out;
}

WitnessFamily provide_pieces(const Cover& cover, const PieceWitnessProvider& provider) {
  WitnessFamily family;
  for (int i = 0; i < cover.size(); ++i) {
    SpacePtr piece = SubspaceRef(cover.space_ptr(), cover.piece(i)).materialize();
    family.members.push_back(provider(piece, i));
  }
  return family;
}

GlueResult glue(const PartitionOfUnity& partition, const WitnessFamily& pieces,
                std::span<const double> tail_scales) {
  const auto& cover = partition.cover();
  const auto& X = cover.space();
  if (static_cast<int>(pieces.members.size()) != cover.size())
    throw InputError("glue needs exactly one piece witness per cover piece");

  std::vector<Eigen::Index> offset;
  std::vector<IndexEntry> index;
  for (int i = 0; i < cover.size(); ++i) {
    const auto& member = pieces.members[static_cast<std::size_t>(i)];
    const auto& U = cover.piece(i);
    if (member.tagged()) throw InputError("glue needs bare-index piece witnesses (piece " + std::to_string(i) + ")");
    for (Point u : U)
      if (!member.space().find(X.id(u)))
        throw InputError("piece " + std::to_string(i) + " witness is missing point '" + X.id(u) + "'");
    if (member.space().size() != static_cast<int>(U.size()))
      throw InputError("piece " + std::to_string(i) + " witness has points outside the piece");
    for (std::size_t j = 0; j < U.size(); ++j)
      if (member.space().id(static_cast<Point>(j)) != X.id(U[j]))
        throw InputError("piece " + std::to_string(i) + " witness lists its points out of order");
    offset.push_back(static_cast<Eigen::Index>(index.size()));
    for (const auto& e : member.index()) index.push_back({i, U[static_cast<std::size_t>(e.at)]});
  }

  auto local = [&](int i, Point x) {
    const auto& U = cover.piece(i);
    return static_cast<Point>(std::lower_bound(U.begin(), U.end(), x) - U.begin());
  };

  std::vector<Coefficients> vectors;
  for (Point x = 0; x < X.size(); ++x) {
    Coefficients v(static_cast<Eigen::Index>(index.size()));
    for (PartitionValues::InnerIterator it(partition.values(), x); it; ++it) {
      const auto i = static_cast<int>(it.row());
      const double weight = std::sqrt(it.value());
      const auto& beta = pieces.members[static_cast<std::size_t>(i)].at(local(i, x));
      for (Coefficients::InnerIterator b(beta); b; ++b)
        v.insert(offset[static_cast<std::size_t>(i)] + b.index()) = weight * b.value();
    }
    vectors.push_back(std::move(v));
  }
  Witness glued(cover.space_ptr(), std::move(index), std::move(vectors));

  std::vector<Inequality> checks;
  WorstPair pair_bound;
  for (Point x = 0; x < X.size(); ++x)
    for (Point y = x + 1; y < X.size(); ++y) {
      const double lhs = std::pow(witness_distance(glued, x, y), 2);
      double piece_term = 0.0;
      for (int i = 0; i < cover.size(); ++i) {
        if (!cover.contains(i, x) || !cover.contains(i, y)) continue;
        const auto& member = pieces.members[static_cast<std::size_t>(i)];
        piece_term = std::max(piece_term, std::pow(witness_distance(member, local(i, x), local(i, y)), 2));
      }
      pair_bound.offer(lhs, 2.0 * partition_distance(partition, x, y) + 2.0 * piece_term, x, y);
    }
  checks.push_back(pair_bound.finish("glue: ||xi_x - xi_y||^2 <= 2 sum|dphi| + 2 max piece variation^2", X));

  const Profile glued_tail = tail_profile(glued, tail_scales);
  const std::vector<double> no_radii;
  const Profile piece_tail = equi_profiles(pieces, no_radii, tail_scales).tail;
  for (std::size_t s = 0; s < tail_scales.size(); ++s) {
    auto q = check_le("glue: tail_glued(" + fmt_scale("S", tail_scales[s]) + ") <= equi-tail of pieces",
                      glued_tail[s].value, piece_tail[s].value);
    if (glued_tail[s].x >= 0) q.witness_pair = {X.id(glued_tail[s].x), X.id(glued_tail[s].x)};
    checks.push_back(std::move(q));
  }
  return GlueResult{std::move(glued), std::move(checks)};
}

FiberingResult fibering_pipeline(const CoarseMapCert& f, const PartitionOfUnity& on_target,
                                 const PieceWitnessProvider& provider, double R,
                                 std::span<const double> tail_scales) {
  PulledBackPartition pulled = pullback_partition(f, on_target);
  const double S = f.modulus_at(R);
  const PairMax target_var = partition_variation(on_target, S);
  const PairMax pulled_var = partition_variation(pulled.partition, R);
  WitnessFamily family = provide_pieces(pulled.partition.cover(), provider);
  GlueResult glued = glue(pulled.partition, family, tail_scales);

  std::vector<Inequality> checks;
  auto q = check_le("fibering: variation_pullback(R) <= variation_target(l(R))", pulled_var.value,
                    target_var.value);
  if (pulled_var.x >= 0) q.witness_pair = {f.source->id(pulled_var.x), f.source->id(pulled_var.y)};
  checks.push_back(std::move(q));
  append(checks, glued.checks);
  return FiberingResult{std::move(pulled), S, target_var.value, pulled_var.value, std::move(glued),
                        std::move(checks)};
}

SeparatedResult separated_cover_pipeline(const Cover& colored, const SeparatedParams& prm,
                                         const PieceWitnessProvider& provider,
                                         std::span<const double> tail_scales) {
  if (!(prm.L > 0.0)) throw PreconditionError("separated cover pipeline needs L > 0");
  if (!check_kl_separated(colored, prm.k, 2.0 * prm.L)) {
    std::ostringstream msg;
    msg << "cover is not (" << prm.k << ", " << 2.0 * prm.L << ")-separated";
    throw PreconditionError(msg.str());
  }
  const double lhs = static_cast<double>(prm.k) * prm.k + 1.0;
  if (lhs > prm.L * prm.sigma + kTolerance) {
    std::ostringstream msg;
    msg << "hypothesis k^2 + 1 <= L*sigma fails: " << lhs << " > " << prm.L * prm.sigma;
    throw PreconditionError(msg.str());
  }

  Cover enlarged = enlarge(colored, prm.L);
  BellPartition bell = bell_partition(enlarged);
  const PairMax var = partition_variation(bell.partition, prm.R);
  WitnessFamily family = provide_pieces(enlarged, provider);
  GlueResult glued = glue(bell.partition, family, tail_scales);

  const auto& X = colored.space();
  std::vector<Inequality> checks;
  checks.push_back(check_le("separated: multiplicity of the L-enlargement <= k + 1",
                            bell.multiplicity, prm.k + 1.0));
  checks.push_back(check_le("separated: L <= Lebesgue number of the L-enlargement", prm.L,
                            balls_fit(enlarged, prm.L) ? std::max(prm.L, bell.lebesgue) : bell.lebesgue));
  auto v1 = check_le("separated: partition variation at R <= epsilon", var.value, prm.epsilon);
  auto v2 = check_le("separated: partition variation at R <= (2k+2)(2k+3)/L * R", var.value,
                     bell.lipschitz_bound * prm.R);
  if (var.x >= 0) v1.witness_pair = v2.witness_pair = std::pair{X.id(var.x), X.id(var.y)};
  checks.push_back(std::move(v1));
  checks.push_back(std::move(v2));
  append(checks, glued.checks);

  // Constants used by the original argument; they need not reconcile with the
  // hypothesis form, so they are reported only.
  std::vector<Inequality> info;
  info.push_back(check_le("info: sigma < 1/(20R)", prm.sigma, 1.0 / (20.0 * prm.R), 0.0));
  info.push_back(check_le("info: 2(2k+2)(2k+3)R*sigma <= k^2 + 1",
                          2.0 * (2.0 * prm.k + 2.0) * (2.0 * prm.k + 3.0) * prm.R * prm.sigma, lhs));
  info.push_back(check_le("info: k^2 + 1 <= 2L*sigma*epsilon", lhs, 2.0 * prm.L * prm.sigma * prm.epsilon));
  return SeparatedResult{std::move(enlarged), std::move(bell), var.value, std::move(glued), std::move(checks),
                         std::move(info)};
}

}  // namespace coarse
