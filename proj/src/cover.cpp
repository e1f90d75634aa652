#include "coarse/cover.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace coarse {

Cover::Cover(SpacePtr space, std::vector<PointSet> pieces, std::optional<std::vector<int>> coloring)
    : space_(std::move(space)), pieces_(std::move(pieces)), coloring_(std::move(coloring)) {
  if (!space_) throw InputError("cover without a space");
  if (pieces_.empty()) throw InputError("cover has no pieces");
  const int n = space_->size();
  membership_.setConstant(static_cast<Eigen::Index>(pieces_.size()), n, false);
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    pieces_[i] = normalized(std::move(pieces_[i]));
    if (pieces_[i].empty()) throw InputError("cover piece " + std::to_string(i) + " is empty");
    for (Point x : pieces_[i]) {
      if (!space_->contains(x)) throw InputError("cover piece " + std::to_string(i) + " leaves the space");
      membership_(static_cast<Eigen::Index>(i), x) = true;
    }
  }
  const auto counts = membership_.colwise().count();
  for (Point x = 0; x < n; ++x)
    if (counts(x) == 0) throw InputError("cover misses point '" + space_->id(x) + "'");
  if (coloring_ && coloring_->size() != pieces_.size())
    throw InputError("coloring length differs from the number of pieces");
}

std::vector<int> Cover::pieces_containing(Point x) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (membership_(i, x)) out.push_back(i);
  return out;
}

int multiplicity(const Cover& cover) { return r_multiplicity(cover, 0.0); }

int r_multiplicity(const Cover& cover, double radius) {
  const auto& space = cover.space();
  int best = 0;
  for (Point x = 0; x < space.size(); ++x) {
    const PointSet b = ball(space, x, radius);
    int meets = 0;
    for (int i = 0; i < cover.size(); ++i) {
      for (Point w : b) {
        if (cover.contains(i, w)) {
          ++meets;
          break;
        }
      }
    }
    best = std::max(best, meets);
  }
  return best;
}

bool balls_fit(const Cover& cover, double radius) {
  const auto& space = cover.space();
  for (Point x = 0; x < space.size(); ++x) {
    const PointSet b = ball(space, x, radius);
    bool fits = false;
    for (int i = 0; i < cover.size() && !fits; ++i)
      fits = is_subset(b, cover.piece(i));
    if (!fits) return false;
  }
  return true;
}

LebesgueNumber lebesgue_number(const Cover& cover) {
  LebesgueNumber out;
  // Balls only grow with the radius, so the passing radii form a prefix.
  for (double r : cover.space().distance_values()) {
    if (!balls_fit(cover, r)) {
      out.smallest_failing = r;
      break;
    }
    out.value = r;
  }
  return out;
}

bool is_l_separated(const FiniteMetricSpace& space, const std::vector<PointSet>& family, double L) {
  for (std::size_t a = 0; a < family.size(); ++a)
    for (std::size_t b = a + 1; b < family.size(); ++b)
      if (!(set_distance(space, family[a], family[b]) > L)) return false;
  return true;
}

bool check_kl_separated(const Cover& cover, int k, double L) {
  if (!cover.coloring()) throw PreconditionError("(k, L)-separation needs a colored cover");
  std::vector<std::vector<PointSet>> classes(static_cast<std::size_t>(k + 1));
  for (int i = 0; i < cover.size(); ++i) {
    const int c = (*cover.coloring())[static_cast<std::size_t>(i)];
    if (c < 0 || c > k)
      throw PreconditionError("piece " + std::to_string(i) + " has color " + std::to_string(c) +
                              " outside 0.." + std::to_string(k));
    classes[static_cast<std::size_t>(c)].push_back(cover.piece(i));
  }
  return std::all_of(classes.begin(), classes.end(),
                     [&](const auto& family) { return is_l_separated(cover.space(), family, L); });
}

Cover enlarge(const Cover& cover, double L) {
  std::vector<PointSet> pieces;
  pieces.reserve(static_cast<std::size_t>(cover.size()));
  for (const auto& p : cover.pieces()) pieces.push_back(neighborhood(cover.space(), p, L));
  return Cover(cover.space_ptr(), std::move(pieces), cover.coloring());
}

namespace {

std::optional<AsdimCover> accept(const SpacePtr& space, std::vector<PointSet> pieces, double L,
                                 int k_max, std::string strategy) {
  std::erase_if(pieces, [](const PointSet& p) { return p.empty(); });
  Cover cover(space, std::move(pieces));
  if (multiplicity(cover) > k_max + 1 || !balls_fit(cover, L)) return std::nullopt;
  double diam = 0.0;
  for (const auto& p : cover.pieces()) diam = std::max(diam, set_diameter(*space, p));
  return AsdimCover{std::move(cover), diam, std::move(strategy)};
}

std::vector<PointSet> enlarge_all(const FiniteMetricSpace& space, std::vector<PointSet> blocks, double L) {
  for (auto& b : blocks) b = neighborhood(space, b, L);
  return blocks;
}

// Consecutive blocks of a 1-D index range, as many as fit at length `len`,
// with the remainder spread so lengths differ by at most one.
std::vector<PointSet> line_blocks(int n, int len) {
  const int count = std::max(1, n / len);
  std::vector<PointSet> blocks(static_cast<std::size_t>(count));
  for (int v = 0; v < n; ++v) blocks[static_cast<std::size_t>(static_cast<long>(v) * count / n)].push_back(v);
  return blocks;
}

// Staggered bricks: rows of height h, bricks of width 2h, odd rows shifted by h.
std::vector<PointSet> brick_blocks(const GridLayout& grid, int h) {
  const int rows = grid.dims[0];
  const int cols = grid.dims[1];
  const int w = 2 * h;
  std::map<std::pair<int, int>, PointSet> bricks;
  for (int r = 0; r < rows; ++r) {
    const int band = r / h;
    const int shift = (band % 2) * h;
    for (int c = 0; c < cols; ++c) {
      const int slot = (c + shift) / w;
      bricks[{band, slot}].push_back(r * cols + c);
    }
  }
  std::vector<PointSet> out;
  for (auto& [key, b] : bricks) out.push_back(std::move(b));
  return out;
}

std::vector<PointSet> voronoi_cells(const FiniteMetricSpace& space, double net_radius) {
  PointSet net;
  for (Point x = 0; x < space.size(); ++x)
    if (net.empty() || dist_to_set(space, x, net) > net_radius) net.push_back(x);
  std::vector<PointSet> cells(net.size());
  for (Point x = 0; x < space.size(); ++x) {
    const Point c = nearest_point(space, x, net);
    const auto slot = static_cast<std::size_t>(std::lower_bound(net.begin(), net.end(), c) - net.begin());
    cells[slot].push_back(x);
  }
  return cells;
}

}  // namespace

AsdimCover asdim_cover_search(const SpacePtr& space, double L, int k_max) {
  if (L < 0.0) throw InputError("asdim cover search needs L >= 0");
  if (k_max < 0) throw InputError("asdim cover search needs k_max >= 0");
  if (L >= space->diameter()) {
    if (auto c = accept(space, {all_points(*space)}, L, k_max, "whole-space")) return *c;
  }
  if (L == 0.0) {
    std::vector<PointSet> singletons;
    for (Point x = 0; x < space->size(); ++x) singletons.push_back({x});
    if (auto c = accept(space, std::move(singletons), L, k_max, "singletons")) return *c;
  }

  const int block = std::max(1, static_cast<int>(std::ceil(4.0 * L)));
  const auto& layout = space->layout();
  std::optional<AsdimCover> found;
  if (k_max >= 1 && std::holds_alternative<IntervalLayout>(layout)) {
    found = accept(space, enlarge_all(*space, line_blocks(space->size(), block), L), L, k_max,
                   "interval-blocks");
  } else if (k_max >= 1 && std::holds_alternative<CycleLayout>(layout)) {
    found = accept(space, enlarge_all(*space, line_blocks(space->size(), block), L), L, k_max,
                   "cycle-blocks");
  } else if (const auto* grid = std::get_if<GridLayout>(&layout)) {
    if (grid->dims.size() == 1 && k_max >= 1) {
      found = accept(space, enlarge_all(*space, line_blocks(space->size(), block), L), L, k_max,
                     "interval-blocks");
    } else if (grid->dims.size() == 2 && k_max >= 2) {
      found = accept(space, enlarge_all(*space, brick_blocks(*grid, block), L), L, k_max,
                     "staggered-bricks");
    }
  }
  if (found) return *found;

  // A net coarser than the diameter collapses to one cell, which is only
  // accepted through the whole-space branch above.
  for (double factor : {2.0, 3.0, 4.0, 6.0, 8.0}) {
    if (factor * L >= space->diameter()) break;
    if (auto c = accept(space, enlarge_all(*space, voronoi_cells(*space, factor * L), L), L, k_max,
                        "voronoi-net")) {
      return *c;
    }
  }
  throw SearchExhausted("no cover with Lebesgue number >= " + std::to_string(L) +
                        " and multiplicity <= " + std::to_string(k_max + 1) +
                        " found within the search budget (inconclusive)");
}

void ChainOfSubspaces::validate() const {
  if (!ambient) throw InputError("chain without an ambient space");
  if (members.empty()) throw InputError("chain is empty");
  for (std::size_t n = 0; n < members.size(); ++n) {
    if (members[n].empty()) throw InputError("chain member " + std::to_string(n) + " is empty");
    for (Point x : members[n])
      if (!ambient->contains(x)) throw InputError("chain member leaves the ambient space");
    if (!std::is_sorted(members[n].begin(), members[n].end()))
      throw InputError("chain member " + std::to_string(n) + " is not normalized");
    if (n > 0 && !is_subset(members[n - 1], members[n]))
      throw InputError("chain is not increasing at position " + std::to_string(n));
  }
  if (static_cast<int>(members.back().size()) != ambient->size())
    throw InputError("last chain member must be the ambient space");
}

DirectLimitCover direct_limit_cover(const ChainOfSubspaces& chain, double L) {
  chain.validate();
  if (!(L > 0.0)) throw PreconditionError("direct-limit cover needs L > 0");
  const auto& space = *chain.ambient;
  const int N = static_cast<int>(chain.members.size());

  std::vector<int> selected{0};
  while (static_cast<int>(chain.members[static_cast<std::size_t>(selected.back())].size()) != space.size()) {
    const auto& current = chain.members[static_cast<std::size_t>(selected.back())];
    const PointSet grown = neighborhood(space, current, 3.0 * L);
    int next = -1;
    for (int n = selected.back() + 1; n < N; ++n) {
      const auto& candidate = chain.members[static_cast<std::size_t>(n)];
      // Stalled copies of the current member are skipped.
      if (candidate.size() == current.size()) continue;
      if (is_subset(grown, candidate)) {
        next = n;
        break;
      }
    }
    if (next < 0) break;
    selected.push_back(next);
  }
  if (selected.size() == 1 && N > 1 &&
      static_cast<int>(chain.members.front().size()) != space.size()) {
    throw PreconditionError("chain too short: no member contains the 3L-neighborhood of the first");
  }

  std::vector<PointSet> pieces;
  pieces.push_back(neighborhood(space, chain.members[static_cast<std::size_t>(selected[0])], L));
  for (std::size_t k = 0; k + 1 < selected.size(); ++k) {
    const PointSet shell = set_difference(chain.members[static_cast<std::size_t>(selected[k + 1])],
                                          chain.members[static_cast<std::size_t>(selected[k])]);
    pieces.push_back(neighborhood(space, shell, L));
  }

  std::vector<bool> flags(pieces.size(), false);
  if (N > 1) {
    const PointSet edge = set_difference(chain.members[static_cast<std::size_t>(N - 1)],
                                         chain.members[static_cast<std::size_t>(N - 2)]);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      PointSet common;
      std::set_intersection(pieces[i].begin(), pieces[i].end(), edge.begin(), edge.end(),
                            std::back_inserter(common));
      flags[i] = !common.empty();
    }
  }
  return DirectLimitCover{std::move(selected), Cover(chain.ambient, std::move(pieces)), std::move(flags)};
}

bool direct_limit_disjointness(const ChainOfSubspaces& chain, const DirectLimitCover& result, double L) {
  const auto& space = *chain.ambient;
  const auto& sel = result.subsequence;
  auto member = [&](int n) -> const PointSet& { return chain.members[static_cast<std::size_t>(n)]; };
  for (std::size_t k = 0; k + 2 < sel.size(); ++k) {
    const PointSet inner = neighborhood(space, member(sel[k]), L);
    const PointSet shell = set_difference(member(sel[k + 2]), member(sel[k + 1]));
    const PointSet outer = neighborhood(space, shell, L);
    PointSet common;
    std::set_intersection(inner.begin(), inner.end(), outer.begin(), outer.end(),
                          std::back_inserter(common));
    if (!common.empty()) return false;
  }
  return true;
}

}  // namespace coarse
