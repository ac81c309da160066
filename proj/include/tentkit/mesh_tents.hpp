#pragma once

#include <iosfwd>
#include <vector>

namespace tentkit {

/// 1D mesh with ascending vertex coordinates. For periodic meshes the first
/// and last stored coordinates describe the same vertex (index 0); element j
/// spans [x[j], x[j+1]]. Element lengths may be stored explicitly in hs so
/// that equal-sized elements carry bitwise-equal lengths (accumulated
/// coordinates round differently per element); when hs is left empty the
/// lengths derive from the coordinates.
struct Mesh1D {
  std::vector<double> x;
  std::vector<double> hs;
  bool periodic = false;

  int num_elements() const { return static_cast<int>(x.size()) - 1; }
  int num_vertices() const {
    return periodic ? num_elements() : static_cast<int>(x.size());
  }
  double h(int e) const { return hs.empty() ? x[e + 1] - x[e] : hs[e]; }
  double length() const { return x.back() - x.front(); }

  static Mesh1D uniform(double x0, double x1, int n, bool periodic = false);
};

/// Structural checks: at least two elements, strictly ascending coordinates,
/// stored lengths (if any) consistent with the coordinates.
void validate(const Mesh1D& mesh);

/// Advancing-front times, one entry per (active) vertex.
struct Front {
  std::vector<double> tau;
};

/// One space-time tent: the vertex patch around `center`, the front it was
/// erected on (phi_bot) and the advanced front (phi_top), both stored on the
/// patch vertices left to right. Only the center vertex moves.
struct Tent {
  int id = 0;
  int center = 0;
  int level = -1;
  std::vector<int> elements;     // 1 or 2 element indices, left to right
  std::vector<double> phi_bot;   // elements.size() + 1 vertex values
  std::vector<double> phi_top;
  int center_pos = 0;            // index of the center vertex within the patch
  bool on_boundary = false;      // center sits on the domain boundary
  double pole_height() const { return phi_top[center_pos] - phi_bot[center_pos]; }
};

/// A complete space-time slab [0, t_max] covered by tents in causal order.
struct TentSlab {
  Mesh1D mesh;
  double t_max = 0.0;
  double c_max = 0.0;
  double gamma = 0.0;
  std::vector<Tent> tents;
  int num_levels = 0;
};

/// Greedy tent pitching: repeatedly advance the minimal-tau vertex (ties by
/// lowest index) by the causality-limited increment, capped at t_max.
/// gamma < 1 keeps the front slopes strictly below 1/c_max.
TentSlab pitch_slab(const Mesh1D& mesh, double c_max, double t_max,
                    double gamma = 0.99);

/// The r+1 interpolated fronts phi^[k] = phi_bot + (k/r) (phi_top - phi_bot),
/// each on the patch vertices.
std::vector<std::vector<double>> subtent_fronts(const Tent& tent, int r);

/// Global vertex indices of the tent's patch, left to right, matching the
/// layout of phi_bot/phi_top (wraps on periodic meshes).
std::vector<int> patch_vertices(const Mesh1D& mesh, const Tent& tent);

/// Assigns each tent the smallest level greater than the levels of all
/// earlier tents whose patches share a vertex; returns the level count.
/// Tents within one level have pairwise vertex-disjoint patches.
int dependency_levels(TentSlab& slab);

/// Writes one line per tent: "tent <id> center=<V> level=<L> phib=<...> phit=<...>".
void dump(const TentSlab& slab, std::ostream& os);

}  // namespace tentkit
