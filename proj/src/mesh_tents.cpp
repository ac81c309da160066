#include "tentkit/mesh_tents.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "tentkit/errors.hpp"

namespace tentkit {

Mesh1D Mesh1D::uniform(double x0, double x1, int n, bool periodic) {
  require(n >= 2, "uniform mesh needs at least 2 elements, got ", n);
  require(x1 > x0, "uniform mesh needs x1 > x0");
  Mesh1D mesh;
  mesh.periodic = periodic;
  mesh.x.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    mesh.x[i] = x0 + (x1 - x0) * (static_cast<double>(i) / n);
  }
  mesh.x[n] = x1;
  mesh.hs.assign(n, (x1 - x0) / n);
  return mesh;
}

void validate(const Mesh1D& mesh) {
  require(mesh.x.size() >= 3, "mesh needs at least 2 elements");
  for (std::size_t i = 1; i < mesh.x.size(); ++i) {
    require(mesh.x[i] > mesh.x[i - 1], "mesh coordinates must be strictly ascending at index ", i);
  }
  if (mesh.hs.empty()) return;
  require(mesh.hs.size() == mesh.x.size() - 1,
          "mesh stores ", mesh.hs.size(), " element lengths for ",
          mesh.x.size() - 1, " elements");
  for (std::size_t e = 0; e < mesh.hs.size(); ++e) {
    const double dx = mesh.x[e + 1] - mesh.x[e];
    require(std::abs(mesh.hs[e] - dx) <= 1e-12 * dx,
            "stored element length disagrees with the coordinates at element ", e);
  }
}

namespace {

// Patch vertices left to right in the wrapped sense, plus the element indices
// between them. For a boundary vertex of a non-periodic mesh the patch has a
// single element.
struct PatchShape {
  std::vector<int> verts;
  std::vector<int> elements;
  int center_pos;
  bool on_boundary;
};

PatchShape patch_shape(const Mesh1D& mesh, int v) {
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_elements();
  PatchShape p;
  if (mesh.periodic) {
    const int prev = (v + nv - 1) % nv;
    const int next = (v + 1) % nv;
    p.verts = {prev, v, next};
    p.elements = {(v + ne - 1) % ne, v};
    p.center_pos = 1;
    p.on_boundary = false;
  } else if (v == 0) {
    p.verts = {0, 1};
    p.elements = {0};
    p.center_pos = 0;
    p.on_boundary = true;
  } else if (v == nv - 1) {
    p.verts = {v - 1, v};
    p.elements = {ne - 1};
    p.center_pos = 1;
    p.on_boundary = true;
  } else {
    p.verts = {v - 1, v, v + 1};
    p.elements = {v - 1, v};
    p.center_pos = 1;
    p.on_boundary = false;
  }
  return p;
}

}  // namespace

TentSlab pitch_slab(const Mesh1D& mesh, double c_max, double t_max, double gamma) {
  validate(mesh);
  require(c_max > 0.0, "pitch_slab: c_max must be positive, got ", c_max);
  require(gamma > 0.0 && gamma < 1.0, "pitch_slab: gamma must lie in (0,1), got ", gamma);
  require(t_max > 0.0, "pitch_slab: t_max must be positive, got ", t_max);

  TentSlab slab;
  slab.mesh = mesh;
  slab.t_max = t_max;
  slab.c_max = c_max;
  slab.gamma = gamma;

  const int nv = mesh.num_vertices();
  std::vector<double> tau(nv, 0.0);

  while (true) {
    int vmin = 0;
    for (int v = 1; v < nv; ++v) {
      if (tau[v] < tau[vmin]) vmin = v;
    }
    if (tau[vmin] >= t_max) break;

    const PatchShape shape = patch_shape(mesh, vmin);
    double cap = t_max;
    for (std::size_t i = 0; i < shape.elements.size(); ++i) {
      // Patch element i sits between patch vertices i and i+1; the causality
      // bound couples the centre to the vertex on the element's far side.
      const int far = static_cast<int>(i) < shape.center_pos ? static_cast<int>(i)
                                                             : static_cast<int>(i) + 1;
      const int w = shape.verts[far];
      const double dist = mesh.h(shape.elements[i]);
      cap = std::min(cap, tau[w] + gamma * dist / c_max);
    }
    // Neighbour fronts are never below the minimal vertex, so the causality
    // bound always admits a positive advance.
    require(cap > tau[vmin], "pitch_slab: stalled at vertex ", vmin);

    Tent tent;
    tent.id = static_cast<int>(slab.tents.size());
    tent.center = vmin;
    tent.elements = shape.elements;
    tent.center_pos = shape.center_pos;
    tent.on_boundary = shape.on_boundary;
    tent.phi_bot.resize(shape.verts.size());
    for (std::size_t i = 0; i < shape.verts.size(); ++i) {
      tent.phi_bot[i] = tau[shape.verts[i]];
    }
    tent.phi_top = tent.phi_bot;
    tent.phi_top[tent.center_pos] = cap;
    slab.tents.push_back(std::move(tent));

    tau[vmin] = cap;
  }

  slab.num_levels = dependency_levels(slab);
  return slab;
}

std::vector<std::vector<double>> subtent_fronts(const Tent& tent, int r) {
  require(r >= 1, "subtent_fronts: r must be at least 1, got ", r);
  std::vector<std::vector<double>> fronts(r + 1, tent.phi_bot);
  for (int k = 1; k <= r; ++k) {
    const double s = static_cast<double>(k) / r;
    for (std::size_t i = 0; i < tent.phi_bot.size(); ++i) {
      fronts[k][i] = tent.phi_bot[i] + s * (tent.phi_top[i] - tent.phi_bot[i]);
    }
  }
  fronts[r] = tent.phi_top;
  return fronts;
}

std::vector<int> patch_vertices(const Mesh1D& mesh, const Tent& tent) {
  std::vector<int> verts;
  verts.reserve(tent.elements.size() + 1);
  verts.push_back(tent.elements.front());
  for (int e : tent.elements) {
    const int right = e + 1;
    verts.push_back(mesh.periodic ? right % mesh.num_vertices() : right);
  }
  return verts;
}

int dependency_levels(TentSlab& slab) {
  const int nv = slab.mesh.num_vertices();
  std::vector<int> last_level(nv, -1);
  int count = 0;
  for (Tent& tent : slab.tents) {
    const PatchShape shape = patch_shape(slab.mesh, tent.center);
    int lvl = 0;
    for (int v : shape.verts) lvl = std::max(lvl, last_level[v] + 1);
    for (int v : shape.verts) last_level[v] = lvl;
    tent.level = lvl;
    count = std::max(count, lvl + 1);
  }
  slab.num_levels = count;
  return count;
}

void dump(const TentSlab& slab, std::ostream& os) {
  os << std::setprecision(17);
  for (const Tent& tent : slab.tents) {
    os << "tent " << tent.id << " center=" << tent.center
       << " level=" << tent.level << " phib=";
    for (std::size_t i = 0; i < tent.phi_bot.size(); ++i) {
      if (i) os << ',';
      os << tent.phi_bot[i];
    }
    os << " phit=";
    for (std::size_t i = 0; i < tent.phi_top.size(); ++i) {
      if (i) os << ',';
      os << tent.phi_top[i];
    }
    os << '\n';
  }
}

}  // namespace tentkit
