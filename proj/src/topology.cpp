#include "eqsem/topology.hpp"

#include <stdexcept>
#include <string>

namespace eqsem {

MeshTopology MeshTopology::structured(int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh dimensions must be positive");
  return masked(nx, ny, std::vector<bool>(static_cast<std::size_t>(nx) * ny, true));
}

MeshTopology MeshTopology::masked(int nx, int ny, const std::vector<bool>& active) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("mesh dimensions must be positive, got " + std::to_string(nx) + "x" +
                                std::to_string(ny));
  }
  if (active.size() != static_cast<std::size_t>(nx) * ny) {
    throw std::invalid_argument("active-cell mask has the wrong size");
  }
  MeshTopology m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.lattice_.assign(active.size(), -1);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      if (active[iy * nx + ix]) {
        m.lattice_[iy * nx + ix] = static_cast<int>(m.cells_.size());
        m.cells_.push_back({ix, iy});
      }
  if (m.cells_.empty()) throw std::invalid_argument("mesh has no active cells");
  m.connect();
  return m;
}

int MeshTopology::element_at(int ix, int iy) const {
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return -1;
  return lattice_[iy * nx_ + ix];
}

void MeshTopology::connect() {
  const int ne = element_count();
  neighbors_.assign(ne, {-1, -1, -1, -1});
  face_iface_.assign(ne, {-1, -1, -1, -1});
  for (int e = 0; e < ne; ++e) {
    const auto [ix, iy] = cells_[e];
    neighbors_[e] = {element_at(ix - 1, iy), element_at(ix + 1, iy), element_at(ix, iy - 1), element_at(ix, iy + 1)};
  }
  // Interfaces are numbered on first encounter, in element then side order.
  for (int e = 0; e < ne; ++e) {
    for (Side s : kSides) {
      const int k = side_index(s);
      if (face_iface_[e][k] >= 0) continue;
      Interface iface;
      iface.vertical = (s == Side::Left || s == Side::Right);
      const int nb = neighbors_[e][k];
      if (is_plus_side(s)) {
        iface.elem = {e, nb};
      } else {
        iface.elem = {nb, e};
      }
      const int id = static_cast<int>(interfaces_.size());
      interfaces_.push_back(iface);
      face_iface_[e][k] = id;
      if (nb >= 0) face_iface_[nb][side_index(opposite(s))] = id;
    }
  }
}

int MeshTopology::interior_interface_count() const {
  int n = 0;
  for (const auto& f : interfaces_) n += f.is_boundary() ? 0 : 1;
  return n;
}

int MeshTopology::boundary_interface_count() const {
  return static_cast<int>(interfaces_.size()) - interior_interface_count();
}

std::vector<BoundaryFace> MeshTopology::boundary_faces() const {
  std::vector<BoundaryFace> out;
  for (int e = 0; e < element_count(); ++e)
    for (Side s : kSides)
      if (neighbor(e, s) < 0) out.push_back({e, s});
  return out;
}

// ---------------------------------------------------------------------------

DofLayout::DofLayout(const MeshTopology& mesh, int order, RotationGrid rotation)
    : n_(order), rotation_(rotation), elements_(mesh.element_count()) {
  if (order < 1) throw std::invalid_argument("polynomial order must be at least 1");
  const int nloc = local_traction_count();
  element_tractions_.assign(elements_, std::vector<int>(nloc, -1));
  int next = 0;
  // Left and bottom neighbours always precede an element in lexicographic
  // order, so shared faces can be copied from them.
  for (int e = 0; e < elements_; ++e) {
    auto& map = element_tractions_[e];
    const int left = mesh.neighbor(e, Side::Left);
    const int bottom = mesh.neighbor(e, Side::Bottom);
    for (int f = 0; f < 4; ++f) {
      if (family_normal(f) == 0) {
        for (int j = 1; j <= n_; ++j)
          for (int i = 0; i <= n_; ++i) {
            int& g = map[local_traction(f, i, j)];
            g = (i == 0 && left >= 0) ? traction(left, f, n_, j) : next++;
          }
      } else {
        for (int j = 0; j <= n_; ++j)
          for (int i = 1; i <= n_; ++i) {
            int& g = map[local_traction(f, i, j)];
            g = (j == 0 && bottom >= 0) ? traction(bottom, f, i, n_) : next++;
          }
      }
    }
  }
  traction_count_ = next;
}

int DofLayout::local_traction(int f, int i, int j) const {
  const int base = f * family_size();
  if (family_normal(f) == 0) return base + (j - 1) * (n_ + 1) + i;
  return base + j * n_ + (i - 1);
}

Eigen::SparseMatrix<double> build_incidence(const DofLayout& layout) {
  const int n = layout.order();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(layout.displacement_count()) * 4);
  for (int e = 0; e < layout.element_count(); ++e)
    for (int m = 0; m < 2; ++m) {
      const int f1 = family_of(0, m);
      const int f2 = family_of(1, m);
      for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) {
          const int row = layout.displacement(e, m, i, j);
          trip.emplace_back(row, layout.traction(e, f1, i, j), 1.0);
          trip.emplace_back(row, layout.traction(e, f1, i - 1, j), -1.0);
          trip.emplace_back(row, layout.traction(e, f2, i, j), 1.0);
          trip.emplace_back(row, layout.traction(e, f2, i, j - 1), -1.0);
        }
    }
  Eigen::SparseMatrix<double> d(layout.displacement_count(), layout.traction_count());
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

}  // namespace eqsem
