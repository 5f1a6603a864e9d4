#include "tfwm/patch_grid.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "tfwm/errors.hpp"
#include "tfwm/keyed_rng.hpp"

namespace tfwm {

namespace {

// Band row of local patch row r inside row block rb. Local row 0 is the top
// of the patch = the highest frequency it covers.
inline int band_row(int band_height, int rb, int window, int r) {
  return band_height - 1 - (rb * window + r);
}

void check_coord(const PatchGrid& grid, const PatchCoord& coord) {
  if (coord.row_block < 0 || coord.row_block >= grid.block_rows ||
      coord.col_block < 0 || coord.col_block >= grid.block_cols)
    fail(ErrorClass::index, "patch (" + std::to_string(coord.row_block) + ", " +
                                std::to_string(coord.col_block) + ") outside grid");
}

void embedding_order(std::vector<PatchCoord>& coords) {
  std::sort(coords.begin(), coords.end(), [](const PatchCoord& a, const PatchCoord& b) {
    if (a.col_block != b.col_block) return a.col_block < b.col_block;
    return a.row_block < b.row_block;
  });
}

}  // namespace

PatchGrid partition(const TfImage& image, int window) {
  const int m = image.band_rows();
  if (window <= 0 || m % window != 0)
    fail(ErrorClass::config, "patch window " + std::to_string(window) +
                                 " must divide the band height " + std::to_string(m));
  const std::size_t cols = image.cols();
  if (cols < static_cast<std::size_t>(window))
    fail(ErrorClass::length, "image has " + std::to_string(cols) +
                                 " columns, fewer than one " + std::to_string(window) +
                                 "-wide patch");

  PatchGrid grid;
  grid.window = window;
  grid.block_rows = m / window;
  grid.block_cols = static_cast<int>(cols / static_cast<std::size_t>(window));
  grid.dropped_cols = static_cast<int>(cols % static_cast<std::size_t>(window));
  grid.energies.assign(static_cast<std::size_t>(grid.patch_count()), 0.0);

  const double norm = 1.0 / (static_cast<double>(window) * window);
  for (int rb = 0; rb < grid.block_rows; ++rb) {
    for (int cb = 0; cb < grid.block_cols; ++cb) {
      double acc = 0.0;
      for (int c = 0; c < window; ++c) {
        const std::size_t col = static_cast<std::size_t>(cb * window + c);
        for (int r = 0; r < window; ++r) {
          const cplx v = image.band_at(band_row(m, rb, window, r), col);
          acc += v.real() * v.real() + v.imag() * v.imag();
        }
      }
      grid.energies[static_cast<std::size_t>(rb * grid.block_cols + cb)] = acc * norm;
    }
  }
  return grid;
}

PatchSelection select(const PatchGrid& grid, int payload_bits, SelectionMode mode,
                      std::uint64_t key) {
  const int count = grid.patch_count();
  if (payload_bits < 1) fail(ErrorClass::config, "payload must hold at least one bit");
  if (payload_bits > count)
    fail(ErrorClass::capacity, "payload of " + std::to_string(payload_bits) +
                                   " bits exceeds capacity; maximum payload is " +
                                   std::to_string(count) + " bits");

  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);

  if (mode == SelectionMode::energy_sort) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return grid.energies[static_cast<std::size_t>(a)] <
             grid.energies[static_cast<std::size_t>(b)];
    });
  } else {
    KeyedRng rng(splitmix64(key));
    rng.shuffle(order);
  }

  PatchSelection sel;
  sel.mode = mode;
  sel.key = key;
  sel.at_capacity = (payload_bits == count);
  sel.coords.reserve(static_cast<std::size_t>(payload_bits));
  for (int i = 0; i < payload_bits; ++i)
    sel.coords.push_back(grid.coord_of(order[static_cast<std::size_t>(i)]));
  embedding_order(sel.coords);
  return sel;
}

std::vector<cplx> vectorize(const TfImage& image, const PatchGrid& grid,
                            const PatchCoord& coord) {
  check_coord(grid, coord);
  const int w = grid.window;
  const int m = image.band_rows();
  std::vector<cplx> vec;
  vec.reserve(static_cast<std::size_t>(w) * w);
  for (int c = 0; c < w; ++c) {
    const std::size_t col = static_cast<std::size_t>(coord.col_block * w + c);
    for (int r = 0; r < w; ++r)
      vec.push_back(image.band_at(band_row(m, coord.row_block, w, r), col));
  }
  return vec;
}

void devectorize(TfImage& image, const PatchGrid& grid, const PatchCoord& coord,
                 std::span<const cplx> vec) {
  check_coord(grid, coord);
  const int w = grid.window;
  if (vec.size() != static_cast<std::size_t>(w) * w)
    fail(ErrorClass::shape, "feature vector length " + std::to_string(vec.size()) +
                                " does not match window " + std::to_string(w) + "^2");
  const int m = image.band_rows();
  std::size_t k = 0;
  for (int c = 0; c < w; ++c) {
    const std::size_t col = static_cast<std::size_t>(coord.col_block * w + c);
    for (int r = 0; r < w; ++r)
      image.band_at(band_row(m, coord.row_block, w, r), col) = vec[k++];
  }
}

double verify_recovery(const PatchSelection& original, const PatchSelection& recomputed) {
  if (original.coords.size() != recomputed.coords.size())
    fail(ErrorClass::shape, "selections differ in size");
  if (original.coords.empty()) fail(ErrorClass::shape, "empty selection");

  std::set<std::pair<int, int>> a;
  for (const auto& c : original.coords) a.emplace(c.row_block, c.col_block);
  std::size_t hits = 0;
  for (const auto& c : recomputed.coords)
    hits += a.count({c.row_block, c.col_block});
  return static_cast<double>(hits) / static_cast<double>(original.coords.size());
}

}  // namespace tfwm
