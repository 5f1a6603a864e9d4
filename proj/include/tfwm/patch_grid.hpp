#ifndef TFWM_PATCH_GRID_HPP
#define TFWM_PATCH_GRID_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "tfwm/tf_analysis.hpp"

namespace tfwm {

// Block coordinates over the band image. Row block 0 is the topmost block,
// i.e. the highest retained frequencies; column block 0 is the earliest time.
struct PatchCoord {
  int row_block = 0;
  int col_block = 0;
  int linear_index = 0;  // raster order: row_block * block_cols + col_block

  friend bool operator==(const PatchCoord& a, const PatchCoord& b) {
    return a.row_block == b.row_block && a.col_block == b.col_block;
  }
};

struct PatchGrid {
  int block_rows = 0;
  int block_cols = 0;
  int window = 0;                 // W
  std::vector<double> energies;   // raster order, one per patch
  int dropped_cols = 0;           // trailing TF columns not filling a block

  int patch_count() const { return block_rows * block_cols; }
  PatchCoord coord_of(int linear_index) const {
    return {linear_index / block_cols, linear_index % block_cols, linear_index};
  }
};

enum class SelectionMode { energy_sort, keyed_index };

// Selected patches in embedding order: ascending col_block, then ascending
// row_block within a column (top to bottom = high to low frequency).
struct PatchSelection {
  std::vector<PatchCoord> coords;
  SelectionMode mode = SelectionMode::energy_sort;
  std::uint64_t key = 0;       // keyed mode only
  bool at_capacity = false;    // P == patch count (warning condition)
};

// Splits the band image into W x W patches and computes the average energy
// E_j = (1/W^2) * sum |P_j(m1, m2)|^2 of each. W must divide the band height;
// trailing columns that do not fill a block are excluded.
PatchGrid partition(const TfImage& image, int window);

// Picks P patches: in energy_sort mode the P smallest energies (ties broken
// by ascending linear index, stable); in keyed_index mode a deterministic
// keyed random draw of P distinct patches. Result is in embedding order.
PatchSelection select(const PatchGrid& grid, int payload_bits, SelectionMode mode,
                      std::uint64_t key);

// Reads one patch as a feature vector of length W^2, column major within the
// block, rows scanned from high to low frequency. devectorize writes a vector
// back to exactly that patch.
std::vector<cplx> vectorize(const TfImage& image, const PatchGrid& grid,
                            const PatchCoord& coord);
void devectorize(TfImage& image, const PatchGrid& grid, const PatchCoord& coord,
                 std::span<const cplx> vec);

// Fraction of patches common to both selections; 1.0 means the extractor
// re-finds every watermarked patch.
double verify_recovery(const PatchSelection& original, const PatchSelection& recomputed);

}  // namespace tfwm

#endif
