#pragma once

#include <utility>
#include <vector>

#include "nlrtfa/image.hpp"
#include "nlrtfa/tensor_cp.hpp"

namespace nlrtfa {

/// Reference patch plus its k-1 nearest neighbours, ordered by ascending
/// squared Euclidean distance to the reference (the reference itself is
/// always members[0]).
struct PatchGroup {
    std::pair<int, int> reference;               // (row, col) of top-left
    std::vector<std::pair<int, int>> members;    // k coordinates incl. reference
    int patch_rows = 0;                          // m
    int patch_cols = 0;                          // n
};

struct GroupingConfig {
    int patch_rows = 4;
    int patch_cols = 4;
    int group_size = 50;      // k, including the reference patch
    int stride = 2;           // reference-patch step
    int search_window = 20;   // half-width of the matching window; 0 = whole image
};

/// Reference patches tile the image with the configured stride; the final
/// row/column of references is clamped so the last patch touches the image
/// boundary. For each reference the members are the k nearest patches by
/// squared Euclidean distance within the search window (ties broken by
/// row-major candidate order).
std::vector<PatchGroup> extract_patch_groups(const Image& img, const GroupingConfig& cfg);

/// Stack the group's pixel blocks along the third dimension; slice 0 is the
/// reference patch.
Tensor3 form_tensor(const Image& img, const PatchGroup& g);

/// Scatter tensors back onto the pixel grid. Returns (numerator, counts):
/// numerator accumulates each tensor slice at its source coordinates and
/// counts the per-pixel number of covering slices. Scatter is the exact
/// adjoint of form_tensor.
std::pair<Image, Image> aggregate(const std::vector<PatchGroup>& groups,
                                  const std::vector<Tensor3>& tensors,
                                  int height, int width);

}  // namespace nlrtfa
