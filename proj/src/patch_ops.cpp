#include "nlrtfa/patch_ops.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlrtfa {

namespace {

std::vector<int> reference_positions(int extent, int patch, int stride) {
    std::vector<int> pos;
    for (int p = 0; p + patch <= extent; p += stride) pos.push_back(p);
    if (pos.empty() || pos.back() != extent - patch) pos.push_back(extent - patch);
    return pos;
}

struct Candidate {
    double dist;
    int row;
    int col;
};

}  // namespace

std::vector<PatchGroup> extract_patch_groups(const Image& img, const GroupingConfig& cfg) {
    const int m = cfg.patch_rows, n = cfg.patch_cols;
    if (img.height < m || img.width < n)
        throw ImageTooSmall("extract_patch_groups: image smaller than patch");

    const auto row_pos = reference_positions(img.height, m, cfg.stride);
    const auto col_pos = reference_positions(img.width, n, cfg.stride);
    const int max_r = img.height - m;
    const int max_c = img.width - n;

    std::vector<PatchGroup> groups(row_pos.size() * col_pos.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (long long gi = 0; gi < static_cast<long long>(groups.size()); ++gi) {
        const int rr = row_pos[gi / col_pos.size()];
        const int rc = col_pos[gi % col_pos.size()];

        int r0 = 0, r1 = max_r, c0 = 0, c1 = max_c;
        if (cfg.search_window > 0) {
            r0 = std::max(0, rr - cfg.search_window);
            r1 = std::min(max_r, rr + cfg.search_window);
            c0 = std::max(0, rc - cfg.search_window);
            c1 = std::min(max_c, rc + cfg.search_window);
        }

        std::vector<Candidate> cands;
        cands.reserve(static_cast<size_t>(r1 - r0 + 1) * (c1 - c0 + 1));
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                if (r == rr && c == rc) continue;
                double d = 0.0;
                for (int i = 0; i < m; ++i) {
                    const double* a = &img.pixels[static_cast<size_t>(rr + i) * img.width + rc];
                    const double* b = &img.pixels[static_cast<size_t>(r + i) * img.width + c];
                    for (int j = 0; j < n; ++j) {
                        const double diff = a[j] - b[j];
                        d += diff * diff;
                    }
                }
                cands.push_back({d, r, c});
            }
        }

        const size_t want = std::min<size_t>(cfg.group_size - 1, cands.size());
        auto better = [](const Candidate& a, const Candidate& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.row != b.row) return a.row < b.row;
            return a.col < b.col;
        };
        std::partial_sort(cands.begin(), cands.begin() + want, cands.end(), better);

        PatchGroup g;
        g.reference = {rr, rc};
        g.patch_rows = m;
        g.patch_cols = n;
        g.members.reserve(want + 1);
        g.members.emplace_back(rr, rc);
        for (size_t i = 0; i < want; ++i) g.members.emplace_back(cands[i].row, cands[i].col);
        groups[gi] = std::move(g);
    }
    return groups;
}

Tensor3 form_tensor(const Image& img, const PatchGroup& g) {
    const int m = g.patch_rows, n = g.patch_cols;
    const int k = static_cast<int>(g.members.size());
    Tensor3 t(m, n, k);
    for (int s = 0; s < k; ++s) {
        const auto [r, c] = g.members[s];
        if (r < 0 || c < 0 || r + m > img.height || c + n > img.width)
            throw OutOfBounds("form_tensor: patch coordinates outside image");
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) t.at(i, j, s) = img.at(r + i, c + j);
    }
    return t;
}

std::pair<Image, Image> aggregate(const std::vector<PatchGroup>& groups,
                                  const std::vector<Tensor3>& tensors,
                                  int height, int width) {
    if (groups.size() != tensors.size())
        throw DimensionMismatch("aggregate: one tensor required per group");

    Image numerator(height, width, 0.0);
    Image counts(height, width, 0.0);
    for (size_t p = 0; p < groups.size(); ++p) {
        const PatchGroup& g = groups[p];
        const Tensor3& t = tensors[p];
        if (t.rows != g.patch_rows || t.cols != g.patch_cols ||
            t.slices != static_cast<int>(g.members.size()))
            throw DimensionMismatch("aggregate: tensor dims do not match group");
        for (int s = 0; s < t.slices; ++s) {
            const auto [r, c] = g.members[s];
            if (r < 0 || c < 0 || r + t.rows > height || c + t.cols > width)
                throw OutOfBounds("aggregate: patch coordinates outside image");
            for (int i = 0; i < t.rows; ++i)
                for (int j = 0; j < t.cols; ++j) {
                    numerator.at(r + i, c + j) += t.at(i, j, s);
                    counts.at(r + i, c + j) += 1.0;
                }
        }
    }
    return {std::move(numerator), std::move(counts)};
}

}  // namespace nlrtfa
