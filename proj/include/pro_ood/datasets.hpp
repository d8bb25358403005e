#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pro_ood/tensor.hpp"

namespace pro_ood {

inline constexpr std::uint32_t kUnlabeled = 0xFFFFFFFFu;

enum class Split { train, val, test };

/// Sample set with optional labels. OOD sets carry kUnlabeled everywhere.
struct Dataset {
    Tensor X;                     // [N x D]
    std::vector<std::uint32_t> y; // size N; kUnlabeled for unlabeled samples
    std::uint32_t class_count = 0;
    Split split = Split::test;

    std::size_t n() const { return X.rank() == 2 ? X.shape()[0] : 0; }
    std::size_t dim() const { return X.rank() == 2 ? X.shape()[1] : 0; }
    std::span<const double> row(std::size_t i) const;
    Tensor row_tensor(std::size_t i) const;
    bool labeled() const;
    void validate() const;
};

enum class OodTag { near, far };

struct OodSuite {
    Dataset ind_train;
    Dataset ind_val;
    Dataset ind_test;
    struct Entry {
        std::string name;
        OodTag tag;
        Dataset data;
    };
    std::vector<Entry> ood_sets;
    Dataset ood_val;  // unlabeled, disjoint from the OOD test sets
};

// C Gaussian blobs with unit variance. Class means sit on a scaled simplex
// (margin/sqrt(2) along distinct coordinate axes), so the nearest-mean
// distance is exactly `margin`. Requires class_count <= dim.
Dataset gen_blobs(std::uint32_t class_count, std::size_t per_class_n, std::size_t dim,
                  double margin, std::uint64_t seed);

// Same mean layout as gen_blobs translated by `shift` along the unit diagonal
// direction; unlabeled. shift = 0 reproduces the IND distribution (only the
// seed differs).
Dataset gen_shifted_blobs(std::uint32_t class_count, std::size_t per_class_n, std::size_t dim,
                          double margin, double shift, std::uint64_t seed);

// Spherical shell: uniform direction, radius uniform in
// [radius - width/2, radius + width/2]; unlabeled.
Dataset gen_ring(std::size_t n, std::size_t dim, double radius, double width,
                 std::uint64_t seed);

// Uniform over the cube [-half_extent, half_extent]^dim; unlabeled.
Dataset gen_uniform_cube(std::size_t n, std::size_t dim, double half_extent,
                         std::uint64_t seed);

// Binary dataset file: magic "OODD", u32 version=1, u32 N, u32 D, u32 C, then
// N*D f32 features, then N u32 labels. Little-endian throughout. Features are
// f32 on disk and promoted to f64 in memory.
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// CSV export with header x0..x{D-1},label; unlabeled rows print label -1.
void export_csv(const Dataset& data, const std::filesystem::path& path);

/// Default desk-scale suite: 4-class blobs in 8 dimensions (margin 6) as IND,
/// shifted blobs (2.5 sigma) as near-OOD, a ring at 10 sigma and a uniform
/// cube as far-OOD, plus a mixed near/far validation set for sweeps.
struct DeskPreset {
    std::uint32_t class_count = 4;
    std::size_t dim = 8;
    double margin = 6.0;
    std::size_t train_per_class = 200;
    std::size_t val_per_class = 50;
    std::size_t test_per_class = 100;
    std::size_t ood_n = 400;
    std::size_t ood_val_n = 200;
    double near_shift = 2.5;
    double ring_radius = 10.0;
    double ring_width = 1.0;
    double cube_half_extent = 12.0;
};

OodSuite gen_desk_suite(const DeskPreset& preset, std::uint64_t seed);

}  // namespace pro_ood
