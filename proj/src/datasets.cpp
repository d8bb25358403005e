#include "pro_ood/datasets.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <utility>

#include "pro_ood/errors.hpp"
#include "pro_ood/rng.hpp"

namespace pro_ood {

std::span<const double> Dataset::row(std::size_t i) const {
    return X.data().subspan(i * dim(), dim());
}

Tensor Dataset::row_tensor(std::size_t i) const {
    auto r = row(i);
    return Tensor::vector(std::vector<double>(r.begin(), r.end()));
}

bool Dataset::labeled() const {
    for (std::uint32_t v : y) {
        if (v == kUnlabeled) return false;
    }
    return !y.empty();
}

void Dataset::validate() const {
    if (X.rank() != 2) throw DimensionError("dataset: X must be rank 2");
    if (n() == 0) throw ValueError("dataset: empty");
    if (y.size() != n()) throw DimensionError("dataset: label count != sample count");
    for (std::uint32_t v : y) {
        if (v != kUnlabeled && v >= class_count) {
            throw ValueError("dataset: label " + std::to_string(v) + " out of range");
        }
    }
}

namespace {

// Class c mean: (margin / sqrt(2)) * e_c, optionally translated by
// shift/sqrt(D) in every coordinate. Distinct axes make all pairwise mean
// distances equal to `margin`.
std::vector<double> blob_mean(std::uint32_t c, std::size_t dim, double margin, double shift) {
    std::vector<double> mean(dim, shift / std::sqrt(static_cast<double>(dim)));
    mean[c] += margin / std::sqrt(2.0);
    return mean;
}

Dataset make_blobs(std::uint32_t class_count, std::size_t per_class_n, std::size_t dim,
                   double margin, double shift, bool labeled, std::uint64_t seed) {
    if (class_count < 1) throw ValueError("gen_blobs: need at least one class");
    if (per_class_n == 0) throw ValueError("gen_blobs: per_class_n must be positive");
    if (dim < class_count) throw ValueError("gen_blobs: dim must be >= class_count");
    if (margin < 0.0) throw ValueError("gen_blobs: margin must be nonnegative");

    const std::size_t n = static_cast<std::size_t>(class_count) * per_class_n;
    Tensor X({n, dim});
    std::vector<std::uint32_t> y(n, kUnlabeled);
    std::size_t rowi = 0;
    for (std::uint32_t c = 0; c < class_count; ++c) {
        Rng rng = Rng::keyed(seed, 0xb10b5ULL, c);
        const std::vector<double> mean = blob_mean(c, dim, margin, shift);
        for (std::size_t s = 0; s < per_class_n; ++s, ++rowi) {
            for (std::size_t d = 0; d < dim; ++d) X.at(rowi, d) = mean[d] + rng.normal();
            if (labeled) y[rowi] = c;
        }
    }
    Dataset out{std::move(X), std::move(y), labeled ? class_count : 0, Split::train};
    return out;
}

}  // namespace

Dataset gen_blobs(std::uint32_t class_count, std::size_t per_class_n, std::size_t dim,
                  double margin, std::uint64_t seed) {
    return make_blobs(class_count, per_class_n, dim, margin, 0.0, true, seed);
}

Dataset gen_shifted_blobs(std::uint32_t class_count, std::size_t per_class_n, std::size_t dim,
                          double margin, double shift, std::uint64_t seed) {
    return make_blobs(class_count, per_class_n, dim, margin, shift, false, seed);
}

Dataset gen_ring(std::size_t n, std::size_t dim, double radius, double width,
                 std::uint64_t seed) {
    if (n == 0) throw ValueError("gen_ring: n must be positive");
    if (dim == 0) throw ValueError("gen_ring: dim must be positive");
    if (radius <= 0.0) throw ValueError("gen_ring: radius must be positive");
    if (width < 0.0) throw ValueError("gen_ring: width must be nonnegative");

    Rng rng = Rng::keyed(seed, 0x4172ULL);
    Tensor X({n, dim});
    for (std::size_t i = 0; i < n; ++i) {
        double norm2 = 0.0;
        std::vector<double> dir(dim);
        do {
            norm2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                dir[d] = rng.normal();
                norm2 += dir[d] * dir[d];
            }
        } while (norm2 == 0.0);
        const double r = rng.uniform(radius - width / 2.0, radius + width / 2.0);
        const double scale = r / std::sqrt(norm2);
        for (std::size_t d = 0; d < dim; ++d) X.at(i, d) = dir[d] * scale;
    }
    return Dataset{std::move(X), std::vector<std::uint32_t>(n, kUnlabeled), 0, Split::test};
}

Dataset gen_uniform_cube(std::size_t n, std::size_t dim, double half_extent,
                         std::uint64_t seed) {
    if (n == 0) throw ValueError("gen_uniform_cube: n must be positive");
    if (dim == 0) throw ValueError("gen_uniform_cube: dim must be positive");
    if (half_extent <= 0.0) throw ValueError("gen_uniform_cube: half_extent must be positive");

    Rng rng = Rng::keyed(seed, 0xc0beULL);
    Tensor X({n, dim});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) X.at(i, d) = rng.uniform(-half_extent, half_extent);
    return Dataset{std::move(X), std::vector<std::uint32_t>(n, kUnlabeled), 0, Split::test};
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    std::uint32_t u32(const char* what) {
        if (pos + 4 > buf.size()) throw ParseError(std::string("truncated ") + what, pos);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(i)]);
        }
        pos += 4;
        return v;
    }

    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
};

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    data.validate();
    const std::size_t n = data.n(), d = data.dim();

    std::string out;
    out.reserve(16 + n * d * 4 + n * 4);
    out += "OODD";
    put_u32(out, 1);  // version
    put_u32(out, static_cast<std::uint32_t>(n));
    put_u32(out, static_cast<std::uint32_t>(d));
    put_u32(out, data.class_count);
    for (std::size_t i = 0; i < n * d; ++i) put_f32(out, static_cast<float>(data.X[i]));
    for (std::size_t i = 0; i < n; ++i) put_u32(out, data.y[i]);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{buf};
    if (buf.size() < 4 || buf.compare(0, 4, "OODD") != 0) {
        throw ParseError("bad magic, expected OODD", 0);
    }
    r.pos = 4;
    const std::uint32_t version = r.u32("version");
    if (version != 1) throw ParseError("unsupported version " + std::to_string(version), 4);
    const std::uint32_t n = r.u32("sample count");
    const std::uint32_t d = r.u32("feature dimension");
    const std::uint32_t c = r.u32("class count");
    if (n == 0 || d == 0) throw SchemaError("dataset file declares an empty dataset");

    Tensor X({n, d});
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * d; ++i) {
        X[i] = static_cast<double>(r.f32("features"));
    }
    std::vector<std::uint32_t> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = r.u32("labels");
    if (r.pos != buf.size()) throw ParseError("trailing bytes after dataset payload", r.pos);

    Dataset out{std::move(X), std::move(y), c, Split::test};
    out.validate();
    return out;
}

void export_csv(const Dataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    for (std::size_t d = 0; d < data.dim(); ++d) f << 'x' << d << ',';
    f << "label\n";
    char buf[64];
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (double v : data.row(i)) {
            std::snprintf(buf, sizeof buf, "%.9g", v);
            f << buf << ',';
        }
        if (data.y[i] == kUnlabeled) {
            f << "-1\n";
        } else {
            f << data.y[i] << '\n';
        }
    }
    if (!f) throw IoError("write failed for " + path.string());
}

OodSuite gen_desk_suite(const DeskPreset& p, std::uint64_t seed) {
    OodSuite suite;
    suite.ind_train = gen_blobs(p.class_count, p.train_per_class, p.dim, p.margin, seed);
    suite.ind_train.split = Split::train;
    suite.ind_val = gen_blobs(p.class_count, p.val_per_class, p.dim, p.margin, seed + 1);
    suite.ind_val.split = Split::val;
    suite.ind_test = gen_blobs(p.class_count, p.test_per_class, p.dim, p.margin, seed + 2);
    suite.ind_test.split = Split::test;

    const std::size_t ood_per_class = p.ood_n / p.class_count;
    suite.ood_sets.push_back({"near-shift", OodTag::near,
                              gen_shifted_blobs(p.class_count, ood_per_class, p.dim, p.margin,
                                                p.near_shift, seed + 3)});
    suite.ood_sets.push_back(
        {"far-ring", OodTag::far, gen_ring(p.ood_n, p.dim, p.ring_radius, p.ring_width, seed + 4)});
    suite.ood_sets.push_back({"far-cube", OodTag::far,
                              gen_uniform_cube(p.ood_n, p.dim, p.cube_half_extent, seed + 5)});

    // Validation OOD: near/far mix from seeds unused by the test sets.
    const std::size_t half = p.ood_val_n / 2;
    Dataset near_val = gen_shifted_blobs(p.class_count, half / p.class_count, p.dim, p.margin,
                                         p.near_shift, seed + 6);
    Dataset far_val = gen_ring(half, p.dim, p.ring_radius, p.ring_width, seed + 7);
    const std::size_t n_total = near_val.n() + far_val.n();
    Tensor X({n_total, p.dim});
    for (std::size_t i = 0; i < near_val.n(); ++i)
        for (std::size_t d = 0; d < p.dim; ++d) X.at(i, d) = near_val.X.at(i, d);
    for (std::size_t i = 0; i < far_val.n(); ++i)
        for (std::size_t d = 0; d < p.dim; ++d) X.at(near_val.n() + i, d) = far_val.X.at(i, d);
    suite.ood_val =
        Dataset{std::move(X), std::vector<std::uint32_t>(n_total, kUnlabeled), 0, Split::val};
    return suite;
}

}  // namespace pro_ood
