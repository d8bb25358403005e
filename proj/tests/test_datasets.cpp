#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "fixture.hpp"
#include "pro_ood/datasets.hpp"
#include "pro_ood/errors.hpp"
#include "pro_ood/eval.hpp"
#include "pro_ood/metrics.hpp"

using namespace pro_ood;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / (std::string("pro_ood_test_") + name);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("blobs have the designed cross-class margin") {
    const Dataset d = gen_blobs(2, 12, 2, 6.0, 13);
    REQUIRE(d.n() == 24);
    REQUIRE(d.class_count == 2);

    // Nearest cross-class neighbor distance: with 6-sigma mean separation and
    // two dozen samples a closer pair than 2 is improbable; the seed is fixed
    // so the measured value is stable.
    double nearest = 1e18;
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t j = i + 1; j < d.n(); ++j) {
            if (d.y[i] == d.y[j]) continue;
            double dist2 = 0.0;
            for (std::size_t k = 0; k < d.dim(); ++k) {
                const double diff = d.X.at(i, k) - d.X.at(j, k);
                dist2 += diff * diff;
            }
            nearest = std::min(nearest, std::sqrt(dist2));
        }
    }
    CHECK(nearest >= 2.0);
}

TEST_CASE("generator parameter errors") {
    CHECK_THROWS_AS(gen_blobs(2, 0, 4, 6.0, 1), ValueError);   // empty dataset
    CHECK_THROWS_AS(gen_blobs(5, 10, 4, 6.0, 1), ValueError);  // C > D
    CHECK_THROWS_AS(gen_ring(100, 4, 10.0, -1.0, 1), ValueError);
    CHECK_THROWS_AS(gen_ring(100, 4, 0.0, 1.0, 1), ValueError);
    CHECK_THROWS_AS(gen_uniform_cube(0, 4, 1.0, 1), ValueError);
}

TEST_CASE("generators are pure functions of the seed") {
    const Dataset a = gen_blobs(3, 50, 4, 6.0, 99);
    const Dataset b = gen_blobs(3, 50, 4, 6.0, 99);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    const Dataset c = gen_blobs(3, 50, 4, 6.0, 100);
    CHECK_FALSE(a.X == c.X);

    const Dataset r1 = gen_ring(64, 4, 10.0, 1.0, 5);
    const Dataset r2 = gen_ring(64, 4, 10.0, 1.0, 5);
    CHECK(r1.X == r2.X);
}

TEST_CASE("ring samples sit in the shell") {
    const Dataset r = gen_ring(500, 8, 10.0, 1.0, 21);
    for (std::size_t i = 0; i < r.n(); ++i) {
        double norm2 = 0.0;
        for (double v : r.row(i)) norm2 += v * v;
        const double norm = std::sqrt(norm2);
        CHECK(norm >= 9.5 - 1e-9);
        CHECK(norm <= 10.5 + 1e-9);
    }
}

TEST_CASE("shifted blobs with zero shift match the IND distribution") {
    // Not bitwise (different seed stream) but the same generator path; the
    // mean of each coordinate agrees within sampling error.
    const Dataset ind = gen_blobs(4, 500, 8, 6.0, 40);
    const Dataset shifted = gen_shifted_blobs(4, 500, 8, 6.0, 0.0, 41);
    REQUIRE(ind.n() == shifted.n());
    for (std::size_t k = 0; k < 8; ++k) {
        double mi = 0.0, ms = 0.0;
        for (std::size_t i = 0; i < ind.n(); ++i) {
            mi += ind.X.at(i, k);
            ms += shifted.X.at(i, k);
        }
        mi /= static_cast<double>(ind.n());
        ms /= static_cast<double>(ind.n());
        CHECK(std::abs(mi - ms) < 0.2);  // ~4 sigma of the mean estimate
    }
    CHECK_FALSE(shifted.labeled());
}

TEST_CASE("zero-shift blobs are indistinguishable by any detector") {
    // Same distribution, different seed: AUROC sits at chance within
    // sampling error over 2000 samples per side.
    const auto& f = test_fixture::desk();
    const Dataset ind = gen_blobs(4, 500, 8, 6.0, 900);
    const Dataset same = gen_shifted_blobs(4, 500, 8, 6.0, 0.0, 901);
    const auto si = plain_scores(f.net, ScoreFn::msp(), ind);
    const auto ss = plain_scores(f.net, ScoreFn::msp(), same);
    const double a = auroc(si, ss);
    CHECK(a > 0.47);
    CHECK(a < 0.53);
}

TEST_CASE("dataset file round-trip is bit-exact") {
    const Dataset d = gen_blobs(3, 20, 5, 6.0, 7);
    const fs::path p1 = temp_file("roundtrip1.bin");
    const fs::path p2 = temp_file("roundtrip2.bin");
    save_dataset(d, p1);
    const Dataset loaded = load_dataset(p1);
    save_dataset(loaded, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(loaded.n() == d.n());
    CHECK(loaded.y == d.y);
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("hand-built 2x2 dataset file loads to expected values") {
    std::string buf = "OODD";
    auto put_u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    auto put_f32 = [&](float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32(bits);
    };
    put_u32(1);  // version
    put_u32(2);  // N
    put_u32(2);  // D
    put_u32(2);  // C
    put_f32(1.5f);
    put_f32(-2.0f);
    put_f32(0.25f);
    put_f32(4.0f);
    put_u32(0);
    put_u32(1);

    const fs::path p = temp_file("hand.bin");
    std::ofstream(p, std::ios::binary).write(buf.data(), static_cast<std::streamsize>(buf.size()));
    const Dataset d = load_dataset(p);
    CHECK(d.n() == 2);
    CHECK(d.dim() == 2);
    CHECK(d.class_count == 2);
    CHECK(d.X.at(0, 0) == 1.5);
    CHECK(d.X.at(0, 1) == -2.0);
    CHECK(d.X.at(1, 0) == 0.25);
    CHECK(d.X.at(1, 1) == 4.0);
    CHECK(d.y[0] == 0);
    CHECK(d.y[1] == 1);
    fs::remove(p);
}

TEST_CASE("truncated dataset file reports the byte offset") {
    const Dataset d = gen_blobs(2, 4, 3, 6.0, 9);
    const fs::path p = temp_file("trunc.bin");
    save_dataset(d, p);
    std::string bytes = slurp(p);
    bytes.resize(bytes.size() - 7);
    std::ofstream(p, std::ios::binary)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));

    try {
        load_dataset(p);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset > 0);
        CHECK(e.offset <= bytes.size());
    }
    fs::remove(p);
}

TEST_CASE("bad magic is rejected") {
    const fs::path p = temp_file("magic.bin");
    std::ofstream(p, std::ios::binary) << "NOPE1234";
    CHECK_THROWS_AS(load_dataset(p), ParseError);
    fs::remove(p);
}

TEST_CASE("csv export shape") {
    const Dataset d = gen_blobs(2, 3, 2, 6.0, 3);
    const fs::path p = temp_file("export.csv");
    export_csv(d, p);
    std::ifstream f(p);
    std::string header;
    std::getline(f, header);
    CHECK(header == "x0,x1,label");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(f, line)) ++lines;
    CHECK(lines == d.n());
    fs::remove(p);
}

TEST_CASE("desk suite invariants") {
    const OodSuite suite = gen_desk_suite(DeskPreset{}, 1);
    CHECK(suite.ind_train.labeled());
    CHECK(suite.ind_test.labeled());
    CHECK_FALSE(suite.ood_val.labeled());
    REQUIRE(suite.ood_sets.size() == 3);
    for (const auto& entry : suite.ood_sets) {
        CHECK(entry.data.dim() == suite.ind_test.dim());
        CHECK_FALSE(entry.data.labeled());
        // ood_val must be disjoint from the OOD test sets.
        for (std::size_t i = 0; i < entry.data.n(); ++i) {
            for (std::size_t j = 0; j < suite.ood_val.n(); ++j) {
                bool same = true;
                for (std::size_t k = 0; k < entry.data.dim(); ++k) {
                    if (entry.data.X.at(i, k) != suite.ood_val.X.at(j, k)) {
                        same = false;
                        break;
                    }
                }
                CHECK_FALSE(same);
            }
        }
    }
}
