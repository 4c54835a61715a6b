#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pigan/dataset.hpp"
#include "pigan/glyphs.hpp"
#include "pigan/mixture.hpp"
#include "pigan/pgm.hpp"

using namespace pigan;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    const fs::path dir = fs::temp_directory_path() / "pigan_data_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("gaussian mixture sampling") {
    SUBCASE("degenerate sigma collapses onto the mean") {
        MixtureSpec spec;
        spec.components = {{2.0, -3.0, 1e-9, 1.0}};
        spec.normalize();
        RandomStream rng(1);
        const Tensor s = sample_gaussian_mixture(spec, 100, rng);
        for (std::size_t i = 0; i < 100; ++i) {
            CHECK(std::abs(s.at2(i, 0) - 2.0) < 1e-6);
            CHECK(std::abs(s.at2(i, 1) + 3.0) < 1e-6);
        }
    }
    SUBCASE("equal components get balanced assignments") {
        MixtureSpec spec;
        spec.components = {{-5.0, 0.0, 0.5, 1.0}, {5.0, 0.0, 0.5, 1.0}};
        spec.normalize();
        RandomStream rng(2);
        std::vector<std::int32_t> ids;
        sample_gaussian_mixture(spec, 10000, rng, &ids);
        const double frac =
            static_cast<double>(std::count(ids.begin(), ids.end(), 0)) / 10000.0;
        CHECK(std::abs(frac - 0.5) < 0.02);  // binomial 3-sigma bound ~0.015
    }
    SUBCASE("seeded determinism") {
        const MixtureSpec spec = MixtureSpec::ring();
        RandomStream r1(7), r2(7);
        CHECK(sample_gaussian_mixture(spec, 500, r1).data ==
              sample_gaussian_mixture(spec, 500, r2).data);
    }
}

TEST_CASE("mixture grid density") {
    SUBCASE("centered isotropic component is rotation symmetric") {
        MixtureSpec spec;
        spec.components = {{0.0, 0.0, 1.0, 1.0}};
        spec.normalize();
        const auto grid = mixture_grid_density(spec, {-8, -8, 8, 8}, 16);
        const auto& m = grid.masses();
        for (std::size_t y = 0; y < 16; ++y)
            for (std::size_t x = 0; x < 16; ++x) {
                // 90 degree rotation (x,y) -> (y, 15-x)
                CHECK(m[y * 16 + x] == doctest::Approx(m[x * 16 + (15 - y)]).epsilon(1e-12));
            }
    }
    SUBCASE("huge sigma approaches uniform") {
        MixtureSpec spec;
        spec.components = {{0.0, 0.0, 1000.0, 1.0}};
        spec.normalize();
        const auto grid = mixture_grid_density(spec, {-4000, -4000, 4000, 4000}, 8);
        const auto [mn, mx] = std::minmax_element(grid.masses().begin(), grid.masses().end());
        CHECK(*mx / *mn < 1.01);
    }
    SUBCASE("g=2 with a component at a cell center") {
        MixtureSpec spec;
        spec.components = {{-2.0, -2.0, 1.0, 1.0}};
        spec.normalize();
        const auto grid = mixture_grid_density(spec, {-8, -8, 8, 8}, 2);
        // cell centers at (-4,-4), (4,-4), (-4,4), (4,4); the first is closest
        const auto& m = grid.masses();
        CHECK(m[0] > m[1]);
        CHECK(m[0] > m[2]);
        CHECK(m[0] > m[3]);
    }
    SUBCASE("insufficient coverage raises") {
        MixtureSpec spec;
        spec.components = {{100.0, 100.0, 1.0, 1.0}};
        spec.normalize();
        CHECK_THROWS_AS(mixture_grid_density(spec, {-8, -8, 8, 8}, 16), CoverageError);
    }
    SUBCASE("grid against itself has zero KL") {
        const MixtureSpec spec = MixtureSpec::ring();
        const auto grid = mixture_grid_density(spec, {-8, -8, 8, 8}, 32);
        CHECK(kl_divergence(grid, grid) == doctest::Approx(0.0));
    }
}

TEST_CASE("glyph generation") {
    SUBCASE("examples_per_class=1 yields one sample per class") {
        GlyphSpec spec;
        spec.background_classes = 7;
        spec.evaluation_classes = 2;
        spec.examples_per_class = 1;
        const GlyphDatasets sets = generate_glyph_dataset(spec);
        CHECK(sets.background.count() == 7);
        CHECK(sets.background.class_count() == 7);
        CHECK(sets.evaluation.count() == 2);
    }
    SUBCASE("zero jitter makes identical examples") {
        GlyphSpec spec;
        spec.background_classes = 3;
        spec.evaluation_classes = 1;
        spec.examples_per_class = 4;
        spec.jitter = 0.0;
        const GlyphDatasets sets = generate_glyph_dataset(spec);
        const std::size_t per = 16 * 16;
        for (std::size_t cls = 0; cls < 3; ++cls)
            for (std::size_t ex = 1; ex < 4; ++ex)
                for (std::size_t p = 0; p < per; ++p)
                    CHECK(sets.background.samples.data[(cls * 4 + ex) * per + p] ==
                          sets.background.samples.data[(cls * 4) * per + p]);
    }
    SUBCASE("default spec: intra-class distances below inter-class distances") {
        const GlyphDatasets sets = generate_glyph_dataset(GlyphSpec{});
        const LabeledDataset& ds = sets.background;
        REQUIRE(ds.count() == 800);
        REQUIRE(ds.class_count() == 40);
        const std::size_t per = 16 * 16;
        double intra = 0.0, inter = 0.0;
        std::size_t n_intra = 0, n_inter = 0;
        for (std::size_t i = 0; i < ds.count(); ++i)
            for (std::size_t j = i + 1; j < ds.count(); ++j) {
                double d2 = 0.0;
                for (std::size_t p = 0; p < per; ++p) {
                    const double d = ds.samples.data[i * per + p] - ds.samples.data[j * per + p];
                    d2 += d * d;
                }
                const double dist = std::sqrt(d2);
                if (ds.labels[i] == ds.labels[j]) {
                    intra += dist;
                    ++n_intra;
                } else {
                    inter += dist;
                    ++n_inter;
                }
            }
        CHECK(intra / static_cast<double>(n_intra) < inter / static_cast<double>(n_inter));
    }
    SUBCASE("splits are deterministic and content-disjoint") {
        const GlyphDatasets a = generate_glyph_dataset(GlyphSpec{});
        const GlyphDatasets b = generate_glyph_dataset(GlyphSpec{});
        CHECK(a.background.samples.data == b.background.samples.data);
        CHECK(a.evaluation.samples.data == b.evaluation.samples.data);
        CHECK(a.background.split == Split::Background);
        CHECK(a.evaluation.split == Split::Evaluation);
        // no sample occurs in both splits
        const std::size_t per = 16 * 16;
        for (std::size_t i = 0; i < a.evaluation.count(); ++i)
            for (std::size_t j = 0; j < a.background.count(); ++j) {
                bool same = true;
                for (std::size_t p = 0; p < per && same; ++p)
                    same = a.evaluation.samples.data[i * per + p] ==
                           a.background.samples.data[j * per + p];
                CHECK_FALSE(same);
            }
    }
    SUBCASE("pixels stay in range") {
        GlyphSpec spec;
        spec.background_classes = 5;
        spec.evaluation_classes = 1;
        const GlyphDatasets sets = generate_glyph_dataset(spec);
        for (double v : sets.background.samples.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("dataset round trip") {
    const fs::path dir = test_dir();
    RandomStream rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        LabeledDataset ds;
        const bool image = trial % 2 == 0;
        const std::size_t n = 1 + rng.uniform_index(30);
        if (image) {
            ds.samples = Tensor({n, 1, 8, 8});
            for (double& v : ds.samples.data) v = rng.uniform01();
        } else {
            ds.samples = Tensor({n, 2});
            for (double& v : ds.samples.data) v = 10.0 * rng.normal();
        }
        quantize_samples_f32(ds.samples);
        ds.labels.resize(n);
        for (auto& l : ds.labels) l = static_cast<std::int32_t>(rng.uniform_index(5));
        if (trial % 3 == 0) {
            ds.groups.resize(n);
            for (auto& g : ds.groups) g = static_cast<std::int32_t>(rng.uniform_index(3));
        }
        ds.split = trial % 2 ? Split::Evaluation : Split::Background;

        const std::string path = (dir / ("round_trip.pigands")).string();
        save_dataset(ds, path);
        const LabeledDataset back = load_dataset(path);
        CHECK(back.samples.shape == ds.samples.shape);
        CHECK(back.samples.data == ds.samples.data);  // bit-exact
        CHECK(back.labels == ds.labels);
        CHECK(back.groups == ds.groups);
        CHECK(back.split == ds.split);
    }
}

TEST_CASE("dataset edge cases") {
    const fs::path dir = test_dir();

    SUBCASE("empty dataset survives the round trip") {
        LabeledDataset ds;
        ds.samples = Tensor({0, 1, 4, 4});
        ds.samples.data.clear();
        const std::string path = (dir / "empty.pigands").string();
        save_dataset(ds, path);
        const LabeledDataset back = load_dataset(path);
        CHECK(back.count() == 0);
    }

    SUBCASE("bad magic is a format error") {
        const std::string path = (dir / "bad.pigands").string();
        std::ofstream(path) << "garbage data here";
        CHECK_THROWS_AS(load_dataset(path), FormatError);
    }

    SUBCASE("truncation is a format error, not a crash") {
        LabeledDataset ds;
        ds.samples = Tensor({4, 2});
        quantize_samples_f32(ds.samples);
        ds.labels = {0, 1, 2, 3};
        const std::string path = (dir / "trunc.pigands").string();
        save_dataset(ds, path);
        fs::resize_file(path, fs::file_size(path) - 7);
        try {
            load_dataset(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
        }
    }
}

TEST_CASE("pgm io") {
    const fs::path dir = test_dir();

    SUBCASE("write/read round trip") {
        GrayImage img;
        img.width = 5;
        img.height = 3;
        img.pixels = {0.0, 0.25, 0.5, 0.75, 1.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.9, 0.8, 0.7, 0.6, 0.5};
        const std::string path = (dir / "img.pgm").string();
        write_pgm(path, img);
        const GrayImage back = read_pgm(path);
        CHECK(back.width == 5);
        CHECK(back.height == 3);
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 0.5 / 255.0 + 1e-12);
    }

    SUBCASE("header comments and 16-bit rasters") {
        const std::string path = (dir / "wide.pgm").string();
        std::ofstream out(path, std::ios::binary);
        out << "P5\n# a comment\n2 1\n# another\n65535\n";
        const unsigned char raw[] = {0xFF, 0xFF, 0x00, 0x00};  // big-endian 65535, 0
        out.write(reinterpret_cast<const char*>(raw), 4);
        out.close();
        const GrayImage img = read_pgm(path);
        CHECK(img.pixels[0] == doctest::Approx(1.0));
        CHECK(img.pixels[1] == doctest::Approx(0.0));
    }

    SUBCASE("non-P5 rejected") {
        const std::string path = (dir / "ascii.pgm").string();
        std::ofstream(path) << "P2\n1 1\n255\n128\n";
        CHECK_THROWS_AS(read_pgm(path), FormatError);
    }
}

TEST_CASE("pgm ingestion") {
    const fs::path root = test_dir() / "corpus";
    fs::remove_all(root);
    fs::create_directories(root / "a");
    fs::create_directories(root / "b");

    auto write_gray = [](const fs::path& p, std::size_t size, unsigned char value) {
        std::ofstream out(p, std::ios::binary);
        out << "P5\n" << size << " " << size << "\n255\n";
        std::vector<unsigned char> raw(size * size, value);
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    };

    SUBCASE("labels follow sorted subdirectories, values normalized") {
        write_gray(root / "a" / "one.pgm", 16, 255);
        write_gray(root / "b" / "two.pgm", 16, 128);
        const LabeledDataset ds = ingest_pgm_directory(root.string(), 16);
        REQUIRE(ds.count() == 2);
        CHECK(ds.labels[0] == 0);
        CHECK(ds.labels[1] == 1);
        CHECK(ds.samples.data[0] == doctest::Approx(1.0));
        CHECK(ds.samples.data[16 * 16] == doctest::Approx(128.0 / 255.0).epsilon(1e-6));
    }

    SUBCASE("non-PGM files are skipped, resize happens") {
        write_gray(root / "a" / "ok.pgm", 8, 200);
        std::ofstream(root / "a" / "junk.txt") << "not a pgm";
        const LabeledDataset ds = ingest_pgm_directory(root.string(), 16);
        CHECK(ds.count() == 1);
        CHECK(ds.samples.dim(2) == 16);
        CHECK(ds.samples.data[0] == doctest::Approx(200.0 / 255.0).epsilon(1e-6));
    }

    SUBCASE("empty directory errors out") {
        const fs::path empty = test_dir() / "empty_corpus";
        fs::create_directories(empty);
        CHECK_THROWS_AS(ingest_pgm_directory(empty.string(), 16), ArgumentError);
    }
}

TEST_CASE("mosaic layout") {
    Tensor imgs({3, 1, 4, 4});
    for (double& v : imgs.data) v = 1.0;
    const GrayImage m = make_mosaic(imgs, 2);
    CHECK(m.width == 2 * 4 + 3 * 2);
    CHECK(m.height == 2 * 4 + 3 * 2);
    CHECK(m.pixels[0] == doctest::Approx(0.5));       // separator
    CHECK(m.pixels[2 * m.width + 2] == doctest::Approx(1.0));  // first tile
}
