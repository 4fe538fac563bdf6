#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "sfc/errors.hpp"
#include "sfc/image.hpp"

using namespace sfc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "sfcut_image_tests";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

void write_file(const fs::path& p, const std::string& contents) {
    std::ofstream out(p, std::ios::binary);
    out << contents;
}

Image random_image(int w, int h, int ch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Image img(w, h, ch);
    for (double& v : img.data) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return img;
}

} // namespace

TEST_CASE("plain PGM load scales by maxval") {
    const fs::path p = temp_dir() / "p2.pgm";
    write_file(p, "P2\n# comment\n2 2\n255\n0 255\n255 0\n");
    Image img = load_image(p.string());
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.channels == 1);
    CHECK(img.data[0] == 0.0);
    CHECK(img.data[1] == 1.0);
    CHECK(img.data[2] == 1.0);
    CHECK(img.data[3] == 0.0);
}

TEST_CASE("plain PPM 1x1 pixel divides by 255") {
    const fs::path p = temp_dir() / "p3.ppm";
    write_file(p, "P3\n1 1\n255\n51 102 204\n");
    Image img = load_image(p.string());
    REQUIRE(img.channels == 3);
    CHECK(img.data[0] == doctest::Approx(51.0 / 255.0).epsilon(1e-15));
    CHECK(img.data[1] == doctest::Approx(102.0 / 255.0).epsilon(1e-15));
    CHECK(img.data[2] == doctest::Approx(204.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("non-255 maxval is scaled") {
    const fs::path p = temp_dir() / "p2max100.pgm";
    write_file(p, "P2\n2 1\n100\n50 100\n");
    Image img = load_image(p.string());
    CHECK(img.data[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(img.data[1] == 1.0);
}

TEST_CASE("16-bit binary PGM is read big-endian") {
    const fs::path p = temp_dir() / "p5_16.pgm";
    std::string body = "P5\n1 1\n65535\n";
    body.push_back(static_cast<char>(0x80));
    body.push_back(static_cast<char>(0x00));
    write_file(p, body);
    Image img = load_image(p.string());
    CHECK(img.data[0] == doctest::Approx(32768.0 / 65535.0).epsilon(1e-15));
}

TEST_CASE("save quantizes round(v*255)") {
    Image img(2, 1, 1);
    img.data = {0.0, 1.0};
    const fs::path p = temp_dir() / "q.pgm";
    save_image(img, p.string());
    std::ifstream in(p, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // P5 header then the two raster bytes
    CHECK(static_cast<unsigned char>(all[all.size() - 2]) == 0);
    CHECK(static_cast<unsigned char>(all[all.size() - 1]) == 255);

    Image halves(1, 1, 1);
    halves.data = {0.5};
    save_image(halves, p.string());
    Image back = load_image(p.string());
    CHECK(back.data[0] == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("load(save(x)) is identity on 8-bit data, across formats") {
    for (int ch : {1, 3}) {
        Image img = random_image(9, 7, ch, 42 + static_cast<std::uint64_t>(ch));
        // snap to the 8-bit lattice first so the round trip must be exact
        for (double& v : img.data) v = std::round(v * 255.0) / 255.0;
        const char* ext = ch == 1 ? "pgm" : "ppm";
        for (const std::string fmt : {std::string(ext), std::string("png")}) {
            const fs::path p = temp_dir() / ("rt." + fmt);
            save_image(img, p.string());
            Image back = load_image(p.string());
            REQUIRE(back.data.size() == img.data.size());
            for (size_t i = 0; i < img.data.size(); ++i)
                CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("PNG survives an arbitrary quantization round trip") {
    Image img = random_image(5, 4, 3, 7);
    const fs::path p = temp_dir() / "arb.png";
    save_image(img, p.string());
    Image back = load_image(p.string());
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double q = std::round(img.data[i] * 255.0) / 255.0;
        CHECK(back.data[i] == doctest::Approx(q).epsilon(1e-15));
    }
}

TEST_CASE("to_grayscale") {
    Image img(3, 1, 3);
    // (1,1,1) -> 1; (1,0,0) -> 0.299; (0.2,0.6,0.4)
    img.data = {1, 1, 1, 1, 0, 0, 0.2, 0.6, 0.4};
    Image gray = to_grayscale(img);
    REQUIRE(gray.channels == 1);
    CHECK(gray.data[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gray.data[1] == doctest::Approx(0.299).epsilon(1e-15));
    // within [min, max] of the channels
    CHECK(gray.data[2] >= 0.2);
    CHECK(gray.data[2] <= 0.6);

    Image same = to_grayscale(gray);
    CHECK(same.data == gray.data);
}

TEST_CASE("resize_nearest") {
    Image img(2, 2, 1);
    img.data = {0.1, 0.2, 0.3, 0.4};
    Image same = resize_nearest(img, 2, 2);
    CHECK(same.data == img.data);

    Image one = resize_nearest(img, 1, 1);
    CHECK(one.data[0] == 0.1); // floor(0*2/1) = 0

    Image single(1, 1, 1);
    single.data = {0.7};
    Image up = resize_nearest(single, 2, 2);
    for (double v : up.data) CHECK(v == 0.7);

    CHECK_THROWS_AS(resize_nearest(img, 0, 2), std::invalid_argument);

    // value set bounds preserved
    Image big = resize_nearest(random_image(6, 5, 1, 3), 13, 4);
    for (double v : big.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("malformed input reports position") {
    const fs::path missing = temp_dir() / "nope.pgm";
    CHECK_THROWS_AS(load_image(missing.string()), IoError);

    const fs::path bad = temp_dir() / "bad.pgm";
    write_file(bad, "P5\n2 x\n255\n");
    try {
        load_image(bad.string());
        FAIL("expected IoError");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("height") != std::string::npos);
    }

    const fs::path trunc = temp_dir() / "trunc.pgm";
    write_file(trunc, "P5\n2 2\n255\nab"); // 2 of 4 raster bytes
    try {
        load_image(trunc.string());
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }

    const fs::path notpng = temp_dir() / "fake.png";
    write_file(notpng, "this is not a png");
    CHECK_THROWS_AS(load_image(notpng.string()), IoError);
}

TEST_CASE("label palette is distinct with black id 0") {
    const auto pal = label_palette();
    CHECK(pal[0][0] == 0);
    CHECK(pal[0][1] == 0);
    CHECK(pal[0][2] == 0);
    std::set<std::array<std::uint8_t, 3>> seen(pal.begin(), pal.end());
    CHECK(seen.size() == 256);
}

TEST_CASE("label map round trips through PNG palette and plain PGM") {
    LabelMap labels(4, 3);
    labels.labels = {0, 0, 1, 1, 0, 2, 2, 1, 0, 0, 2, 1};
    CHECK(labels.num_segments() == 3);

    const fs::path ppng = temp_dir() / "labels.png";
    save_labelmap_png(labels, ppng.string());
    Image rgb = load_image(ppng.string()); // palette expands to RGB
    REQUIRE(rgb.channels == 3);
    const auto pal = label_palette();
    for (int i = 0; i < 12; ++i) {
        const auto& c = pal[static_cast<size_t>(labels.labels[static_cast<size_t>(i)])];
        for (int ch = 0; ch < 3; ++ch)
            CHECK(rgb.data[static_cast<size_t>(i) * 3 + ch] ==
                  doctest::Approx(c[static_cast<size_t>(ch)] / 255.0).epsilon(1e-15));
    }

    const fs::path ppgm = temp_dir() / "labels.pgm";
    save_labelmap_pgm(labels, ppgm.string());
    Image ids = load_image(ppgm.string());
    for (int i = 0; i < 12; ++i)
        CHECK(ids.data[static_cast<size_t>(i)] ==
              doctest::Approx(labels.labels[static_cast<size_t>(i)] / 255.0).epsilon(1e-15));
}
