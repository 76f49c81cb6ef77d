#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "nlrtfa/sensing.hpp"
#include "support/synthetic.hpp"

using namespace nlrtfa;
using namespace nlrtfa::testsupport;

namespace {

// independent line rasterizer for cross-checking mask construction
std::set<std::pair<int, int>> rasterize_oracle(int h, int w, int lines) {
    std::set<std::pair<int, int>> kept;
    kept.insert({0, 0});
    const double rmax = std::ceil(std::sqrt(h * h / 4.0 + w * w / 4.0));
    for (int j = 0; j < lines; ++j) {
        const double th = j * M_PI / lines;
        for (int t = 0; t <= static_cast<int>(rmax); ++t) {
            const double fu = t * std::sin(th), fv = t * std::cos(th);
            const int pu = static_cast<int>(std::floor(fu + 0.5));
            const int pv = static_cast<int>(std::floor(fv + 0.5));
            if (pu < -(h / 2) || pu > (h - 1) / 2) continue;
            if (pv < -(w / 2) || pv > (w - 1) / 2) continue;
            kept.insert({((pu % h) + h) % h, ((pv % w) + w) % w});
        }
    }
    std::set<std::pair<int, int>> sym = kept;
    for (const auto& [u, v] : kept) sym.insert({(h - u) % h, (w - v) % w});
    return sym;
}

Eigen::MatrixXcd dense_dft_matrix(int h, int w) {
    const int n = h * w;
    Eigen::MatrixXcd f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v)
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    const double ph = -2.0 * M_PI * (static_cast<double>(u) * r / h +
                                                     static_cast<double>(v) * c / w);
                    f(u * w + v, r * w + c) = scale * std::complex<double>(std::cos(ph), std::sin(ph));
                }
    return f;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("full-ratio mask keeps everything") {
    const RadialMask mask = make_radial_mask(16, 16, 1.0);
    CHECK(mask.csr_actual == 1.0);
    CHECK(mask.kept_count() == 256);
}

TEST_CASE("mask is conjugate-symmetric and keeps DC") {
    for (double csr : {0.05, 0.1, 0.3}) {
        const RadialMask mask = make_radial_mask(32, 24, csr);
        CHECK(mask.kept(0, 0));
        CHECK(mask.csr_actual >= csr);
        for (int u = 0; u < mask.height; ++u)
            for (int v = 0; v < mask.width; ++v)
                if (mask.kept(u, v))
                    CHECK(mask.kept((mask.height - u) % mask.height,
                                    (mask.width - v) % mask.width));
    }
}

TEST_CASE("mask matches the independent rasterization oracle") {
    const RadialMask mask = make_radial_mask(8, 8, 0.02);
    const auto oracle = rasterize_oracle(8, 8, mask.line_count);
    CHECK(mask.kept_count() == oracle.size());
    for (const auto& [u, v] : oracle) CHECK(mask.kept(u, v));

    const RadialMask m2 = make_radial_mask(24, 24, 0.15);
    const auto o2 = rasterize_oracle(24, 24, m2.line_count);
    CHECK(m2.kept_count() == o2.size());
}

TEST_CASE("invalid ratios throw") {
    CHECK_THROWS_AS(make_radial_mask(8, 8, 0.0), InvalidRatio);
    CHECK_THROWS_AS(make_radial_mask(8, 8, 1.5), InvalidRatio);
}

TEST_CASE("fourier forward of zero and constant images") {
    const RadialMask mask = make_radial_mask(8, 8, 1.0);
    const SensingOperator op = SensingOperator::partial_fourier(mask);

    const Measurement y0 = op.forward(Image(8, 8, 0.0));
    for (const auto& z : y0.values) CHECK(std::abs(z) == 0.0);

    const Measurement yc = op.forward(Image(8, 8, 3.0));
    // kept bins are row-major; bin 0 is DC
    CHECK(yc.values[0].real() == doctest::Approx(3.0 * 8.0).epsilon(1e-12));
    for (size_t i = 1; i < yc.values.size(); ++i)
        CHECK(std::abs(yc.values[i]) < 1e-10);
}

TEST_CASE("fourier forward matches a dense DFT oracle") {
    const RadialMask mask = make_radial_mask(8, 6, 0.3);
    const SensingOperator op = SensingOperator::partial_fourier(mask);
    const Image x = random_image(8, 6, 123);
    const Measurement y = op.forward(x);

    const Eigen::MatrixXcd f = dense_dft_matrix(8, 6);
    Eigen::VectorXcd xv(x.size());
    for (size_t i = 0; i < x.size(); ++i) xv(i) = x.pixels[i];
    const Eigen::VectorXcd fx = f * xv;
    const auto& bins = op.kept_bins();
    for (size_t i = 0; i < bins.size(); ++i)
        CHECK(std::abs(y.values[i] - fx(bins[i])) < 1e-10);
}

TEST_CASE("full mask adjoint inverts forward") {
    const SensingOperator op = SensingOperator::partial_fourier(make_radial_mask(12, 12, 1.0));
    const Image x = random_image(12, 12, 9);
    const Image back = op.adjoint(op.forward(x));
    for (size_t i = 0; i < x.size(); ++i)
        CHECK(back.pixels[i] == doctest::Approx(x.pixels[i]).epsilon(1e-10));
}

TEST_CASE("forward/adjoint inner-product identity") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SUBCASE("partial fourier") {
        const SensingOperator op =
            SensingOperator::partial_fourier(make_radial_mask(16, 16, 0.25));
        const Image x = random_image(16, 16, 77);
        Measurement y;
        y.complex_valued = true;
        for (int i = 0; i < op.output_dim(); ++i)
            y.values.emplace_back(gauss(rng), gauss(rng));
        const Measurement fx = op.forward(x);
        double lhs = 0.0;  // Re <forward(x), y>
        for (size_t i = 0; i < y.values.size(); ++i)
            lhs += (fx.values[i] * std::conj(y.values[i])).real();
        const Image aty = op.adjoint(y);
        double rhs = 0.0;
        for (size_t i = 0; i < x.size(); ++i) rhs += x.pixels[i] * aty.pixels[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }

    SUBCASE("dense gaussian") {
        const SensingOperator op = SensingOperator::dense_gaussian(13, 8, 8, 3);
        const Image x = random_image(8, 8, 4);
        Measurement y;
        y.complex_valued = false;
        for (int i = 0; i < 13; ++i) y.values.emplace_back(gauss(rng), 0.0);
        const Measurement fx = op.forward(x);
        double lhs = 0.0;
        for (size_t i = 0; i < y.values.size(); ++i)
            lhs += fx.values[i].real() * y.values[i].real();
        const Image aty = op.adjoint(y);
        double rhs = 0.0;
        for (size_t i = 0; i < x.size(); ++i) rhs += x.pixels[i] * aty.pixels[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("gaussian forward/adjoint match explicit dense products") {
    const SensingOperator op = SensingOperator::dense_gaussian(13, 8, 8, 21);
    const Eigen::MatrixXd& phi = op.matrix();
    CHECK(phi.rows() == 13);
    CHECK(phi.cols() == 64);

    const Image x = random_image(8, 8, 2);
    Eigen::Map<const Eigen::VectorXd> xv(x.pixels.data(), 64);
    const Eigen::VectorXd yv = phi * xv;
    const Measurement y = op.forward(x);
    for (int i = 0; i < 13; ++i)
        CHECK(y.values[i].real() == doctest::Approx(yv(i)).epsilon(1e-12));

    const Image back = op.adjoint(y);
    const Eigen::VectorXd bv = phi.transpose() * yv;
    for (int i = 0; i < 64; ++i)
        CHECK(back.pixels[i] == doctest::Approx(bv(i)).epsilon(1e-12));
}

TEST_CASE("noisy measurements") {
    const SensingOperator op = SensingOperator::dense_gaussian(10000, 10, 10, 11);
    const Image x = random_image(10, 10, 6);

    SUBCASE("sigma zero equals forward") {
        const Measurement a = op.forward(x);
        const Measurement b = op.measure_noisy(x, 0.0, 42);
        for (size_t i = 0; i < a.size(); ++i) CHECK(a.values[i] == b.values[i]);
    }
    SUBCASE("empirical std within 5% of target") {
        const Measurement clean = op.forward(x);
        const Measurement noisy = op.measure_noisy(x, 30.0, 42);
        double acc = 0.0;
        for (size_t i = 0; i < clean.size(); ++i)
            acc += std::norm(noisy.values[i] - clean.values[i]);
        const double std_hat = std::sqrt(acc / static_cast<double>(clean.size()));
        CHECK(std_hat == doctest::Approx(30.0).epsilon(0.05));
    }
    SUBCASE("same seed, same noise") {
        const Measurement a = op.measure_noisy(x, 5.0, 7);
        const Measurement b = op.measure_noisy(x, 5.0, 7);
        for (size_t i = 0; i < a.size(); ++i) CHECK(a.values[i] == b.values[i]);
    }
}

TEST_CASE("complex noise splits variance across components") {
    const SensingOperator op =
        SensingOperator::partial_fourier(make_radial_mask(64, 64, 0.9));
    const Image x(64, 64, 0.0);
    const Measurement noisy = op.measure_noisy(x, 30.0, 3);
    double re = 0.0, im = 0.0;
    for (const auto& z : noisy.values) {
        re += z.real() * z.real();
        im += z.imag() * z.imag();
    }
    const double n = static_cast<double>(noisy.size());
    CHECK(std::sqrt(re / n) == doctest::Approx(30.0 / std::sqrt(2.0)).epsilon(0.06));
    CHECK(std::sqrt(im / n) == doctest::Approx(30.0 / std::sqrt(2.0)).epsilon(0.06));
    CHECK(std::sqrt((re + im) / n) == doctest::Approx(30.0).epsilon(0.05));
}

TEST_CASE("file round-trips") {
    SUBCASE("mask") {
        const RadialMask mask = make_radial_mask(20, 14, 0.2);
        const auto path = temp_path("nlrtfa_test.msk");
        save_mask(mask, path);
        const RadialMask loaded = load_mask(path);
        CHECK(loaded.height == mask.height);
        CHECK(loaded.width == mask.width);
        CHECK(loaded.keep == mask.keep);
        CHECK(loaded.csr_actual == doctest::Approx(mask.csr_actual));
        std::remove(path.c_str());
    }
    SUBCASE("complex measurement") {
        const SensingOperator op =
            SensingOperator::partial_fourier(make_radial_mask(8, 8, 0.3));
        const Measurement y = op.measure_noisy(random_image(8, 8, 1), 2.0, 9);
        const auto path = temp_path("nlrtfa_test.mea");
        save_measurement(y, path);
        const Measurement loaded = load_measurement(path);
        CHECK(loaded.complex_valued == y.complex_valued);
        REQUIRE(loaded.size() == y.size());
        for (size_t i = 0; i < y.size(); ++i) CHECK(loaded.values[i] == y.values[i]);
        std::remove(path.c_str());
    }
    SUBCASE("gaussian operator") {
        const SensingOperator op = SensingOperator::dense_gaussian(5, 4, 4, 77);
        const auto path = temp_path("nlrtfa_test.phi");
        save_gaussian_operator(op, path);
        const SensingOperator loaded = load_gaussian_operator(path);
        CHECK(loaded.seed() == 77);
        CHECK(loaded.input_height() == 4);
        CHECK((loaded.matrix() - op.matrix()).norm() == 0.0);
        std::remove(path.c_str());
    }
    SUBCASE("bad magic is rejected") {
        const auto path = temp_path("nlrtfa_test.bad");
        {
            std::ofstream f(path, std::ios::binary);
            f << "NOT-A-REAL-FILE";
        }
        CHECK_THROWS_AS(load_mask(path), IoError);
        std::remove(path.c_str());
    }
}

TEST_CASE("dimension mismatches throw") {
    const SensingOperator op = SensingOperator::dense_gaussian(5, 4, 4, 1);
    CHECK_THROWS_AS(op.forward(Image(5, 5, 0.0)), DimensionMismatch);
    Measurement y;
    y.values.resize(3);
    CHECK_THROWS_AS(op.adjoint(y), DimensionMismatch);
}
