#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "config.hpp"
#include "nlrtfa/io.hpp"
#include "nlrtfa/metrics.hpp"
#include "nlrtfa/sensing.hpp"
#include "nlrtfa/solver.hpp"

namespace fs = std::filesystem;
using namespace nlrtfa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

std::string format_psnr(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw IoError("file not found: " + path);
}

uint64_t cell_seed(uint64_t master, size_t image_idx, size_t csr_idx, size_t sigma_idx,
                   uint64_t stream) {
    uint64_t s = mix_seed(master ^ 0x6c62272e07bb0142ull);
    s = mix_seed(s + image_idx);
    s = mix_seed(s + csr_idx * 1000003ull);
    s = mix_seed(s + sigma_idx * 998244353ull);
    return mix_seed(s + stream);
}

SolverConfig solver_config_for(const cli::ConfigFile& cfg, double csr, double sigma) {
    SolverConfig sc;
    cli::apply_solver_keys(cfg.resolved(csr), sc);
    sc.noise_sigma = sigma;
    return sc;
}

struct MeasureArgs {
    std::string image;
    std::string out_dir;
    bool fourier = false;
    bool gaussian = false;
    double csr = 0.1;
    double sigma = 0.0;
    uint64_t seed = 0;
    uint64_t noise_seed = 0;
    int crop = 0;
};

int run_measure(const MeasureArgs& a) {
    require_file(a.image);
    if (a.fourier == a.gaussian)
        throw IoError("choose exactly one of --fourier / --gaussian");
    fs::create_directories(a.out_dir);

    Image img = load_image(a.image);
    if (a.crop > 0) img = center_crop(img, a.crop, a.crop);

    const fs::path out(a.out_dir);
    double csr_actual = 0.0;
    Measurement y;
    if (a.fourier) {
        RadialMask mask = make_radial_mask(img.height, img.width, a.csr, a.seed);
        csr_actual = mask.csr_actual;
        save_mask(mask, (out / "mask.msk").string());
        const SensingOperator op = SensingOperator::partial_fourier(std::move(mask));
        y = op.measure_noisy(img, a.sigma, a.noise_seed);
        save_measurement(y, (out / "meas.mea").string());
        std::cout << "M=" << op.output_dim() << " N=" << img.size()
                  << " csr_actual=" << format_fixed(csr_actual, 6) << "\n";
    } else {
        const int m = std::max(1, static_cast<int>(std::lround(a.csr * static_cast<double>(img.size()))));
        const SensingOperator op = SensingOperator::dense_gaussian(m, img.height, img.width, a.seed);
        csr_actual = static_cast<double>(m) / static_cast<double>(img.size());
        save_gaussian_operator(op, (out / "phi.phi").string());
        y = op.measure_noisy(img, a.sigma, a.noise_seed);
        save_measurement(y, (out / "meas.mea").string());
        std::cout << "M=" << m << " N=" << img.size()
                  << " csr_actual=" << format_fixed(csr_actual, 6) << "\n";
    }
    return kExitOk;
}

struct ReconstructArgs {
    std::string meas;
    std::string mask;
    std::string phi;
    std::string out_dir;
    std::string truth;
    std::string config;
    std::string dims;
    double csr_hint = -1.0;  // selects the [csr ...] config section
    double sigma = 0.0;
    uint64_t seed = 0;
};

int run_reconstruct(const ReconstructArgs& a) {
    require_file(a.meas);
    if (a.mask.empty() == a.phi.empty())
        throw IoError("choose exactly one of --mask / --phi");
    fs::create_directories(a.out_dir);

    int dim_h = 0, dim_w = 0;
    if (!a.dims.empty()) {
        if (std::sscanf(a.dims.c_str(), "%dx%d", &dim_h, &dim_w) != 2)
            throw IoError("--dims must look like 128x128");
    }

    SensingOperator op = [&] {
        if (!a.mask.empty()) {
            require_file(a.mask);
            return SensingOperator::partial_fourier(load_mask(a.mask));
        }
        require_file(a.phi);
        return load_gaussian_operator(a.phi, dim_h, dim_w);
    }();

    const Measurement y = load_measurement(a.meas);

    cli::ConfigFile cfgfile;
    if (!a.config.empty()) cfgfile = cli::ConfigFile::parse_file(a.config);
    const double csr = a.csr_hint >= 0.0
                           ? a.csr_hint
                           : static_cast<double>(op.output_dim()) /
                                 (static_cast<double>(op.input_height()) * op.input_width());
    SolverConfig cfg = solver_config_for(cfgfile, csr, a.sigma);

    Image truth;
    const bool have_truth = !a.truth.empty();
    if (have_truth) {
        require_file(a.truth);
        truth = load_image(a.truth);
        if (truth.height != op.input_height() || truth.width != op.input_width())
            truth = center_crop(truth, op.input_height(), op.input_width());
    }

    auto [recon, report] = reconstruct(op, y, cfg, a.seed, have_truth ? &truth : nullptr);

    const fs::path out(a.out_dir);
    save_image_pgm(recon, (out / "recon.pgm").string());
    report.write_csv((out / "report.csv").string(), have_truth);
    if (have_truth)
        std::cout << "final_psnr=" << format_psnr(psnr(truth, recon)) << "\n";
    return kExitOk;
}

struct EvaluateArgs {
    std::string a;
    std::string b;
    std::string csv;
    std::string image = "";
    std::string method = "ours";
    double csr = 0.0;
    double sigma = 0.0;
};

int run_evaluate(const EvaluateArgs& args) {
    require_file(args.a);
    require_file(args.b);
    const Image a = load_image(args.a);
    const Image b = load_image(args.b);
    const double p = psnr(a, b);
    const double s = ssim(a, b);
    std::cout << format_psnr(p) << "," << format_fixed(s, 6) << "\n";
    if (!args.csv.empty()) {
        const bool fresh = !fs::exists(args.csv);
        std::ofstream f(args.csv, std::ios::app);
        if (!f) throw IoError("cannot open for writing: " + args.csv);
        if (fresh) f << "image,method,csr,sigma,psnr_db,ssim\n";
        f << args.image << "," << args.method << "," << format_fixed(args.csr, 4) << ","
          << format_fixed(args.sigma, 2) << "," << format_psnr(p) << ","
          << format_fixed(s, 6) << "\n";
    }
    return kExitOk;
}

int run_sweep(const std::string& spec_path) {
    require_file(spec_path);
    const cli::ExperimentSpec spec = cli::ExperimentSpec::parse_file(spec_path);
    for (const auto& img : spec.images) require_file(img);
    fs::create_directories(spec.out_dir);

    struct ResultRow {
        std::string image;
        double csr, sigma, psnr_db, ssim_v;
        bool ok;
        std::string error;
    };
    std::vector<ResultRow> rows;

    for (size_t ii = 0; ii < spec.images.size(); ++ii) {
        Image truth = load_image(spec.images[ii]);
        if (spec.crop_size > 0) truth = center_crop(truth, spec.crop_size, spec.crop_size);
        const std::string stem = fs::path(spec.images[ii]).stem().string();

        for (size_t ci = 0; ci < spec.csrs.size(); ++ci) {
            const double csr = spec.csrs[ci];
            for (size_t si = 0; si < spec.sigmas.size(); ++si) {
                const double sigma = spec.sigmas[si];
                ResultRow row{stem, csr, sigma, 0.0, 0.0, false, ""};
                std::ostringstream cell_name;
                cell_name << stem << "_csr" << format_fixed(csr, 4) << "_sigma"
                          << format_fixed(sigma, 2);
                const fs::path cell_dir = fs::path(spec.out_dir) / cell_name.str();
                try {
                    fs::create_directories(cell_dir);
                    const uint64_t op_seed = cell_seed(spec.master_seed, ii, ci, si, 1);
                    const uint64_t noise_seed = cell_seed(spec.master_seed, ii, ci, si, 2);
                    const uint64_t solver_seed = cell_seed(spec.master_seed, ii, ci, si, 3);

                    SensingOperator op = [&] {
                        if (spec.sensing == "fourier") {
                            RadialMask mask =
                                make_radial_mask(truth.height, truth.width, csr, op_seed);
                            save_mask(mask, (cell_dir / "mask.msk").string());
                            return SensingOperator::partial_fourier(std::move(mask));
                        }
                        const int m = std::max(
                            1, static_cast<int>(std::lround(csr * static_cast<double>(truth.size()))));
                        SensingOperator g = SensingOperator::dense_gaussian(
                            m, truth.height, truth.width, op_seed);
                        save_gaussian_operator(g, (cell_dir / "phi.phi").string());
                        return g;
                    }();

                    const Measurement y = op.measure_noisy(truth, sigma, noise_seed);
                    save_measurement(y, (cell_dir / "meas.mea").string());

                    SolverConfig cfg = solver_config_for(spec.config, csr, sigma);
                    auto [recon, report] = reconstruct(op, y, cfg, solver_seed, &truth);
                    save_image_pgm(recon, (cell_dir / "recon.pgm").string());
                    report.write_csv((cell_dir / "report.csv").string(), true);

                    row.psnr_db = psnr(truth, recon);
                    row.ssim_v = ssim(truth, recon);
                    row.ok = true;
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
    }

    const fs::path results = fs::path(spec.out_dir) / "results.csv";
    std::ofstream f(results, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + results.string());
    f << "image,method,csr,sigma,psnr_db,ssim\n";
    for (const auto& r : rows) {
        if (!r.ok) continue;
        f << r.image << ",ours," << format_fixed(r.csr, 4) << "," << format_fixed(r.sigma, 2)
          << "," << format_psnr(r.psnr_db) << "," << format_fixed(r.ssim_v, 6) << "\n";
    }
    f.close();

    int failures = 0;
    for (const auto& r : rows) {
        if (r.ok) continue;
        ++failures;
        std::cerr << "cell failed: " << r.image << " csr=" << r.csr << " sigma=" << r.sigma
                  << ": " << r.error << "\n";
    }
    std::cout << "sweep: " << rows.size() - failures << "/" << rows.size()
              << " cells ok, results in " << results.string() << "\n";
    return failures == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressive-sensing image reconstruction via nonlocal low-rank tensor factor analysis"};
    app.require_subcommand(1);

    MeasureArgs ma;
    auto* measure = app.add_subcommand("measure", "Simulate compressive measurements of an image");
    measure->add_option("--image", ma.image, "Input image (binary PGM/PPM)")->required();
    measure->add_flag("--fourier", ma.fourier, "Partial-Fourier sensing with a pseudo-radial mask");
    measure->add_flag("--gaussian", ma.gaussian, "Dense Gaussian sensing matrix");
    measure->add_option("--csr", ma.csr, "Target sampling ratio in (0, 1]")->required();
    measure->add_option("--sigma", ma.sigma, "Measurement noise std deviation");
    measure->add_option("--seed", ma.seed, "Operator seed");
    measure->add_option("--noise-seed", ma.noise_seed, "Noise seed");
    measure->add_option("--crop", ma.crop, "Center-crop the input to this size first");
    measure->add_option("--out", ma.out_dir, "Output directory")->required();

    ReconstructArgs ra;
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct an image from measurements");
    rec->add_option("--meas", ra.meas, "Measurement file")->required();
    rec->add_option("--mask", ra.mask, "Radial mask file (Fourier sensing)");
    rec->add_option("--phi", ra.phi, "Gaussian operator file");
    rec->add_option("--out", ra.out_dir, "Output directory")->required();
    rec->add_option("--truth", ra.truth, "Ground-truth image for per-iteration PSNR");
    rec->add_option("--config", ra.config, "Solver config file");
    rec->add_option("--csr", ra.csr_hint, "CSr used to select a [csr ...] config section");
    rec->add_option("--sigma", ra.sigma, "Noise level the measurements were taken at");
    rec->add_option("--seed", ra.seed, "Solver seed");
    rec->add_option("--dims", ra.dims, "Image dims HxW for non-square Gaussian operators");

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "Print psnr_db,ssim for an image pair");
    ev->add_option("--a", ea.a, "Reference image")->required();
    ev->add_option("--b", ea.b, "Test image")->required();
    ev->add_option("--csv", ea.csv, "Append a row to this results table");
    ev->add_option("--image", ea.image, "Image name for the CSV row");
    ev->add_option("--method", ea.method, "Method name for the CSV row");
    ev->add_option("--csr", ea.csr, "CSr for the CSV row");
    ev->add_option("--sigma", ea.sigma, "Sigma for the CSV row");

    std::string spec_path;
    auto* sw = app.add_subcommand("sweep", "Run a measure/reconstruct/evaluate grid");
    sw->add_option("--spec", spec_path, "Experiment spec file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (measure->parsed()) return run_measure(ma);
        if (rec->parsed()) return run_reconstruct(ra);
        if (ev->parsed()) return run_evaluate(ea);
        if (sw->parsed()) return run_sweep(spec_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
