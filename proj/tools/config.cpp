#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nlrtfa/errors.hpp"

namespace nlrtfa::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile cfg;
    std::map<std::string, std::string>* target = &cfg.base;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw IoError("config: unterminated section: " + line);
            std::istringstream hdr(line.substr(1, line.size() - 2));
            std::string word;
            double value = 0.0;
            hdr >> word >> value;
            if (word != "csr" || !hdr) throw IoError("config: expected [csr <value>]: " + line);
            cfg.per_csr.emplace_back(value, std::map<std::string, std::string>{});
            target = &cfg.per_csr.back().second;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("config: expected key = value: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "image") {
            // repeated keys accumulate for image lists
            auto& existing = (*target)[key];
            existing = existing.empty() ? value : existing + "\n" + value;
        } else {
            (*target)[key] = value;
        }
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_text(buf.str());
}

std::map<std::string, std::string> ConfigFile::resolved(double csr) const {
    std::map<std::string, std::string> out = base;
    for (const auto& [section_csr, kv] : per_csr) {
        if (std::abs(section_csr - csr) <= 1e-9) {
            for (const auto& [k, v] : kv) out[k] = v;
        }
    }
    return out;
}

void apply_solver_keys(const std::map<std::string, std::string>& kv, SolverConfig& cfg) {
    auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("eta")) cfg.eta = std::stod(*v);
    if (const auto* v = get("beta")) cfg.beta = std::stod(*v);
    if (const auto* v = get("outer_iters")) cfg.outer_iters = std::stoi(*v);
    if (const auto* v = get("inner_iters")) cfg.inner_iters = std::stoi(*v);
    if (const auto* v = get("rank_ell")) cfg.rank_ell = std::stoi(*v);
    if (const auto* v = get("patch")) {
        cfg.grouping.patch_rows = cfg.grouping.patch_cols = std::stoi(*v);
    }
    if (const auto* v = get("patch_rows")) cfg.grouping.patch_rows = std::stoi(*v);
    if (const auto* v = get("patch_cols")) cfg.grouping.patch_cols = std::stoi(*v);
    if (const auto* v = get("group_size")) cfg.grouping.group_size = std::stoi(*v);
    if (const auto* v = get("stride")) cfg.grouping.stride = std::stoi(*v);
    if (const auto* v = get("search_window")) cfg.grouping.search_window = std::stoi(*v);
    if (const auto* v = get("early_exit")) cfg.early_exit_tol = std::stod(*v);
}

ExperimentSpec ExperimentSpec::parse_file(const std::string& path) {
    ExperimentSpec spec;
    spec.config = ConfigFile::parse_file(path);
    const auto& kv = spec.config.base;
    auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (const auto* v = get("image")) {
        std::istringstream in(*v);
        std::string line;
        while (std::getline(in, line))
            if (!trim(line).empty()) spec.images.push_back(trim(line));
    }
    if (spec.images.empty()) throw IoError("sweep spec: at least one image required");
    if (const auto* v = get("sensing")) spec.sensing = *v;
    if (spec.sensing != "fourier" && spec.sensing != "gaussian")
        throw IoError("sweep spec: sensing must be fourier or gaussian");
    if (const auto* v = get("csr")) spec.csrs = parse_double_list(*v);
    if (spec.csrs.empty()) throw IoError("sweep spec: csr list required");
    if (const auto* v = get("sigma")) spec.sigmas = parse_double_list(*v);
    if (const auto* v = get("master_seed")) spec.master_seed = std::stoull(*v);
    if (const auto* v = get("out")) spec.out_dir = *v;
    if (spec.out_dir.empty()) throw IoError("sweep spec: out directory required");
    if (const auto* v = get("size")) spec.crop_size = std::stoi(*v);
    return spec;
}

}  // namespace nlrtfa::cli
