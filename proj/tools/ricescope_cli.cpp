// ricescope: calibrate densities, analyze images, generate synthetic scenes,
// evaluate reports and compare density modes.
//
// Exit codes: 0 success, 1 more unresolved detections than --max-unresolved,
// 2 configuration or I/O error, 3 input-schema error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ricescope/config.hpp"
#include "ricescope/evaluate.hpp"
#include "ricescope/overlay.hpp"
#include "ricescope/pipeline.hpp"
#include "ricescope/png_io.hpp"
#include "ricescope/report.hpp"
#include "ricescope/synthgen.hpp"
#include "ricescope/weigh.hpp"

namespace fs = std::filesystem;
using namespace ricescope;

namespace {

constexpr int kExitUnresolved = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSchema = 3;

int exit_code_for(ErrorCode c) {
    switch (c) {
    case ErrorCode::PARSE_ERROR:
    case ErrorCode::BRANCH_MISMATCH:
    case ErrorCode::OUT_OF_BOUNDS_BOX:
    case ErrorCode::REJECTED_COMBINATION:
    case ErrorCode::DIMENSION_MISMATCH: return kExitSchema;
    default: return kExitConfig;
    }
}

using CsvRow = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

// Plain comma-separated file with a header row; no quoting.
std::vector<CsvRow> read_csv(const std::string& path, std::initializer_list<const char*> required) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IO_ERROR, "cannot open " + path);
    std::string line;
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        const auto cells = split(line, ',');
        if (header.empty()) {
            header = cells;
            for (const char* r : required)
                if (std::find(header.begin(), header.end(), r) == header.end())
                    fail(ErrorCode::PARSE_ERROR, path + ": missing column '" + r + "'");
            continue;
        }
        if (cells.size() != header.size())
            fail(ErrorCode::PARSE_ERROR, path + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                                             std::to_string(header.size()));
        CsvRow row;
        for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

double to_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(ErrorCode::PARSE_ERROR, what + ": '" + s + "' is not a number");
    }
}

KernelProperty to_property(const std::string& s) {
    const auto p = parse_property(s);
    if (!p) fail(ErrorCode::PARSE_ERROR, "unknown kernel type '" + s + "'");
    return *p;
}

std::pair<KernelProperty, std::string> split_type(const std::string& arg, const char* flag) {
    const auto colon = arg.find(':');
    if (colon == std::string::npos)
        fail(ErrorCode::INVALID_ARGUMENT, std::string(flag) + " expects TYPE:VALUE, got '" + arg + "'");
    return {to_property(arg.substr(0, colon)), arg.substr(colon + 1)};
}

DensityTable load_calibration(const std::string& path, const PipelineConfig& cfg) {
    if (path.empty()) fail(ErrorCode::CONFIG_ERROR, "no calibration file given (--calibration or config 'calibration')");
    if (!fs::exists(path)) fail(ErrorCode::CONFIG_ERROR, "calibration file not found: " + path);
    std::vector<std::string> warnings;
    auto d = load_density_table(path, {cfg.strict, &warnings});
    for (const auto& w : warnings) std::cerr << "warning: " << path << ": " << w << "\n";
    return d;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    detail::write_text_file(path, text);
}

// ---- calibrate ------------------------------------------------------------

struct CalibrateArgs {
    std::vector<std::string> samples, area_overrides, counts;
    std::string table, scale_tag, out, config;
    std::vector<std::string> sets;
};

int run_calibrate(const CalibrateArgs& a) {
    const auto cfg = load_config(a.config, a.sets);
    struct Entry {
        double weight = 0;
        double area = 0;
        std::int64_t count = 0;
        bool has_area = false, has_count = false;
    };
    std::map<KernelProperty, Entry> entries;
    std::vector<KernelProperty> order;
    auto entry = [&](KernelProperty p) -> Entry& {
        if (!entries.count(p)) order.push_back(p);
        return entries[p];
    };

    if (!a.table.empty()) {
        for (const auto& row : read_csv(a.table, {"type", "count", "weight_g", "area_px"})) {
            const auto p = to_property(row.at("type"));
            if (entries.count(p)) fail(ErrorCode::DUPLICATE_TYPE, std::string("type listed twice: ") + to_cstr(p));
            auto& e = entry(p);
            e.weight = to_number(row.at("weight_g"), "weight_g");
            e.area = to_number(row.at("area_px"), "area_px");
            e.count = static_cast<std::int64_t>(to_number(row.at("count"), "count"));
            e.has_area = e.has_count = true;
        }
    }
    for (const auto& s : a.samples) {
        const auto parts = split(s, ':');
        if (parts.size() < 2 || parts.size() > 3)
            fail(ErrorCode::INVALID_ARGUMENT, "--sample expects TYPE:WEIGHT[:IMAGE,...], got '" + s + "'");
        const auto p = to_property(parts[0]);
        if (entries.count(p)) fail(ErrorCode::DUPLICATE_TYPE, std::string("type listed twice: ") + to_cstr(p));
        auto& e = entry(p);
        e.weight = to_number(parts[1], "sample weight");
        if (parts.size() == 3) {
            for (const auto& path : split(parts[2], ',')) {
                const auto contours = kernel_contours(read_png(path), cfg.imaging);
                for (const auto& c : contours) e.area += static_cast<double>(c.area());
                e.count += static_cast<std::int64_t>(contours.size());
            }
            e.has_area = e.has_count = true;
        }
    }
    for (const auto& o : a.area_overrides) {
        const auto [p, v] = split_type(o, "--area-override");
        auto& e = entry(p);
        e.area = to_number(v, "area override");
        e.has_area = true;
    }
    for (const auto& o : a.counts) {
        const auto [p, v] = split_type(o, "--count");
        auto& e = entry(p);
        e.count = static_cast<std::int64_t>(to_number(v, "count"));
        e.has_count = true;
    }

    std::vector<CalibrationSample> samples;
    for (auto p : order) {
        const auto& e = entries[p];
        if (!e.has_area) fail(ErrorCode::INVALID_ARGUMENT, std::string("no images or area override for ") + to_cstr(p));
        samples.push_back({p, e.weight, e.area, e.has_count ? e.count : 1});
    }
    const auto d = calibrate(samples, a.scale_tag.empty() ? cfg.scale_tag : a.scale_tag);

    std::printf("%-5s %8s %11s %12s %14s\n", "type", "count", "weight(g)", "area(px)", "density(g/px)");
    for (auto p : kReportOrder) {
        const auto& e = entries[p];
        std::printf("%-5s %8lld %11.4f %12.4E %14.4E\n", to_cstr(p), static_cast<long long>(e.has_count ? e.count : 1),
                    e.weight, e.area, d[p]);
    }
    save_density_table(d, a.out);
    return 0;
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
    std::string image, calibration, color, gray, out, overlay, config, save_color, save_gray;
    std::vector<std::string> sets;
    bool strict = false;
    std::optional<std::int64_t> max_unresolved;
};

int run_analyze(const AnalyzeArgs& a) {
    std::vector<std::string> warnings;
    auto cfg = load_config(a.config, a.sets, a.strict ? std::optional<bool>(true) : std::nullopt, &warnings);
    if (!a.calibration.empty()) cfg.calibration_path = a.calibration;
    if (a.max_unresolved) cfg.max_unresolved = a.max_unresolved;
    cfg.validate();
    for (const auto& w : warnings) std::cerr << "warning: config: " << w << "\n";

    const auto densities = load_calibration(cfg.calibration_path, cfg);
    const auto img = read_png(a.image);

    auto load_branch = [&](const std::string& path, Branch b) -> std::optional<DetectionSet> {
        if (path.empty()) return std::nullopt;
        std::vector<std::string> notes;
        auto set = load_detections(path, b, {cfg.strict, &notes});
        for (const auto& w : notes) std::cerr << "warning: " << path << ": " << w << "\n";
        return set;
    };
    const auto name = fs::path(a.image).filename().string();
    const auto result =
        analyze(img, name, cfg, densities, load_branch(a.color, Branch::COLOR), load_branch(a.gray, Branch::GRAY));

    write_report(result.report, a.out, config_to_json(cfg));
    if (!a.overlay.empty()) write_png(render_overlay(img, result.report), a.overlay);
    if (!a.save_color.empty()) save_detections(result.color, a.save_color);
    if (!a.save_gray.empty()) save_detections(result.gray, a.save_gray);

    const auto& r = result.report;
    std::printf("%s: %zu kernels, %zu unresolved\n", name.c_str(), r.kernels.size(), r.unresolved.size());
    for (auto p : kReportOrder) std::printf("  %-3s %6.2f%%\n", to_cstr(p), 100.0 * r.ratio[index_of(p)]);
    if (cfg.max_unresolved && static_cast<std::int64_t>(r.unresolved.size()) > *cfg.max_unresolved) {
        std::cerr << "error: " << r.unresolved.size() << " unresolved detections exceed the limit of "
                  << *cfg.max_unresolved << "\n";
        return kExitUnresolved;
    }
    return 0;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
    std::string out_dir, spec, prefix = "scene";
    int count = 1;
    std::optional<std::uint64_t> seed;
    std::optional<int> min_kernels, max_kernels, width, height;
    std::optional<double> dual_probability;
    bool oracle = false;
};

int run_synth(const SynthArgs& a) {
    SceneSpec spec;
    if (!a.spec.empty()) {
        json j;
        try {
            j = detail::read_json_file(a.spec);
        } catch (const Error& e) {
            fail(ErrorCode::CONFIG_ERROR, e.what());
        }
        spec = parse_scene_spec(j);
    }
    if (a.seed) spec.seed = *a.seed;
    if (a.min_kernels) spec.min_kernels = *a.min_kernels;
    if (a.max_kernels) spec.max_kernels = *a.max_kernels;
    if (a.width) spec.width = *a.width;
    if (a.height) spec.height = *a.height;
    if (a.dual_probability) spec.dual_probability = *a.dual_probability;
    if (a.count < 0) fail(ErrorCode::INVALID_ARGUMENT, "--count must not be negative");

    fs::create_directories(a.out_dir);
    const std::uint64_t base = spec.seed;
    for (int i = 0; i < a.count; ++i) {
        spec.seed = base + static_cast<std::uint64_t>(i);
        const auto scene = generate_scene(spec);
        char stem[64];
        std::snprintf(stem, sizeof stem, "%s_%04d", a.prefix.c_str(), i);
        const auto base_path = (fs::path(a.out_dir) / stem).string();
        write_png(scene.image, base_path + ".png");
        save_ground_truth(scene.truth, base_path + ".gt.json");
        if (a.oracle) {
            const auto [color, gray] = oracle_detections(scene.truth, std::string(stem) + ".png");
            save_detections(color, base_path + ".color.json");
            save_detections(gray, base_path + ".gray.json");
        }
        std::printf("%s.png: %zu kernels (seed %llu)\n", stem, scene.truth.kernels.size(),
                    static_cast<unsigned long long>(spec.seed));
    }
    return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
    std::vector<std::string> reports, truths;
    std::string out;
    bool strict = false;
};

int run_evaluate(const EvaluateArgs& a) {
    if (a.reports.size() != a.truths.size())
        fail(ErrorCode::INVALID_ARGUMENT, "--report and --truth must be given the same number of times");
    std::vector<FileEvaluation> files;
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        const auto report = read_report(a.reports[i], {a.strict, nullptr}).report;
        auto truth = load_ground_truth(a.truths[i], {a.strict, nullptr});
        truth.width = report.width;
        truth.height = report.height;
        files.push_back(evaluate_report(report, truth));
        double worst = 0;
        for (double e : files.back().ratio_error_pp) worst = std::max(worst, e);
        std::fprintf(stderr, "%s: max ratio error %.3f pp\n", a.reports[i].c_str(), worst);
    }
    const auto s = summarize(files);
    std::printf("%-4s %6s %6s %6s %9s %9s %9s %10s %10s\n", "type", "tp", "fp", "fn", "precision", "recall", "f1",
                "mean(pp)", "max(pp)");
    auto pct = [](double v) {
        char b[16];
        if (std::isnan(v)) std::snprintf(b, sizeof b, "%9s", "n/a");
        else std::snprintf(b, sizeof b, "%8.2f%%", 100.0 * v);
        return std::string(b);
    };
    for (auto p : kReportOrder) {
        const auto& t = s.types[index_of(p)];
        std::printf("%-4s %6lld %6lld %6lld %s %s %s %10.3f %10.3f\n", to_cstr(p), static_cast<long long>(t.counts.tp),
                    static_cast<long long>(t.counts.fp), static_cast<long long>(t.counts.fn),
                    pct(t.counts.precision()).c_str(), pct(t.counts.recall()).c_str(), pct(t.counts.f1()).c_str(),
                    t.mean_error_pp, t.max_error_pp);
    }
    if (!a.out.empty()) write_output(a.out, summary_csv(s));
    return 0;
}

// ---- compare-density ------------------------------------------------------

struct CompareArgs {
    std::string groups, calibration, out;
};

int run_compare(const CompareArgs& a) {
    const auto d = load_calibration(a.calibration, PipelineConfig{});
    std::vector<DensityGroup> groups;
    for (const auto& row : read_csv(a.groups, {"group", "type", "accurate_weight_g", "area_px"}))
        groups.push_back({row.at("group"), to_property(row.at("type")),
                          to_number(row.at("accurate_weight_g"), "accurate_weight_g"),
                          to_number(row.at("area_px"), "area_px")});
    std::string csv = "group,type,accurate_pct,area_pct,estimated_pct,area_rel_error,estimated_rel_error\n";
    char buf[256];
    for (const auto& c : compare_density_modes(groups, d)) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.8f,%.8f\n", c.name.c_str(), to_cstr(c.type),
                      c.accurate_percent, c.area_percent, c.estimated_percent, c.area_error, c.estimated_error);
        csv += buf;
    }
    write_output(a.out, csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rice kernel quality analysis: density calibration, defect detection and weight ratios"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ricescope 1.0.0");

    CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate", "Compute per-type weight-per-pixel densities from weighed samples");
    c->add_option("--sample", cal.samples, "TYPE:WEIGHT_G[:IMAGE[,IMAGE...]] one single-property sample per type");
    c->add_option("--table", cal.table, "CSV with columns type,count,weight_g,area_px")->check(CLI::ExistingFile);
    c->add_option("--area-override", cal.area_overrides, "TYPE:AREA_PX use this total area instead of measuring");
    c->add_option("--count", cal.counts, "TYPE:N kernel count shown in the summary");
    c->add_option("--scale-tag", cal.scale_tag, "Scale tag stored with the densities");
    c->add_option("--config", cal.config, "Pipeline configuration (imaging parameters)");
    c->add_option("--set", cal.sets, "Override a configuration key, e.g. imaging.minArea=80");
    c->add_option("--out", cal.out, "Calibration JSON to write")->required();

    AnalyzeArgs an;
    auto* z = app.add_subcommand("analyze", "Detect, classify and weigh the kernels of one image");
    z->add_option("image", an.image, "Input PNG")->required()->check(CLI::ExistingFile);
    z->add_option("--calibration", an.calibration, "Calibration JSON (overrides the config entry)");
    z->add_option("--color", an.color, "Colour-branch detection JSON (external backend)");
    z->add_option("--gray", an.gray, "Gray-branch detection JSON (external backend)");
    z->add_option("--out", an.out, "Report JSON to write")->required();
    z->add_option("--overlay", an.overlay, "Annotated PNG to write");
    z->add_option("--config", an.config, "Pipeline configuration JSON");
    z->add_option("--set", an.sets, "Override a configuration key, e.g. fusion.iouThreshold=0.6");
    z->add_flag("--strict", an.strict, "Reject unknown fields in every input file");
    z->add_option("--max-unresolved", an.max_unresolved, "Exit with status 1 above this many unresolved detections");
    z->add_option("--save-color", an.save_color, "Write the colour detections used");
    z->add_option("--save-gray", an.save_gray, "Write the gray detections used");

    SynthArgs sy;
    auto* s = app.add_subcommand("synth", "Generate synthetic scenes with ground-truth sidecars");
    s->add_option("--out-dir", sy.out_dir, "Output directory")->required();
    s->add_option("--count", sy.count, "Number of scenes");
    s->add_option("--seed", sy.seed, "Seed of the first scene; scene i uses seed + i");
    s->add_option("--spec", sy.spec, "Scene spec JSON");
    s->add_option("--min-kernels", sy.min_kernels, "Fewest kernels per scene");
    s->add_option("--max-kernels", sy.max_kernels, "Most kernels per scene");
    s->add_option("--width", sy.width, "Image width");
    s->add_option("--height", sy.height, "Image height");
    s->add_option("--dual-probability", sy.dual_probability, "Probability that a kernel has two properties");
    s->add_option("--prefix", sy.prefix, "File name prefix");
    s->add_flag("--oracle-detections", sy.oracle, "Also write perfect colour/gray detection files");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Score reports against ground-truth sidecars");
    e->add_option("--report", ev.reports, "Report JSON (repeat, paired with --truth)")->required();
    e->add_option("--truth", ev.truths, "Ground-truth sidecar JSON (repeat)")->required();
    e->add_option("--out", ev.out, "Metrics CSV to write ('-' for stdout)");
    e->add_flag("--strict", ev.strict, "Reject unknown fields");

    CompareArgs cmp;
    auto* d = app.add_subcommand("compare-density", "Single-density vs per-type density error per sample group");
    d->add_option("--groups", cmp.groups, "CSV with columns group,type,accurate_weight_g,area_px")
        ->required()
        ->check(CLI::ExistingFile);
    d->add_option("--calibration", cmp.calibration, "Calibration JSON")->required();
    d->add_option("--out", cmp.out, "CSV to write (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (c->parsed()) return run_calibrate(cal);
        if (z->parsed()) return run_analyze(an);
        if (s->parsed()) return run_synth(sy);
        if (e->parsed()) return run_evaluate(ev);
        if (d->parsed()) return run_compare(cmp);
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return exit_code_for(err.code());
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
