#include "somkit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "somkit/error.hpp"
#include "somkit/parallel.hpp"

namespace somkit {

void BenchPlan::validate() const {
    if (sample_sizes.empty() || feature_counts.empty()) throw ConfigurationError("bench plan has no cells");
    for (std::size_t n : sample_sizes) {
        if (n < 2) throw ConfigurationError("bench sample sizes must be >= 2");
    }
    for (std::size_t k : feature_counts) {
        if (k < 1) throw ConfigurationError("bench feature counts must be >= 1");
    }
    if (rows < 1 || cols < 1 || rows * cols < 2) throw ConfigurationError("bench map needs at least 2 neurons");
    if (epochs < 1) throw ConfigurationError("bench epochs must be >= 1");
    if (runs < 1) throw ConfigurationError("bench runs must be >= 1");
    if (update_modes.empty()) throw ConfigurationError("bench plan lists no update mode");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigurationError("bench test fraction must lie in (0, 1)");
    }
    if (blobs.n_centers < 1 || !(blobs.cluster_std >= 0.0) || !(blobs.box_min < blobs.box_max)) {
        throw ConfigurationError("invalid blob parameters");
    }
}

bool is_large_cell(std::size_t samples, std::size_t features, int rows, int cols) {
    return (samples >= 16000 && features >= 300) || rows * cols >= 6300;
}

MeanStd mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

BenchRun run_once(const BenchPlan& plan, std::size_t samples, std::size_t features, UpdateMode mode,
                  int run) {
    using clock = std::chrono::steady_clock;
    const std::uint64_t seed = plan.seed0 + static_cast<std::uint64_t>(run);

    BlobSpec spec = plan.blobs;
    spec.n_samples = samples;
    spec.n_features = features;
    spec.seed = seed;
    const Split parts = split(make_blobs(spec), plan.test_fraction, seed);
    const Scaler scaler = fit_scaler(parts.train);
    const Dataset train = scaler.transform(parts.train);
    const Dataset test = scaler.transform(parts.test);

    BenchRun out;
    const GridTopology topo(plan.topology, plan.rows, plan.cols);
    auto t0 = clock::now();
    SomModel model = init_pca(topo, features, train).model;
    out.time_init_s = std::chrono::duration<double>(clock::now() - t0).count();

    TrainConfig cfg;
    cfg.epochs = plan.epochs;
    cfg.update_mode = mode;
    cfg.seed = seed;
    out.time_train_s = fit(model, train, cfg).wall_seconds;

    t0 = clock::now();
    out.test = evaluate(model, test, cfg.d_th);
    out.time_metrics_s = std::chrono::duration<double>(clock::now() - t0).count();
    return out;
}

BenchRow run_cell(const BenchPlan& plan, std::size_t samples, std::size_t features, UpdateMode mode) {
    BenchRow row;
    row.samples = samples;
    row.features = features;
    row.rows = plan.rows;
    row.cols = plan.cols;
    row.topology = plan.topology;
    row.update_mode = mode;
    row.runs = plan.runs;
    std::vector<double> qe, te, ti, tt, tm;
    try {
        for (int r = 0; r < plan.runs; ++r) {
            const BenchRun one = run_once(plan, samples, features, mode, r);
            qe.push_back(one.test.qe);
            te.push_back(one.test.te);
            ti.push_back(one.time_init_s);
            tt.push_back(one.time_train_s);
            tm.push_back(one.time_metrics_s);
        }
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
        return row;
    }
    row.qe = mean_std(qe);
    row.te = mean_std(te);
    row.time_init_s = mean_std(ti);
    row.time_train_s = mean_std(tt);
    row.time_metrics_s = mean_std(tm);
    return row;
}

std::vector<BenchRow> run_plan(const BenchPlan& plan, const BenchProgress& progress) {
    plan.validate();
    struct Cell {
        std::size_t samples, features;
        UpdateMode mode;
    };
    std::vector<Cell> cells;
    for (std::size_t n : plan.sample_sizes) {
        for (std::size_t k : plan.feature_counts) {
            if (is_large_cell(n, k, plan.rows, plan.cols) && !plan.allow_large) {
                throw ConfigurationError(fmt::format(
                    "cell {}x{} on a {}x{} map is large; pass the large gate to run it", n, k, plan.rows,
                    plan.cols));
            }
            for (UpdateMode m : plan.update_modes) cells.push_back({n, k, m});
        }
    }

    std::vector<BenchRow> rows(cells.size());
    if (plan.parallel_cells) {
        // Each worker owns its cell's timers; inner loops run single-threaded.
        parallel_for(cells.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                rows[i] = run_cell(plan, cells[i].samples, cells[i].features, cells[i].mode);
            }
        }, 1);
        if (progress) {
            for (const BenchRow& r : rows) progress(r);
        }
    } else {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            rows[i] = run_cell(plan, cells[i].samples, cells[i].features, cells[i].mode);
            if (progress) progress(rows[i]);
        }
    }
    return rows;
}

namespace {

constexpr std::string_view kCsvHeader =
    "samples,features,rows,cols,topology,update_mode,runs,failed,error,qe_mean,qe_std,te_mean,te_std,"
    "time_init_mean,time_init_std,time_train_mean,time_train_std,time_metrics_mean,time_metrics_std";

std::string sanitize(std::string s) {
    std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
    return s;
}

std::string render_csv(const std::vector<BenchRow>& rows) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const BenchRow& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}", r.samples, r.features, r.rows, r.cols,
                           to_string(r.topology), to_string(r.update_mode), r.runs, r.failed ? 1 : 0,
                           sanitize(r.error));
        for (const MeanStd* m : {&r.qe, &r.te, &r.time_init_s, &r.time_train_s, &r.time_metrics_s}) {
            out += fmt::format(",{:.17g},{:.17g}", m->mean, m->std);
        }
        out += '\n';
    }
    return out;
}

std::string render_aligned(const std::vector<BenchRow>& rows) {
    using Line = std::vector<std::string>;
    std::vector<Line> lines{{"samples", "features", "map", "topology", "mode", "QE", "TE (%)", "init (s)",
                             "train (s)", "metrics (s)"}};
    auto pm = [](const MeanStd& m, double scale, int digits) {
        return fmt::format("{:.{}f} ± {:.{}f}", m.mean * scale, digits, m.std * scale, digits);
    };
    for (const BenchRow& r : rows) {
        Line l{std::to_string(r.samples), std::to_string(r.features), fmt::format("{}x{}", r.rows, r.cols),
               std::string(to_string(r.topology)), std::string(to_string(r.update_mode))};
        if (r.failed) {
            l.push_back("failed: " + r.error);
        } else {
            l.push_back(pm(r.qe, 1.0, 2));
            l.push_back(pm(r.te, 100.0, 0));
            l.push_back(pm(r.time_init_s, 1.0, 2));
            l.push_back(pm(r.time_train_s, 1.0, 2));
            l.push_back(pm(r.time_metrics_s, 1.0, 2));
        }
        lines.push_back(std::move(l));
    }
    // Width in code points; "±" is two bytes but one column.
    auto width = [](const std::string& s) {
        return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
            return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
        }));
    };
    std::vector<std::size_t> widths(lines.front().size(), 0);
    for (const Line& l : lines) {
        if (l.size() != widths.size()) continue;  // failed rows do not set widths
        for (std::size_t c = 0; c < l.size(); ++c) widths[c] = std::max(widths[c], width(l[c]));
    }
    std::string out;
    for (const Line& l : lines) {
        std::string text;
        for (std::size_t c = 0; c < l.size(); ++c) {
            if (c > 0) text += "  ";
            const std::size_t pad = widths[c] - std::min(widths[c], width(l[c]));
            text += std::string(c < 5 ? 0 : pad, ' ') + l[c] + std::string(c < 5 ? pad : 0, ' ');
        }
        while (!text.empty() && text.back() == ' ') text.pop_back();
        out += text + '\n';
    }
    return out;
}

}  // namespace

std::string render_table(const std::vector<BenchRow>& rows, TableFormat format) {
    return format == TableFormat::Csv ? render_csv(rows) : render_aligned(rows);
}

std::vector<BenchRow> parse_bench_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("bench CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw InputError("bench CSV header does not match");
    std::vector<BenchRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 19) throw InputError(fmt::format("bench CSV line {} has {} fields", lineno, f.size()));
        try {
            BenchRow r;
            r.samples = std::stoull(f[0]);
            r.features = std::stoull(f[1]);
            r.rows = std::stoi(f[2]);
            r.cols = std::stoi(f[3]);
            r.topology = parse_topology(f[4]);
            r.update_mode = parse_update_mode(f[5]);
            r.runs = std::stoi(f[6]);
            r.failed = f[7] == "1";
            r.error = f[8];
            MeanStd* ms[] = {&r.qe, &r.te, &r.time_init_s, &r.time_train_s, &r.time_metrics_s};
            for (std::size_t i = 0; i < 5; ++i) {
                ms[i]->mean = std::stod(f[9 + 2 * i]);
                ms[i]->std = std::stod(f[10 + 2 * i]);
            }
            rows.push_back(std::move(r));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw InputError(fmt::format("bench CSV line {} is malformed", lineno));
        }
    }
    return rows;
}

}  // namespace somkit
