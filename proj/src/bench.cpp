#include "prowl/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "prowl/simulate.hpp"

namespace prowl {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

struct Cell {
    int scenario = 1;
    double rho = 0.0;
    long n = 0;
};

struct MethodSpec {
    std::string token;   ///< e.g. "owl:uR"
    std::string name;    ///< e.g. "owl"
    std::string family;  ///< "R", "underline-R" or "n/a"
};

MethodSpec parse_method(const std::string& token) {
    MethodSpec m;
    m.token = token;
    const std::size_t colon = token.find(':');
    m.name = token.substr(0, colon);
    if (colon == std::string::npos) {
        m.family = "n/a";
    } else {
        const std::string suffix = token.substr(colon + 1);
        if (suffix == "R") {
            m.family = "R";
        } else if (suffix == "uR" || suffix == "underline-R") {
            m.family = "underline-R";
        } else {
            throw std::invalid_argument("unknown reward family in method token");
        }
    }
    const bool known = m.name == "prowl" || m.name == "prowl-u0" || m.name == "prowl-split" ||
                       m.name == "owl" || m.name == "rwl" || m.name == "qlearn";
    require(known, "unknown method name");
    const bool wants_family = m.name == "owl" || m.name == "rwl" || m.name == "qlearn";
    require(wants_family == (colon != std::string::npos),
            "method token must carry :R or :uR exactly for owl/rwl/qlearn");
    return m;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

MetricsRecord run_method(const MethodSpec& m, const Dataset& train, const OracleTestSet& test,
                         const SweepConfig& cfg, const Cell& cell, int replicate,
                         std::uint64_t rep_seed) {
    MetricsRecord rec;
    rec.scenario = cell.scenario;
    rec.rho = cell.rho;
    rec.n = cell.n;
    rec.replicate = replicate;
    rec.method = m.name;
    rec.reward_family = m.family;

    LearnerConfig lcfg;
    BoundConfig bcfg;
    bcfg.delta = cfg.delta;
    bcfg.epsilon = cfg.epsilon.value_or(default_epsilon(cell.scenario));

    const RewardField field = m.family == "R" ? RewardField::Proxy : RewardField::Certified;
    const double t0 = now_seconds();
    PolicyParams policy;
    if (m.name == "prowl" || m.name == "prowl-u0" || m.name == "prowl-split") {
        lcfg.split_free = m.name != "prowl-split";
        const Dataset& input = m.name == "prowl-u0" ? zero_certificates(train) : train;
        const FitResult fit =
            prowl_fit(input, lcfg, bcfg, derive_seed(rep_seed, 10), cfg.selection);
        policy = deploy(fit, DeployMode::Map);
        rec.lcb = fit.lcb_star;
    } else if (m.name == "owl") {
        policy = owl_fit(train, lcfg, field, derive_seed(rep_seed, 13));
    } else if (m.name == "rwl") {
        policy = rwl_fit(train, lcfg, field, derive_seed(rep_seed, 14));
    } else {
        policy = qlearn_fit(train, lcfg, field, derive_seed(rep_seed, 15));
    }
    const double elapsed = now_seconds() - t0;

    const RegretPair reg = regrets(policy, test);
    const GapPair gp = gaps(policy, test);
    const CertificateDiagnostics diag = certificate_diagnostics(train, test);
    rec.target_regret = reg.target_regret;
    rec.robust_regret = reg.robust_regret;
    rec.proxy_target_gap = gp.proxy_target_gap;
    rec.target_certified_gap = gp.target_certified_gap;
    rec.e_u = diag.e_u;
    rec.clip_rate = diag.clip_rate;
    rec.valid_rate = diag.valid_rate;
    rec.runtime_seconds = cfg.timing ? elapsed : 0.0;
    return rec;
}

MetricsRecord budget_row(const MethodSpec& m, const Cell& cell, int replicate) {
    MetricsRecord rec;
    rec.scenario = cell.scenario;
    rec.rho = cell.rho;
    rec.n = cell.n;
    rec.replicate = replicate;
    rec.method = m.name;
    rec.reward_family = m.family;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.target_regret = rec.robust_regret = nan;
    rec.proxy_target_gap = rec.target_certified_gap = nan;
    rec.e_u = rec.clip_rate = rec.valid_rate = nan;
    rec.runtime_seconds = -1.0;  // budget flag
    return rec;
}

/// Parallel map over task indices; each worker owns its slots, so results
/// are identical to serial execution.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min<std::size_t>(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<std::string> config_comments(const SweepConfig& cfg, const std::string& mode_name) {
    std::ostringstream methods;
    const std::vector<std::string> ms = cfg.methods.empty() ? default_methods() : cfg.methods;
    for (std::size_t i = 0; i < ms.size(); ++i) methods << (i ? "," : "") << ms[i];
    std::ostringstream line;
    line << "prowl-bench " << mode_name << " scenario=" << cfg.scenario << " reps=" << cfg.reps
         << " seed=" << cfg.seed << " delta=" << short_num(cfg.delta) << " epsilon="
         << (cfg.epsilon.has_value() ? short_num(*cfg.epsilon) : std::string("per-scenario"))
         << " selection=" << to_string(cfg.selection) << " methods=" << methods.str();
    return {line.str(),
            "epsilon default: scenario 1 -> 0.5, scenario 2 -> 0.01 (propensity clip floor)",
            "prior over candidate libraries: uniform; bounds are library-conditional"};
}

struct SummaryAccumulator {
    long count = 0;
    double sum = 0.0, sum_sq = 0.0;
    void add(double v) {
        if (std::isnan(v)) return;
        ++count;
        sum += v;
        sum_sq += v * v;
    }
    double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
    double se() const {
        if (count < 2) return 0.0;
        const double n = static_cast<double>(count);
        const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
        return std::sqrt(var / n);
    }
};

void write_summary(const std::vector<MetricsRecord>& rows, const std::string& path,
                   const std::vector<std::string>& comments) {
    struct Key {
        int scenario;
        double rho;
        long n;
        std::string method, family;
        bool operator<(const Key& o) const {
            return std::tie(scenario, rho, n, method, family) <
                   std::tie(o.scenario, o.rho, o.n, o.method, o.family);
        }
    };
    constexpr const char* kMetrics[] = {"target_regret", "robust_regret", "proxy_target_gap",
                                        "target_certified_gap", "e_u", "clip_rate",
                                        "valid_rate", "lcb", "runtime_seconds"};
    std::map<Key, std::array<SummaryAccumulator, 9>> cells;
    for (const MetricsRecord& r : rows) {
        if (r.runtime_seconds < 0.0) continue;  // budget-flagged
        auto& acc = cells[{r.scenario, r.rho, r.n, r.method, r.reward_family}];
        acc[0].add(r.target_regret);
        acc[1].add(r.robust_regret);
        acc[2].add(r.proxy_target_gap);
        acc[3].add(r.target_certified_gap);
        acc[4].add(r.e_u);
        acc[5].add(r.clip_rate);
        acc[6].add(r.valid_rate);
        if (r.lcb.has_value()) acc[7].add(*r.lcb);
        acc[8].add(r.runtime_seconds);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_summary: cannot open " + path);
    for (const std::string& c : comments) out << "# " << c << "\n";
    out << "scenario,rho,n,method,reward_family,reps";
    for (const char* m : kMetrics) out << "," << m << "_mean," << m << "_se";
    out << "\n";
    for (const auto& [key, acc] : cells) {
        out << key.scenario << "," << format_double(key.rho) << "," << key.n << "," << key.method
            << "," << key.family << "," << acc[0].count;
        for (const SummaryAccumulator& a : acc) {
            out << "," << format_double(a.mean()) << "," << format_double(a.se());
        }
        out << "\n";
    }
}

}  // namespace

std::vector<std::string> default_methods() {
    return {"prowl", "prowl-u0", "owl:R", "owl:uR", "rwl:R", "rwl:uR", "qlearn:R", "qlearn:uR"};
}

double default_epsilon(int scenario) { return scenario == 2 ? 0.01 : 0.5; }

void SweepConfig::validate() const {
    require(scenario == 0 || scenario == 1 || scenario == 2,
            "SweepConfig: scenario must be 0, 1 or 2");
    require(scenario != 0 || mode == Mode::Diagnostics,
            "SweepConfig: scenario 0 (both) is diagnostics-only");
    require(reps >= 1, "SweepConfig: reps must be >= 1");
    require(!rho_grid.empty() && !n_grid.empty(), "SweepConfig: empty grid");
    require(fixed_n >= 1 && diag_n >= 1 && n_test >= 1, "SweepConfig: sizes must be >= 1");
    require(fixed_rho >= 0.0, "SweepConfig: fixed_rho must be >= 0");
    for (double r : rho_grid) require(r >= 0.0, "SweepConfig: rho grid must be >= 0");
    for (long n : n_grid) require(n >= 1, "SweepConfig: n grid must be >= 1");
}

std::string summary_path_for(const std::string& out_path) {
    const std::size_t dot = out_path.rfind('.');
    if (dot == std::string::npos) return out_path + "_summary.csv";
    return out_path.substr(0, dot) + "_summary" + out_path.substr(dot);
}

std::vector<MetricsRecord> run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    require(cfg.mode != SweepConfig::Mode::Diagnostics, "run_sweep: use run_diagnostics");

    std::vector<Cell> cells;
    if (cfg.mode == SweepConfig::Mode::Rho) {
        for (double rho : cfg.rho_grid) cells.push_back({cfg.scenario, rho, cfg.fixed_n});
    } else {  // N sweep and ablation share the sample-size grid at fixed rho
        for (long n : cfg.n_grid) cells.push_back({cfg.scenario, cfg.fixed_rho, n});
    }

    std::vector<MethodSpec> methods;
    if (cfg.mode == SweepConfig::Mode::Ablation) {
        // Paired split-free / honest-split rows isolating the nuisance split.
        methods.push_back(parse_method("prowl"));
        methods.push_back(parse_method("prowl-split"));
    } else {
        const std::vector<std::string> tokens =
            cfg.methods.empty() ? default_methods() : cfg.methods;
        for (const std::string& t : tokens) methods.push_back(parse_method(t));
    }

    const std::size_t tasks = cells.size() * static_cast<std::size_t>(cfg.reps);
    std::vector<MetricsRecord> rows(tasks * methods.size());
    const double t_start = now_seconds();

    parallel_for(tasks, cfg.threads, [&](std::size_t task) {
        const std::size_t cell_id = task / static_cast<std::size_t>(cfg.reps);
        const int replicate = static_cast<int>(task % static_cast<std::size_t>(cfg.reps));
        const Cell& cell = cells[cell_id];
        const std::size_t base = task * methods.size();

        if (cfg.budget_seconds > 0.0 && now_seconds() - t_start > cfg.budget_seconds) {
            for (std::size_t m = 0; m < methods.size(); ++m) {
                rows[base + m] = budget_row(methods[m], cell, replicate);
            }
            return;
        }

        ScenarioConfig scfg;
        scfg.scenario = cell.scenario;
        scfg.n = cell.n;
        scfg.rho = cell.rho;
        scfg.seed = cfg.seed + static_cast<std::uint64_t>(replicate);
        scfg.n_test = cfg.n_test;
        GenOptions opts;
        opts.inner_draws = cfg.inner_draws;
        const SimOutput sim = scenario_sample(scfg, opts);

        for (std::size_t m = 0; m < methods.size(); ++m) {
            rows[base + m] =
                run_method(methods[m], sim.train, sim.test, cfg, cell, replicate, scfg.seed);
        }
    });

    if (!cfg.out_path.empty()) {
        const std::string mode_name =
            cfg.mode == SweepConfig::Mode::Rho
                ? "sweep --mode rho"
                : (cfg.mode == SweepConfig::Mode::N ? "sweep --mode n" : "sweep --mode ablation");
        const std::vector<std::string> comments = config_comments(cfg, mode_name);
        metrics_to_csv(rows, cfg.out_path, comments);
        write_summary(rows, summary_path_for(cfg.out_path), comments);
    }
    return rows;
}

std::vector<DiagnosticsRow> run_diagnostics(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<int> scenarios;
    if (cfg.scenario == 0) {
        scenarios = {1, 2};
    } else {
        scenarios = {cfg.scenario};
    }

    std::vector<Cell> cells;
    for (int sc : scenarios) {
        for (double rho : cfg.rho_grid) cells.push_back({sc, rho, cfg.diag_n});
    }

    std::vector<CertificateDiagnostics> acc(cells.size() * static_cast<std::size_t>(cfg.reps));
    parallel_for(acc.size(), cfg.threads, [&](std::size_t task) {
        const std::size_t cell_id = task / static_cast<std::size_t>(cfg.reps);
        const int replicate = static_cast<int>(task % static_cast<std::size_t>(cfg.reps));
        ScenarioConfig scfg;
        scfg.scenario = cells[cell_id].scenario;
        scfg.n = cells[cell_id].n;
        scfg.rho = cells[cell_id].rho;
        scfg.seed = cfg.seed + static_cast<std::uint64_t>(replicate);
        scfg.n_test = cfg.n_test;
        GenOptions opts;
        opts.test_lower_means = false;  // diagnostics never touch certified means
        const SimOutput sim = scenario_sample(scfg, opts);
        acc[task] = certificate_diagnostics(sim.train, sim.test);
    });

    std::vector<DiagnosticsRow> rows;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        DiagnosticsRow row;
        row.scenario = cells[c].scenario;
        row.rho = cells[c].rho;
        for (int r = 0; r < cfg.reps; ++r) {
            const CertificateDiagnostics& d = acc[c * static_cast<std::size_t>(cfg.reps) + r];
            row.e_u += d.e_u;
            row.clip_rate += d.clip_rate;
            row.valid_rate += d.valid_rate;
        }
        row.e_u /= cfg.reps;
        row.clip_rate /= cfg.reps;
        row.valid_rate /= cfg.reps;
        rows.push_back(row);
    }

    if (!cfg.out_path.empty()) {
        std::ofstream out(cfg.out_path);
        if (!out) throw std::runtime_error("run_diagnostics: cannot open " + cfg.out_path);
        for (const std::string& c : config_comments(cfg, "diagnostics")) out << "# " << c << "\n";
        out << "scenario,rho,e_u,clip_rate,valid_rate\n";
        for (const DiagnosticsRow& r : rows) {
            out << r.scenario << "," << format_double(r.rho) << "," << format_double(r.e_u)
                << "," << format_double(r.clip_rate) << "," << format_double(r.valid_rate)
                << "\n";
        }
    }
    return rows;
}

namespace {

std::string canonical_kind(const std::string& kind) {
    if (kind == "regret") return "target_regret";
    if (kind == "robust") return "robust_regret";
    return kind;
}

double metric_of(const MetricsRecord& r, const std::string& kind, bool* present) {
    *present = true;
    if (kind == "target_regret") return r.target_regret;
    if (kind == "robust_regret") return r.robust_regret;
    if (kind == "proxy_target_gap") return r.proxy_target_gap;
    if (kind == "target_certified_gap") return r.target_certified_gap;
    if (kind == "e_u") return r.e_u;
    if (kind == "lcb") {
        *present = r.lcb.has_value();
        return r.lcb.value_or(0.0);
    }
    throw std::invalid_argument("emit_plots: unknown kind '" + kind + "'");
}

std::string svg_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void emit_plots(const std::string& csv_path, const std::string& kind_in,
                const std::string& out_path) {
    const std::string kind = canonical_kind(kind_in);
    const std::vector<MetricsRecord> rows = metrics_from_csv(csv_path);
    if (rows.empty()) throw std::runtime_error("emit_plots: no data rows in " + csv_path);

    // x axis: whichever of rho / n actually varies (rho wins ties).
    std::vector<double> rhos, ns;
    for (const MetricsRecord& r : rows) {
        rhos.push_back(r.rho);
        ns.push_back(static_cast<double>(r.n));
    }
    auto distinct = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v.size();
    };
    const bool x_is_n = distinct(ns) > distinct(rhos);

    struct SeriesKey {
        std::string label;
        bool operator<(const SeriesKey& o) const { return label < o.label; }
    };
    std::map<SeriesKey, std::map<double, SummaryAccumulator>> series;
    for (const MetricsRecord& r : rows) {
        if (r.runtime_seconds < 0.0) continue;
        bool present = false;
        const double v = metric_of(r, kind, &present);
        if (!present || std::isnan(v)) continue;
        const std::string label =
            r.reward_family == "n/a" ? r.method : r.method + ":" + r.reward_family;
        const double x = x_is_n ? static_cast<double>(r.n) : r.rho;
        series[{label}][x].add(v);
    }
    if (series.empty()) throw std::runtime_error("emit_plots: nothing to plot for kind " + kind);

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& [key, pts] : series) {
        for (const auto& [x, a] : pts) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, a.mean());
            y_max = std::max(y_max, a.mean());
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double width = 800, height = 500;
    const double ml = 70, mr = 170, mt = 30, mb = 50;
    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto sy = [&](double y) { return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb); };

    static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(height - mb) << "\" x2=\""
        << svg_num(width - mr) << "\" y2=\"" << svg_num(height - mb)
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(mt) << "\" x2=\"" << svg_num(ml)
        << "\" y2=\"" << svg_num(height - mb) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x_min + (x_max - x_min) * k / 4.0;
        const double fy = y_min + (y_max - y_min) * k / 4.0;
        svg << "<text x=\"" << svg_num(sx(fx)) << "\" y=\"" << svg_num(height - mb + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << tick_label(fx) << "</text>\n";
        svg << "<text x=\"" << svg_num(ml - 6) << "\" y=\"" << svg_num(sy(fy) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << tick_label(fy) << "</text>\n";
    }
    svg << "<text x=\"" << svg_num((ml + width - mr) / 2) << "\" y=\"" << svg_num(height - 12)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << (x_is_n ? "n" : "rho")
        << "</text>\n";
    svg << "<text x=\"16\" y=\"" << svg_num((mt + height - mb) / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << svg_num((mt + height - mb) / 2) << ")\">" << kind << "</text>\n";

    int color = 0, legend_row = 0;
    for (const auto& [key, pts] : series) {
        const char* stroke = kPalette[color % 10];
        std::ostringstream poly;
        for (const auto& [x, a] : pts) {
            poly << svg_num(sx(x)) << "," << svg_num(sy(a.mean())) << " ";
        }
        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\""
            << poly.str() << "\"/>\n";
        const double ly = mt + 14 + 16.0 * legend_row;
        svg << "<line x1=\"" << svg_num(width - mr + 12) << "\" y1=\"" << svg_num(ly - 4)
            << "\" x2=\"" << svg_num(width - mr + 34) << "\" y2=\"" << svg_num(ly - 4)
            << "\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"/>\n";
        svg << "<text x=\"" << svg_num(width - mr + 40) << "\" y=\"" << svg_num(ly)
            << "\" font-size=\"11\">" << key.label << "</text>\n";
        ++color;
        ++legend_row;
    }
    svg << "</svg>\n";

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("emit_plots: cannot open " + out_path);
    out << svg.str();
}

}  // namespace prowl
