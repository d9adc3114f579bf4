#include "tsync/experiments.hpp"

#include "tsync/errors.hpp"
#include "tsync/estimators.hpp"
#include "tsync/hydro.hpp"
#include "tsync/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>
#include <variant>

namespace tsync {

using nlohmann::json;

std::string csv_number(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string time_label(double t)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir, std::string command, json config,
                               std::string config_hash)
    : dir_(std::move(dir)), command_(std::move(command)), config_(std::move(config)),
      hash_(std::move(config_hash))
{
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
}

void ArtifactWriter::write_file(const std::string& name, const std::string& content,
                                const json& format) const
{
    const auto write = [&](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) {
            throw Error("cannot write " + path.string());
        }
    };
    write(dir_ / name, content);
    json meta;
    meta["file"] = name;
    meta["command"] = command_;
    meta["config_hash"] = hash_;
    meta["config"] = config_;
    meta["format"] = format;
    write(dir_ / (name + ".meta.json"), meta.dump(2) + "\n");
}

void ArtifactWriter::write_csv(const std::string& name, const std::vector<std::string>& header,
                               const std::vector<std::vector<std::string>>& rows) const
{
    std::ostringstream out;
    for (std::size_t k = 0; k < header.size(); ++k) {
        out << (k ? "," : "") << header[k];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            out << (k ? "," : "") << row[k];
        }
        out << '\n';
    }
    write_file(name, out.str(), {{"type", "csv"}, {"columns", header}});
}

void ArtifactWriter::write_json(const std::string& name, const json& value) const
{
    write_file(name, value.dump(2) + "\n", {{"type", "json"}});
}

void ArtifactWriter::write_text(const std::string& name, const std::string& text) const
{
    write_file(name, text, {{"type", "text"}});
}

namespace {

ArtifactWriter writer_for(const ScenarioConfig& config, const RunOptions& options,
                          const std::string& command)
{
    return ArtifactWriter(options.out_dir, command, to_json(config), config_hash(config));
}

json estimate_json(const McEstimate& e)
{
    return {{"value", e.value}, {"std_error", e.std_error}, {"replicas", e.replicas}};
}

json header(const ScenarioConfig& config, const std::string& command)
{
    return {{"command", command}, {"config_hash", config_hash(config)}};
}

std::pair<double, double> mean_and_variance(const std::vector<double>& xs)
{
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) {
        var += (x - mean) * (x - mean);
    }
    return {mean, var / static_cast<double>(xs.size())};
}

/// Mean-field initial moments matching a particle initial condition.
InitialMoments moments_of(const InitialCondition& init)
{
    InitialMoments m;
    if (const auto* e = std::get_if<ExplicitStart>(&init)) {
        std::tie(m.a1_0, m.d1_0) = mean_and_variance(e->positions1);
        std::tie(m.a2_0, m.d2_0) = mean_and_variance(e->positions2);
    } else if (const auto* g = std::get_if<GaussianStart>(&init)) {
        m = {g->mean1, g->mean2, g->sd1 * g->sd1, g->sd2 * g->sd2};
    }
    return m;
}

} // namespace

RunResult cmd_simulate(const ScenarioConfig& config, const RunOptions& options)
{
    validate(config);
    const auto [n1, n2] = config.populations.counts();
    MomentRun run;
    run.params = config.params;
    run.n1 = n1;
    run.n2 = n2;
    run.init = config.initial;
    run.seed = config.seed;
    const std::size_t obs = config.simulate.observations;
    for (std::size_t k = 0; k < obs; ++k) {
        run.times.push_back(config.horizon * static_cast<double>(k) / static_cast<double>(obs - 1));
    }
    const auto replicas = collect_replicas(run, 0, config.replicas, options.exec);
    const auto estimates = summarize_moments(run.times, replicas);

    const ArtifactWriter out = writer_for(config, options, "simulate");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t j = 0; j < run.times.size(); ++j) {
        const Observables& o = replicas[0][j];
        rows.push_back({csv_number(run.times[j]), csv_number(o.mean1), csv_number(o.mean2),
                        csv_number(o.var1), csv_number(o.var2), csv_number(o.min_all)});
    }
    out.write_csv("observables.csv", {"t", "mean1", "mean2", "var1", "var2", "min"}, rows);

    rows.clear();
    for (const auto& e : estimates) {
        const std::pair<const char*, const McEstimate*> quantities[] = {
            {"mu1", &e.mu1}, {"mu2", &e.mu2}, {"l12", &e.l12}, {"R1", &e.R1}, {"R2", &e.R2}};
        for (const auto& [name, est] : quantities) {
            rows.push_back({name, csv_number(e.t), std::to_string(n1), std::to_string(n2),
                            csv_number(est->value), csv_number(est->std_error),
                            std::to_string(est->replicas)});
        }
    }
    out.write_csv("estimates.csv", {"quantity", "t", "N1", "N2", "value", "std_error", "replicas"},
                  rows);

    if (config.simulate.trajectory) {
        rows.clear();
        ParticleState state = replica_state(run, 0);
        for (double t : run.times) {
            state.run_until(t);
            for (int type = 1; type <= 2; ++type) {
                const auto xs = state.positions(type);
                for (std::size_t k = 0; k < xs.size(); ++k) {
                    rows.push_back({csv_number(t), std::to_string(type), std::to_string(k),
                                    csv_number(xs[k])});
                }
            }
        }
        out.write_csv("trajectory.csv", {"t", "type", "index", "position"}, rows);
    }

    const MomentEstimates& last = estimates.back();
    const MeanPair mf = mean_trajectories(config.params, moments_of(config.initial), config.horizon);
    json summary = header(config, "simulate");
    summary["N1"] = n1;
    summary["N2"] = n2;
    summary["replicas"] = config.replicas;
    summary["horizon"] = config.horizon;
    summary["final"] = {{"mu1", estimate_json(last.mu1)}, {"mu2", estimate_json(last.mu2)},
                        {"l12", estimate_json(last.l12)}, {"R1", estimate_json(last.R1)},
                        {"R2", estimate_json(last.R2)}};
    summary["mean_field"] = {{"mu1", mf.a1}, {"mu2", mf.a2}, {"l12", mf.a1 - mf.a2}};
    out.write_json("summary.json", summary);
    return {summary, 0};
}

RunResult cmd_two_particle(const ScenarioConfig& config, const RunOptions& options)
{
    validate(config);
    const ModelParams& p = config.params;
    const double lambda = gap_rate(p);
    const double spacing = config.two_particle.spacing.value_or(default_gap_spacing(p));
    const auto gaps = gap_samples(p, config.seed, config.two_particle.burnin,
                                  config.two_particle.samples, spacing);

    json summary = header(config, "two-particle");
    summary["lambda"] = lambda;
    summary["mean_gap_theory"] = 1.0 / lambda;
    summary["spacing"] = spacing;
    summary["samples"] = gaps.size();
    if (!gaps.empty()) {
        const double ks = ks_statistic(gaps, [lambda](double x) {
            return x <= 0.0 ? 0.0 : -std::expm1(-lambda * x);
        });
        summary["ks_statistic"] = ks;
        summary["mean_gap"] = estimate_json(estimate_from(gaps));
    }

    const ArtifactWriter out = writer_for(config, options, "two-particle");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        rows.push_back({std::to_string(k),
                        csv_number(config.two_particle.burnin + static_cast<double>(k) * spacing),
                        csv_number(gaps[k])});
    }
    out.write_csv("gaps.csv", {"k", "t", "gap"}, rows);

    const VelocityResiduals theory = velocity_consistency_residuals(p);
    summary["velocity"] = {{"limit", limiting_velocity(p)},
                           {"theory_residual_1", theory.residual_1},
                           {"theory_residual_2", theory.residual_2}};
    if (config.two_particle.burnin < config.horizon) {
        const auto check = two_particle_velocity(p, config.horizon, config.two_particle.burnin,
                                                 spacing, config.replicas, config.seed, options.exec);
        auto& v = summary["velocity"];
        v["horizon"] = config.horizon;
        v["speed"] = estimate_json(check.speed);
        v["mean_gap"] = estimate_json(check.mean_gap);
        v["residual_1"] = estimate_json(check.residual_1);
        v["residual_2"] = estimate_json(check.residual_2);
        v["speed_within_3se"] =
            std::abs(check.speed.value - limiting_velocity(p)) <= 3.0 * check.speed.std_error;
    } else {
        summary["velocity"]["note"] = "horizon does not exceed the burn-in; velocity check skipped";
    }
    out.write_json("summary.json", summary);
    return {summary, 0};
}

namespace {

struct PdeSetup {
    Field field;
    InitialMoments init;
};

PdeSetup pde_initial(const ScenarioConfig& config, double horizon)
{
    const auto [n1, n2] = config.populations.counts();
    InitialMoments init = moments_of(config.initial);
    const ModelParams& p = config.params;
    const GridSpec grid = default_grid(p, init, horizon, config.pde.min_cells);

    if (const auto* g = std::get_if<GaussianStart>(&config.initial)) {
        return {init_field(gaussian_density(g->mean1, g->sd1), gaussian_density(g->mean2, g->sd2), grid),
                init};
    }
    // point masses are smoothed to Gaussians of width 3 dx; the grid is then
    // rebuilt around the smoothed moments
    const double width = 3.0 * grid.dx();
    std::vector<double> x1(n1, 0.0);
    std::vector<double> x2(n2, 0.0);
    if (const auto* e = std::get_if<ExplicitStart>(&config.initial)) {
        x1 = e->positions1;
        x2 = e->positions2;
    }
    const auto mixture = [width](std::vector<double> xs) {
        return Density([xs = std::move(xs), width](double x) {
            double sum = 0.0;
            for (double c : xs) {
                sum += normal_density((x - c) / width);
            }
            return sum / (width * static_cast<double>(xs.size()));
        });
    };
    init.d1_0 += width * width;
    init.d2_0 += width * width;
    const GridSpec smoothed = default_grid(p, init, horizon, config.pde.min_cells);
    return {init_field(mixture(x1), mixture(x2), smoothed), init};
}

double relative_error(double value, double reference)
{
    const double scale = std::max(std::abs(reference), 1e-12);
    return std::abs(value - reference) / scale;
}

} // namespace

RunResult cmd_pde(const ScenarioConfig& config, const RunOptions& options)
{
    validate(config);
    const ModelParams& p = config.params;
    std::vector<double> times = config.pde.times;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const double horizon = times.back();

    const PdeSetup setup = pde_initial(config, horizon);
    const Field& field0 = setup.field;
    const double vmax = std::max(std::abs(p.v1), std::abs(p.v2));
    const double cfl_dt = std::min(vmax > 0.0 ? field0.dx / vmax : 1e300, 0.5 / p.rate_sum());
    const double dt = config.pde.fv_dt.value_or(0.5 * cfl_dt);
    if (dt > cfl_dt) {
        throw CflViolation("pde.fv_dt = " + csv_number(dt) + " exceeds the stability limit " +
                           csv_number(cfl_dt) + "; lower pde.fv_dt or pde.min_cells");
    }

    const ArtifactWriter out = writer_for(config, options, "pde");
    std::vector<std::vector<std::string>> spectral_moments, fv_moments, errors, agreement;
    json per_time = json::array();
    double max_error_spectral = 0.0;
    double max_error_fv = 0.0;
    std::size_t flagged = 0;

    std::vector<double> u;
    const double extent = config.pde.profile_extent;
    const double step = config.pde.profile_step;
    const auto n_u = static_cast<std::size_t>(std::floor(2.0 * extent / step + 1e-9));
    for (std::size_t k = 0; k <= n_u; ++k) {
        u.push_back(-extent + static_cast<double>(k) * step);
    }

    Field fv = field0;
    const auto field_rows = [](const Field& f) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < f.size(); ++k) {
            rows.push_back({csv_number(f.center(k)), csv_number(f.m1[k]), csv_number(f.m2[k])});
        }
        return rows;
    };
    const auto moment_row = [](double t, const FieldMoments& m) {
        return std::vector<std::string>{csv_number(t), csv_number(m.a1), csv_number(m.a2),
                                        csv_number(m.d1), csv_number(m.d2)};
    };

    for (double t : times) {
        const Field sp = spectral_solve(field0, p, t, options.exec);
        fv = fv_solve(fv, p, t - fv.t, dt, options.exec);
        const std::string label = time_label(t);
        out.write_csv("field_spectral_t" + label + ".csv", {"x", "m1", "m2"}, field_rows(sp));
        out.write_csv("field_fv_t" + label + ".csv", {"x", "m1", "m2"}, field_rows(fv));

        const FieldMoments ms = moments(sp);
        const FieldMoments mv = moments(fv);
        spectral_moments.push_back(moment_row(t, ms));
        fv_moments.push_back(moment_row(t, mv));
        const MeanPair a = mean_trajectories(p, setup.init, t);
        const VariancePair d = variance_trajectories(p, setup.init, t);
        const std::tuple<const char*, double, double, double> quantities[] = {
            {"a1", a.a1, ms.a1, mv.a1},
            {"a2", a.a2, ms.a2, mv.a2},
            {"d1", d.d1, ms.d1, mv.d1},
            {"d2", d.d2, ms.d2, mv.d2}};
        for (const auto& [name, exact, spectral, finite] : quantities) {
            const double es = relative_error(spectral, exact);
            const double ev = relative_error(finite, exact);
            max_error_spectral = std::max(max_error_spectral, es);
            max_error_fv = std::max(max_error_fv, ev);
            errors.push_back({csv_number(t), name, csv_number(exact), csv_number(spectral),
                              csv_number(finite), csv_number(es), csv_number(ev)});
        }

        const double l1 = l1_distance(sp, fv);
        const bool flag = l1 > config.pde.disagreement_tolerance;
        flagged += flag ? 1 : 0;
        agreement.push_back({csv_number(t), csv_number(l1), flag ? "1" : "0"});

        json entry = {{"t", t}, {"l1_spectral_fv", l1}, {"flagged", flag}};
        for (int species = 1; species <= 2; ++species) {
            const auto profile = rescaled_profile(sp, species, u);
            double sup = 0.0;
            std::vector<std::vector<std::string>> rows;
            for (std::size_t k = 0; k < u.size(); ++k) {
                const double phi = normal_density(u[k]);
                sup = std::max(sup, std::abs(profile[k] - phi));
                rows.push_back({csv_number(u[k]), csv_number(profile[k]), csv_number(phi)});
            }
            out.write_csv("profile_t" + label + "_species" + std::to_string(species) + ".csv",
                          {"u", "profile", "normal_density"}, rows);
            entry["profile_sup_distance_" + std::to_string(species)] = sup;
        }
        per_time.push_back(entry);
    }
    out.write_csv("moments.csv", {"t", "a1", "a2", "d1", "d2"}, spectral_moments);
    out.write_csv("moments_fv.csv", {"t", "a1", "a2", "d1", "d2"}, fv_moments);
    out.write_csv("moment_errors.csv",
                  {"t", "quantity", "closed_form", "spectral", "fv", "rel_error_spectral",
                   "rel_error_fv"},
                  errors);
    out.write_csv("solver_agreement.csv", {"t", "l1_distance", "flagged"}, agreement);

    json summary = header(config, "pde");
    summary["grid"] = {{"x_min", field0.x_min}, {"dx", field0.dx}, {"cells", field0.size()}};
    summary["fv_dt"] = dt;
    summary["max_rel_error_spectral"] = max_error_spectral;
    summary["max_rel_error_fv"] = max_error_fv;
    summary["flagged_rows"] = flagged;
    summary["times"] = per_time;
    out.write_json("summary.json", summary);
    return {summary, 0};
}

RunResult cmd_scan(const ScenarioConfig& config, const RunOptions& options)
{
    validate(config);
    ScanRequest request;
    request.params = config.params;
    request.totals = config.scan.totals;
    request.c1 = config.scan.c1;
    request.s_values = config.scan.s_values;
    request.replicas = config.scan.replicas;
    request.seed = config.seed;
    const RegimeScanResult result = regime_scan(request, options.exec);

    const ArtifactWriter out = writer_for(config, options, "scan");
    std::vector<std::vector<std::string>> rows;
    std::vector<std::vector<std::string>> regions;
    for (const auto& e : result.entries) {
        rows.push_back({std::to_string(e.N), csv_number(e.s), csv_number(e.R_over_N),
                        csv_number(e.std_error)});
        regions.push_back({std::to_string(e.N), csv_number(e.s), csv_number(result.fit.kappa2 * e.s),
                           std::to_string(classify_region(result.fit.kappa2, e.s))});
    }
    out.write_csv("scan.csv", {"N", "s", "R_over_N", "std_error"}, rows);
    out.write_csv("scan_regions.csv", {"N", "s", "kappa2_s", "region"}, regions);

    const json fit = {{"kappa2", result.fit.kappa2},
                      {"h", result.fit.h},
                      {"h_kappa2", result.h_kappa2},
                      {"residual", result.fit.residual}};
    out.write_json("scan_fit.json", fit);

    json summary = header(config, "scan");
    summary["fit"] = fit;
    summary["flat_likelihood"] = result.fit.flat_likelihood;
    json per_n = json::array();
    for (std::size_t k = 0; k < result.fits_per_N.size(); ++k) {
        per_n.push_back({{"N", request.totals[k]},
                         {"kappa2", result.fits_per_N[k].kappa2},
                         {"h", result.fits_per_N[k].h},
                         {"residual", result.fits_per_N[k].residual},
                         {"flat_likelihood", result.fits_per_N[k].flat_likelihood}});
    }
    summary["fits_per_N"] = per_n;
    summary["region_thresholds"] = {{"region1_below", 0.1}, {"region3_above", 5.0}};
    out.write_json("summary.json", summary);
    return {summary, 0};
}

} // namespace tsync
