#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "umh/analysis.hpp"
#include "umh/errors.hpp"
#include "umh/field.hpp"
#include "umh/geometry.hpp"
#include "umh/io_util.hpp"
#include "umh/psychophys.hpp"
#include "umh/session.hpp"
#include "umh/stimulus.hpp"
#include "umh/synthesis.hpp"

namespace fs = std::filesystem;
using namespace umh;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;

std::string default_out_dir() {
    const char* env = std::getenv("UMH_OUT_DIR");
    return env && *env ? env : ".";
}

fs::path prepare_out_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

std::ofstream open_output(const fs::path& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    return out;
}

struct SpecArgs {
    std::string preset_name;
    std::string spec_file;

    void add_to(CLI::App* cmd) {
        auto* p = cmd->add_option("--preset", preset_name, "named stimulus preset");
        auto* f = cmd->add_option("--spec-file", spec_file, "stimulus spec JSON file");
        p->excludes(f);
    }

    StimulusSpec resolve() const {
        if (!preset_name.empty()) return preset(preset_name);
        if (!spec_file.empty()) return load_stimulus_spec(spec_file);
        throw ConfigError("provide exactly one of --preset or --spec-file");
    }
};

DriveMode parse_mode(const std::string& mode) {
    if (mode == "superposition") return DriveMode::Superposition;
    if (mode == "literal-phase-sum") return DriveMode::LiteralPhaseSum;
    throw ConfigError("mode must be 'superposition' or 'literal-phase-sum'");
}

int cmd_presets() {
    std::cout << "name,f_lm_hz,radius_mm,spacing_mm,foci_count,f_am1_hz,f_am2_hz,lambda,a_am,a_max\n";
    for (const auto& name : preset_names()) {
        const StimulusSpec s = preset(name);
        std::cout << name << ',' << g17(s.f_lm) << ',' << g17(s.radius * 1e3) << ','
                  << g17(s.spacing * 1e3) << ',' << s.foci_count << ',' << g17(s.f_am1) << ','
                  << g17(s.f_am2) << ',' << (s.a_am == 0.0 ? std::string("-") : g17(s.lambda))
                  << ',' << g17(s.a_am) << ',' << g17(s.a_max) << '\n';
    }
    return kExitOk;
}

int cmd_render(const SpecArgs& spec_args, double duration_s, double rate_hz,
               const std::vector<double>& center_mm, const std::string& offset_mode,
               const std::string& out_dir) {
    StimulusSpec spec = spec_args.resolve();
    if (duration_s >= 0.0) spec.duration = duration_s;
    const Vec3 center{center_mm[0] * 1e-3, center_mm[1] * 1e-3, center_mm[2] * 1e-3};
    const FocusOffsetMode mode =
        offset_mode == "small-angle" ? FocusOffsetMode::SmallAngle : FocusOffsetMode::ChordExact;

    const auto dir = prepare_out_dir(out_dir);
    const EnvelopeSeries envelope = render_envelope(spec, rate_hz);
    {
        auto out = open_output(dir / "envelope.csv");
        write_envelope_csv(envelope, out);
    }
    const auto frames = render_stimulus(spec, center, rate_hz, mode);
    {
        auto out = open_output(dir / "trajectory.csv");
        write_trajectory_csv(frames, out);
    }
    std::cout << "wrote " << envelope.samples.size() << " envelope samples and " << frames.size()
              << " trajectory frames to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_field(const SpecArgs& spec_args, double t_s, const std::string& mode_name,
              double grid_extent_cm, double grid_res_mm, const std::vector<double>& center_mm,
              const std::string& array_file, double piston_radius_mm, double reference_pa_m,
              double absorption, bool quantize, const std::string& out_dir) {
    const StimulusSpec spec = spec_args.resolve();
    const ArrayConfig config =
        array_file.empty() ? ArrayConfig::default_8unit() : load_array_config(array_file);
    const TransducerArray array = build_array(config);
    const Vec3 center{center_mm[0] * 1e-3, center_mm[1] * 1e-3, center_mm[2] * 1e-3};

    SynthesisOptions options;
    options.mode = parse_mode(mode_name);
    options.quantize_8bit = quantize;

    FociFrame frame;
    frame.time = t_s;
    frame.foci = trajectory_at(spec, center, t_s);
    frame.amplitude = envelope_at(spec, t_s);
    const DriveFrame drive = drive_for_frame(array, frame, options);

    PistonModel model;
    model.radius = piston_radius_mm * 1e-3;
    model.reference_pressure = reference_pa_m;
    model.absorption = absorption;

    const int resolution = static_cast<int>(std::lround(grid_extent_cm * 10.0 / grid_res_mm)) + 1;
    const GridSpec grid = GridSpec::xz_plane(center, grid_extent_cm * 1e-2, resolution);
    const FieldMap map = field_map(array, drive, grid, model);

    const auto dir = prepare_out_dir(out_dir);
    {
        auto out = open_output(dir / "field.csv");
        write_field_csv(map, out);
    }
    {
        auto out = open_output(dir / "field.pgm", true);
        write_field_pgm(map, out);
    }

    const auto metrics = focal_metrics(map, frame.foci, wavelength(array.medium));
    std::cout << "field map " << grid.nu << "x" << grid.nv << " written to " << dir.string() << '\n';
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        const auto& m = metrics[i];
        if (m.focused)
            std::cout << "focus " << i + 1 << ": peak |p| " << m.peak_magnitude << " at offset "
                      << m.offset * 1e3 << " mm, peak/mean " << m.peak_to_mean << '\n';
        else
            std::cout << "focus " << i + 1 << ": not focused\n";
    }
    return kExitOk;
}

int cmd_session(const std::string& config_file, const std::string& verify_log,
                const std::string& array_file, const std::string& out_dir) {
    if (!verify_log.empty()) {
        const SessionLog log = read_drive_log(verify_log);
        const fs::path tmp = fs::path(verify_log).string() + ".verify.tmp";
        write_drive_log(log, tmp.string());
        std::ifstream a(verify_log, std::ios::binary), b(tmp, std::ios::binary);
        std::ostringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        fs::remove(tmp);
        if (sa.str() != sb.str()) {
            std::cerr << "round-trip mismatch for " << verify_log << '\n';
            return kExitDomain;
        }
        std::cout << "round-trip OK: " << log.drive_frames.size() << " frames, "
                  << (log.drive_frames.empty() ? 0 : log.drive_frames[0].amplitudes.size())
                  << " transducers\n";
        return kExitOk;
    }

    if (config_file.empty()) throw ConfigError("session: provide --config FILE or --verify LOG");
    const SessionSetup setup = load_session_config(config_file);
    const ArrayConfig config =
        array_file.empty() ? ArrayConfig::default_8unit() : load_array_config(array_file);
    const TransducerArray array = build_array(config);

    const SessionLog log = run_stroke_session(array, setup.config, setup.stimulus);
    for (const auto& warning : log.warnings) std::cerr << "warning: " << warning << '\n';

    const auto dir = prepare_out_dir(out_dir);
    write_drive_log(log, (dir / "drive.udf1").string());
    {
        auto out = open_output(dir / "tracking.csv");
        write_tracking_csv(log, out);
    }
    {
        auto out = open_output(dir / "summary.json");
        out << session_summary_json(log, setup.config) << '\n';
    }
    std::cout << log.drive_frames.size() << " drive frames, " << log.tracking_events.size()
              << " tracking events -> " << dir.string() << '\n';
    return kExitOk;
}

std::vector<std::pair<double, double>> read_xy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::pair<double, double>> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) continue;
        try {
            points.emplace_back(std::stod(a), std::stod(b));
        } catch (const std::exception&) {
            continue;  // header or comment line
        }
    }
    if (points.empty()) throw ConfigError(path + " holds no numeric x,y rows");
    return points;
}

int cmd_psycho(const std::string& tag, double threshold, double lapse, std::uint64_t seed,
               const std::string& policy_name, const std::string& input_file,
               const std::string& model_name, const std::string& out_dir) {
    const auto dir = prepare_out_dir(out_dir);

    if (tag == "exp1") {
        ObserverModel model{threshold, lapse, seed};
        const InterleavePolicy policy = policy_name == "random" ? InterleavePolicy::SeededRandom
                                                                : InterleavePolicy::Alternate;
        const ObserverRun run = run_observer(model, policy);
        auto out = open_output(dir / "exp1_reversals.csv");
        out << "series,reversal,a_am\n";
        for (std::size_t i = 0; i < run.ascending.reversals.size(); ++i)
            out << "ascending," << i + 1 << ',' << g17(run.ascending.reversals[i]) << '\n';
        for (std::size_t i = 0; i < run.descending.reversals.size(); ++i)
            out << "descending," << i + 1 << ',' << g17(run.descending.reversals[i]) << '\n';
        std::cout << "estimate " << g17(run.estimate) << " after " << run.trials << " trials\n";
        return kExitOk;
    }

    if (tag == "exp2" || tag == "exp3" || tag == "exp4") {
        const Experiment exp = tag == "exp2"   ? Experiment::Exp2
                               : tag == "exp3" ? Experiment::Exp3
                                               : Experiment::Exp4;
        const TrialSchedule schedule = make_schedule(exp, seed);
        auto out = open_output(dir / ("schedule_" + tag + ".csv"));
        write_schedule_csv(schedule, out);
        std::cout << schedule.trials.size() << " trials -> "
                  << (dir / ("schedule_" + tag + ".csv")).string() << '\n';
        return kExitOk;
    }

    if (tag == "exp2-fit") {
        if (input_file.empty()) throw ConfigError("exp2-fit: provide --input CSV");
        const auto points = read_xy_csv(input_file);
        auto out = open_output(dir / "fits.csv");
        out << "model,a,b,c,r_squared\n";
        auto report = [&](const FitResult& fit) {
            const char* name = fit.model == FitModel::Linear ? "linear" : "exponential";
            out << name << ',' << g17(fit.a) << ',' << g17(fit.b) << ',' << g17(fit.c) << ','
                << g17(fit.r_squared) << '\n';
            std::cout << name << ": a=" << g17(fit.a) << " b=" << g17(fit.b);
            if (fit.model == FitModel::Exponential) std::cout << " c=" << g17(fit.c);
            std::cout << " R^2=" << g17(fit.r_squared) << '\n';
            if (!fit.converged) std::cerr << "warning: " << fit.diagnostic << '\n';
        };
        if (model_name == "linear" || model_name == "both") report(fit_linear(points));
        if (model_name == "exponential" || model_name == "both") report(fit_exponential(points));
        return kExitOk;
    }

    throw ConfigError("unknown experiment '" + tag +
                      "'; valid tags: exp1 exp2 exp3 exp4 exp2-fit");
}

int cmd_verify(const SpecArgs& spec_args, double duration_s, double rate_hz, double tol,
               const std::string& out_dir) {
    StimulusSpec spec = spec_args.resolve();
    if (duration_s >= 0.0) spec.duration = duration_s;
    const EnvelopeSeries series = render_envelope(spec, rate_hz);
    const VerifyReport report = verify_envelope(spec, series, tol);
    std::cout << format_verify_text(report);

    const auto dir = prepare_out_dir(out_dir);
    const SpectrumReport spectrum_report = [&] {
        std::vector<double> probes;
        for (const auto& check : report.checks)
            if (check.name.rfind("component@", 0) == 0)
                probes.push_back(std::stod(check.name.substr(10)));
        return spectrum(series, probes);
    }();
    auto out = open_output(dir / "spectrum.csv");
    write_spectrum_csv(spectrum_report, out);
    return report.pass ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ultrasound midair haptics rendering toolkit"};
    app.require_subcommand(1);

    std::string out_dir = default_out_dir();

    // presets
    app.add_subcommand("presets", "list the named stimuli");

    // render
    auto* render = app.add_subcommand("render", "render envelope and foci trajectory CSVs");
    SpecArgs render_spec;
    render_spec.add_to(render);
    double render_duration = -1.0, render_rate = 1000.0;
    std::vector<double> render_center{0.0, 200.0, 0.0};
    std::string render_offset_mode = "chord-exact";
    render->add_option("--duration-s", render_duration, "override stimulus duration");
    render->add_option("--rate-hz", render_rate, "frame rate (default 1000)");
    render->add_option("--center-mm", render_center, "stimulus centre, mm")->expected(3);
    render->add_option("--offset-mode", render_offset_mode, "chord-exact|small-angle")
        ->check(CLI::IsMember({"chord-exact", "small-angle"}));
    render->add_option("--out", out_dir, "output directory");

    // field
    auto* field = app.add_subcommand("field", "simulate the acoustic field of one instant");
    SpecArgs field_spec;
    field_spec.add_to(field);
    double field_t = 0.0, field_extent_cm = 10.0, field_res_mm = 1.0;
    double piston_radius_mm = 4.5, reference_pa_m = 1.0, absorption = 0.0;
    std::vector<double> field_center{0.0, 200.0, 0.0};
    std::string field_mode = "superposition", field_array_file;
    bool field_quantize = false;
    field->add_option("--t-s", field_t, "instant to simulate");
    field->add_option("--mode", field_mode, "superposition|literal-phase-sum")
        ->check(CLI::IsMember({"superposition", "literal-phase-sum"}));
    field->add_option("--grid-extent-cm", field_extent_cm, "square map side length");
    field->add_option("--grid-res-mm", field_res_mm, "grid step");
    field->add_option("--center-mm", field_center, "stimulus centre, mm")->expected(3);
    field->add_option("--array-file", field_array_file, "array config JSON");
    field->add_option("--piston-radius-mm", piston_radius_mm, "transducer piston radius");
    field->add_option("--reference-pa-m", reference_pa_m, "Pa*m per unit drive at 1 m");
    field->add_option("--absorption-np-per-m", absorption, "air absorption, Np/m");
    field->add_flag("--quantize-8bit", field_quantize, "quantize drive to 8-bit");
    field->add_option("--out", out_dir, "output directory");

    // session
    auto* session = app.add_subcommand("session", "run a simulated stroke session");
    std::string session_config, session_verify, session_array_file;
    session->add_option("--config", session_config, "session config JSON");
    session->add_option("--verify", session_verify, "round-trip check an existing drive log");
    session->add_option("--array-file", session_array_file, "array config JSON");
    session->add_option("--out", out_dir, "output directory");

    // psycho
    auto* psycho = app.add_subcommand("psycho", "psychophysical harnesses");
    std::string psycho_tag;
    double psycho_threshold = 0.5, psycho_lapse = 0.0;
    std::uint64_t psycho_seed = 0;
    std::string psycho_policy = "alternate", psycho_input, psycho_model = "both";
    psycho->add_option("experiment", psycho_tag, "exp1|exp2|exp3|exp4|exp2-fit")->required();
    psycho->add_option("--threshold", psycho_threshold, "observer threshold (exp1)");
    psycho->add_option("--lapse", psycho_lapse, "observer lapse rate (exp1)");
    psycho->add_option("--seed", psycho_seed, "seed for schedules and lapses");
    psycho->add_option("--policy", psycho_policy, "alternate|random series interleaving")
        ->check(CLI::IsMember({"alternate", "random"}));
    psycho->add_option("--input", psycho_input, "x,y CSV for exp2-fit");
    psycho->add_option("--model", psycho_model, "linear|exponential|both (exp2-fit)")
        ->check(CLI::IsMember({"linear", "exponential", "both"}));
    psycho->add_option("--out", out_dir, "output directory");

    // verify
    auto* verify = app.add_subcommand("verify", "check a rendered envelope against its spec");
    SpecArgs verify_spec;
    verify_spec.add_to(verify);
    double verify_duration = -1.0, verify_rate = 1000.0, verify_tol = 1e-6;
    verify->add_option("--duration-s", verify_duration, "override stimulus duration");
    verify->add_option("--rate-hz", verify_rate, "sample rate (default 1000)");
    verify->add_option("--tol", verify_tol, "tolerance (default 1e-6)");
    verify->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("presets")) return cmd_presets();
        if (app.got_subcommand("render"))
            return cmd_render(render_spec, render_duration, render_rate, render_center,
                              render_offset_mode, out_dir);
        if (app.got_subcommand("field"))
            return cmd_field(field_spec, field_t, field_mode, field_extent_cm, field_res_mm,
                             field_center, field_array_file, piston_radius_mm, reference_pa_m,
                             absorption, field_quantize, out_dir);
        if (app.got_subcommand("session"))
            return cmd_session(session_config, session_verify, session_array_file, out_dir);
        if (app.got_subcommand("psycho"))
            return cmd_psycho(psycho_tag, psycho_threshold, psycho_lapse, psycho_seed,
                              psycho_policy, psycho_input, psycho_model, out_dir);
        if (app.got_subcommand("verify"))
            return cmd_verify(verify_spec, verify_duration, verify_rate, verify_tol, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitOk;
}
