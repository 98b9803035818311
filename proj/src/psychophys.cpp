#include "umh/psychophys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "umh/errors.hpp"
#include "umh/io_util.hpp"
#include "umh/rng.hpp"
#include "umh/stimulus.hpp"

namespace umh {

namespace {

constexpr int kMaxLevel = 50;  // 1.0 / 0.02

double level_value(int level) { return level * 0.02; }

}  // namespace

StaircaseState StaircaseState::ascending() {
    StaircaseState s;
    s.series = Series::Ascending;
    s.level = 0;
    s.movement = +1;
    s.current = 0.0;
    return s;
}

StaircaseState StaircaseState::descending() {
    StaircaseState s;
    s.series = Series::Descending;
    s.level = kMaxLevel;
    s.movement = -1;
    s.current = 1.0;
    return s;
}

StaircaseState staircase_next(const StaircaseState& state, Response response) {
    if (state.finished) throw DomainError("staircase: series already finished");

    StaircaseState next = state;
    const int desired = response == Response::No ? +1 : -1;
    const bool at_bound = (state.movement > 0 && state.level == kMaxLevel) ||
                          (state.movement < 0 && state.level == 0);

    if (desired != state.movement || at_bound) {
        next.reversals.push_back(state.current);
        next.movement = desired != state.movement ? desired : -state.movement;
        if (static_cast<int>(next.reversals.size()) >= kStaircaseReversals) next.finished = true;
    }

    next.level = std::clamp(next.level + next.movement, 0, kMaxLevel);
    next.current = level_value(next.level);
    next.last_response = response == Response::Yes ? 1 : 0;
    return next;
}

double staircase_estimate(const StaircaseState& ascending, const StaircaseState& descending) {
    if (!ascending.finished || !descending.finished)
        throw DomainError("staircase: estimate requires both finished series");
    double sum = 0.0;
    for (const auto* series : {&ascending, &descending}) {
        const auto& r = series->reversals;
        for (std::size_t i = r.size() - 3; i < r.size(); ++i) sum += r[i];
    }
    return sum / 6.0;
}

void ObserverModel::validate() const {
    if (threshold < 0.0 || threshold > 1.0)
        throw ConfigError("observer: threshold must be in [0,1]");
    if (lapse_rate < 0.0 || lapse_rate >= 0.5)
        throw ConfigError("observer: lapse_rate must be in [0, 0.5)");
}

ObserverRun run_observer(const ObserverModel& model, InterleavePolicy policy) {
    model.validate();
    SplitMix64 rng(model.seed);

    ObserverRun run;
    run.ascending = StaircaseState::ascending();
    run.descending = StaircaseState::descending();

    auto respond = [&](double current) {
        bool yes = current >= model.threshold;
        if (model.lapse_rate > 0.0 && rng.uniform01() < model.lapse_rate) yes = !yes;
        return yes ? Response::Yes : Response::No;
    };

    constexpr int kTrialCap = 100000;
    bool ascending_turn = true;
    while (!run.ascending.finished || !run.descending.finished) {
        if (run.trials >= kTrialCap) throw DomainError("observer: staircase did not finish");
        if (policy == InterleavePolicy::SeededRandom)
            ascending_turn = rng.next() & 1u;
        StaircaseState& series = ascending_turn ? run.ascending : run.descending;
        if (!series.finished) {
            series = staircase_next(series, respond(series.current));
            ++run.trials;
        }
        if (policy == InterleavePolicy::Alternate) ascending_turn = !ascending_turn;
    }
    run.estimate = staircase_estimate(run.ascending, run.descending);
    return run;
}

namespace {

const std::vector<std::string>& exp_presets() {
    static const std::vector<std::string> presets = {"S-LM",      "S-30Hz-w",  "S-30Hz-s",
                                                     "S-150Hz-w", "S-150Hz-s", "S-Mix2"};
    return presets;
}

}  // namespace

TrialSchedule make_schedule(Experiment experiment, std::uint64_t seed) {
    TrialSchedule schedule;
    schedule.experiment = experiment;
    schedule.seed = seed;
    SplitMix64 rng(seed);

    switch (experiment) {
        case Experiment::Exp2: {
            // Two VAS blocks; per block the four AM types in random order, and
            // the eleven A^AM steps in random order within each type. The
            // reference stimulus foci do not rotate.
            for (const char* block : {"vibration", "pressure"}) {
                std::vector<std::string> types = {"S-30Hz", "S-150Hz", "S-Mix1", "S-Mix2"};
                rng.shuffle(types);
                for (const auto& type : types) {
                    std::vector<int> steps(11);
                    for (int i = 0; i < 11; ++i) steps[i] = i;
                    rng.shuffle(steps);
                    for (int s : steps)
                        schedule.trials.push_back({block, type, s * 0.1, 0, false, ""});
                }
            }
            break;
        }
        case Experiment::Exp3: {
            for (int rep = 0; rep < 2; ++rep)
                for (const auto& name : exp_presets())
                    schedule.trials.push_back(
                        {"discrimination", name, preset(name).a_am, rep, true, ""});
            rng.shuffle(schedule.trials);
            break;
        }
        case Experiment::Exp4: {
            const std::vector<std::string> materials = {"glass-marble", "cotton-fabric",
                                                        "sandpaper-100", "artificial-turf"};
            for (const auto& material : materials) {
                for (const auto& name : exp_presets())
                    schedule.trials.push_back(
                        {"texture", name, preset(name).a_am, 0, true, material});
                schedule.trials.push_back({"texture", "control", 0.0, 0, true, material});
            }
            rng.shuffle(schedule.trials);
            break;
        }
    }
    return schedule;
}

void write_schedule_csv(const TrialSchedule& schedule, std::ostream& out) {
    out << "index,block,stimulus,parameter,repetition,reference_rotates,material\n";
    for (std::size_t i = 0; i < schedule.trials.size(); ++i) {
        const Trial& t = schedule.trials[i];
        out << i << ',' << t.block << ',' << t.stimulus << ',' << g17(t.parameter) << ','
            << t.repetition << ',' << (t.reference_rotates ? 1 : 0) << ',' << t.material << '\n';
    }
}

// ---------------------------------------------------------------------------
// Intensity-model fits

namespace {

void check_points(std::span<const std::pair<double, double>> points, std::size_t minimum,
                  const char* what) {
    if (points.size() < minimum)
        throw DomainError(std::string(what) + ": needs at least " + std::to_string(minimum) +
                          " points");
    const double x0 = points[0].first;
    bool spread = false;
    for (const auto& [x, y] : points)
        if (x != x0) spread = true;
    if (!spread) throw DomainError(std::string(what) + ": x values are all equal");
}

double r_squared_from(double ss_res, double ss_tot) {
    // Zero variance with zero residual counts as a perfect fit.
    if (ss_tot == 0.0) return 1.0;
    return 1.0 - ss_res / ss_tot;
}

/// Least-squares (c, b) for fixed a, returning the residual sum of squares.
double exp_sse_for(double a, std::span<const std::pair<double, double>> points, double* c_out,
                   double* b_out) {
    const double n = static_cast<double>(points.size());
    double se = 0.0, see = 0.0, sy = 0.0, sey = 0.0;
    for (const auto& [x, y] : points) {
        const double e = std::exp(std::min(a * x, 700.0));
        se += e;
        see += e * e;
        sy += y;
        sey += e * y;
    }
    const double det = n * see - se * se;
    double c, b;
    if (std::abs(det) < 1e-12 * std::max(1.0, n * see)) {
        c = 0.0;
        b = sy / n;  // degenerate exponent: constant model
    } else {
        c = (n * sey - se * sy) / det;
        b = (sy - c * se) / n;
    }
    double sse = 0.0;
    for (const auto& [x, y] : points) {
        const double r = c * std::exp(std::min(a * x, 700.0)) + b - y;
        sse += r * r;
    }
    *c_out = c;
    *b_out = b;
    return sse;
}

}  // namespace

FitResult fit_linear(std::span<const std::pair<double, double>> points) {
    check_points(points, 2, "linear fit");
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    FitResult fit;
    fit.model = FitModel::Linear;
    fit.a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.b = (sy - fit.a * sx) / n;

    const double mean_y = sy / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [x, y] : points) {
        const double r = fit.a * x + fit.b - y;
        ss_res += r * r;
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    fit.r_squared = r_squared_from(ss_res, ss_tot);
    return fit;
}

FitResult fit_exponential(std::span<const std::pair<double, double>> points) {
    check_points(points, 3, "exponential fit");

    double lo = -50.0, hi = 50.0;
    double best_a = 0.0, best_c = 0.0, best_b = 0.0;
    double best_sse = std::numeric_limits<double>::infinity();
    constexpr int kCandidates = 501;
    constexpr int kLevels = 8;
    for (int level = 0; level < kLevels; ++level) {
        const double span_width = hi - lo;
        for (int i = 0; i < kCandidates; ++i) {
            const double a = lo + span_width * i / (kCandidates - 1);
            double c, b;
            const double sse = exp_sse_for(a, points, &c, &b);
            const bool better =
                sse < best_sse * (1.0 - 1e-15) ||
                (sse <= best_sse * (1.0 + 1e-15) && std::abs(a) < std::abs(best_a));
            if (better) {
                best_sse = sse;
                best_a = a;
                best_c = c;
                best_b = b;
            }
        }
        const double spacing = span_width / (kCandidates - 1);
        lo = std::max(-50.0, best_a - 2.0 * spacing);
        hi = std::min(50.0, best_a + 2.0 * spacing);
    }

    FitResult fit;
    fit.model = FitModel::Exponential;
    fit.a = best_a;
    fit.b = best_b;
    fit.c = best_c;

    double sy = 0.0;
    for (const auto& [x, y] : points) sy += y;
    const double mean_y = sy / static_cast<double>(points.size());
    double ss_tot = 0.0;
    for (const auto& [x, y] : points) ss_tot += (y - mean_y) * (y - mean_y);
    fit.r_squared = r_squared_from(best_sse, ss_tot);
    if (!std::isfinite(best_sse)) {
        fit.converged = false;
        fit.diagnostic = "search did not produce a finite residual; best candidate returned";
    }
    return fit;
}

}  // namespace umh
