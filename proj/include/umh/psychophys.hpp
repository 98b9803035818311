#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace umh {

enum class Series { Ascending, Descending };
enum class Response { No, Yes };

/// One staircase series of the interleaved procedure. Values move on the fixed
/// 0.02 grid; "no" steps up, "yes" steps down; a response flip records a
/// reversal at the current value and turns the series around. A series pinned
/// at a clamp bound (0 or 1) while the response keeps pushing outward also
/// records a reversal (bound turnaround), so extreme observers still finish.
/// Six reversals end the series.
struct StaircaseState {
    Series series = Series::Ascending;
    double step = 0.02;
    int level = 0;      // current = level * step, level in [0, 50]
    int movement = +1;  // +1 stepping up, -1 stepping down
    double current = 0.0;
    std::vector<double> reversals;
    int last_response = -1;  // -1 none, 0 no, 1 yes
    bool finished = false;

    static StaircaseState ascending();   // starts at 0
    static StaircaseState descending();  // starts at 1
};

constexpr int kStaircaseReversals = 6;

StaircaseState staircase_next(const StaircaseState& state, Response response);

/// Mean of the last three reversal values of each finished series.
double staircase_estimate(const StaircaseState& ascending, const StaircaseState& descending);

/// Hard-threshold synthetic observer with optional seeded lapse noise.
struct ObserverModel {
    double threshold = 0.5;   // A^AM value
    double lapse_rate = 0.0;  // probability of flipping a response
    std::uint64_t seed = 0;

    void validate() const;
};

enum class InterleavePolicy { Alternate, SeededRandom };

struct ObserverRun {
    double estimate = 0.0;
    StaircaseState ascending;
    StaircaseState descending;
    int trials = 0;
};

/// Drives both series to completion; responses are (current >= threshold),
/// flipped with probability lapse_rate under the seeded generator.
ObserverRun run_observer(const ObserverModel& model,
                         InterleavePolicy policy = InterleavePolicy::Alternate);

enum class Experiment { Exp2, Exp3, Exp4 };

struct Trial {
    std::string block;
    std::string stimulus;
    double parameter = 0.0;        // A^AM for the trial
    int repetition = 0;
    bool reference_rotates = true; // Exp2 reference foci were static
    std::string material;          // Exp4 comparison material
};

struct TrialSchedule {
    Experiment experiment;
    std::uint64_t seed = 0;
    std::vector<Trial> trials;
};

/// Seeded trial order per experiment: Exp2 = 2 blocks x 4 types x 11 A^AM
/// steps, Exp3 = 6 presets x 2, Exp4 = (6 presets + control) x 4 materials.
TrialSchedule make_schedule(Experiment experiment, std::uint64_t seed);

void write_schedule_csv(const TrialSchedule& schedule, std::ostream& out);

enum class FitModel { Linear, Exponential };

struct FitResult {
    FitModel model = FitModel::Linear;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;  // exponential only
    double r_squared = 0.0;
    bool converged = true;
    std::string diagnostic;
};

/// Least squares for I = a*x + b.
FitResult fit_linear(std::span<const std::pair<double, double>> points);

/// Least squares for I = c*e^(a*x) + b; a searched on [-50, 50] with
/// geometric window refinement, (b, c) closed-form per candidate, ties broken
/// toward smaller |a|.
FitResult fit_exponential(std::span<const std::pair<double, double>> points);

}  // namespace umh
