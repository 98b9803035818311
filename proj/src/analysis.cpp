#include "umh/analysis.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "umh/errors.hpp"
#include "umh/io_util.hpp"

namespace umh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

SpectrumReport spectrum(const EnvelopeSeries& series, std::span<const double> probe_freqs) {
    const std::size_t m = series.samples.size();
    if (m < 2) throw DomainError("spectrum: series needs at least 2 samples");
    if (!(series.sample_rate > 0.0)) throw DomainError("spectrum: sample_rate must be > 0");

    std::vector<long> bins;
    for (double f : probe_freqs) {
        if (!(f > 0.0)) throw DomainError("spectrum: probe frequencies must be > 0");
        if (f >= series.sample_rate / 2.0) {
            std::ostringstream msg;
            msg << "spectrum: probe " << f << " Hz is at or above Nyquist";
            throw DomainError(msg.str());
        }
        const double periods = f * static_cast<double>(m) / series.sample_rate;
        const double rounded = std::round(periods);
        if (std::abs(periods - rounded) > 1e-9 || rounded < 1.0) {
            std::ostringstream msg;
            msg << "spectrum: series does not span an integer number of periods of " << f << " Hz";
            throw DomainError(msg.str());
        }
        const long bin = std::lround(rounded);
        for (long other : bins)
            if (other == bin) {
                std::ostringstream msg;
                msg << "spectrum: probe " << f << " Hz duplicates an earlier bin";
                throw DomainError(msg.str());
            }
        bins.push_back(bin);
    }

    SpectrumReport report;
    double sum = 0.0;
    for (double s : series.samples) sum += s;
    report.dc = sum / static_cast<double>(m);

    for (std::size_t i = 0; i < probe_freqs.size(); ++i) {
        const double f = probe_freqs[i];
        std::complex<double> z{0.0, 0.0};
        for (std::size_t kk = 0; kk < m; ++kk) {
            const double phase = kTwoPi * f * static_cast<double>(kk) / series.sample_rate;
            z += series.samples[kk] * std::polar(1.0, -phase);
        }
        z *= 2.0 / static_cast<double>(m);
        report.components.push_back({f, std::abs(z), z});
    }

    double rss = 0.0;
    for (std::size_t kk = 0; kk < m; ++kk) {
        double recon = report.dc;
        for (const auto& comp : report.components) {
            const double phase = kTwoPi * comp.frequency * static_cast<double>(kk) / series.sample_rate;
            recon += (comp.phasor * std::polar(1.0, phase)).real();
        }
        const double r = series.samples[kk] - recon;
        rss += r * r;
    }
    report.residual_rms = std::sqrt(rss / static_cast<double>(m));
    return report;
}

VerifyReport verify_envelope(const StimulusSpec& spec, const EnvelopeSeries& series, double tol) {
    spec.validate();

    // Expected single-bin content of Eq-form envelopes: each tone contributes
    // weight*a_am*a_max/2 at its frequency and the same amount to DC; a
    // zero-frequency tone contributes weight*a_am*a_max entirely to DC.
    std::map<double, double> expected_components;
    double dc = spec.a_max * (1.0 - spec.a_am);
    const std::pair<double, double> tones[] = {{spec.f_am1, spec.lambda},
                                               {spec.f_am2, 1.0 - spec.lambda}};
    for (const auto& [f, w] : tones) {
        const double power = spec.a_max * spec.a_am * w;
        if (f > 0.0) {
            dc += power / 2.0;
            expected_components[f] += power / 2.0;
        } else {
            dc += power;
        }
    }

    std::vector<double> probes;
    for (const auto& [f, amp] : expected_components) probes.push_back(f);
    const SpectrumReport measured = spectrum(series, probes);

    VerifyReport report;
    report.tolerance = tol;
    report.residual_rms = measured.residual_rms;
    report.pass = true;

    auto add_check = [&](const std::string& name, double expected, double actual) {
        EnvelopeCheck check{name, expected, actual, std::abs(expected - actual) <= tol};
        report.pass = report.pass && check.pass;
        report.checks.push_back(check);
    };

    add_check("dc", dc, measured.dc);
    for (const auto& comp : measured.components) {
        std::ostringstream name;
        name << "component@" << comp.frequency << "Hz";
        add_check(name.str(), expected_components.at(comp.frequency), comp.amplitude);
    }
    add_check("residual_rms", 0.0, measured.residual_rms);
    return report;
}

void write_spectrum_csv(const SpectrumReport& report, std::ostream& out) {
    out << "component,frequency_hz,amplitude\n";
    out << "dc,0," << g17(report.dc) << '\n';
    for (const auto& comp : report.components)
        out << "tone," << g17(comp.frequency) << ',' << g17(comp.amplitude) << '\n';
    out << "residual_rms,," << g17(report.residual_rms) << '\n';
}

std::string format_spectrum_text(const SpectrumReport& report) {
    std::ostringstream out;
    out << "dc            " << report.dc << '\n';
    for (const auto& comp : report.components)
        out << comp.frequency << " Hz        " << comp.amplitude << '\n';
    out << "residual rms  " << report.residual_rms << '\n';
    return out.str();
}

std::string format_verify_text(const VerifyReport& report) {
    std::ostringstream out;
    for (const auto& check : report.checks)
        out << (check.pass ? "  ok   " : "  FAIL ") << check.name << ": expected "
            << check.expected << ", got " << check.actual << '\n';
    out << (report.pass ? "PASS" : "FAIL") << " (tolerance " << report.tolerance << ")\n";
    return out.str();
}

}  // namespace umh
