#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "umh/stimulus.hpp"

namespace umh {

struct SpectrumComponent {
    double frequency = 0.0;             // Hz
    double amplitude = 0.0;             // cosine amplitude at that frequency
    std::complex<double> phasor{0, 0};  // complex single-bin projection
};

struct SpectrumReport {
    double dc = 0.0;
    std::vector<SpectrumComponent> components;
    double residual_rms = 0.0;  // RMS of series minus reconstruction
};

/// Single-bin discrete Fourier projections at DC and each probe frequency.
/// The series must span an integer number of periods of every probe (and stay
/// below Nyquist), otherwise a DomainError names the offending frequency.
/// Exact on conforming windows; no windowing leakage to reason about.
SpectrumReport spectrum(const EnvelopeSeries& series, std::span<const double> probe_freqs);

struct EnvelopeCheck {
    std::string name;
    double expected = 0.0;
    double actual = 0.0;
    bool pass = false;
};

struct VerifyReport {
    bool pass = false;
    double tolerance = 0.0;
    std::vector<EnvelopeCheck> checks;
    double residual_rms = 0.0;
};

/// Checks a rendered envelope against its spec: DC = a_max*(1 - a_am/2) and the
/// component at each modulation tone = a_max*a_am*weight/2 (weight lambda at
/// f_am1, 1-lambda at f_am2; zero-frequency tones fold into DC). The residual
/// must also stay within tol. Failures are report entries, not exceptions.
VerifyReport verify_envelope(const StimulusSpec& spec, const EnvelopeSeries& series, double tol);

void write_spectrum_csv(const SpectrumReport& report, std::ostream& out);
std::string format_spectrum_text(const SpectrumReport& report);
std::string format_verify_text(const VerifyReport& report);

}  // namespace umh
