#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chirpqfi/fisher.hpp>
#include <chirpqfi/modes.hpp>
#include <chirpqfi/numerics/derivative.hpp>

#include "support.hpp"

#include <cmath>

using namespace chirpqfi;
using support::kind_of;
using support::rel_diff;

namespace {

// Window wide enough for Hermite-Gauss modes up to J.
Grid modal_grid(const PulseSpec& spec, BasisKind kind, int J) {
    WindowOptions w;
    if (kind == BasisKind::HermiteGauss) {
        const double reach = std::sqrt(2.0) * spec.duration * (std::sqrt(2.0 * J + 1.0) + 6.0);
        w.left = std::min(-8.0 * spec.duration, -reach);
        w.right = std::max(pulse_support(spec).second + w.tail, reach);
    }
    return default_grid(spec, w);
}

ModalSet modal(const PulseSpec& spec, const SystemParams& s, BasisKind kind, int J) {
    const auto pulse = sample_pulse(spec, modal_grid(spec, kind, J));
    const auto wp = outgoing_wavepacket(pulse, s, excited_amplitude(pulse, s), pulse.grid.t_end());
    return project_amplitudes(wp, build_basis(kind, J, pulse));
}

double ratio_at(const ModalSet& m, int J) { return mode_cfi(outcome_distribution(m, J)) / m.breakdown().total; }

}  // namespace

TEST_SUITE("bases") {
    TEST_CASE("ground Hermite-Gauss mode is the gaussian envelope") {
        const auto spec = gaussian(1.0);
        const auto pulse = sample_pulse(spec, default_grid(spec));
        const auto b = hermite_gauss_basis(1.0, 0, pulse.grid);
        REQUIRE(b.size() == 1);
        for (std::size_t i = 0; i < pulse.grid.size(); ++i) CHECK(std::abs(b.functions[0][i] - pulse.values[i]) < 1e-10);
    }

    TEST_CASE("Gram matrix is the identity") {
        const auto g = gaussian(2.5);
        CHECK(build_basis(BasisKind::HermiteGauss, 30, sample_pulse(g, modal_grid(g, BasisKind::HermiteGauss, 30))).gram_defect < 1e-8);
        for (const auto& spec : {gaussian(2.5), gaussian(1.0, SinusoidalPhase{1.0}), exponential(4.0, QuadraticPhase{1.0})}) {
            const auto pulse = sample_pulse(spec, default_grid(spec));
            const auto b = envelope_basis(pulse, 25);
            CHECK(b.size() == 26);
            CHECK(b.gram_defect < 1e-8);
            CHECK(gram_defect(b.functions, b.weights()) == b.gram_defect);
        }
    }

    TEST_CASE("envelope basis starts from the complex pulse") {
        const auto spec = exponential(4.0, QuadraticPhase{1.0});
        const auto pulse = sample_pulse(spec, default_grid(spec));
        const auto b = envelope_basis(pulse, 3);
        double imag = 0.0;
        for (std::size_t i = 0; i < pulse.grid.size(); ++i) {
            CHECK(std::abs(b.functions[0][i] - pulse.values[i]) < 1e-12);
            imag = std::max(imag, std::abs(b.functions[0][i].imag()));
        }
        CHECK(imag > 0.1);
    }

    TEST_CASE("construction errors") {
        const auto spec = gaussian(2.5);
        auto pulse = sample_pulse(spec, default_grid(spec));
        CHECK(kind_of([&] { hermite_gauss_basis(2.5, 30, Grid(-60.0, 60.0, 300)); }) == ErrorKind::GridTooNarrow);
        CHECK(kind_of([&] { hermite_gauss_basis(2.5, -1, pulse.grid); }) == ErrorKind::InvalidArgument);
        std::fill(pulse.values.begin(), pulse.values.end(), cplx(0.0));
        CHECK(kind_of([&] { envelope_basis(pulse, 2); }) == ErrorKind::DegenerateSeed);
    }
}

TEST_SUITE("projections") {
    TEST_CASE("far-detuned pulse passes unscattered") {
        const auto m = modal(gaussian(1.0), SystemParams::dimensionless(0.0, 200.0), BasisKind::GramSchmidtFromEnvelope, 5);
        CHECK(std::abs(m.b[0]) > 0.999);
        double rest = 0.0;
        for (std::size_t j = 1; j < m.b.size(); ++j) rest += std::norm(m.b[j]);
        CHECK(rest < 1e-4);
    }

    TEST_CASE("real gaussian: zeroth amplitude is real") {
        const auto m = modal(gaussian(2.0), SystemParams::dimensionless(5.0), BasisKind::GramSchmidtFromEnvelope, 4);
        CHECK(std::abs(m.b[0].imag()) < 1e-8);
    }

    TEST_CASE("completeness of the Hermite-Gauss expansion") {
        const auto m = modal(gaussian(2.5), SystemParams::dimensionless(5.0), BasisKind::HermiteGauss, 20);
        double s = 0.0;
        for (const auto& b : m.b) s += std::norm(b);
        CHECK(s >= 0.999 * (1.0 - m.loss.p));
        CHECK(s <= 1.0 - m.loss.p + 1e-6);
        CHECK(1.0 - m.loss.p - s >= -1e-8);
        const auto I = asymptotic_integrals(PulseSpectrum(gaussian(2.5)), SystemParams::dimensionless(5.0));
        CHECK(std::abs(m.loss.p - I.p) < 1e-6);
    }

    TEST_CASE("grid mismatch") {
        const auto spec = gaussian(1.0);
        const auto pulse = sample_pulse(spec, default_grid(spec));
        const auto s = SystemParams::dimensionless(1.0);
        const auto wp = outgoing_wavepacket(pulse, s, excited_amplitude(pulse, s), pulse.grid.t_end());
        const auto other = sample_pulse(spec, modal_grid(spec, BasisKind::HermiteGauss, 40));
        CHECK(kind_of([&] { project_amplitudes(wp, hermite_gauss_basis(1.0, 2, other.grid)); }) == ErrorKind::GridMismatch);
    }

    TEST_CASE("modal derivatives against re-solved dynamics") {
        const auto spec = gaussian(2.5, QuadraticPhase{1.0});
        const auto pulse = sample_pulse(spec, modal_grid(spec, BasisKind::HermiteGauss, 6));
        const auto basis = hermite_gauss_basis(2.5, 6, pulse.grid);
        const auto s = SystemParams::dimensionless(5.0);
        auto project = [&](double G) {
            const auto q = s.with_coupling(G);
            return project_amplitudes(outgoing_wavepacket(pulse, q, excited_amplitude(pulse, q), pulse.grid.t_end()), basis);
        };
        const auto m = project(1.0);
        for (std::size_t j = 0; j < basis.size(); ++j) {
            const cplx fd = central_derivative([&](double G) { return project(G).b[j]; }, 1.0, 1e-4);
            CAPTURE(j);
            CHECK(std::abs(fd - m.d[j]) <= 1e-5 * std::abs(fd) + 1e-12);
        }
    }
}

TEST_SUITE("outcomes") {
    TEST_CASE("probabilities sum to one and derivatives to zero") {
        for (const auto& spec : {gaussian(2.5, LinearPhase{1.0}), exponential(4.0, QuadraticPhase{1.0})}) {
            const auto m = modal(spec, SystemParams::dimensionless(5.0), BasisKind::GramSchmidtFromEnvelope, 10);
            for (int J : {0, 4, 10}) {
                const auto o = outcome_distribution(m, J);
                CHECK(o.p.size() == static_cast<std::size_t>(J) + 3);
                double sp = 0.0, sdp = 0.0;
                for (std::size_t i = 0; i < o.p.size(); ++i) {
                    sp += o.p[i];
                    sdp += o.dp[i];
                }
                CHECK(std::abs(sp - 1.0) < 1e-8);
                CHECK(std::abs(sdp) < 1e-8);
            }
            CHECK(kind_of([&] { outcome_distribution(m, 11); }) == ErrorKind::InvalidArgument);
        }
    }

    TEST_CASE("no environment coupling: vacuum outcome vanishes") {
        const auto m = modal(gaussian(2.5), SystemParams::dimensionless(0.0), BasisKind::HermiteGauss, 30);
        const auto o = outcome_distribution(m, 30);
        CHECK(std::abs(o.p[0]) < 1e-10);
        CHECK(std::abs(o.dp[0]) < 1e-10);
    }

    TEST_CASE("near-zero outcomes") {
        CHECK(mode_cfi({{0.5, 0.5, 1e-16}, {1.0, -1.0, 1e-13}}) == doctest::Approx(4.0));
        CHECK(kind_of([] { mode_cfi({{0.5, 0.5, 0.0}, {1.0, -1.1, 0.1}}); }) == ErrorKind::SingularOutcome);
    }

    TEST_CASE("mode-resolved information is bounded by the QFI and grows with J") {
        for (const auto& spec : {gaussian(2.5), gaussian(2.5, LinearPhase{1.0}), gaussian(2.5, QuadraticPhase{1.0}),
                                 gaussian(2.5, SinusoidalPhase{1.0})}) {
            for (auto kind : {BasisKind::HermiteGauss, BasisKind::GramSchmidtFromEnvelope}) {
                const auto m = modal(spec, SystemParams::dimensionless(5.0), kind, 20);
                const double qfi = m.breakdown().total;
                double prev = 0.0;
                for (int J = 0; J <= 20; ++J) {
                    const double c = mode_cfi(outcome_distribution(m, J));
                    CHECK(c <= qfi + 1e-6);
                    CHECK(c >= prev - 1e-10);
                    prev = c;
                }
            }
        }
    }

    TEST_CASE("unmodulated gaussian saturates in the Hermite-Gauss basis") {
        const auto m = modal(gaussian(2.5), SystemParams::dimensionless(5.0), BasisKind::HermiteGauss, 20);
        CHECK(ratio_at(m, 20) >= 0.999);
    }

    TEST_CASE("detuned gaussian keeps a gap in the Hermite-Gauss basis") {
        const auto m = modal(gaussian(2.5, LinearPhase{1.0}), SystemParams::dimensionless(5.0), BasisKind::HermiteGauss, 20);
        CHECK(ratio_at(m, 20) < 0.999);
        CHECK(ratio_at(m, 20) > 0.0);
    }
}

TEST_SUITE("optimal measurements") {
    TEST_CASE("two-outcome measurement saturates for the real gaussian") {
        const auto m = modal(gaussian(2.5), SystemParams::dimensionless(5.0), BasisKind::HermiteGauss, 2);
        const auto r = optimal_two_outcome_povm(m, m.conditional_qfi());
        CHECK(r.orthonormality < 1e-6);
        CHECK(std::abs(r.cfi / m.breakdown().total - 1.0) < 1e-6);
        const auto closed = gaussian_closed_forms(5.0, 0.2);
        CHECK(std::abs(r.cfi / closed.total - 1.0) < 1e-6);
        CHECK(std::abs(inner(m.packet.weights, r.plus, r.minus)) < 1e-6);
    }

    TEST_CASE("SLD basis agrees with the two-outcome measurement for symmetric pulses") {
        for (const auto& spec : {gaussian(2.5), gaussian(2.5, QuadraticPhase{1.0}), gaussian(8.0, SinusoidalPhase{1.0})}) {
            const auto m = modal(spec, SystemParams::dimensionless(5.0), BasisKind::GramSchmidtFromEnvelope, 1);
            const auto povm = optimal_two_outcome_povm(m, m.conditional_qfi());
            const auto sld = sld_eigenbasis(m);
            CHECK(rel_diff(povm.cfi, sld.cfi) < 1e-6);
            CHECK(rel_diff(sld.cfi, m.breakdown().total) < 1e-6);
        }
    }

    TEST_CASE("chirped exponential: fixed basis fails, SLD basis saturates") {
        const auto m = modal(exponential(4.0, QuadraticPhase{1.0}), SystemParams::dimensionless(5.0),
                             BasisKind::GramSchmidtFromEnvelope, 20);
        CHECK(kind_of([&] { optimal_two_outcome_povm(m, m.conditional_qfi()); }) == ErrorKind::AsymmetricPulse);
        const auto sld = sld_eigenbasis(m);
        const double qfi = m.breakdown().total;
        CHECK(sld.orthonormality < 1e-6);
        CHECK(std::abs(sld.cfi - qfi) < 1e-6);
        CHECK(qfi - mode_cfi(outcome_distribution(m, 20)) > 1e-5);
        const auto as = asymptotic_qfi(exponential(4.0, QuadraticPhase{1.0}), SystemParams::dimensionless(5.0));
        CHECK(rel_diff(qfi, as.total) < 1e-4);
    }

    TEST_CASE("parameter-independent state carries no information") {
        auto m = modal(gaussian(2.5), SystemParams::dimensionless(0.0), BasisKind::HermiteGauss, 1);
        std::fill(m.packet.d_value.begin(), m.packet.d_value.end(), cplx(0.0));
        m.loss.dp = 0.0;
        CHECK(kind_of([&] { sld_eigenbasis(m); }) == ErrorKind::ZeroInformation);
        CHECK(kind_of([&] { optimal_two_outcome_povm(m, 0.0); }) == ErrorKind::ZeroInformation);
    }
}

TEST_SUITE("modal QFI") {
    TEST_CASE("matches the closed form for the real gaussian") {
        const auto m = modal(gaussian(2.0), SystemParams::dimensionless(5.0), BasisKind::HermiteGauss, 30);
        const double q = modal_qfi_check(m, m.loss);
        CHECK(rel_diff(q, gaussian_closed_forms(5.0, 0.25).total) < 1e-4);
    }

    TEST_CASE("imaginary overlap term vanishes for symmetric pulses") {
        const auto m = modal(gaussian(2.0, QuadraticPhase{0.05}), SystemParams::dimensionless(5.0), BasisKind::HermiteGauss, 30);
        REQUIRE(std::norm(m.d.back()) < 1e-8);
        cplx ov = 0.0;
        for (std::size_t j = 0; j < m.b.size(); ++j) ov += std::conj(m.b[j]) * m.d[j];
        CHECK(std::abs(ov.imag()) < 1e-8);
    }

    TEST_CASE("no environment coupling: classical term drops out") {
        // Re-emission leaves an e^{-t/2} tail, so a longer pulse keeps the
        // expansion short.
        const auto m = modal(gaussian(4.0), SystemParams::dimensionless(0.0), BasisKind::HermiteGauss, 30);
        const double q = modal_qfi_check(m, {0.0, 0.0});
        CHECK(rel_diff(q, gaussian_closed_forms(0.0, 0.125).total) < 1e-4);
    }

    TEST_CASE("unconverged truncation is rejected") {
        const auto m = modal(gaussian(2.0), SystemParams::dimensionless(5.0), BasisKind::HermiteGauss, 0);
        CHECK(kind_of([&] { modal_qfi_check(m, m.loss); }) == ErrorKind::TruncationNotConverged);
    }
}
