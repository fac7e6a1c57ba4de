#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "borglev/dtn.hpp"
#include "borglev/estimates.hpp"
#include "borglev/fitting.hpp"
#include "borglev/potentials.hpp"
#include "borglev/probe.hpp"
#include "borglev/spectral.hpp"
#include "borglev/stability.hpp"

using namespace borglev;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double relative_gap(const ComplexMatrix& a, const ComplexMatrix& b, const GridSpec& g) {
    return l2_operator_norm(a - b, g) / l2_operator_norm(b, g);
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os << std::setprecision(4);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

Outcome forward_spectra() {
    const GridSpec g = build_grid(1.0, 1.0, 40, 40);
    const auto t0 = Clock::now();
    const SpectralData sd = solve_eigen(zero_potential(g), g, 50, false);
    const double runtime = seconds_since(t0);

    std::vector<double> continuum;
    for (int j = 1; j <= 20; ++j)
        for (int k = 1; k <= 20; ++k) continuum.push_back(M_PI * M_PI * (j * j + k * k));
    std::sort(continuum.begin(), continuum.end());
    double worst = 0.0;
    Index worst_k = 0;
    for (Index k = 0; k < 20; ++k) {
        const double e = std::abs(sd.eigenvalues[k] - continuum[std::size_t(k)]) / continuum[std::size_t(k)];
        if (e > worst) worst = e, worst_k = k + 1;
    }

    const double c = 3.75;
    const SpectralData shifted = solve_eigen(constant_potential(g, c), g, 50, false);
    double shift = 0.0;
    for (Index k = 0; k < 50; ++k)
        shift = std::max(shift, std::abs(shifted.eigenvalues[k] - sd.eigenvalues[k] - c) / std::max(1.0, sd.eigenvalues[k]));

    std::ostringstream os;
    os << "max rel err (k<=20) " << worst << " at k=" << worst_k << " (tol 1e-2); shift err " << shift
       << " (tol 1e-10); runtime " << runtime << " s (tol 60)";
    return {worst <= 1e-2 && shift <= 1e-10 && runtime <= 60.0, os.str()};
}

Outcome weyl_law() {
    const GridSpec g = build_grid(1.0, 1.0, 40, 40);
    const SpectralData sd = solve_eigen(zero_potential(g), g, 50, false);
    const WeylReport w = weyl_validate(sd, 2, 0.25);
    const double target = 1.0 / (4.0 * M_PI);
    const double gap = std::abs(w.c_n - target) / target;
    bool bound = std::isfinite(w.trace_constant) && w.trace_constant > 0.0;
    for (Index k = w.fit_begin - 1; bound && k < w.fit_end; ++k)
        bound = boundary_l2_norm(RealVector(sd.traces.col(k)), g) <=
                w.trace_constant * std::pow(sd.eigenvalues[k], 0.75 + w.eps / 2.0) * (1.0 + 1e-12);
    std::ostringstream os;
    os << "c_n " << w.c_n << " vs 1/(4 pi) gap " << gap << " (tol 0.1); trace C " << w.trace_constant << " over k in ["
       << w.fit_begin << "," << w.fit_end << "]; A_n " << w.A_n;
    return {gap <= 0.1 && bound && std::isfinite(w.A_n), os.str()};
}

Outcome dtn_series() {
    const GridSpec g = build_grid(1.0, 1.0, 17, 25);
    const Potential q = gaussian_potential(g, {0.5, 0.45}, 0.2, 3.0);
    const SpectralData sd = solve_eigen(q, g, 400, false);
    const cplx lam(-10.0, 0.0);
    const double h = 0.05;
    const ComplexMatrix fd =
        (dtn_direct(q, lam + h, g).entries - 2.0 * dtn_direct(q, lam, g).entries + dtn_direct(q, lam - h, g).entries) /
        (h * h);
    const DtnMatrix series = dtn_derivative_series(sd, lam, 2, 0);
    const double err = l2_operator_norm(series.entries - fd, g), scale = l2_operator_norm(fd, g);
    const double allowed = std::max(1e-3 * scale, series.tail_bound);

    const Potential q1 = gaussian_potential(g, {0.5, 0.5}, 0.15, 4.0), q2 = zero_potential(g);
    const SpectralData s1 = solve_eigen(q1, g, 400, false), s2 = solve_eigen(q2, g, 400, false);
    const cplx z = cplx(4.0, 1.0) * cplx(4.0, 1.0);
    const DifferenceSeries ds = dtn_difference_series(s1, s2, z, 0);
    const ComplexMatrix direct = dtn_direct(q1, z, g).entries - dtn_direct(q2, z, g).entries;
    const double diff = relative_gap(ds.total.entries, direct, g);

    std::ostringstream os;
    os << "second derivative err " << err / scale << " rel, tail bound " << series.tail_bound / scale
       << " rel (allowed " << allowed / scale << "); difference series rel " << diff << " (tol 5e-2)";
    return {err <= allowed && diff <= 5e-2, os.str()};
}

Outcome dtn_decay() {
    const GridSpec g = build_grid(1.0, 1.0, 24, 24);
    const Potential q1 = bump_potential(g, {0.5, 0.5}, 0.3, 2.0), q2 = zero_potential(g);
    std::vector<cplx> ls;
    for (double t : {20.0, 40.0, 80.0, 160.0}) ls.emplace_back(-t, 0.0);
    const DecayReport r = verify_dtn_decay(q1, q2, g, 2, 0.25, ls);
    std::ostringstream os;
    bool pass = r.orders.size() == 3;
    for (const auto& o : r.orders) {
        const bool ok = !o.degenerate && o.fitted_slope <= -o.j - r.sigma + 0.1;
        pass = pass && ok;
        os << "j=" << o.j << " slope " << o.fitted_slope << " (<= " << -o.j - r.sigma + 0.1 << "); ";
    }
    return {pass, os.str()};
}

Outcome isozaki_identity() {
    const GridSpec g = build_grid(1.0, 1.0, 96, 96);
    const Potential q = gaussian_potential(g, {0.5, 0.5}, 0.1, 2.0);
    const IdentityReport r = verify_identity_3_1(q, make_geometry(Vec2(3.0, 2.0), 6.0), g);
    const std::vector<double> taus{3.0, 4.0, 6.0, 8.0, 10.0, 12.0};
    std::vector<double> rem;
    for (double t : taus) rem.push_back(std::abs(verify_identity_3_1(q, make_geometry(Vec2(M_PI, 0.0), t), g).remainder));
    const double slope = fit_loglog(taus, rem).slope;
    std::ostringstream os;
    os << "residual " << r.residual << " (tol 2e-2); remainder slope " << slope << " over tau 3..12 (tol -0.8)";
    return {r.residual <= 2e-2 && slope <= -0.8, os.str()};
}

Outcome fourier_recovery(Clock::time_point start) {
    const GridSpec g = build_grid(1.0, 1.0, 32, 32);
    const Potential q = gaussian_potential(g, {0.5, 0.5}, 0.1, 2.0);
    const Vec2 xi(3.0, 1.0);
    const cplx exact = fourier_riemann(q, g, xi.cast<cplx>());
    const std::vector<double> taus{4.0, 6.0, 8.0, 12.0};
    std::vector<double> errs;
    for (double t : taus) errs.push_back(std::abs(recover_fourier(q, xi, t, g).value - exact));
    const double slope = fit_loglog(taus, errs).slope;

    const GridSpec big = build_grid(1.0, 1.0, 64, 64);
    const Potential m = mode_potential(big, 2, 2, 1.0);
    std::vector<double> l2;
    for (double t : {6.0, 10.0, 14.0})
        l2.push_back(reconstruct_potential(m, t, big, FourierSource::direct(), {6.0, 2.0, 1}).l2_error);
    const bool decreasing = l2[1] < l2[0] && l2[2] < l2[1];
    const double elapsed = seconds_since(start);
    std::ostringstream os;
    os << "probe error slope " << slope << " (tol -0.8); L2 errors " << join(l2) << " over tau 6,10,14; elapsed "
       << elapsed << " s (tol 900)";
    return {slope <= -0.8 && decreasing && elapsed <= 900.0, os.str()};
}

Outcome hat_split() {
    const GridSpec g = build_grid(1.0, 1.0, 24, 24);
    const SpectralData sd = solve_eigen(gaussian_potential(g, {0.5, 0.5}, 0.15, 2.0), g, 40, false);
    const SlopeSweep sw = hat_decay_tau(sd, 5, {5.0, 10.0, 20.0, 40.0});
    std::ostringstream os;
    os << "hat norm slope " << sw.fitted_slope << " over tau 5..40 with N=5 (tol -1.8); norms " << join(sw.norms);
    return {sw.fitted_slope <= -1.8, os.str()};
}

Outcome lemma_checks() {
    const std::vector<double> taus = geometric_range(8.0, 256.0, 11);
    std::ostringstream os;
    bool pass = true;
    auto note = [&](const BoundReport& r) {
        pass = pass && r.pass;
        os << r.lemma << (r.lemma == "integral" ? "(b=" : "(mu=") << (r.lemma == "integral" ? r.b : r.mu) << ",nu=" << r.nu
           << ") " << (r.pass ? "ok" : "FAIL") << " " << r.fitted_slope
           << "/" << r.predicted_slope;
        if (r.derived_slope) os << " derived " << *r.derived_slope;
        os << "; ";
    };
    for (auto [mu, nu] : {std::pair{0.0, 2.0}, std::pair{-0.1, 1.0}, std::pair{-2.0, 1.0}}) {
        LemmaQuery q;
        q.mu = mu;
        q.nu = nu;
        note(check_lemma1(q, taus));
    }
    double closed = 0.0;
    for (auto [b, nu] : {std::pair{0.0, 2.0}, std::pair{-0.5, 1.0}, std::pair{-2.0, 1.0}}) {
        const Lemma2Report r = check_lemma2(b, nu, taus);
        note(r.bound);
        if (r.max_closed_form_gap) closed = std::max(closed, *r.max_closed_form_gap);
    }
    std::vector<cplx> ls;
    for (double t : taus) ls.emplace_back(-t * t, 0.0);
    for (auto [mu, nu] : {std::pair{0.0, 2.0}, std::pair{-0.5, 1.0}, std::pair{-2.0, 1.0}}) {
        LemmaQuery q;
        q.mu = mu;
        q.nu = nu;
        note(check_lemma3(q, ls));
    }
    os << "closed form gap " << closed << " (tol 1e-9)";
    return {pass && closed <= 1e-9, os.str()};
}

Outcome stability() {
    const GridSpec g = build_grid(1.0, 1.0, 20, 20);
    const Potential bump = bump_potential(g, {0.5, 0.5}, 0.3, 1.0), zero = zero_potential(g);
    std::vector<std::pair<Potential, Potential>> fam;
    for (double t : {0.05, 0.1, 0.2, 0.4, 0.8}) fam.emplace_back(scaled(bump, t, "t" + std::to_string(t)), zero);
    const HolderReport r = holder_experiment(fam, 0, 2, g, 0);

    const Index n = g.interior_count();
    const SpectralData ref = solve_eigen(zero, g, n, false);
    const SpectralData a = align_traces(ref, solve_eigen(scaled(bump, 0.4, "a"), g, n, false)).second;
    const SpectralData b = align_traces(ref, solve_eigen(gaussian_potential(g, {0.4, 0.6}, 0.15, 1.5), g, n, false)).second;
    DeltaOptions fixed;
    fixed.align = false;
    auto delta = [&](const SpectralData& x, const SpectralData& y, Index N) { return compute_delta(x, y, N, 2, fixed); };
    const double tol = 1e-10;
    double sym = 0.0, tri = 0.0;
    for (Index N : {0, 2, 5}) {
        const DeltaMetrics ab = delta(a, b, N), ba = delta(b, a, N), ar = delta(a, ref, N), rb = delta(ref, b, N);
        sym = std::max({sym, std::abs(ab.delta0 - ba.delta0), std::abs(ab.delta1 - ba.delta1)});
        tri = std::max(tri, ab.delta - ar.delta - rb.delta);
    }
    double rise0 = 0.0, rise1 = 0.0;
    DeltaMetrics prev = delta(a, b, 0);
    for (Index N = 1; N <= 20; ++N) {
        const DeltaMetrics d = delta(a, b, N);
        rise0 = std::max(rise0, d.delta0 - prev.delta0);
        rise1 = std::max(rise1, d.delta1 - prev.delta1);
        prev = d;
    }
    std::ostringstream os;
    os << "gamma_emp " << r.gamma_emp << " (need " << r.gamma_paper << " <= gamma <= 1); symmetry " << sym
       << ", triangle excess " << std::max(tri, 0.0) << "; largest rise in N: delta0 " << rise0 << ", delta1 " << rise1
       << " (tol 1e-10)";
    const bool holder = !r.degenerate && r.gamma_emp > 0.0 && r.gamma_emp <= 1.0 && r.gamma_emp >= r.gamma_paper;
    return {holder && sym <= tol && tri <= tol && rise0 <= tol && rise1 <= tol, os.str()};
}

Outcome asymptotic_noise() {
    const GridSpec g = build_grid(1.0, 1.0, 30, 30);
    const Potential q1 = gaussian_potential(g, {0.5, 0.5}, 0.15, 2.0), q2 = zero_potential(g);
    const NoiseReport r = asymptotic_noise_experiment(q1, q2, {1e-1, 3e-2, 1e-2}, 1.0, 2.0, 2, g, 0);
    std::vector<double> errs;
    for (const auto& run : r.runs) errs.push_back(run.l2_error);
    std::ostringstream os;
    os << "errors " << join(errs) << " over delta 1e-1,3e-2,1e-2; baseline " << r.baseline_error << ", dropped N=5 "
       << r.dropped_error << " (factor " << r.dropped_error / r.baseline_error << ", tol 2)";
    return {r.monotone && r.drop_within_factor, os.str()};
}

} // namespace

int main() {
    const auto start = Clock::now();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"forward spectra", forward_spectra},
        {"weyl law", weyl_law},
        {"dtn series", dtn_series},
        {"dtn decay", dtn_decay},
        {"isozaki identity", isozaki_identity},
        {"fourier recovery", [&] { return fourier_recovery(start); }},
        {"hat/tilde split", hat_split},
        {"lemma checks", lemma_checks},
        {"stability", stability},
        {"asymptotic noise", asymptotic_noise},
    };
    int passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        passed += o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail << " ("
                  << std::fixed << std::setprecision(1) << seconds_since(t0) << " s)" << std::defaultfloat
                  << std::setprecision(6) << std::endl;
    }
    std::cout << passed << "/" << criteria.size() << " criteria pass" << std::endl;
    return 0;
}
