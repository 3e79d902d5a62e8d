"""
Acceptance suite.

One test per criterion. Each test prints a single ``PASS``/``FAIL`` line
through the terminal reporter, so the lines show up in ``pytest -v``
output even with capturing on.
"""
import numpy as np
import pytest
from scipy.linalg import expm, svdvals

from quadspec.brackets import (PointClass, RealQuadraticForm, bichar_witness,
                               boundary_zero_set, bracket_matrix, classify_point,
                               is_normal, order_at_halfline, poisson_bracket)
from quadspec.fixtures import (FIXTURES, harmonic_oscillator, q1, q2, q3,
                               random_elliptic, rotated_oscillator)
from quadspec.fock import assemble_weyl_matrix
from quadspec.reduction import reduce_1d
from quadspec.resolvent import (adaptive_resolvent_norm, fit_sc_index,
                                halfline_profile, pseudospectrum_grid,
                                superlevel_components)
from quadspec.spectrum import spectrum_distance, spectrum_lattice
from quadspec.symbol import (SectorKind, apply_symplectic, is_elliptic,
                             numerical_range, random_symplectic, sector_distance,
                             symplectic_defect)


@pytest.fixture
def report(request):
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(k, ok, detail):
        line = f"[acceptance] criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        else:
            print(line)
        assert ok, line

    return emit


def _match(computed, reference, radius, rtol):
    """Worst relative mismatch between two point sets enumerated to ``radius``."""
    computed, reference = np.asarray(computed), np.asarray(reference)
    worst = 0.0
    for v in computed:
        worst = max(worst, np.min(np.abs(reference - v)) / abs(v))
    # reference points clearly inside the disc must all be found
    inner = reference[np.abs(reference) < radius * (1 - rtol)]
    for v in inner:
        worst = max(worst, np.min(np.abs(computed - v)) / abs(v))
    return worst


def test_criterion_01_spectrum_fixtures(report):
    R = 15
    ks = np.arange(20)
    e8 = np.exp(1j * np.pi / 8)
    refs = {
        "rotated": e8 * (2 * ks + 1),
        "q1": ((2 * ks[:, None] + 1) + (2 * ks[None, :] + 1) * np.sqrt(2) * np.exp(1j * np.pi / 4)).ravel(),
        "q3": ((2 * ks[:, None] + 1) * np.sqrt(2)
               + (2 * ks[None, :] + 1) * 3 ** 0.5 * 2 ** 0.25 * e8).ravel(),
    }
    errs = {}
    for name, q in (("rotated", rotated_oscillator(np.pi / 4)), ("q1", q1()), ("q3", q3())):
        ref = refs[name][np.abs(refs[name]) <= R * (1 + 1e-9)]
        errs[name] = _match(spectrum_lattice(q, R).eigenvalues, ref, R, 1e-9)
    ok = max(errs.values()) <= 1e-9
    report(1, ok, "max relative error " + ", ".join(f"{k}={v:.1e}" for k, v in errs.items()))


def test_criterion_02_numerical_ranges(report):
    cases = [("q2", q2(), 0.0, np.pi / 2), ("q3", q3(), 0.0, np.pi / 4)]
    for th in (np.pi / 4, 0.3, 1.2):
        cases.append((f"rotated({th:.2f})", rotated_oscillator(th), 0.0, th))
    errs = {}
    for name, q, lo, hi in cases:
        s = numerical_range(q)
        assert s.kind is SectorKind.SECTOR
        errs[name] = max(abs(s.theta_min - lo), abs(s.theta_max - hi))
    ok = max(errs.values()) <= 1e-6
    report(2, ok, "max angle error %.1e rad" % max(errs.values()))


def test_criterion_03_normality(report):
    got = {name: is_normal(f()) for name, f in FIXTURES.items()}
    want = {"q1": True, "harmonic": True, "q2": False, "q3": False, "rotated": False}
    report(3, got == want, f"{got}")


def test_criterion_04_orders(report):
    def orders(q):
        out = []
        for j in (1, 2):
            r = order_at_halfline(q, j)
            out.append(r.order if r.is_finite else "inf")
        return tuple(out)

    got = {"rotated": orders(rotated_oscillator()), "q2": orders(q2()), "q3": orders(q3())}
    # half-line 1 is R+ for all three, half-line 2 is iR+ (q2) or e^{i pi/4}R+ (q3)
    want = {"rotated": (2, 2), "q2": (6, 2), "q3": ("inf", 2)}
    rng = np.random.default_rng(2024)
    tested = odd = 0
    while tested < 100:
        q = random_elliptic(1 + tested % 2, rng)
        if is_normal(q):
            continue
        tested += 1
        for j in (1, 2):
            r = order_at_halfline(q, j)
            if r.is_finite and (r.order % 2 or r.order < 2):
                odd += 1
    ok = got == want and odd == 0
    report(4, ok, f"fixtures {got}; {odd} non-even finite orders in {tested} random symbols")


def test_criterion_05_compression_bound(report):
    rng = np.random.default_rng(5)
    worst = np.inf
    for q, N in ((harmonic_oscillator(), 64), (q2(), 24)):
        s = numerical_range(q)
        A = assemble_weyl_matrix(q, N).dense()
        I = np.eye(A.shape[0])
        count = 0
        while count < 500:
            z = complex(*rng.uniform(-30, 30, 2))
            d = sector_distance(s, z)
            if d == 0:
                continue
            count += 1
            worst = min(worst, svdvals(A - z * I)[-1] - (d - 1e-8))
    report(5, worst >= 0, f"min over 1000 points of sigma_min - (d - 1e-8) = {worst:.3e}")


def test_criterion_06_normal_formula(report):
    rng = np.random.default_rng(6)
    ho = harmonic_oscillator()
    ho_err = 0.0
    for z in rng.uniform(-10, 30, 20) + 1j * rng.uniform(-10, 10, 20):
        r, ok, _ = adaptive_resolvent_norm(ho, z)
        ho_err = max(ho_err, abs(r * spectrum_distance(ho, z) - 1))
    q = q1()
    pts = []
    while len(pts) < 5:
        z = complex(*rng.uniform(-8, 8, 2))
        if abs(z) <= 8 and spectrum_distance(q, z) >= 0.5:
            pts.append(z)
    q1_err, conv = 0.0, True
    for z in pts:
        # 24 -> 48 -> 96 per mode needs more rows than the default budget
        r, ok, _ = adaptive_resolvent_norm(q, z, budget=96 ** 2)
        conv &= ok
        q1_err = max(q1_err, abs(r * spectrum_distance(q, z) - 1))
    ok = ho_err <= 1e-12 and q1_err <= 5e-2 and conv
    report(6, ok, f"harmonic rel err {ho_err:.1e}; q1 rel err {q1_err:.1e} (converged={conv})")


def test_criterion_07_interior_blowup(report):
    p = halfline_profile(rotated_oscillator(), np.exp(1j * np.pi / 6), [4, 8, 16, 32])
    gain = np.log10(p.norms[3]) - np.log10(p.norms[1])
    ok = p.verdict == "Growth" and gain >= 3
    report(7, ok, f"verdict {p.verdict} (t={p.tstat:.1f}); log10 gain from eta=8 to 32 is "
                  f"{gain:.2f} decades (need >= 3); norms {np.round(p.norms, 3).tolist()}")


def test_criterion_08_boundary_bounded(report):
    p = halfline_profile(rotated_oscillator(), 1.0, np.geomspace(5, 60, 12))
    ratio = max(p.norms) / min(p.norms)
    ok = all(p.converged) and ratio <= 10 and p.verdict == "Bounded"
    report(8, ok, f"verdict {p.verdict}; max/min ratio {ratio:.2f}; all converged {all(p.converged)}")


def test_criterion_09_semiclassical_index(report):
    hs = [1 / k for k in range(5, 55, 5)]
    fit = fit_sc_index(rotated_oscillator(), 1.0, hs)
    ok = 0.55 <= fit.mu_hat <= 0.78
    report(9, ok, f"mu_hat {fit.mu_hat:.4f} over {len(hs)} values of h (target 2/3)")


def _invariants(q):
    ell, _ = is_elliptic(q)
    s = numerical_range(q)
    normal = is_normal(q)
    orders = None
    if not normal:
        orders = tuple(order_at_halfline(q, j).order for j in (1, 2))
    gens = spectrum_lattice(q, 5).generators
    return ell, s, normal, orders, gens


def test_criterion_10_symplectic_invariance(report):
    failures = []
    for name, f in FIXTURES.items():
        q = f()
        ell, s, normal, orders, gens = _invariants(q)
        for seed in range(50):
            qs = apply_symplectic(q, random_symplectic(q.n, seed=seed), atol=1e-8)
            e2, s2, n2, o2, g2 = _invariants(qs)
            bad = []
            if e2 != ell:
                bad.append("ellipticity")
            if s2.kind != s.kind or abs(s2.theta_min - s.theta_min) > 1e-6 or abs(s2.theta_max - s.theta_max) > 1e-6:
                bad.append("sector")
            if n2 != normal:
                bad.append("normality")
            if o2 != orders:
                bad.append("orders")
            m1 = [m for m, _ in gens]
            m2 = [m for m, _ in g2]
            if len(m1) != len(m2) or any(min(abs(np.array(m2) - m)) > 1e-8 * abs(m) for m in m1):
                bad.append("generators")
            if bad:
                failures.append((name, seed, bad))
    report(10, not failures, f"{5 * 50} maps; failures {failures[:5]}")


def _fd_bracket(a, b, X, h=1e-5):
    n = len(X) // 2

    def grad(f):
        g = np.zeros(len(X))
        for k in range(len(X)):
            e = np.zeros(len(X))
            e[k] = h
            g[k] = (f(X + e) - f(X - e)) / (2 * h)
        return g

    ga, gb = grad(a), grad(b)
    return ga[n:] @ gb[:n] - ga[:n] @ gb[n:]


def test_criterion_11_bracket_oracle(report):
    rng = np.random.default_rng(11)
    fd_err = jac_err = 0.0
    for name, f in FIXTURES.items():
        q = f()
        a, b = RealQuadraticForm(q.real), RealQuadraticForm(q.imag)
        c = poisson_bracket(a, b)
        scale = max(a.norm * b.norm, 1e-300)
        for X in rng.standard_normal((100, 2 * q.n)):
            X /= np.linalg.norm(X)
            fd_err = max(fd_err, abs(c(X) - _fd_bracket(a, b, X)) / scale)
    for n in (1, 2, 3):
        for _ in range(30):
            A, B, C = (M + M.T for M in rng.standard_normal((3, 2 * n, 2 * n)))
            jac = (bracket_matrix(A, bracket_matrix(B, C)) + bracket_matrix(B, bracket_matrix(C, A))
                   + bracket_matrix(C, bracket_matrix(A, B)))
            s = np.linalg.norm(A) * np.linalg.norm(B) * np.linalg.norm(C)
            jac_err = max(jac_err, np.abs(jac).max() / s)
    ok = fd_err <= 1e-6 and jac_err <= 1e-9
    report(11, ok, f"finite-difference rel err {fd_err:.1e}; Jacobi rel err {jac_err:.1e}")


def test_criterion_12_boundary_vanishing_and_witnesses(report):
    van = 0.0
    for name in ("rotated", "q1", "q2", "q3", "harmonic"):
        q = FIXTURES[name]()
        br = RealQuadraticForm(bracket_matrix(q.real, q.imag))
        scale = max(RealQuadraticForm(q.real).norm * RealQuadraticForm(q.imag).norm, 1e-300)
        s = numerical_range(q)
        for j in ((1,) if s.kind is SectorKind.HALF_LINE else (1, 2)):
            for X in boundary_zero_set(q, j).points:
                van = max(van, abs(br(X)) / (scale * (X @ X)))
    rng = np.random.default_rng(12)
    bad, drift = 0, 0.0
    for q in (rotated_oscillator(), q2()):
        s = numerical_range(q)
        found = 0
        while found < 20:
            r = rng.uniform(0.5, 10)
            a = s.theta_min + rng.uniform(0.05, 0.95) * s.opening
            z = r * np.exp(1j * a)
            assert classify_point(q, z) is PointClass.INTERIOR
            found += 1
            w = bichar_witness(q, z)
            if not w.f_plus > 0 > w.f_minus:
                bad += 1
            for t in np.linspace(min(0, w.t_plus), max(0, w.t_minus), 9):
                Y = expm(t * w.flow_generator) @ w.start_point
                drift = max(drift, abs(np.real(q(Y)) - z.real) / abs(z))
    ok = van <= 1e-8 and bad == 0 and drift <= 1e-8
    report(12, ok, f"max |bracket| on zero sets {van:.1e}; bad witnesses {bad}/40; Re q drift {drift:.1e}")


def test_criterion_13_reduction_1d(report):
    rng = np.random.default_rng(13)
    sdef = match = spec = 0.0
    wrong = 0
    X = rng.standard_normal((50, 2))
    for k in range(200):
        full = k >= 100
        q = random_elliptic(1, rng, full_plane=full)
        nf = reduce_1d(q)
        sdef = max(sdef, symplectic_defect(nf.S) / max(1, np.linalg.norm(nf.S) ** 2))
        back, ref = apply_symplectic(q, nf.S, atol=1e-8), nf.symbol()
        a = np.array([back(x) for x in X])
        b = np.array([ref(x) for x in X])
        match = max(match, np.max(np.abs(a - b)) / np.max(np.abs(b)))
        if not full:
            if nf.kind != "TypeI":
                wrong += 1
                continue
            R = 10 * abs(nf.alpha)
            pred = nf.alpha * np.exp(1j * nf.theta / 2) * (2 * np.arange(8) + 1)
            spec = max(spec, _match(spectrum_lattice(q, R).eigenvalues, pred, R, 1e-8))
        else:
            roots = np.roots([q.Q[1, 1], 2 * q.Q[0, 1], q.Q[0, 0]])
            want = "TypeII" if np.all(roots.imag < 0) else "TypeIII"
            sign_ok = nf.eta.imag > 0 if want == "TypeII" else nf.eta.imag < 0
            if nf.kind != want or not sign_ok:
                wrong += 1
    ok = sdef <= 1e-10 and match <= 1e-8 and spec <= 1e-8 and wrong == 0
    report(13, ok, f"symplectic defect {sdef:.1e}; round trip {match:.1e}; "
                   f"TypeI spectrum {spec:.1e}; misclassified {wrong}/200")


def test_criterion_14_level_line_topology(report):
    q = rotated_oscillator(np.pi / 4)
    eps = 1e-3
    g = pseudospectrum_grid(q, (0, 30, 0, 20), (200, 150), eps_levels=[eps], validate=10)
    lam = np.exp(1j * np.pi / 8) * (2 * np.arange(40) + 1)
    lam = lam[(lam.real <= 30) & (lam.imag <= 20)]
    labels, count, touches = superlevel_components(g, eps, lam, q)
    low = labels[:3]
    individual = (len(set(low)) == 3 and -1 not in low and not any(touches[l] for l in low))
    high = [l for l, v in zip(labels, lam) if abs(v) > 15]
    merged = len(set(high)) == 1 and high[0] != -1 and touches[high[0]]
    closed = sum(1 for c in g.level_lines[eps] if np.allclose(c[0], c[-1]))
    ok = individual and merged
    report(14, ok, f"{count} superlevel components, {len(g.level_lines[eps])} level curves "
                   f"({closed} closed); first three enclosed individually: {individual}; "
                   f"points beyond modulus 15 merged in one open region: {merged} "
                   f"(labels {labels.tolist() if hasattr(labels, 'tolist') else labels}); "
                   f"unconverged points {int((~g.converged).sum())}; validation {g.validation_error:.1e}")
