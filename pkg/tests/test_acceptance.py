"""Acceptance criteria; each test records one PASS/FAIL line (shown in the pytest summary).

Run directly with ``python3 tests/test_acceptance.py`` for the lines alone.
"""

import time

import numpy as np

from schrodinger_homog import (CoefficientDescriptor, CoefficientField, FineProblem, PeriodicGrid,
                               PotentialDescriptor, PotentialField, StateDescriptor, effective_model,
                               effective_potential_shift, effective_tensor, harness, mass_history,
                               solve_corrector, solve_eta, solve_fine)

RESULTS: list[str] = []

STANDARD = {"problem": {"d": 1, "T": 0.5}}  # defaults are the standard 1D test case


def record(number: int, name: str, ok: bool, detail: str) -> None:
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name}: {detail}")
    assert ok, detail


def test_c01_harmonic_mean():
    t0 = time.perf_counter()
    g = PeriodicGrid(1, 256, 1)
    a = CoefficientField.from_descriptor(CoefficientDescriptor("cosine", mean=1.0, amplitude=0.5), g)
    q = effective_tensor(a, solve_corrector(a))[0, 0]
    elapsed = time.perf_counter() - t0
    n = 1_000_000
    y = (np.arange(n) + 0.5) / n
    oracle = 1.0 / np.mean(1.0 / (1 + 0.5 * np.cos(2 * np.pi * y)))
    rel = abs(q / oracle - 1)
    record(1, "harmonic-mean oracle", rel <= 1e-8 and elapsed < 1.0, f"rel err {rel:.2e}, {elapsed:.3f}s")


def test_c02_eta_exactness():
    t0 = time.perf_counter()
    g = PeriodicGrid(1, 8, 8)
    a = CoefficientField.from_descriptor(CoefficientDescriptor("constant"), g)
    V = PotentialField.from_descriptor(PotentialDescriptor("cosine"), g)
    eta = solve_eta(a, V)
    mu = effective_potential_shift(V, eta)
    elapsed = time.perf_counter() - t0
    ys, tau = g.mesh()
    err = np.max(np.abs(eta.samples - np.cos(2 * np.pi * ys[0]) * np.cos(2 * np.pi * tau) / (4 * np.pi**2)))
    mu_err = abs(mu - 1 / (16 * np.pi**2))
    record(2, "spectral eta exactness", err <= 1e-10 and mu_err <= 1e-10 and elapsed < 1.0,
           f"max err {err:.2e}, mu err {mu_err:.2e}, {elapsed:.3f}s")


def test_c03_fine_order():
    t0 = time.perf_counter()
    errs = []
    for n in (15, 31, 63, 127):
        steps = n + 1
        p = FineProblem(1, 0.5, 0.5, n, 0.5 / steps, CoefficientDescriptor("constant"),
                        PotentialDescriptor("zero"), StateDescriptor("sine_mode"), resolution=1e-6)
        u = solve_fine(p)
        exact = np.exp(1j * np.pi**2 * u.times)[:, None] * np.sin(np.pi * u.x)[None]
        errs.append(np.max(np.abs(u.values - exact)))
    elapsed = time.perf_counter() - t0
    ratios = [e0 / e1 for e0, e1 in zip(errs, errs[1:])]
    record(3, "fine-solver order", all(r >= 3.8 for r in ratios) and elapsed < 30,
           "ratios " + ", ".join(f"{r:.3f}" for r in ratios) + f", {elapsed:.2f}s")


def test_c04_unitarity():
    cfg = harness.config_from_dict(STANDARD)
    m = np.array(mass_history(solve_fine(cfg.fine_problem(1 / 32))))
    drift = np.max(np.abs(m - m[0])) / m[0]
    record(4, "unitarity", drift <= 1e-10, f"relative mass drift {drift:.2e}")


def test_c05_homogenization_convergence():
    t0 = time.perf_counter()
    rep = harness.run_pipeline(harness.config_from_dict(STANDARD))
    elapsed = time.perf_counter() - t0
    e0 = [r.err_zeroth for r in rep.rows]
    e1 = [r.err_first for r in rep.rows]
    dec = all(b < a for a, b in zip(e0, e0[1:]))
    not_worse = all(f <= z for f, z in zip(e1, e0))
    record(5, "homogenization convergence", dec and not_worse and elapsed < 300,
           "zeroth " + ", ".join(f"{e:.3e}" for e in e0) + "; first " + ", ".join(f"{e:.3e}" for e in e1)
           + f"; {elapsed:.1f}s")


def _two_scale_sweep():
    # resolution factor 32: the discretization floor of the fine solver must sit below the
    # eps-decay of the corrector pairing at eps = 1/64
    cfg = harness.config_from_dict({**STANDARD, "eps": [1 / 8, 1 / 64], "resolution": {"factor": 32}})
    return harness.run_pipeline(cfg)


_SWEEP = {}


def _sweep():
    if "rep" not in _SWEEP:
        _SWEEP["rep"] = _two_scale_sweep()
    return _SWEEP["rep"]


def test_c06_two_scale_pairing_decay():
    coarse, fine = _sweep().rows
    ratios = [f / c for c, f in zip(coarse.pairing, fine.pairing)]
    record(6, "two-scale pairing decay", all(r <= 0.5 for r in ratios),
           "ratios " + ", ".join(f"{r:.3f}" for r in ratios))


def test_c07_corrector_pairing_decay():
    coarse, fine = _sweep().rows
    ratios = [f / c for c, f in zip(coarse.corrector, fine.corrector)]
    record(7, "corrector pairing decay", all(r <= 0.5 for r in ratios),
           "ratios " + ", ".join(f"{r:.3f}" for r in ratios))


def test_c08_degenerate_reduction():
    cfg = harness.config_from_dict({"problem": {"d": 1, "coefficient": {"kind": "constant"},
                                                "potential": {"kind": "zero"}}})
    rep = harness.run_pipeline(cfg)
    m = rep.model
    coeff = max(np.max(np.abs(m.q - np.eye(1))), np.max(np.abs(m.b)), abs(m.mu))
    worst = max(r.err_zeroth for r in rep.rows)
    record(8, "degenerate reduction", coeff <= 1e-12 and worst <= 1e-9,
           f"coefficient deviation {coeff:.1e}, worst error {worst:.1e}")


def test_c09_scaling_laws():
    cfg = harness.config_from_dict(STANDARD)
    g = cfg.grid
    a = CoefficientField.from_descriptor(cfg.coefficient, g)
    chi = solve_corrector(a)

    def model(Vd):
        V = PotentialField.from_descriptor(Vd, g)
        return effective_model(a, V, chi, solve_eta(a, V))

    base = model(cfg.potential)
    worst = 0.0
    for s in (2.0, -1.0, 0.5):
        m = model(cfg.potential.scaled(s))
        worst = max(worst, abs(m.mu - s**2 * base.mu), float(np.max(np.abs(m.b - s * base.b))))
    record(9, "scaling laws", worst <= 1e-10, f"worst deviation {worst:.1e}")


def test_c10_determinism(tmp_path):
    cfg = harness.config_from_dict({**STANDARD, "seed": 7})
    paths = []
    for run in ("a", "b"):
        out = harness.emit_report(harness.run_pipeline(cfg), tmp_path / run, formats=("csv",))
        paths.append(out[0])
    same = paths[0].read_bytes() == paths[1].read_bytes()
    record(10, "determinism", same, "byte-identical CSV" if same else "CSV reports differ")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    for fn in tests:
        try:
            if fn is test_c10_determinism:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except AssertionError:
            pass
        print(RESULTS[-1])
