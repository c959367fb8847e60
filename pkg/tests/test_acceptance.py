"""Acceptance criteria, one check per criterion.

Each ``check_*`` returns ``(ok, detail)``. Under pytest every check is a
test and a PASS/FAIL line per criterion is printed in the terminal summary;
``python tests/test_acceptance.py`` prints the same lines directly.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
from scipy.integrate import quad

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_pd, random_unitary
from qoptsim.device import H, QODevice
from qoptsim.engine import SimConfig, run
from qoptsim.fock_state import LevelIndex, make_state
from qoptsim.linalg import cholesky, modified_cholesky, permanent_glynn, permanent_naive
from qoptsim.outcomes import distribution, purity
from qoptsim.packet_model import PacketDescriptor, Shape, overlap_exponential, overlap_gaussian, wavefunction
from qoptsim.scenario import builtin, run_scenario

SEED = 7
RESULTS = {}


def record(name):
    def wrap(fn):
        def check():
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failed criterion, reported as such
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            RESULTS[name] = (ok, detail)
            return ok, detail
        check.__name__ = fn.__name__
        return check
    return wrap


def two_photon_device(dt, w=1.0, photons=1):
    dev = QODevice(2)
    dev.add_photons(photons, 0, H, 0.0, 1.0, w)
    dev.add_photons(photons, 1, H, dt, 1.0, w)
    dev.beamsplitter(0, 1, 45.0, 0.0)
    dev.detector(0)
    dev.detector(1)
    return dev


def by_channel(dev, out):
    """Amplitudes keyed by per-channel photon counts (single-packet outputs)."""
    lv = dev.builder.levels
    return {tuple(sum(occ[i] for i in lv.channel_levels(ch)) for ch in range(lv.n_ch)): a for a, occ in out}


@record("01 HOM ideal bunching")
def check_hom_bunching():
    t0 = time.perf_counter()
    dev = two_photon_device(0.0)
    out = run(dev.builder, dev.input_state)
    p11 = distribution(out).get((1, 1))
    elapsed = time.perf_counter() - t0
    amps = by_channel(dev, out)
    r2 = 1 / math.sqrt(2)
    ok = (abs(amps[(2, 0)] + r2) < 1e-12 and abs(amps[(0, 2)] - r2) < 1e-12 and p11 <= 1e-12
          and elapsed < 1.0)
    return ok, f"a20={amps[(2, 0)].real:+.12f} a02={amps[(0, 2)].real:+.12f} P11={p11:.1e} t={elapsed * 1e3:.1f}ms"


@record("02 distinguishable pair")
def check_distinguishable():
    dev = two_photon_device(60.0)  # overlap exp(-900): orthogonal packets
    out = run(dev.builder, dev.input_state)
    mags = np.abs(out.amplitudes)
    pc = distribution(out).get((1, 1))
    ok = len(out) == 4 and np.allclose(mags, 0.5, atol=1e-12) and abs(pc - 0.5) <= 1e-10
    return ok, f"{len(out)} kets |a|={np.round(mags, 12).tolist()} P(1,1)={pc:.12f}"


@record("03 HOM dip curve")
def check_hom_dip():
    worst = 0.0
    results = run_scenario(builtin("hom"))
    for res in results:
        dt = res.params["dt"]
        worst = max(worst, abs(res.distribution.get((1, 1)) - (1 - math.exp(-dt * dt / 2)) / 2))
    # a second width, outside the built-in
    w = 0.7
    for dt in np.linspace(0, 3, 60):
        dev = two_photon_device(dt, w)
        pc = distribution(run(dev.builder, dev.input_state)).get((1, 1))
        worst = max(worst, abs(pc - (1 - math.exp(-dt * dt * w * w / 2)) / 2))
    return len(results) == 60 and worst <= 1e-8, f"{len(results)} points, max deviation {worst:.2e}"


def _quad(shape, a, b):
    f = lambda t: np.conj(wavefunction(shape, a, t)) * wavefunction(shape, b, t)
    if shape is Shape.GAUSSIAN:
        lo, hi = min(a.t0, b.t0) - 12 / min(a.w, b.w), max(a.t0, b.t0) + 12 / min(a.w, b.w)
    else:
        lo = max(a.t0, b.t0)
        hi = lo + 60 * max(a.w, b.w)
    kw = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
    return complex(quad(lambda t: f(t).real, lo, hi, **kw)[0], quad(lambda t: f(t).imag, lo, hi, **kw)[0])


@record("04 overlap formula identity")
def check_overlap_identity():
    rng = np.random.default_rng(SEED)
    worst_id = 0.0
    for _ in range(1000):
        ti, tj = rng.uniform(-5, 5, size=2)
        om, dw = rng.uniform(0, 5), rng.uniform(0.1, 3)
        s = overlap_gaussian(PacketDescriptor(0, ti, om, dw), PacketDescriptor(1, tj, om, dw))
        ref = np.exp(1j * (tj - ti) * om) * math.exp(-(ti - tj) ** 2 * dw * dw / 4)
        worst_id = max(worst_id, abs(s - ref))
    worst_q = 0.0
    for shape, fn in ((Shape.GAUSSIAN, overlap_gaussian), (Shape.EXPONENTIAL, overlap_exponential)):
        for _ in range(25):
            ta, tb = rng.uniform(-1, 1, size=2)
            fa, fb = rng.uniform(0, 3, size=2)
            wa, wb = rng.uniform(0.4, 1.5, size=2)
            a, b = PacketDescriptor(0, ta, fa, wa), PacketDescriptor(1, tb, fb, wb)
            worst_q = max(worst_q, abs(fn(a, b) - _quad(shape, a, b)))
    return worst_id <= 1e-12 and worst_q <= 1e-8, f"identity {worst_id:.1e} (1000 draws), quadrature {worst_q:.1e}"


@record("05 Cholesky reconstruction")
def check_cholesky():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in range(1, 11):
        for _ in range(10):
            s = random_pd(rng, n)
            low = cholesky(s)
            worst = max(worst, np.max(np.abs(low @ low.conj().T - s)))
    worst_err = 0.0
    for n in range(2, 9):
        for _ in range(10):
            v = rng.normal(size=(n, n - 1)) + 1j * rng.normal(size=(n, n - 1))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            s = v @ v.conj().T  # singular overlap matrix
            vals, vecs = np.linalg.eigh(s)
            vals = vals + rng.uniform(-1e-12, 1e-12, size=n)
            _, err = modified_cholesky((vecs * vals) @ vecs.conj().T)
            worst_err = max(worst_err, err)
    return worst <= 1e-10 and worst_err < 1e-6, f"max |LL^H - S| {worst:.1e}; max row-norm error {worst_err:.1e}"


@record("06 permanent cross-check")
def check_permanent():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for i in range(200):
        n = 1 + i % 7
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        ref = permanent_naive(a)
        worst = max(worst, abs(permanent_glynn(a) - ref) / max(abs(ref), 1e-300))
    a = rng.normal(size=(15, 15)) + 1j * rng.normal(size=(15, 15))
    t0 = time.perf_counter()
    permanent_glynn(a)
    elapsed = time.perf_counter() - t0
    return worst <= 1e-10 and elapsed < 1.0, f"max rel error {worst:.1e}; n=15 in {elapsed * 1e3:.1f}ms"


@record("07 core equivalence")
def check_cores():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for i in range(50):
        d = int(rng.integers(2, 9))
        n = int(rng.integers(1, 5))
        u = random_unitary(rng, d)
        entries = []
        for _ in range(2):
            occ = np.zeros(d, dtype=int)
            np.add.at(occ, rng.integers(0, d, size=n), 1)
            entries.append((complex(rng.normal(), rng.normal()), occ))
        state = make_state(LevelIndex(d), entries).normalized()
        a = run(u, state, SimConfig("direct", prune=0)).as_dict()
        b = run(u, state, SimConfig("permanent", prune=0)).as_dict()
        worst = max(worst, max(abs(a.get(k, 0) - b.get(k, 0)) for k in set(a) | set(b)))
    return worst <= 1e-10, f"50 circuits, max amplitude difference {worst:.1e}"


def delay_curve():
    scn = builtin("delay_mz")
    curve = {}
    for res in run_scenario(scn):
        tau = res.params["tau"]
        curve[tau] = curve.get(tau, 0.0) + res.observables["coincidence"]
    taus = np.array(sorted(curve))
    return taus, np.array([curve[t] for t in taus]), scn.data["period_length"]


@record("08 delay-gate correlation")
def check_delay():
    taus, p, period = delay_curve()
    step = taus[1] - taus[0]
    peaks = [i for i in range(1, len(p) - 1) if p[i] > p[i - 1] and p[i] >= p[i + 1] and p[i] > 1e-6]
    if p[0] > p[1]:
        peaks.insert(0, 0)
    main = sorted(sorted(peaks, key=lambda i: p[i])[-2:])
    locs = taus[main]
    near = taus < period / 2
    small = p[near].max()
    ok = (len(main) == 2 and abs(locs[0] - 3.1) <= step and abs(locs[1] - 6.2) <= step
          and 0 < small < p[main].min())
    return ok, (f"main peaks at {np.round(locs, 3).tolist()} (grid step {step:.3f}); "
                f"peak near 0: P={small:.2e} at tau={taus[near][np.argmax(p[near])]:.3f}")


@record("09 entanglement swap, ideal")
def check_swap_ideal():
    res = run_scenario(builtin("swap"))[0]
    rho = res.density
    ok = (rho.labels == ["| H(0)0, V(0)3 >", "| V(0)0, H(0)3 >"]
          and np.max(np.abs(rho.matrix - [[0.5, -0.5], [-0.5, 0.5]])) <= 1e-10)
    return ok, f"basis {rho.labels}, purity {res.purity:.12f}"


@record("10 entanglement swap, partial")
def check_swap_partial():
    scn = builtin("swap")
    res = run_scenario(scn)[1]
    # overlap of the two photons meeting at the splitter (channels 1 and 2)
    dt = res.params["dt"]
    s2 = abs(overlap_gaussian(PacketDescriptor(0, dt, 1.0, 1.0), PacketDescriptor(1, 0.0, 1.0, 1.0))) ** 2
    want = np.array([[0.1412, 0, 0, 0], [0, 0.3588, -0.2176, 0], [0, -0.2176, 0.3588, 0], [0, 0, 0, 0.1412]])
    rho = res.density
    labels = ["| H(0)0, H(2)3 >", "| H(0)0, V(2)3 >", "| V(0)0, H(2)3 >", "| V(0)0, V(2)3 >"]
    dev = np.max(np.abs(rho.matrix - want)) if rho.matrix.shape == (4, 4) else float("inf")
    ok = abs(s2 - 0.6065) < 1e-4 and rho.labels == labels and dev <= 1e-3 and res.purity < 1
    return ok, f"overlap {s2:.4f}, max deviation {dev:.1e}, purity {res.purity:.4f}"


@record("11 three-photon bunching")
def check_three_photons():
    dev = two_photon_device(0.0, photons=3)
    a = distribution(run(dev.builder, dev.input_state, SimConfig("direct")))
    b = distribution(run(dev.builder, dev.input_state, SimConfig("permanent")))
    worst = max(abs(a.get(k) - b.get(k)) for k in set(a.probabilities) | set(b.probabilities))
    p33 = a.get((3, 3))
    far = two_photon_device(60.0, photons=3)
    d_far = distribution(run(far.builder, far.input_state, SimConfig("permanent")))
    binom = max(abs(d_far.get((k, 6 - k)) - math.comb(6, k) / 64) for k in range(7))
    ok = worst <= 1e-10 and p33 <= 1e-12 and binom <= 1e-10
    return ok, f"core diff {worst:.1e}, P(3,3)={p33:.1e}, far limit vs binomial(6,1/2) {binom:.1e}"


def _delay_norm(photon_period):
    dev = QODevice(2, 1, "gaussian", n_periods=3, period_length=10.0)
    dev.add_photons(1, 0, H, 10.0 * photon_period, 1.0, 1.0)
    dev.add_photons(1, 1, H, 0.0, 1.0, 1.0)
    dev.beamsplitter(0, 1, 45.0, 0.0)
    dev.delay(0)
    dev.detector(0)
    dev.detector(1)
    return run(dev.builder, dev.input_state).norm2()


@record("12 unitarity and norm")
def check_norms():
    worst = 0.0
    for name in ("hom", "hom3", "swap"):
        for res in run_scenario(builtin(name)):
            worst = max(worst, abs(res.norm - 1))
    rng = np.random.default_rng(SEED)
    for _ in range(10):
        dev = QODevice(3, 2)
        for ch in range(3):
            dev.add_photons(1, ch, int(rng.integers(2)), rng.uniform(0, 2), 1.0, 1.0)
        dev.beamsplitter(0, 1, rng.uniform(0, 90), rng.uniform(0, 360))
        dev.phase_shifter(2, rng.uniform(0, 360))
        dev.beamsplitter(1, 2, rng.uniform(0, 90), rng.uniform(0, 360))
        for ch in range(3):
            dev.detector(ch)
        worst = max(worst, abs(run(dev.builder, dev.input_state).norm2() - 1))
    early = [_delay_norm(p) for p in (0, 1)]
    last = _delay_norm(2)
    ok = worst <= 1e-10 and all(abs(n - 1) <= 1e-10 for n in early) and last < 1 - 1e-6
    return ok, (f"delay-free max |norm-1| {worst:.1e}; with delay: periods 0/1 norm "
                f"{early[0]:.12f}/{early[1]:.12f}, last period {last:.6f}")


CHECKS = [check_hom_bunching, check_distinguishable, check_hom_dip, check_overlap_identity, check_cholesky,
          check_permanent, check_cores, check_delay, check_swap_ideal, check_swap_partial,
          check_three_photons, check_norms]


def test_01_hom_bunching():
    ok, detail = check_hom_bunching()
    assert ok, detail


def test_02_distinguishable_pair():
    ok, detail = check_distinguishable()
    assert ok, detail


def test_03_hom_dip_curve():
    ok, detail = check_hom_dip()
    assert ok, detail


def test_04_overlap_identity():
    ok, detail = check_overlap_identity()
    assert ok, detail


def test_05_cholesky():
    ok, detail = check_cholesky()
    assert ok, detail


def test_06_permanent():
    ok, detail = check_permanent()
    assert ok, detail


def test_07_core_equivalence():
    ok, detail = check_cores()
    assert ok, detail


def test_08_delay_gate():
    ok, detail = check_delay()
    assert ok, detail


def test_09_swap_ideal():
    ok, detail = check_swap_ideal()
    assert ok, detail


def test_10_swap_partial():
    ok, detail = check_swap_partial()
    assert ok, detail


def test_11_three_photons():
    ok, detail = check_three_photons()
    assert ok, detail


def test_12_norms():
    ok, detail = check_norms()
    assert ok, detail


def report_lines():
    return [f"{'PASS' if ok else 'FAIL'}  {name}: {detail}" for name, (ok, detail) in sorted(RESULTS.items())]


if __name__ == "__main__":
    for check in CHECKS:
        check()
    print("\n".join(report_lines()))
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
