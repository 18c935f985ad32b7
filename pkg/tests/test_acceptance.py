"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with  pytest tests/test_acceptance.py -v -s  to see the per-criterion
lines as they complete.  Tolerances are fixed here, not configurable.
"""

import time

import numpy as np
import pytest

from skewmix.clt import green_kubo_variance, ks_test, zn_samples
from skewmix.config import ExperimentConfig
from skewmix.experiments import run_mix
from skewmix.hecke import gap_scan, hecke_block, power_word_sum
from skewmix.mixing import (
    CorrelationSeries,
    correlation_exact,
    correlation_mc,
    cylinder_sample_error,
    decay_fit,
    proposition_split_check,
    twisted_transfer_word_sum,
)
from skewmix.observables import (
    character_observable,
    coboundary_observable,
    random_observable,
    single_block_observable,
)
from skewmix.reports import render_csv
from skewmix.shift import LocallyConstantObservable, norm_theta_G, transfer_apply, obs_inner
from skewmix.su2 import compose, haar_sample, preset
from skewmix.wigner import character, wigner_d_many

SQRT5 = np.sqrt(5.0)
KESTEN5 = SQRT5 / 3.0


def report(num, ok, detail):
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}  {detail}"
    print(line, flush=True)
    assert ok, line


def test_criterion_01_representation_correctness(lps5):
    t0 = time.time()
    rng = np.random.default_rng(101)
    worst_hom = worst_uni = worst_char = 0.0
    pair_idx = 0
    for two_j in range(1, 51):  # j <= 25
        quats = []
        pairs = []
        for _ in range(4):  # 4 pairs per block size: 200 pairs total
            g, h = haar_sample(rng), haar_sample(rng)
            pairs.append((len(quats), len(quats) + 1, len(quats) + 2))
            quats += [g.q, h.q, compose(g, h).q]
            pair_idx += 1
        dmats = wigner_d_many(two_j, np.array(quats))
        eye = np.eye(two_j + 1)
        for ig, ih, igh in pairs:
            worst_hom = max(worst_hom, np.abs(dmats[igh] - dmats[ig] @ dmats[ih]).max())
            worst_uni = max(
                worst_uni, np.abs(dmats[ig].conj().T @ dmats[ig] - eye).max()
            )
            tr = np.trace(dmats[ig])
            from skewmix.su2 import GroupElement

            worst_char = max(
                worst_char, abs(tr - character(two_j, GroupElement(quats[ig])))
            )
    elapsed = time.time() - t0
    ok = worst_hom < 1e-9 and worst_uni < 1e-9 and worst_char < 1e-8 and elapsed < 10
    report(
        1,
        ok,
        f"200 pairs over two_j<=50: hom {worst_hom:.2e}, unit {worst_uni:.2e}, "
        f"char {worst_char:.2e}, {elapsed:.1f}s (<10s)",
    )


def test_criterion_02_hecke_word_expansion(lps5):
    t0 = time.time()
    worst = 0.0
    for two_j in (1, 2, 3, 4):  # j <= 2
        s = hecke_block(lps5, two_j).mat
        for n in range(0, 7):
            word_avg = power_word_sum(lps5, two_j, n)
            worst = max(worst, np.abs(word_avg - np.linalg.matrix_power(s, n)).max())
    elapsed = time.time() - t0
    ok = worst < 1e-9 and elapsed < 30
    report(2, ok, f"(2k)^n word sums vs S_j^n, n<=6, j<=2: residual {worst:.2e}, "
                  f"{elapsed:.1f}s (<30s)")


def test_criterion_03_lps5_gap(lps5):
    t0 = time.time()
    scan = gap_scan(lps5, 50)  # J = 25
    elapsed = time.time() - t0
    fundamental = scan.norms[0]
    ok = (
        max(scan.norms) <= KESTEN5 + 1e-8
        and scan.rho >= 0.70
        and abs(fundamental - 1 / SQRT5) <= 1e-12
        and elapsed < 60
    )
    report(
        3,
        ok,
        f"lps5 J=25: rho={scan.rho:.6f} (>=0.70, <=sqrt5/3+1e-8={KESTEN5:.6f}), "
        f"||S_1/2||-{1/SQRT5:.6f}={fundamental - 1/SQRT5:+.1e}, {elapsed:.1f}s (<60s)",
    )


def test_criterion_04_torus_obstruction():
    t0 = time.time()
    scan = gap_scan(preset("diagonal(1.0)"), 50)
    elapsed = time.time() - t0
    ok = scan.rho > 0.99 and elapsed < 10
    report(4, ok, f"diagonal(1.0) J=25: rho={scan.rho:.6f} (>0.99), {elapsed:.1f}s (<10s)")


def _direct_pairing(f_vals, g_vals, n, m_f, m_g, two_k):
    """sum (f o sigma^n)(w) g(w) mu(dw) by raw index arithmetic (no library
    word helpers), accumulated in extended precision."""
    length = max(m_g, n + m_f)
    count = two_k**length
    total = np.longdouble(0.0)
    step = 1 << 20
    for start in range(0, count, step):
        idx = np.arange(start, min(start + step, count), dtype=np.int64)
        fi = (idx // two_k ** (length - n - m_f)) % two_k**m_f
        gi = idx // two_k ** (length - m_g)
        total += np.sum(f_vals[fi] * g_vals[gi], dtype=np.longdouble)
    return float(total / count)


def test_criterion_05_transfer_duality():
    k, two_k = 3, 6
    rng = np.random.default_rng(105)
    worst = 0.0
    for n, m_f, m_g in [
        (2, 2, 2), (3, 2, 4), (4, 3, 3), (2, 3, 5), (5, 1, 4),
        (1, 1, 8), (4, 5, 1), (8, 1, 1), (3, 4, 2), (6, 2, 2),
    ]:
        assert n + m_f + m_g <= 10
        f_vals = rng.standard_normal(two_k**m_f)
        g_vals = rng.standard_normal(two_k**m_g)
        f = LocallyConstantObservable(k=k, depth=m_f, two_j_max=0, means=f_vals)
        g = LocallyConstantObservable(k=k, depth=m_g, two_j_max=0, means=g_vals)
        lhs = _direct_pairing(f_vals, g_vals, n, m_f, m_g, two_k)
        rhs = obs_inner(f, transfer_apply(g, n)).real
        worst = max(worst, abs(lhs - rhs))
    ok = worst < 1e-12
    report(5, ok, f"duality over 10 (n, depths) combos, n+depths<=10: residual {worst:.2e}")


def test_criterion_06_cylinder_sample_bound(lps5):
    worst_margin = np.inf
    ok = True
    for i in range(10):
        f = random_observable(k=3, depth=i % 3, two_j_max=2, seed=900 + i)
        for theta in (0.3, 0.5, 0.8):
            for n in range(1, 11):
                lhs, bound = cylinder_sample_error(f, n, lps5, theta)
                ok = ok and lhs <= bound + 1e-13
                if bound > 0:
                    worst_margin = min(worst_margin, bound - lhs)
    report(6, ok, f"one-point quadrature error <= ||F|| theta^n over 10 F x 3 theta "
                  f"x n<=10, smallest margin {worst_margin:.2e}")


def test_criterion_07_decoupling_and_split_bound(lps5):
    # zero-remainder case: depth-0 G, word sum vs Fourier power evolution
    g0 = random_observable(k=3, depth=0, two_j_max=2, seed=701)
    worst = 0.0
    for n in range(0, 7):
        brute = twisted_transfer_word_sum(g0, n, (), lps5)
        for j, arr in g0.blocks.items():
            s_pow = np.linalg.matrix_power(hecke_block(lps5, j).mat, n)
            worst = max(worst, np.abs(brute.blocks[j] - arr[0] @ s_pow).max())
    ok_zero = worst < 1e-9
    # depth-2 case: measured sup_x deviation against theta^n1 + 2 rho^n2
    g2 = random_observable(k=3, depth=2, two_j_max=2, seed=702)
    rho = gap_scan(lps5, g2.two_j_max).rho
    theta = 0.5
    ok_split = True
    worst_ratio = 0.0
    for n in range(1, 11):
        chk = proposition_split_check(g2, n, lps5, theta, n1=n // 2, rho=rho)
        ok_split = ok_split and chk.lhs <= chk.rhs
        worst_ratio = max(worst_ratio, chk.lhs / chk.rhs)
    ok = ok_zero and ok_split
    report(7, ok, f"depth-0 word-sum vs S_j^n residual {worst:.2e} (<1e-9); "
                  f"depth-2 sup deviation <= bound for n<=10, worst lhs/rhs {worst_ratio:.3f}")


def test_criterion_08_theorem1_rate(lps5):
    h = single_block_observable(1, np.eye(2) / 2, k=3)  # normalized identity block
    c0 = correlation_exact(h, h, 0, lps5).real
    ns = list(range(0, 13))
    values = [correlation_exact(h, h, n, lps5) for n in ns]
    worst = max(abs(abs(v) - c0 * SQRT5 ** (-n)) for n, v in zip(ns, values))
    fit = decay_fit(CorrelationSeries(ns, values, ["exact"] * len(ns), [None] * len(ns)))
    rho = gap_scan(lps5, 50).rho
    bounds_ok = all(
        fit.gamma_hat <= max(np.sqrt(th), np.sqrt(rho)) for th in (0.05, 0.1, 0.2)
    )
    ok = worst < 1e-12 and abs(fit.gamma_hat - 1 / SQRT5) <= 0.02 and bounds_ok
    report(8, ok, f"|C_n| = C_0 5^(-n/2) exactly (residual {worst:.2e}); "
                  f"gamma_hat = {fit.gamma_hat:.6f} = 1/sqrt5 +- 0.02; "
                  f"<= max(sqrt theta, sqrt rho) for theta <= 0.2")


def test_criterion_09_mc_exact_agreement(lps5):
    rng = np.random.default_rng(109)
    n_inst = 20
    all_ok = True
    worst_pull = 0.0
    for i in range(n_inst):
        f = random_observable(k=3, depth=int(rng.integers(0, 3)), two_j_max=2,
                              seed=1000 + i)
        g = random_observable(k=3, depth=int(rng.integers(0, 3)), two_j_max=2,
                              seed=2000 + i)
        n = int(rng.integers(0, 6))
        exact = correlation_exact(f, g, n, lps5)
        est, se = correlation_mc(f, g, n, lps5, 100_000, seed=3000 + i)
        pull = abs(est - exact) / se
        worst_pull = max(worst_pull, pull)
        all_ok = all_ok and pull <= 3.0
    # fixed seeds reproduce byte-identical CSV reports
    cfg = ExperimentConfig().with_overrides(
        n_max=4, mc_samples=20_000, seed=77, two_j_max=6,
        observable_f="block:1", observable_g="block:1",
    )
    csv_a = render_csv(run_mix(cfg))
    csv_b = render_csv(run_mix(cfg))
    ok = all_ok and csv_a == csv_b
    report(9, ok, f"20 random (F,G,n) at N=1e5: worst |exact-mc|/se = {worst_pull:.2f} "
                  f"(<=3); repeated run byte-identical: {csv_a == csv_b}")


def test_criterion_10_clt(lps5):
    t0 = time.time()
    f = character_observable(1, k=3)  # centered single-block real observable
    gk = green_kubo_variance(f, lps5)
    sigma = float(np.sqrt(gk.sigma_sq))
    z = zn_samples(f, 1024, 10_000, lps5, seed=110)
    ks = ks_test(z, sigma)
    var_ratio = z.var() / gk.sigma_sq
    u = random_observable(k=3, depth=0, two_j_max=1, seed=111, real=True)
    cob = coboundary_observable(u, lps5)
    gk_cob = green_kubo_variance(cob, lps5, tol=1e-12, max_lag=120)
    elapsed = time.time() - t0
    ok = (
        ks < 0.05
        and abs(var_ratio - 1.0) < 0.10
        and abs(gk_cob.raw_sum) < 1e-8
        and elapsed < 300
    )
    report(10, ok, f"n=2^10, N=1e4: KS={ks:.4f} (<0.05), Var(Z_n)/sigma^2={var_ratio:.4f} "
                   f"(within 10%), coboundary sigma^2={gk_cob.raw_sum:.2e} (<1e-8), "
                   f"{elapsed:.0f}s (<300s)")
