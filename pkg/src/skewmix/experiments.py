"""Experiment runners: config in, plain report dict out.

Each runner resolves the generator set, executes the computation, and
returns {kind, version, config, summary, table}; the CLI and the service
both feed these dicts to the report writers, so local and remote runs
produce byte-identical files.
"""

from __future__ import annotations

import numpy as np

from . import __version__
from .clt import green_kubo_variance, ks_test, zn_samples
from .config import ExperimentConfig
from .errors import ConfigError
from .hecke import gap_scan
from .mixing import (
    FitError,
    correlation_exact,
    correlation_mc,
    cylinder_sample_error,
    decay_fit,
    correlation_series,
    proposition_split_check,
)
from .observables import from_spec
from .shift import norm_theta_G, norm_theta_parts
from .su2 import preset


def resolve_generators(cfg: ExperimentConfig):
    gens = preset(cfg.preset)
    if cfg.k is not None and cfg.k != gens.k:
        raise ConfigError("k", f"config k={cfg.k} but preset {cfg.preset!r} has k={gens.k}")
    return gens


def _plain(value):
    """numpy scalars render as np.float64(...) in repr; strip them early."""
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _report(kind: str, cfg: ExperimentConfig, summary: dict, columns, rows) -> dict:
    return {
        "kind": kind,
        "version": __version__,
        "config": cfg.as_dict(),
        "summary": {k: _plain(v) for k, v in summary.items()},
        "table": {
            "columns": list(columns),
            "rows": [[_plain(v) for v in r] for r in rows],
        },
    }


def run_gap(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    gens = resolve_generators(cfg)
    report = gap_scan(gens, cfg.two_j_max)
    summary = {
        "preset": report.preset,
        "k": report.k,
        "two_j_max": report.two_j_max,
        "rho": report.rho,
        "kesten": report.kesten,
        "rho_minus_kesten": report.rho - report.kesten,
    }
    rows = [(two_j, dim, float(nrm)) for two_j, dim, nrm in report.rows()]
    return _report("gap", cfg, summary, ("two_j", "dim", "norm"), rows)


def run_mix(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    gens = resolve_generators(cfg)
    f = from_spec(cfg.observable_f, gens.k)
    g = from_spec(cfg.observable_g, gens.k)
    n_values = list(range(cfg.n_min, cfg.n_max + 1))
    series = correlation_series(
        f, g, n_values, gens, cap=cfg.cap, mc_samples=cfg.mc_samples, seed=cfg.seed
    )
    rho = gap_scan(gens, cfg.two_j_max).rho
    bound_rate = max(np.sqrt(cfg.theta), np.sqrt(rho))
    rows = []
    for i, n in enumerate(n_values):
        c = series.values[i]
        row = [n, c.real, c.imag, abs(c), series.methods[i], series.errors[i]]
        if cfg.mc_samples > 0:
            est, se = correlation_mc(f, g, n, gens, cfg.mc_samples, cfg.seed + n)
            row += [est.real, est.imag, se]
        else:
            row += [None, None, None]
        rows.append(row)
    summary = {
        "rho": float(rho),
        "theta": cfg.theta,
        "bound_rate": float(bound_rate),
        "observable_f": cfg.observable_f,
        "observable_g": cfg.observable_g,
    }
    try:
        fit = decay_fit(series, bound_rate=float(bound_rate))
        summary.update(
            {
                "gamma_hat": fit.gamma_hat,
                "fit_window": f"{fit.window[0]}..{fit.window[1]}",
                "fit_points": fit.n_used,
                "fit_residual": fit.residual,
                "fit_note": "ok",
            }
        )
    except FitError as exc:
        summary.update(
            {
                "gamma_hat": None,
                "fit_window": None,
                "fit_points": 0,
                "fit_residual": None,
                "fit_note": str(exc),
            }
        )
    columns = ("n", "re_c", "im_c", "abs_c", "method", "se", "mc_re", "mc_im", "mc_se")
    return _report("mix", cfg, summary, columns, rows)


def run_prop3(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    gens = resolve_generators(cfg)
    g = from_spec(cfg.observable_g, gens.k)
    rho = gap_scan(gens, cfg.two_j_max).rho
    rows = []
    all_within = True
    for n in range(max(cfg.n_min, 1), cfg.n_max + 1):
        chk = proposition_split_check(
            g, n, gens, cfg.theta, n1=cfg.n_split(n), rho=rho, cap=cfg.cap
        )
        lemma_lhs, lemma_bound = cylinder_sample_error(g, n, gens, cfg.theta)
        all_within = all_within and chk.lhs <= chk.rhs and lemma_lhs <= lemma_bound + 1e-13
        rows.append(
            [
                n,
                chk.n1,
                chk.n2,
                chk.lhs,
                chk.rhs,
                chk.theta_term,
                chk.hecke_term,
                lemma_lhs,
                lemma_bound,
            ]
        )
    summary = {
        "observable_g": cfg.observable_g,
        "theta": cfg.theta,
        "rho": float(rho),
        "norm_g": float(norm_theta_G(g, cfg.theta)),
        "all_within_bound": bool(all_within),
    }
    columns = (
        "n",
        "n1",
        "n2",
        "lhs",
        "rhs",
        "theta_term",
        "hecke_term",
        "lemma_lhs",
        "lemma_bound",
    )
    return _report("prop3", cfg, summary, columns, rows)


def run_clt(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    gens = resolve_generators(cfg)
    f = from_spec(cfg.observable_f, gens.k)
    gk = green_kubo_variance(f, gens, tol=cfg.gk_tol, max_lag=cfg.gk_max_lag, cap=cfg.cap)
    z = zn_samples(f, cfg.clt_n, cfg.clt_samples, gens, seed=cfg.seed)
    sigma = float(np.sqrt(gk.sigma_sq))
    degenerate = sigma < 1e-6
    ks = None if degenerate else ks_test(z, sigma)
    span = 5.0 * sigma if sigma > 0 else max(float(np.abs(z).max()), 1.0)
    counts, edges = np.histogram(z, bins=cfg.bins, range=(-span, span))
    rows = [
        [float(edges[i]), float(edges[i + 1]), int(counts[i]),
         float(counts[i] / (len(z) * (edges[i + 1] - edges[i])))]
        for i in range(len(counts))
    ]
    emp_var = float(z.var())
    summary = {
        "observable_f": cfg.observable_f,
        "n": cfg.clt_n,
        "samples": cfg.clt_samples,
        "sigma_sq": float(gk.sigma_sq),
        "sigma": sigma,
        "degenerate": bool(degenerate),
        "ks": ks,
        "emp_mean": float(z.mean()),
        "emp_var": emp_var,
        "var_ratio": emp_var / gk.sigma_sq if gk.sigma_sq > 0 else None,
        "gk_terms": gk.n_terms,
        "gk_converged": bool(gk.converged),
        "gk_tail_bound": gk.tail_bound,
        "gk_rate": gk.rate,
        "outside_histogram": int(len(z) - counts.sum()),
    }
    return _report("clt", cfg, summary, ("bin_lo", "bin_hi", "count", "density"), rows)


def run_norm(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    gens = resolve_generators(cfg)
    f = from_spec(cfg.observable_f, gens.k)
    sup_sq, lip_sq = norm_theta_parts(f, cfg.theta)
    norm = float(np.sqrt(sup_sq + lip_sq))
    mean = f.integral()
    c0 = correlation_exact(f, f, 0, gens, cap=cfg.cap).real
    summary = {
        "observable_f": cfg.observable_f,
        "theta": cfg.theta,
        "norm": norm,
        "sup_l2_sq": float(sup_sq),
        "lip_sq": float(lip_sq),
        "mean_re": float(mean.real),
        "mean_im": float(mean.imag),
        "variance": float(c0),
        "depth": f.depth,
        "two_j_max": f.two_j_max,
    }
    rows = [[norm, float(sup_sq), float(lip_sq)]]
    return _report("norm", cfg, summary, ("norm", "sup_l2_sq", "lip_sq"), rows)


RUNNERS = {
    "gap": run_gap,
    "mix": run_mix,
    "prop3": run_prop3,
    "clt": run_clt,
    "norm": run_norm,
}
