"""Command line front end.

Subcommands: gap, mix, prop3, clt, norm, serve.  Configuration comes from
defaults, then an optional config file (--config; a previous report file
works too), then flags.  With --server URL the run is delegated to a running
service and the response is written to the same files a local run produces.

Exit codes: 0 success, 2 config or input error, 3 enumeration cap exceeded,
4 internal error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import ExperimentConfig, from_file
from .errors import CapExceeded, ConfigError
from .experiments import RUNNERS
from .reports import summary_lines, write_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_INTERNAL = 4

_FLAGS = [
    # (flag, config field, type, help)
    ("--preset", "preset", str, "generator preset: lps5, diagonal(phi), file:PATH"),
    ("--k", "k", int, "expected number of generators (cross-checked)"),
    ("--theta", "theta", float, "shift metric parameter in (0, 1)"),
    ("--two-j-max", "two_j_max", int, "block truncation, in two_j units"),
    ("--n-min", "n_min", int, "first lag of the series"),
    ("--n-max", "n_max", int, "last lag of the series"),
    ("--n1", "n1", str, "split rule for the two-term bound: 'half' or an integer"),
    ("--mc-samples", "mc_samples", int, "Monte Carlo sample count (0 disables MC columns)"),
    ("--clt-n", "clt_n", int, "Birkhoff sum length"),
    ("--clt-samples", "clt_samples", int, "number of normalized-sum draws"),
    ("--bins", "bins", int, "histogram bin count"),
    ("--seed", "seed", int, "root seed; all randomness derives from it"),
    ("--cap", "cap", int, "exhaustive enumeration cap"),
    ("--gk-tol", "gk_tol", float, "autocorrelation truncation tolerance"),
    ("--gk-max-lag", "gk_max_lag", int, "autocorrelation maximum lag"),
    ("--observable-f", "observable_f", str, "observable spec for F"),
    ("--observable-g", "observable_g", str, "observable spec for G"),
    ("--out", "out_dir", str, "output directory"),
    ("--workers", "workers", int, "worker count (results are worker-independent)"),
]


def _add_experiment_args(sub):
    sub.add_argument("--config", help="config file, or a report file with embedded config")
    sub.add_argument("--server", help="base URL of a running skewmix service")
    sub.add_argument(
        "--json", action="store_true", help="write only the JSON report, no CSV"
    )
    for flag, _, typ, help_text in _FLAGS:
        sub.add_argument(flag, type=typ, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skewmix",
        description="spectral gap, mixing, and CLT experiments for SU(2) "
        "skew extensions of the full shift",
    )
    parser.add_argument("--version", action="version", version=f"skewmix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("gap", "scan per-block norms of the averaging operator"),
        ("mix", "correlation series and decay-rate fit"),
        ("prop3", "two-term transfer-operator bound check"),
        ("clt", "normalized Birkhoff sums vs the Gaussian limit"),
        ("norm", "mixed norm of an observable"),
    ]:
        _add_experiment_args(sub.add_parser(name, help=help_text))
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = from_file(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for flag, field, _, _ in _FLAGS:
        value = getattr(args, flag.lstrip("-").replace("-", "_"))
        if value is not None:
            overrides[field] = value
    if args.json:
        overrides["output_format"] = "json"
    return cfg.with_overrides(**overrides)


def run_remote(server: str, command: str, cfg: ExperimentConfig) -> dict:
    import httpx

    payload = {k: v for k, v in cfg.as_dict().items() if k != "out_dir"}
    response = httpx.post(f"{server.rstrip('/')}/v1/{command}", json=payload, timeout=600.0)
    if response.status_code != 200:
        detail = response.json().get("detail", {})
        if isinstance(detail, dict) and detail.get("error") == "cap":
            raise CapExceeded(0, cfg.cap)
        raise ConfigError("server", f"{response.status_code}: {response.text}")
    report = response.json()
    report["config"]["out_dir"] = cfg.out_dir  # client-side provenance
    return report


def run_command(args) -> int:
    cfg = resolve_config(args).validate()
    if args.server:
        report = run_remote(args.server, args.command, cfg)
    else:
        report = RUNNERS[args.command](cfg)
    paths = write_report(report, cfg.out_dir)
    for line in summary_lines(report):
        print(line)
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_OK
    try:
        return run_command(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except Exception as exc:  # noqa: BLE001 - map anything else to the internal code
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
