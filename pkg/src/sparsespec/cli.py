"""Command-line interface: seeded, reproducible experiment runs with CSV and
JSON outputs.

Every run writes its outputs plus a meta.json (command, parameters, seed,
version, elapsed time) sufficient to reproduce the run; CSV bytes are
identical across reruns with the same parameters.  Exit codes: 0 success,
1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, edge_stats, flow as flow_mod, law as law_mod, spectral
from ._fileio import atomic_write_text
from .ensembles import (
    RngStream,
    exact_s_k,
    sample_centered_er,
    sample_goe_zero_diag,
    sample_sparse_generic,
)
from .errors import InvalidParameter, SparseSpecError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class _CliValidation(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on bad flags; raise instead so the
    # dispatcher owns the exit-code contract.
    def error(self, message):
        raise _CliValidation(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sparsespec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=False, out_required=False, mode=False, workers=False):
        if seed:
            p.add_argument("--seed", type=int, required=True, help="master seed (required)")
        if workers:
            p.add_argument("--workers", type=int, default=None, help="parallel workers")
        if mode:
            p.add_argument("--mode", choices=["strict", "permissive"], default="strict")
        p.add_argument("--out", type=Path, required=out_required, help="output directory")

    p = sub.add_parser("density", help="law density on an energy grid")
    p.add_argument("--s4", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=1001, help="number of energy points")
    common(p, mode=True, out_required=True)

    p = sub.add_parser("edge", help="upper edge L and stationary value tau")
    p.add_argument("--s4", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    common(p)

    p = sub.add_parser("local-law", help="local-law scan of one matrix draw")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--s4", type=float, default=None)
    p.add_argument(
        "--kind",
        choices=["centered-er", "sparse-generic", "goe-zero-diag", "diluted-wigner"],
        default=None,
        help="ensemble (default: inferred from --p/--q)",
    )
    common(p, seed=True, mode=True, out_required=True)

    p = sub.add_parser("tw", help="Monte Carlo edge statistics and KS test vs reference")
    p.add_argument(
        "--ensemble",
        choices=["centered-er", "adjacency", "diluted-wigner", "sparse-generic", "goe-zero-diag"],
        default="centered-er",
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--s4", type=float, default=None)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--which", type=int, default=1, help="eigenvalue index, 1 = largest")
    p.add_argument(
        "--center", choices=["shifted", "unshifted", "adjacency"], default="shifted"
    )
    p.add_argument("--reference", type=Path, default=None, help="reference CDF file")
    common(p, seed=True, workers=True, mode=True, out_required=True)

    p = sub.add_parser("flow", help="edge trajectory along the matrix flow")
    p.add_argument("--n", type=int, required=True, help="sets the final time 6*log(N)")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--s4", type=float, required=True)
    p.add_argument("--t-points", type=int, default=25)
    common(p, out_required=True)

    p = sub.add_parser("community", help="community-detection statistic of a graph file")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--reference", type=Path, required=True)
    common(p)

    p = sub.add_parser("build-reference", help="build and persist the GOE reference CDF")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    common(p, seed=True, workers=True, out_required=True)

    p = sub.add_parser("selftest", help="exact-identity suite")
    common(p)

    return parser


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def run_meta(command: str, params: dict, master_seed, elapsed_s: float) -> dict:
    clean = {}
    for key, value in sorted(params.items()):
        if isinstance(value, Path):
            value = str(value)
        clean[key] = value
    return {
        "command": command,
        "params": clean,
        "master_seed": master_seed,
        "version": __version__,
        "elapsed_s": elapsed_s,
        "timestamp": _utc_now(),
    }


def write_outputs(files: dict, out_dir: Path, meta: dict) -> None:
    """Write every output file plus meta.json atomically under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        atomic_write_text(out_dir / name, content)
    atomic_write_text(out_dir / "meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _csv(header: str, rows) -> str:
    return "\n".join([header] + list(rows)) + "\n"


def _law_from_args(args) -> law_mod.LawParams:
    return law_mod.LawParams(s4=args.s4, q=args.q, t=getattr(args, "t", 0.0))


def _cmd_density(args) -> tuple[dict, list[str]]:
    params = _law_from_args(args)
    if args.grid < 1:
        raise InvalidParameter("--grid must be at least 1")
    energies = np.linspace(-3.0, 3.0, args.grid)
    rows = [f"{E!r},{law_mod.density(params, float(E), mode=args.mode)!r}" for E in energies]
    return {"density.csv": _csv("E,rho", rows)}, []


def _cmd_edge(args) -> tuple[dict, list[str]]:
    params = _law_from_args(args)
    ed = law_mod.edge(params)
    lines = [f"L = {ed.L!r}", f"tau = {ed.tau!r}"]
    files = {"edge.csv": _csv("L,tau,c4,qt", [f"{ed.L!r},{ed.tau!r},{params.c4!r},{params.qt!r}"])}
    return files, lines


def _resolve_scan_inputs(args):
    if args.p is not None and args.q is not None:
        if abs(args.q**2 - args.n * args.p) > 1e-12 * args.n * args.p:
            raise InvalidParameter("--p and --q are inconsistent: q^2 must equal N*p")
    kind = args.kind
    if kind is None:
        if args.p is not None:
            kind = "centered-er"
        elif args.q is not None:
            kind = "sparse-generic"
        else:
            raise InvalidParameter("need --p or --q (or --kind goe-zero-diag)")
    if kind == "goe-zero-diag":
        params = law_mod.LawParams(s4=0.0, q=math.sqrt(args.n))
    elif kind == "centered-er":
        if args.p is None:
            raise InvalidParameter("centered-er needs --p")
        params = law_mod.LawParams(s4=exact_s_k(args.p, 4), q=math.sqrt(args.n * args.p))
    elif kind == "diluted-wigner":
        if args.p is None:
            raise InvalidParameter("diluted-wigner needs --p")
        params = law_mod.LawParams(s4=1 - 3 * args.p, q=math.sqrt(args.n * args.p))
    else:
        if args.q is None:
            raise InvalidParameter("sparse-generic needs --q")
        params = law_mod.LawParams(s4=args.s4 if args.s4 is not None else 1.0, q=args.q)
    return kind, params


def _cmd_local_law(args) -> tuple[dict, list[str]]:
    kind, params = _resolve_scan_inputs(args)
    stream = RngStream(args.seed, 0)
    if kind == "goe-zero-diag":
        H = sample_goe_zero_diag(args.n, stream)
    elif kind == "centered-er":
        H = sample_centered_er(args.n, args.p, stream)
    elif kind == "diluted-wigner":
        from .ensembles import sample_diluted_wigner

        H = sample_diluted_wigner(args.n, args.p, stream)
    else:
        H = sample_sparse_generic(args.n, params.q, 0.0, params.s4, stream)
    spec = spectral.eigen(H)
    report = spectral.local_law_scan(spec, params, spectral.default_grid(args.n), mode=args.mode)
    rows = [
        f"{r.E!r},{r.eta!r},{r.m.real!r},{r.m.imag!r},{r.mtilde.real!r},"
        f"{r.mtilde.imag!r},{r.lambda_err!r},{r.bound!r},{r.ratio!r}"
        for r in report.rows
    ]
    worst = float(np.max(report.ratios()))
    return (
        {"local_law.csv": _csv(spectral.LocalLawReport.CSV_HEADER, rows)},
        [f"grid points: {len(report.rows)}", f"worst ratio: {worst!r}"],
    )


def _default_mc_law(ensemble: str, N: int, p, q, s4) -> law_mod.LawParams:
    if ensemble == "goe-zero-diag":
        return law_mod.LawParams(s4=0.0, q=math.sqrt(N))
    if ensemble in ("centered-er", "adjacency"):
        pp = p if p is not None else (q**2 / N)
        return law_mod.LawParams(s4=exact_s_k(pp, 4), q=math.sqrt(N * pp))
    if ensemble == "diluted-wigner":
        pp = p if p is not None else (q**2 / N)
        return law_mod.LawParams(s4=1 - 3 * pp, q=math.sqrt(N * pp))
    if q is None:
        raise InvalidParameter("sparse-generic needs --q")
    return law_mod.LawParams(s4=s4 if s4 is not None else 1.0, q=q)


_CENTER_FLAG = {
    "shifted": "shifted-L",
    "unshifted": "unshifted-2",
    "adjacency": "adjacency-L-plus-a",
}


def _cmd_tw(args) -> tuple[dict, list[str]]:
    config = edge_stats.McConfig(
        kind=args.ensemble,
        N=args.n,
        p=args.p,
        q=args.q,
        s4=args.s4 if args.s4 is not None else 1.0,
        samples=args.samples,
        master_seed=args.seed,
        workers=args.workers or 1,
        eigen_index=args.which,
        centering=_CENTER_FLAG[args.center],
    )
    params = _default_mc_law(args.ensemble, args.n, args.p, args.q, args.s4)
    samples = edge_stats.mc_extreme(config, params)
    lines = [f"center used: {samples.center_used!r}"]
    files = {}
    buf = []
    samples_csv_rows = [
        f"{j},{int(samples.seeds[j])},{samples.raw[j]!r},{samples.values[j]!r}"
        for j in range(len(samples.values))
    ]
    files["edge_samples.csv"] = _csv("sample_index,seed,lambda_raw,rescaled", samples_csv_rows)
    if args.reference is not None:
        ref = edge_stats.ReferenceCdf.load(args.reference)
        ks = edge_stats.two_sample_ks(samples.values, ref.values)
        lines += [f"KS statistic: {ks.statistic!r}", f"KS p-value: {ks.p_value!r}"]
        buf.append(f"{ks.statistic!r},{ks.n1},{ks.n2},{ks.p_value!r}")
        files["ks.csv"] = _csv("statistic,n1,n2,p_value", buf)
    return files, lines


def _cmd_flow(args) -> tuple[dict, list[str]]:
    params = law_mod.LawParams(s4=args.s4, q=args.q, t=0.0)
    traj = flow_mod.trajectory(params, flow_mod.default_t_grid(args.n, args.t_points))
    rows = [f"{r.t!r},{r.qt!r},{r.Lt!r},{r.Ldot!r}" for r in traj.rows]
    return {"flow_trajectory.csv": _csv(flow_mod.FlowTrajectory.CSV_HEADER, rows)}, [
        f"rows: {len(traj.rows)}",
        f"final edge: {traj.rows[-1].Lt!r}",
    ]


def _cmd_community(args) -> tuple[dict, list[str]]:
    A = edge_stats.ingest_graph(args.graph)
    params = edge_stats.law_from_adjacency(A)
    ref = edge_stats.ReferenceCdf.load(args.reference)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = edge_stats.community_statistic(A, params, ref)
    lines = [f"T = {result.statistic!r}", f"p_value = {result.p_value!r}"]
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    files = {
        "community.csv": _csv(
            "T,p_value,N,p_hat,q_hat",
            [
                f"{result.statistic!r},{result.p_value!r},{A.N},"
                f"{edge_stats.edge_density(A)!r},{params.q!r}"
            ],
        )
    }
    return files, lines


def _cmd_build_reference(args) -> tuple[dict, list[str]]:
    ref = edge_stats.build_reference_cdf(
        args.n, args.samples, args.seed, path=None, workers=args.workers or 1
    )
    header = (
        f"# reference_cdf version={ref.version} N_ref={ref.N_ref} "
        f"M_ref={ref.M_ref} seed={ref.seed}"
    )
    body = "\n".join([header] + [repr(float(v)) for v in ref.values]) + "\n"
    return {"reference_cdf.csv": body}, [
        f"median rescaled edge: {ref.quantile(0.5)!r}",
        f"samples: {ref.M_ref}",
    ]


def _cmd_selftest(args) -> tuple[dict, list[str]]:
    lines = []
    failures = 0

    def check(name, worst, tol):
        nonlocal failures
        ok = worst <= tol
        failures += not ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: worst residual {worst:.3e} (tol {tol:.1e})")

    grid = [(E, eta) for E in np.linspace(-2.9, 2.9, 12) for eta in np.geomspace(1e-3, 3, 6)]
    worst = max(
        abs(1 + z * law_mod.semicircle_stieltjes(z) + law_mod.semicircle_stieltjes(z) ** 2)
        for E, eta in grid
        for z in [complex(E, eta)]
    )
    check("semicircle transform equation", worst, 1e-14)

    params = law_mod.LawParams(s4=1.0, q=30.0)
    worst = max(
        abs(law_mod.law_poly(params, z, law_mod.stieltjes(params, z))) / (1 + abs(z))
        for E, eta in grid
        for z in [complex(E, eta)]
    )
    check("law polynomial at its own root", worst, 1e-12)

    worst_ward = 0.0
    worst_res = 0.0
    worst_sm = 0.0
    for idx in range(3):
        H = sample_centered_er(60, 0.2, RngStream(2024, idx))
        spec = spectral.eigen(H)
        for z in (0.5 + 0.1j, -1.0 + 0.5j, 2.0 + 1.0j):
            G = spectral.green_matrix(H, z)
            worst_ward = max(worst_ward, spectral.ward_residual(G))
            worst_res = max(worst_res, spectral.resolvent_identity_residual(H, G))
            worst_sm = max(
                worst_sm,
                abs(
                    spectral.smoothed_count(spec, z.real, z.imag)
                    - spectral.empirical_stieltjes(spec, z).imag / math.pi
                ),
            )
    check("resolvent column-sum identity", worst_ward, 1e-10)
    check("resolvent defining identity", worst_res, 1e-10)
    check("smoothed count vs transform", worst_sm, 1e-12)

    if failures:
        raise SparseSpecError(f"selftest: {failures} check(s) failed")
    return {}, lines


_HANDLERS = {
    "density": _cmd_density,
    "edge": _cmd_edge,
    "local-law": _cmd_local_law,
    "tw": _cmd_tw,
    "flow": _cmd_flow,
    "community": _cmd_community,
    "build-reference": _cmd_build_reference,
    "selftest": _cmd_selftest,
}


def dispatch(argv) -> int:
    """Parse argv, run the subcommand, write outputs; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliValidation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    start = time.time()
    try:
        files, lines = _HANDLERS[args.command](args)
    except (InvalidParameter, _CliValidation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    for line in lines:
        print(line)
    if getattr(args, "out", None) is not None:
        params = {
            k: v for k, v in vars(args).items() if k not in ("command", "out") and v is not None
        }
        meta = run_meta(args.command, params, getattr(args, "seed", None), time.time() - start)
        try:
            write_outputs(files, args.out, meta)
        except OSError as exc:
            print(f"runtime error writing {args.out}: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
