"""Batch command-line front end.

Subcommands: compute, scan, validate, fit, length, levinson, bound,
twodim.  Input is a single JSON config document; output is CSV with a
fixed header plus a JSON sidecar with metadata, written into --out.
With --plot, matplotlib figures are rendered next to the tables.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, absolute, iterate, observables, phasefunc, radial
from .potentials import OriginClass, from_spec
from .radial import Channel, SolverConfig

log = logging.getLogger("phasekit")

CSV_HEADER = "k,ell,method,delta,err_quad,err_tail,amplitude_inf,jost_modulus"
ALL_METHODS = ("ode", "integral", "volterra", "picard")


def _fmt(x) -> str:
    """Deterministic float formatting, 17 significant digits."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        raise ValueError("NaN reached the output layer")
    return f"{x:.17g}"


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SystemExit(f"config {path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise SystemExit(f"config {path}: {exc}") from exc


def _solver_config(doc: dict) -> SolverConfig:
    s = doc.get("solver", {})
    allowed = {"rtol", "atol", "tail_tol", "r_max_cap", "r_max",
               "fp_tol", "max_iter", "method"}
    bad = set(s) - allowed
    if bad:
        raise SystemExit(f"config: unknown solver field(s) {sorted(bad)}")
    return SolverConfig(**s)


def _potential(doc: dict):
    if "potential" not in doc:
        raise SystemExit("config: missing required field 'potential'")
    try:
        return from_spec(doc["potential"])
    except ValueError as exc:
        raise SystemExit(f"config: {exc}") from exc


# ---------------------------------------------------------------------------
# Row computation
# ---------------------------------------------------------------------------

def _row(V, k: float, ell: float, method: str, cfg: SolverConfig) -> dict:
    ch = Channel(k, ell)
    out = {"k": k, "ell": ell, "method": method, "delta": None,
           "err_quad": None, "err_tail": None, "amplitude_inf": None,
           "jost_modulus": None, "error": None}
    try:
        if method == "integral":
            if V.origin_class is OriginClass.POWER_SINGULAR:
                sol = radial.solve_singular(V, ch, cfg)
            else:
                sol = radial.solve_regular(V, ch, cfg)
            res = absolute.phase_shift(V, sol)
            out.update(delta=res.delta, err_quad=res.err_quad,
                       err_tail=res.err_tail)
            amp = phasefunc.amplitude_from_solution(sol)
            out["amplitude_inf"] = amp.amplitude_inf
            if sol.norm_convention is radial.NormConvention.BESSEL_NORMALIZED \
                    and amp.converged:
                out["jost_modulus"] = k ** (ell + 1.0) * amp.amplitude_inf
        elif method == "volterra":
            sol = radial.solve_regular(V, ch, cfg)
            res = absolute.phase_shift_volterra(V, sol)
            out.update(delta=res.delta, err_quad=res.err_quad,
                       err_tail=res.err_tail)
            amp = phasefunc.amplitude_from_solution(sol)
            out["amplitude_inf"] = amp.amplitude_inf
            if amp.converged:
                out["jost_modulus"] = k ** (ell + 1.0) * amp.amplitude_inf
        elif method == "ode":
            prof = phasefunc.solve_phase_ode(V, ch, cfg)
            out.update(delta=prof.total, err_quad=prof.err_quad,
                       err_tail=prof.err_tail)
        elif method == "picard":
            if V.origin_class in (OriginClass.INVERSE_SQUARE,
                                  OriginClass.POWER_SINGULAR):
                raise ValueError("picard iteration needs rV integrable at 0")
            prof = iterate.picard_phase(V, ch, cfg)
            out.update(delta=prof.total, err_quad=prof.err_quad,
                       err_tail=prof.err_tail)
        else:
            raise ValueError(f"unknown method {method!r}")
    except Exception as exc:  # per-row failure, run continues
        log.warning("row (k=%g, ell=%g, %s) failed: %s", k, ell, method, exc)
        out["error"] = str(exc)
    return out


def _rows_to_csv(rows: list[dict]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        if r.get("error"):
            vals = [_fmt(r["k"]), _fmt(r["ell"]), r["method"], "", "", "", "", ""]
        else:
            vals = [_fmt(r["k"]), _fmt(r["ell"]), r["method"],
                    _fmt(r["delta"]), _fmt(r["err_quad"]), _fmt(r["err_tail"]),
                    _fmt(r["amplitude_inf"]), _fmt(r["jost_modulus"])]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def _parallel(tasks, jobs: int):
    """Run callables concurrently, preserving input order in the output."""
    if jobs <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


def _write(out_dir: Path, stem: str, csv_text: str, meta: dict,
           fmt: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        (out_dir / f"{stem}.csv").write_text(csv_text)
    (out_dir / f"{stem}.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s/%s.{csv,json}", out_dir, stem)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_compute(args) -> int:
    doc = _load_config(args.config)
    V = _potential(doc)
    cfg = _solver_config(doc)
    channels = doc.get("channels")
    methods = doc.get("methods", list(ALL_METHODS))
    if not channels:
        raise SystemExit("config: 'channels' must list at least one [k, ell]")
    if not methods:
        raise SystemExit("config: 'methods' must list at least one method")
    for m in methods:
        if m not in ALL_METHODS:
            raise SystemExit(f"config: unknown method {m!r}; "
                             f"choose from {list(ALL_METHODS)}")
    tasks = [(lambda k=float(k), l=float(l), m=m: _row(V, k, l, m, cfg))
             for (k, l) in channels for m in methods]
    rows = _parallel(tasks, args.jobs)

    discrepancy = {}
    for (k, l) in channels:
        ds = [r["delta"] for r in rows
              if r["k"] == float(k) and r["ell"] == float(l)
              and r["delta"] is not None]
        discrepancy[f"k={float(k):g},ell={float(l):g}"] = \
            (max(ds) - min(ds)) if len(ds) >= 2 else 0.0
    meta = {"potential": V.label, "rows": rows, "discrepancy": discrepancy,
            "version": __version__}
    out = Path(args.out)
    _write(out, "compute", _rows_to_csv(rows), meta, args.format)
    if args.plot:
        from . import plotting
        ok = [r for r in rows if r["delta"] is not None]
        if ok:
            plotting.plot_scan(np.array([r["k"] for r in ok]),
                               np.array([r["delta"] for r in ok]),
                               out / "compute.png", title=V.label)
    dominated = [r for r in rows if not r.get("error")
                 and (r["err_tail"] or 0.0) + (r["err_quad"] or 0.0) > args.tol]
    errored = [r for r in rows if r.get("error")]
    return 1 if (dominated or errored) else 0


def cmd_scan(args) -> int:
    doc = _load_config(args.config)
    V = _potential(doc)
    cfg = _solver_config(doc)
    kg = doc.get("k_grid")
    if not kg:
        raise SystemExit("config: 'k_grid' {min, max, n} is required for scan")
    ks = np.geomspace(kg["min"], kg["max"], int(kg["n"]))
    ell = float(doc.get("ell", 0.0))
    method = doc.get("method", "integral")
    tasks = [(lambda k=float(k): _row(V, k, ell, method, cfg)) for k in ks]
    rows = _parallel(tasks, args.jobs)
    meta = {"potential": V.label, "rows": rows, "version": __version__}
    out = Path(args.out)
    _write(out, "scan", _rows_to_csv(rows), meta, args.format)
    if args.plot:
        from . import plotting
        ok = [r for r in rows if r["delta"] is not None]
        plotting.plot_scan(np.array([r["k"] for r in ok]),
                           np.array([r["delta"] for r in ok]),
                           out / "scan.png", title=V.label)
    return 1 if any(r.get("error") for r in rows) else 0


def cmd_validate(args) -> int:
    from . import validation
    results = validation.run_all()
    for res in results:
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}")
    return 0 if all(r.passed for r in results) else 1


def cmd_fit(args) -> int:
    doc = _load_config(args.config)
    V = _potential(doc)
    kg = doc.get("k_grid")
    if not kg:
        raise SystemExit("config: 'k_grid' {min, max, n} is required for fit")
    ks = np.geomspace(kg["min"], kg["max"], int(kg["n"]))
    if V.origin_class is OriginClass.POWER_SINGULAR:
        fit = observables.high_energy_fit(V, ks)
    elif "alpha" in V.params:
        fit = observables.titchmarsh_fit(V, ks)
    else:
        raise SystemExit("fit: potential must be power_singular or power_origin")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fit.json").write_text(
        json.dumps(fit.as_json_dict(), indent=2, sort_keys=True) + "\n")
    print(json.dumps(fit.as_json_dict(), indent=2, sort_keys=True))
    if args.plot:
        from . import plotting
        plotting.plot_scan(ks, np.array(fit.extras["deltas"]),
                           out / "fit.png", title=V.label)
    return 0


def cmd_length(args) -> int:
    doc = _load_config(args.config)
    V = _potential(doc)
    res = observables.scattering_length(V)
    payload = {"a0": res.value, "method": res.method,
               "extrapolated": res.extrapolated, "status": res.status}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "length.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_levinson(args) -> int:
    doc = _load_config(args.config)
    V = _potential(doc)
    res = observables.levinson_check(V, float(doc.get("k_min", 1e-3)))
    nodes = observables.count_zero_energy_nodes(V)
    payload = {"delta_at_zero": res.delta_at_zero, "n_estimate": res.n_estimate,
               "spread": res.spread, "confident": res.confident,
               "node_count": nodes}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "levinson.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if res.confident and nodes == res.n_estimate else 1


def cmd_bound(args) -> int:
    doc = _load_config(args.config)
    V = _potential(doc)
    cfg = _solver_config(doc)
    k = float(doc.get("k", 1.0))
    ch = Channel(k, 0.0)
    maj = iterate.majorant(V, ch, cfg)
    rb = iterate.riccati_bound(V, ch, cfg)
    prof = iterate.picard_phase(V, ch, cfg)
    delta_abs = np.abs(np.interp(maj.grid, prof.grid, prof.delta))
    dominated = maj.Delta + 1e-12 >= delta_abs
    lines = ["r,Delta,abs_delta,dominated,I,J,omega"]
    I = np.interp(maj.grid, rb.grid, rb.I)
    J = np.interp(maj.grid, rb.grid, rb.J)
    om = np.interp(maj.grid, rb.grid, rb.omega)
    for i in range(len(maj.grid)):
        lines.append(",".join([_fmt(maj.grid[i]), _fmt(maj.Delta[i]),
                               _fmt(delta_abs[i]),
                               "1" if dominated[i] else "0",
                               _fmt(I[i]), _fmt(J[i]),
                               _fmt(om[i]) if math.isfinite(om[i]) else "inf"]))
    meta = {"potential": V.label, "k": k, "C": maj.C, "D": maj.D,
            "iterations": maj.iterations, "converged": maj.converged,
            "riccati_r0": rb.r0 if math.isfinite(rb.r0) else "inf",
            "all_dominated": bool(np.all(dominated)), "version": __version__}
    out = Path(args.out)
    _write(out, "bound", "\n".join(lines) + "\n", meta, args.format)
    if args.plot:
        from . import plotting
        plotting.plot_bound(maj.grid, maj.Delta, delta_abs, out / "bound.png",
                            title=V.label)
    return 0 if np.all(dominated) else 1


def cmd_twodim(args) -> int:
    doc = _load_config(args.config)
    V = _potential(doc)
    k_list = doc.get("k_list", [1e-4, 1e-6, 1e-8])
    res = observables.low_energy_2d_scan(V, [float(k) for k in k_list])
    lines = ["k,delta,product"]
    for k, d, p in res:
        lines.append(",".join([_fmt(k), _fmt(d), _fmt(p)]))
    meta = {"potential": V.label, "rows": [list(t) for t in res],
            "limit": -math.pi / 2.0, "version": __version__}
    out = Path(args.out)
    _write(out, "twodim", "\n".join(lines) + "\n", meta, args.format)
    return 0


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phasekit",
        description="Partial-wave phase shifts by the variable phase approach")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None,
                       help="path to the JSON run configuration")
        p.add_argument("--out", default="phasekit_out",
                       help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel workers across channels")
        p.add_argument("--tol", type=float, default=1e-6,
                       help="acceptable per-row error budget")
        p.add_argument("--plot", action="store_true",
                       help="render figures next to the tables")
        p.set_defaults(func=fn)
        return p

    add("compute", cmd_compute, "phase shifts for channels x methods")
    add("scan", cmd_scan, "k-sweep of delta, A(k,inf), |F(k)|")
    add("validate", cmd_validate, "run the invariant self-check suite")
    add("fit", cmd_fit, "high-energy / origin-singularity power-law fits")
    add("length", cmd_length, "S-wave scattering length")
    add("levinson", cmd_levinson, "delta(0+) = n pi check")
    add("bound", cmd_bound, "majorant and Riccati-type envelopes")
    add("twodim", cmd_twodim, "low-energy law of the ell = -1/2 channel")

    args = parser.parse_args(argv)
    level = os.environ.get("PHASEKIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    needs_config = args.command not in ("validate",)
    if needs_config and not args.config:
        parser.error(f"{args.command} requires --config")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
