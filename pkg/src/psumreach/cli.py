"""Command-line surface.

Subcommands:
  psum-outer  outer ellipsoid of one p-sum (the scenario's initial set)
  reach       reach tube with per-step outer ellipsoids and boundary data
  repro       recompute a bundled scenario and diff against reference values
  verify      containment certificates + enclosing-ellipsoid reference oracle

Scenario files are JSON; `table1` and `table2` name bundled scenarios. Exit
codes: 0 success, 1 usage/input error, 2 numerical failure, 3 verification
failure.
"""

import argparse
import csv
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import PSumReachError
from .geometry import Ellipsoid, PSumSet, support_point, volume
from .metrics import SphereSampler, report
from .oracle import check_containment, mvee_khachiyan
from .outer import Criterion, FixedPointConfig, fold_psum_outer
from .reach import LtiSystem, ReachTube, UncertaintyModel, reach_support, reach_tube

BUNDLED = ("table1", "table2")

# published reference values diffed by the repro subcommand (volumes of the
# per-step minimum-volume outer ellipsoids for the two bundled scenarios)
REFERENCE_VOLUMES = {
    "table1": [
        8.6837, 14.6765, 28.7263, 33.2574, 36.8740,
        65.1379, 70.1632, 63.8502, 109.2246, 120.8542,
    ],
    "table2": [
        57.7493, 99.3984, 182.9045, 206.0490, 266.6789,
        383.9408, 387.4037, 461.7879, 610.9069, 666.9160,
    ],
}
REPRO_RTOL = 1e-3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the contract reserves 2 for
    # numerical failure, so route usage problems to exit 1
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# scenario ingestion


def _as_p(value):
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        raise _UsageError(f"p must be a number or 'inf', got {value!r}")
    return float(value)


def _p_repr(p):
    return "inf" if math.isinf(p) else p


def load_scenario(spec):
    """Parse a scenario dict (already JSON-decoded) into model objects.

    Returns dict with keys: name, sys, model, horizon, raw.
    """
    try:
        name = spec.get("name", "scenario")
        sysblock = spec["system"]
        sys_ = LtiSystem(F=np.array(sysblock["F"], dtype=float),
                         G=np.array(sysblock["G"], dtype=float))
        n = sys_.state_dim
        m = sys_.input_dim
        if "n" in spec and int(spec["n"]) != n:
            raise _UsageError(f"declared n={spec['n']} but F is {n}x{n}")
        if "m" in spec and int(spec["m"]) != m:
            raise _UsageError(f"declared m={spec['m']} but G has {m} columns")

        init = spec["initial"]
        x0 = PSumSet(
            p=_as_p(init["p"]),
            translation=np.array(init.get("translation", np.zeros(n)), dtype=float),
            shapes=[np.array(Q, dtype=float) for Q in init["shapes"]],
        )
        if x0.dim != n:
            raise _UsageError("initial set dimension does not match the system")

        horizon = int(spec.get("horizon", 10))
        if horizon < 0:
            raise _UsageError("horizon must be >= 0")

        gen = None
        timing = "current"
        ctrl = spec.get("control")
        if ctrl is not None:
            p2 = _as_p(ctrl["p"])
            uc = np.array(ctrl.get("translation", np.zeros(m)), dtype=float)
            if "generator" in ctrl:
                g = ctrl["generator"]
                if g.get("kind", "one-plus-cos-squared") != "one-plus-cos-squared":
                    raise _UsageError(f"unknown generator kind {g.get('kind')!r}")
                base = [np.array(B, dtype=float) for B in g["base"]]
                freq = [float(f) for f in g.get("frequency", [1.0] * len(base))]
                if len(freq) != len(base):
                    raise _UsageError("generator frequency list must match base list")
                timing = g.get("timing", "current")

                def gen(t, _base=base, _freq=freq, _p=p2, _uc=uc):
                    shapes = [(1.0 + math.cos(f * t) ** 2) * B
                              for B, f in zip(_base, _freq)]
                    return PSumSet(p=_p, translation=_uc.copy(), shapes=shapes)

            elif "steps" in ctrl:
                steps = [[np.array(Q, dtype=float) for Q in step] for step in ctrl["steps"]]
                timing = ctrl.get("timing", "current")
                needed = horizon + 1 if timing == "current" else horizon
                if len(steps) < needed:
                    raise _UsageError(
                        f"control steps list has {len(steps)} entries, needs {needed}"
                    )

                def gen(t, _steps=steps, _p=p2, _uc=uc):
                    return PSumSet(p=_p, translation=_uc.copy(), shapes=_steps[t])

            else:
                raise _UsageError("control block needs either 'generator' or 'steps'")
            # probe dimension early so bad scenarios fail as input errors
            if gen(0).dim != m:
                raise _UsageError("control set dimension does not match the input map")

        model = UncertaintyModel(x0_set=x0, control_generator=gen, control_timing=timing)
        return {"name": name, "sys": sys_, "model": model, "horizon": horizon, "raw": spec}
    except KeyError as exc:
        raise _UsageError(f"scenario is missing required field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise _UsageError(f"malformed scenario: {exc}") from exc


def read_scenario(path_or_name):
    """Load a scenario from a file path or a bundled name."""
    p = Path(path_or_name)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
    elif path_or_name in BUNDLED:
        text = (resources.files("psumreach") / "scenarios" / f"{path_or_name}.json").read_text(
            encoding="utf-8"
        )
    else:
        raise _UsageError(f"scenario {path_or_name!r}: no such file or bundled name")
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"scenario is not valid JSON: {exc}") from exc
    return load_scenario(spec)


def serialize_scenario(loaded):
    """Scenario dict back to canonical JSON text (round-trips exactly)."""
    return json.dumps(loaded["raw"], indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# output writers


def _criteria_from_flag(flag):
    if flag == "trace":
        return (Criterion.MIN_TRACE,)
    if flag == "volume":
        return (Criterion.MIN_VOLUME,)
    return (Criterion.MIN_TRACE, Criterion.MIN_VOLUME)


def _ellipse_polyline(center, shape, n_pts):
    """Closed boundary curve of a 2D ellipsoid."""
    theta = np.linspace(0.0, 2.0 * math.pi, n_pts + 1)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    # boundary point along direction y: c + Q y / sqrt(y' Q y)
    Qy = dirs @ shape.T
    h = np.sqrt(np.einsum("ij,ij->i", dirs, Qy))
    return center + Qy / h[:, None]


def _psum_boundary_polyline(blocks, n_pts):
    """Exact boundary of a Minkowski sum of finite-p p-sum blocks (d=2)."""
    theta = np.linspace(0.0, 2.0 * math.pi, n_pts + 1)
    pts = []
    for th in theta:
        y = np.array([math.cos(th), math.sin(th)])
        x = np.zeros(2)
        for b in blocks:
            x += support_point(b, y)
        pts.append(x)
    return np.asarray(pts)


def _write_polylines(path, curves):
    """Curves as x,y per line, blank-line separated."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, curve in enumerate(curves):
            if i:
                fh.write("\n")
            for x, y in curve:
                fh.write(f"{x:.12g},{y:.12g}\n")


def _write_csv(path, rows, fieldnames):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _flat_rows(records, name):
    """Flatten report records into delimited-table rows."""
    rows = []
    for rec in records:
        row = {"scenario": name, "t": rec["t"]}
        for i, c in enumerate(rec["center"]):
            row[f"center_{i}"] = c
        for crit in ("trace", "volume"):
            entry = rec.get(crit)
            if entry is None:
                continue
            for key in ("volume", "trace", "beta", "iterations", "foc_residual",
                        "mode", "hausdorff_upper", "hausdorff_kind", "time_s"):
                row[f"{crit}_{key}"] = entry[key]
        rows.append(row)
    return rows


def _plot_volumes(records, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts = [r["t"] for r in records]
    fig, ax = plt.subplots(figsize=(6, 4))
    for crit, label in (("trace", "min trace"), ("volume", "min volume")):
        vols = [r[crit]["volume"] for r in records if crit in r]
        if vols:
            ax.plot(ts[: len(vols)], vols, marker="o", label=label)
    ax.set_xlabel("time step")
    ax.set_ylabel("outer ellipsoid volume")
    ax.set_title("Reach set outer approximation volumes")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _plot_sets(tube, path, n_pts):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 6))
    for step in tube.steps:
        if step.t == 0 and len(tube.steps) > 1:
            continue
        if all(not math.isinf(b.p) for b in step.blocks):
            exact = _psum_boundary_polyline(step.blocks, n_pts)
            ax.plot(exact[:, 0], exact[:, 1], color="0.4", lw=0.8)
        for r, color in ((step.mtoe, "tab:orange"), (step.mvoe, "tab:blue")):
            if r is None:
                continue
            curve = _ellipse_polyline(step.center, r.shape, n_pts)
            ax.plot(curve[:, 0], curve[:, 1], color=color, lw=1.0)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title("Reach sets (gray) with outer ellipsoids")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cfg(args):
    return FixedPointConfig(tolerance=args.tol, max_iterations=args.max_iter)


def cmd_psum_outer(args):
    loaded = read_scenario(args.scenario)
    S = loaded["model"].x0_set
    out = _outdir(args)
    cfg = _cfg(args)
    records = []
    results = {}
    for crit in _criteria_from_flag(args.criterion):
        r = fold_psum_outer(S, crit, cfg)
        results[crit] = r
        E = Ellipsoid(center=S.translation, shape=r.shape)
        records.append({
            "scenario": loaded["name"],
            "criterion": crit.value,
            "p": _p_repr(S.p),
            "mode": r.mode,
            "beta": r.beta,
            "iterations": r.iterations,
            "foc_residual": r.foc_residual,
            "volume": volume(E),
            "trace": float(np.trace(r.shape)),
            "shape": r.shape.tolist(),
            "center": S.translation.tolist(),
        })
    if args.format in ("table", "both"):
        rows = [{k: (json.dumps(v) if isinstance(v, list) else v) for k, v in rec.items()}
                for rec in records]
        _write_csv(out / "outer_result.csv", rows, list(rows[0].keys()))
    if args.format in ("log", "both"):
        _write_jsonl(out / "outer_result.jsonl", records)
    if S.dim == 2:
        curves = []
        if not math.isinf(S.p):
            curves.append(_psum_boundary_polyline([S], args.boundary_points))
        for crit, r in results.items():
            curves.append(_ellipse_polyline(S.translation, r.shape, args.boundary_points))
        _write_polylines(out / "outer_boundary.txt", curves)
        if args.format in ("table", "both"):
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt

            fig, ax = plt.subplots(figsize=(5, 5))
            for curve in curves:
                ax.plot(curve[:, 0], curve[:, 1])
            ax.set_aspect("equal")
            ax.set_title("p-sum and outer ellipsoids")
            fig.tight_layout()
            fig.savefig(out / "outer_sets.png", dpi=150)
            plt.close(fig)
    for rec in records:
        line = f"[{rec['criterion']}] mode={rec['mode']} volume={rec['volume']:.6g}"
        if rec["beta"] is not None:
            line += f" beta={rec['beta']:.6g} iterations={rec['iterations']}"
        print(line)
    return 0


def _compute_tube(loaded, args):
    cfg = _cfg(args)
    return reach_tube(
        loaded["sys"], loaded["model"], loaded["horizon"], cfg,
        criteria=_criteria_from_flag(args.criterion),
    )


def cmd_reach(args):
    loaded = read_scenario(args.scenario)
    tube = _compute_tube(loaded, args)
    out = _outdir(args)
    records = report(tube)
    name = loaded["name"]
    if args.format in ("table", "both"):
        rows = _flat_rows(records, name)
        fieldnames = sorted({k for row in rows for k in row}, key=lambda k: (k != "scenario", k != "t", k))
        _write_csv(out / "reach_table.csv", rows, fieldnames)
        _plot_volumes(records, out / "reach_volumes.png")
        if loaded["sys"].state_dim == 2:
            _plot_sets(tube, out / "reach_sets.png", args.boundary_points)
    if args.format in ("log", "both"):
        _write_jsonl(out / "reach_log.jsonl", records)
    if loaded["sys"].state_dim == 2:
        for step in tube.steps:
            curves = []
            if all(not math.isinf(b.p) for b in step.blocks):
                curves.append(_psum_boundary_polyline(step.blocks, args.boundary_points))
            for r in (step.mtoe, step.mvoe):
                if r is not None:
                    curves.append(_ellipse_polyline(step.center, r.shape, args.boundary_points))
            _write_polylines(out / f"boundary_t{step.t}.txt", curves)
    for rec in records:
        bits = [f"t={rec['t']}"]
        for crit in ("trace", "volume"):
            if crit in rec:
                bits.append(f"{crit}: vol={rec[crit]['volume']:.6g}")
        print("  ".join(bits))
    return 0


def cmd_repro(args):
    name = args.name
    reference = REFERENCE_VOLUMES[name]
    loaded = read_scenario(name)
    args.criterion = "volume"
    tube = _compute_tube(loaded, args)
    vols = tube.volumes(Criterion.MIN_VOLUME)[1:]  # skip t=0, references start at t=1
    rows = []
    n_ok = 0
    print(f"{'t':>3} {'computed':>12} {'reference':>12} {'rel err':>10}  status")
    for t, (v, ref) in enumerate(zip(vols, reference), start=1):
        rel = abs(v - ref) / abs(ref)
        ok = rel <= REPRO_RTOL
        n_ok += ok
        rows.append({"t": t, "computed": v, "reference": ref,
                     "rel_err": rel, "within_tol": ok})
        print(f"{t:>3} {v:>12.4f} {ref:>12.4f} {rel:>10.2e}  {'ok' if ok else 'MISMATCH'}")
    print(f"{n_ok}/{len(reference)} match within {REPRO_RTOL:g}")
    if args.out is not None:
        out = _outdir(args)
        _write_csv(out / f"repro_{name}.csv", rows,
                   ["t", "computed", "reference", "rel_err", "within_tol"])
    return 0 if n_ok == len(reference) else 3


def cmd_verify(args):
    loaded = read_scenario(args.scenario)
    tube = _compute_tube(loaded, args)
    sys_ = loaded["sys"]
    model = loaded["model"]
    d = sys_.state_dim
    count = args.samples
    sampler = SphereSampler(dim=d, count=count, seed=args.seed)
    records = []
    all_pass = True
    for step in tube.steps:
        exact = lambda y, t=step.t: reach_support(sys_, model, t, y)
        rec = {"t": step.t}
        for crit in ("trace", "volume"):
            r = step.mtoe if crit == "trace" else step.mvoe
            if r is None:
                continue
            E = Ellipsoid(center=step.center, shape=r.shape)
            rep = check_containment(E, exact, sampler, tol=1e-8)
            ok = rep.min_margin >= -1e-8
            all_pass &= ok
            rec[crit] = {
                "min_margin": rep.min_margin,
                "directions": rep.directions_tested,
                "contained": ok,
                "volume": volume(E),
            }
        # enclosing-ellipsoid reference for the exact step set
        if all(not math.isinf(b.p) for b in step.blocks):
            ref_sampler = SphereSampler(dim=d, count=args.boundary_points, seed=args.seed)
            dirs = ref_sampler.directions()
            pts = np.zeros((len(dirs), d))
            for b in step.blocks:
                pts += np.array([support_point(b, y) for y in dirs])
            center = step.center
            pts = np.vstack([pts, 2.0 * center - pts])
            ref = mvee_khachiyan(pts, center=center)
            rec["reference_volume"] = volume(ref)
            if "volume" in rec:
                rec["reference_leq_mvoe"] = bool(
                    rec["reference_volume"] <= rec["volume"]["volume"] * (1.0 + 1e-9)
                )
        records.append(rec)
        bits = [f"t={rec['t']}"]
        for crit in ("trace", "volume"):
            if crit in rec:
                bits.append(f"{crit} margin={rec[crit]['min_margin']:.3e}")
        if "reference_volume" in rec:
            bits.append(f"ref vol={rec['reference_volume']:.6g}")
        print("  ".join(bits))
    if args.out is not None:
        out = _outdir(args)
        _write_jsonl(out / "verify_report.jsonl", records)
    print("containment: all steps pass" if all_pass else "containment: FAILURE")
    return 0 if all_pass else 3


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = _Parser(prog="psumreach",
                     description="Outer ellipsoids of p-sums and reach tubes")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True,
                            help="scenario file path or bundled name (table1, table2)")
        sp.add_argument("--criterion", choices=("trace", "volume", "both"), default="both")
        sp.add_argument("--tol", type=float, default=1e-5)
        sp.add_argument("--max-iter", type=int, default=200)
        sp.add_argument("--samples", type=int, default=None,
                        help="direction count for sampled checks")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--format", choices=("table", "log", "both"), default="both")
        sp.add_argument("--boundary-points", type=int, default=720)

    sp = sub.add_parser("psum-outer", help="outer ellipsoid of one p-sum")
    common(sp)
    sp.set_defaults(func=cmd_psum_outer)

    sp = sub.add_parser("reach", help="reach tube outer approximation")
    common(sp)
    sp.set_defaults(func=cmd_reach)

    sp = sub.add_parser("repro", help="diff a bundled scenario against reference values")
    sp.add_argument("name", choices=BUNDLED)
    common(sp, scenario=False)
    sp.set_defaults(func=cmd_repro)

    sp = sub.add_parser("verify", help="containment and reference-volume checks")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out is None and args.command in ("psum-outer", "reach", "verify"):
        args.out = "psumreach_out"
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PSumReachError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
