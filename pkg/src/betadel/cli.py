"""Command-line entry point.

Exit codes: 0 success, 1 statistical verification failure, 2 invalid
parameters/usage.  Every artifact embeds its resolved configuration and seed;
a JSON config file may supply defaults, explicit flags win.
"""

from __future__ import annotations

import json
import math
import os
import sys

import click
import numpy as np

from . import analytics, verify
from .constants import Family, ModelParams, ParameterError
from .render import (RenderStyle, export_csv, export_simplices_csv,
                     render_svg, reports_json)
from .samplers import RandomStream, sample_typical_cells
from .tessellation import (WindowConfig, audit_normality, build_tessellation,
                           default_window, empirical_face_intensities)

FAMILIES = {"beta": Family.Beta, "beta-prime": Family.BetaPrime,
            "classical": Family.ClassicalDelaunay}


def _fail_usage(msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(2)


def _load_config(path):
    if not path:
        return {}
    with open(path) as f:
        return json.load(f)


def _resolve(cfg: dict, key: str, flag_value, default=None):
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return cfg[key]
    return default


def _model(cfg, family, d, beta, nu, gamma) -> ModelParams:
    family = _resolve(cfg, "family", family, "beta")
    if family not in FAMILIES:
        _fail_usage(f"unknown family {family!r}")
    try:
        return ModelParams(FAMILIES[family],
                           int(_resolve(cfg, "d", d, 3)),
                           float(_resolve(cfg, "beta", beta,
                                          -1.0 if family == "classical" else 0.0)),
                           nu=float(_resolve(cfg, "nu", nu, 0.0)),
                           gamma=float(_resolve(cfg, "gamma", gamma, 1.0)))
    except ParameterError as exc:
        _fail_usage(str(exc))


def _default_seed():
    return int(os.environ.get("BETADEL_SEED", "0"))


def _model_dict(p: ModelParams) -> dict:
    inv = {v: k for k, v in FAMILIES.items()}
    return {"family": inv[p.family], "d": p.d, "beta": p.beta,
            "nu": p.nu, "gamma": p.gamma}


@click.group()
def main():
    """Simulation and analytics for beta/beta' Delaunay tessellations."""


@main.command("sample-cells")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--family", type=str, default=None)
@click.option("--d", type=int, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--nu", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("-n", "n", type=int, default=1000)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=1)
@click.option("--out", type=click.Path(), default=None)
@click.option("--summary", type=click.Path(), default=None)
def cmd_sample_cells(config_path, family, d, beta, nu, gamma, n, seed,
                     workers, out, summary):
    """Sample n weighted typical cells; CSV of vertices+volume, JSON summary."""
    cfg = _load_config(config_path)
    p = _model(cfg, family, d, beta, nu, gamma)
    seed = _resolve(cfg, "seed", seed, _default_seed())
    try:
        pts = sample_typical_cells(p, RandomStream(seed, 0), n)
    except ParameterError as exc:
        _fail_usage(str(exc))
    edges = pts[:, 1:, :] - pts[:, :1, :]
    vols = np.abs(np.linalg.det(edges)) / math.factorial(p.d - 1)
    fields = ["id"] + [f"v{i + 1}{'xyzw'[j]}" for i in range(p.d)
                       for j in range(p.d - 1)] + ["volume"]
    rows = [[i, *pts[i].ravel().tolist(), vols[i]] for i in range(n)]
    text = export_csv(rows, fields)
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)
    cf = analytics.volume_moment(p, 1.0)
    se = float(vols.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    info = {"config": {**_model_dict(p), "n": n, "workers": workers},
            "seed": seed, "mean_volume": float(vols.mean()),
            "std_error": se, "closed_form_mean": cf, "artifact_version": 1}
    blob = json.dumps(info, sort_keys=True, indent=2)
    if summary:
        with open(summary, "w") as f:
            f.write(blob + "\n")
    elif out:
        click.echo(blob)


@main.command("tessellate")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--family", type=str, default=None)
@click.option("--d", type=int, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--box", nargs=4, type=float, default=None,
              help="x0 x1 y0 y1 target window")
@click.option("--guard", type=float, default=None)
@click.option("--h-max", type=float, default=None)
@click.option("--eps", type=float, default=None)
@click.option("--h-depth", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_prefix", type=str, required=True,
              help="output prefix: writes <prefix>.svg/.csv/.json")
@click.option("--layers", type=str, default="Delaunay,Voronoi,Sites")
def cmd_tessellate(config_path, family, d, beta, gamma, box, guard, h_max,
                   eps, h_depth, seed, out_prefix, layers):
    """Build a d=3 tessellation on a window; emit SVG + CSV + stats JSON."""
    cfg = _load_config(config_path)
    p = _model(cfg, family, d, beta, None, gamma)
    if p.d != 3:
        _fail_usage("tessellate supports --d 3 only")
    seed = _resolve(cfg, "seed", seed, _default_seed())
    box = _resolve(cfg, "box", list(box) if box else None, [-5.0, 5.0, -5.0, 5.0])
    target = ((box[0], box[1]), (box[2], box[3]))
    eps = _resolve(cfg, "eps", eps)
    h_depth = _resolve(cfg, "h_depth", h_depth)
    guard = _resolve(cfg, "guard", guard)
    h_max = _resolve(cfg, "h_max", h_max)
    try:
        if p.family is Family.BetaPrime and eps is None:
            raise ParameterError("beta-prime tessellation requires --eps "
                                 "(sites accumulate at height 0)")
        if guard is None:
            w = default_window(p, target, eps=eps, h_depth=h_depth)
        else:
            w = WindowConfig(target_box=target, guard_margin=guard,
                             h_max=h_max, eps=eps, h_depth=h_depth)
        t = build_tessellation(p, w, RandomStream(seed, 0))
    except ParameterError as exc:
        _fail_usage(str(exc))
    layer_set = tuple(s.strip() for s in layers.split(",") if s.strip())
    with open(out_prefix + ".svg", "w") as f:
        f.write(render_svg(t, RenderStyle(), layer_set))
    with open(out_prefix + ".csv", "w") as f:
        f.write(export_simplices_csv(t))
    audit = audit_normality(t)
    g0, g1, g2 = empirical_face_intensities(t, w.target_box)
    stats = {
        "config": {**_model_dict(p), "box": list(box),
                   "guard": w.guard_margin, "h_max": w.h_max,
                   "eps": w.eps, "h_depth": w.h_depth},
        "seed": seed,
        "n_sites": int(t.sites_v.shape[0]),
        "n_simplices": int(t.simplices.shape[0]),
        "n_interior": int(t.flags.sum()),
        "normality_ok": bool(audit.all_normal),
        "empirical_intensities": {"gamma0": g0, "gamma1": g1, "gamma2": g2},
        "artifact_version": 1,
    }
    with open(out_prefix + ".json", "w") as f:
        f.write(json.dumps(stats, sort_keys=True, indent=2) + "\n")
    click.echo(f"wrote {out_prefix}.svg/.csv/.json "
               f"({stats['n_simplices']} simplices)")


@main.group("analytics")
def cmd_analytics():
    """Closed-form tables."""


def _echo_json(payload: dict, out):
    blob = json.dumps(payload, sort_keys=True, indent=2)
    if out:
        with open(out, "w") as f:
            f.write(blob + "\n")
    else:
        click.echo(blob)


@cmd_analytics.command("moments")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--family", type=str, default=None)
@click.option("--d", type=int, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--nu", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--s", "orders", type=float, multiple=True, default=(1.0,))
@click.option("--out", type=click.Path(), default=None)
def analytics_moments(config_path, family, d, beta, nu, gamma, orders, out):
    cfg = _load_config(config_path)
    p = _model(cfg, family, d, beta, nu, gamma)
    try:
        vals = {str(s): analytics.volume_moment(p, s) for s in orders}
    except ParameterError as exc:
        _fail_usage(str(exc))
    _echo_json({"config": _model_dict(p), "volume_moments": vals}, out)


@cmd_analytics.command("angle-sums")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--family", type=str, default=None)
@click.option("--d", type=int, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--nu", type=float, default=None)
@click.option("--k", type=int, default=1)
@click.option("--out", type=click.Path(), default=None)
def analytics_angle_sums(config_path, family, d, beta, nu, k, out):
    cfg = _load_config(config_path)
    p = _model(cfg, family, d, beta, nu, None)
    try:
        val = analytics.expected_angle_sum(p, k)
    except ParameterError as exc:
        _fail_usage(str(exc))
    _echo_json({"config": {**_model_dict(p), "k": k},
                "expected_angle_sum": val}, out)


@cmd_analytics.command("intensities")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--family", type=str, default=None)
@click.option("--d", type=int, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
def analytics_intensities(config_path, family, d, beta, gamma, out):
    cfg = _load_config(config_path)
    p = _model(cfg, family, d, beta, None, gamma)
    try:
        vals = {f"gamma{j}": analytics.face_intensity(p, j)
                for j in range(p.d)}
    except ParameterError as exc:
        _fail_usage(str(exc))
    _echo_json({"config": _model_dict(p), "face_intensities": vals}, out)


@cmd_analytics.command("f-vector")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--family", type=str, default=None)
@click.option("--d", type=int, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
def analytics_f_vector(config_path, family, d, beta, out):
    cfg = _load_config(config_path)
    p = _model(cfg, family, d, beta, None, None)
    try:
        vals = {f"f_{p.d - k}": analytics.voronoi_f_vector(p, k)
                for k in range(1, p.d + 1)}
    except ParameterError as exc:
        _fail_usage(str(exc))
    _echo_json({"config": _model_dict(p), "voronoi_f_vector": vals}, out)


SUITES = ("moments", "identities", "limits", "tessellation", "all")


@main.command("verify")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--suite", type=str, default="all")
@click.option("-n", "n", type=int, default=100_000)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=1)
@click.option("--replicas", type=int, default=20)
@click.option("--out", type=click.Path(), default=None)
def cmd_verify(config_path, suite, n, seed, workers, replicas, out):
    """Run verification suites; exit 1 if any test fails."""
    cfg = _load_config(config_path)
    if suite not in SUITES:
        _fail_usage(f"unknown suite {suite!r}; choose from {SUITES}")
    seed = _resolve(cfg, "seed", seed, _default_seed())
    n = int(_resolve(cfg, "n", n))
    reports = []
    try:
        if suite in ("moments", "all"):
            for fam, d, beta in [(Family.Beta, 3, 0.0), (Family.Beta, 3, 2.0),
                                 (Family.BetaPrime, 3, 5.0),
                                 (Family.ClassicalDelaunay, 3, -1.0)]:
                p = ModelParams(fam, d, beta)
                reports.append(verify.moment_test(p, 1.0, n, seed,
                                                  workers=workers))
        if suite in ("identities", "all"):
            reports += verify.identity_test_factorization(
                ModelParams(Family.Beta, 3, 0.0), [0.5, 1.0], n, seed)
            reports.append(verify.identity_test_higher_dim(
                ModelParams(Family.Beta, 3, 1.0, nu=1.0), n, seed))
        if suite in ("limits", "all"):
            reports.append(verify.limit_test_classical(
                ModelParams(Family.Beta, 3, -0.99), n, seed))
            reports += verify.limit_test_gaussian(3, -1.0, [10, 100, 1000],
                                                  n, seed)
        if suite in ("tessellation", "all"):
            p = ModelParams(Family.Beta, 3, 0.0)
            w = default_window(p, ((-10.0, 10.0), (-10.0, 10.0)))
            reports += verify.tessellation_vs_theory(p, w, replicas, seed)
    except ParameterError as exc:
        _fail_usage(str(exc))
    blob = reports_json(reports, config={"suite": suite, "n": n,
                                         "replicas": replicas,
                                         "workers": workers}, seed=seed)
    if out:
        with open(out, "w") as f:
            f.write(blob + "\n")
    for r in reports:
        z = "" if math.isnan(r.z_score) else f" z={r.z_score:+.2f}"
        click.echo(f"[{r.verdict:4s}] {r.quantity}{z}")
    n_fail = sum(r.verdict == verify.FAIL for r in reports)
    click.echo(f"{len(reports) - n_fail}/{len(reports)} passed")
    if n_fail:
        sys.exit(1)


if __name__ == "__main__":
    main()
