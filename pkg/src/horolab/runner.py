"""Experiment runners: configuration, CSV persistence, and run manifests.

A run is described by a JSON config plus a master seed.  The run id is a
content hash of both, per-ensemble sub-seeds are spawned from the master
seed by a counter scheme, and every output file is listed (with a content
hash) in a JSON manifest.  Re-running an identical config and seed yields
byte-identical CSV bodies; only manifest timestamps differ.

Seed scheme: the ensemble with cell counter c uses
``numpy.random.SeedSequence(master_seed, spawn_key=(c,))``; counters are
assigned in the deterministic cell order (y, alpha, ensemble).
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .ensembles import (
    EmpiricalDistribution,
    ParameterSet,
    convex_combination_check,
    discrepancy_DK,
    evaluate_ensemble,
    horosphere_sample,
    ks_distance,
    nonprimitive_parameters,
    primitive_parameters,
    rational_parameters,
)
from .ergodic import TrigPolynomial, cat_map, verify_vonneumann
from .groups import duality_gamma, duality_residual
from .lattices import ALPHA_GUARD, NORM_GUARD, make_observable
from .nfq import (
    FieldContext,
    RingElement,
    enumerate_balanced,
    ideal_of,
    is_coprime,
    kronecker_symbol,
    make_field,
    rational_field,
    residue_representatives,
    totient,
    totient_ratio_scan,
)

__all__ = [
    "ConfigError",
    "GuardError",
    "RunConfig",
    "RunManifest",
    "CsvSink",
    "VALUE_HEADER",
    "load_config",
    "sub_seed",
    "run_equidist",
    "run_vonneumann",
    "run_totient",
    "run_duality_check",
    "parse_value_row",
]

VALUE_HEADER = "run_id,field,y,N_y,phi_y,alpha,ensemble,observable,value"
_ENSEMBLE_KINDS = ("rational", "primitive", "non-primitive", "horosphere")


class ConfigError(ValueError):
    """Invalid or unparseable run configuration (CLI exit code 2)."""


class GuardError(ValueError):
    """Dynamic-range or positivity guard violation (CLI exit code 3)."""


def _field_context(spec) -> FieldContext:
    if spec == "rational":
        return rational_field()
    if isinstance(spec, int) and not isinstance(spec, bool):
        try:
            return make_field(spec)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    raise ConfigError(f"field must be 'rational' or a squarefree integer, got {spec!r}")


def _field_label(ctx: FieldContext) -> str:
    return "Q" if ctx.degree == 1 else f"Q(sqrt({ctx.D}))"


@dataclass(frozen=True)
class RunConfig:
    """Validated equidistribution-run configuration."""

    field_spec: object  # "rational" or squarefree int
    ys: tuple[tuple[int, int], ...]  # explicit coordinates, or () when scanning
    inert_scan: Optional[tuple[int, int]]  # (max_norm, count) or None
    alphas: tuple[float, ...]
    ensembles: tuple[str, ...]
    observables: tuple[str, ...]
    samples: int  # horosphere ensemble size
    Ks: tuple[int, ...]  # discrepancy horizons; () disables the D_K report

    @property
    def ctx(self) -> FieldContext:
        return _field_context(self.field_spec)

    def canonical_json(self) -> str:
        return json.dumps(
            {
                "field": self.field_spec,
                "ys": [list(y) for y in self.ys],
                "inert_scan": list(self.inert_scan) if self.inert_scan else None,
                "alphas": list(self.alphas),
                "ensembles": list(self.ensembles),
                "observables": list(self.observables),
                "samples": self.samples,
                "Ks": list(self.Ks),
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def load_config(raw: dict) -> RunConfig:
    """Validate a parsed JSON config; raises ConfigError on any problem."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {"field", "ys", "inert_scan", "alphas", "ensembles", "observables",
             "samples", "Ks"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    if "field" not in raw:
        raise ConfigError("config needs a 'field' entry")
    ctx = _field_context(raw["field"])

    ys = raw.get("ys", [])
    scan = raw.get("inert_scan")
    if bool(ys) == bool(scan):
        raise ConfigError("give exactly one of 'ys' (coordinate list) or 'inert_scan'")
    ys_t = []
    for item in ys:
        if not (isinstance(item, list) and 1 <= len(item) <= 2
                and all(isinstance(v, int) for v in item)):
            raise ConfigError(f"y entries must be [a] or [a, b] integer lists, got {item!r}")
        a = item[0]
        b = item[1] if len(item) == 2 else 0
        if ctx.degree == 1 and b != 0:
            raise ConfigError("degree-1 field takes single-coordinate y entries")
        ys_t.append((a, b))
    scan_t = None
    if scan is not None:
        if not (isinstance(scan, dict) and scan.get("kind") == "inert"):
            raise ConfigError("inert_scan must be {'kind': 'inert', 'max_norm': ..., 'count': ...}")
        max_norm = scan.get("max_norm")
        count = scan.get("count", 0)
        if not isinstance(max_norm, int) or max_norm < 2:
            raise ConfigError("inert_scan.max_norm must be an integer >= 2")
        if not isinstance(count, int) or count < 0:
            raise ConfigError("inert_scan.count must be a non-negative integer")
        scan_t = (max_norm, count)

    alphas = raw.get("alphas", [0.5])
    if not (isinstance(alphas, list) and alphas
            and all(isinstance(a, (int, float)) for a in alphas)):
        raise ConfigError("'alphas' must be a non-empty list of numbers")
    if any(not 0 < a <= 1 for a in alphas):
        raise ConfigError("alpha values must lie in (0, 1]")

    ensembles = raw.get("ensembles", ["primitive", "horosphere"])
    if not ensembles or any(e not in _ENSEMBLE_KINDS for e in ensembles):
        raise ConfigError(f"'ensembles' must be a non-empty subset of {_ENSEMBLE_KINDS}")

    observables = raw.get("observables", ["alpha1_sup"])
    if not observables:
        raise ConfigError("'observables' must be non-empty")
    for name in observables:
        try:
            make_observable(name)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if ctx.degree == 2 and (name == "im_reduced" or name.startswith("cusp_")):
            raise ConfigError(f"observable {name!r} needs the degree-1 field")

    samples = raw.get("samples", 1000)
    if not isinstance(samples, int) or samples < 1:
        raise ConfigError("'samples' must be a positive integer")

    Ks = raw.get("Ks", [])
    if not isinstance(Ks, list) or any(not isinstance(K, int) or K < 1 for K in Ks):
        raise ConfigError("'Ks' must be a list of positive integers")
    if Ks and ctx.degree == 1:
        raise ConfigError("the D_K report needs a real quadratic field")

    return RunConfig(
        raw["field"], tuple(ys_t), scan_t, tuple(float(a) for a in alphas),
        tuple(ensembles), tuple(observables), samples, tuple(Ks),
    )


def select_ys(cfg: RunConfig) -> list[RingElement]:
    """Resolve the config's y selection to totally positive ring elements."""
    ctx = cfg.ctx
    if cfg.inert_scan is not None:
        max_norm, count = cfg.inert_scan
        out = []
        for p in range(2, max_norm + 1):
            if any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
                continue
            if ctx.degree == 1 or kronecker_symbol(ctx.disc, p) == -1:
                out.append(ctx.element(p))
                if count and len(out) >= count:
                    break
        if not out:
            raise ConfigError("inert scan found no primes in range")
        return out
    out = []
    for a, b in cfg.ys:
        y = ctx.element(a, b)
        if not y.is_totally_positive():
            raise GuardError(f"y = {y} is not totally positive")
        out.append(y)
    return out


def check_guards(y: RingElement, alpha: float) -> None:
    n = abs(y.norm())
    if n > NORM_GUARD:
        raise GuardError(
            f"|N(y)| = {n} exceeds the dynamic-range guard {NORM_GUARD}"
        )
    if alpha > ALPHA_GUARD:
        raise GuardError(
            f"alpha = {alpha} exceeds the observable stability guard {ALPHA_GUARD}"
        )


def sub_seed(master_seed: int, counter: int) -> int:
    """Documented counter scheme: SeedSequence(master, spawn_key=(counter,))."""
    return int(np.random.SeedSequence(master_seed, spawn_key=(counter,)).generate_state(1)[0])


def _fmt(x: float) -> str:
    return repr(float(x))


class CsvSink:
    """Single serialized writer per output file; tracks a content hash."""

    def __init__(self, path: Path, header: str):
        self.path = path
        self._hash = hashlib.sha256()
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self.rows = 0
        self._emit(header.split(","))

    def _emit(self, cells) -> None:
        self._writer.writerow(cells)

    def write(self, *cells) -> None:
        cells = [str(c) for c in cells]
        self._hash.update((",".join(cells) + "\n").encode())
        self._emit(cells)
        self.rows += 1

    def close(self) -> dict:
        self._fh.close()
        return {
            "path": self.path.name,
            "rows": self.rows,
            "sha256": self._hash.hexdigest(),
        }


@dataclass
class RunManifest:
    run_id: str
    command: str
    seed: Optional[int]
    config: dict
    created_at: str = ""
    version: str = __version__
    schema: str = VALUE_HEADER
    outputs: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> Path:
        self.created_at = datetime.datetime.now(datetime.timezone.utc).isoformat()
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")
        return path


def _run_id(payload: str, seed: Optional[int]) -> str:
    return hashlib.sha256(f"{payload}|seed={seed}".encode()).hexdigest()[:12]


def _build_ensemble(
    kind: str, y: RingElement, alpha: float, cfg: RunConfig,
    master_seed: int, counter: int,
) -> ParameterSet:
    ctx = cfg.ctx
    if kind == "rational":
        return rational_parameters(y, alpha, ctx)
    if kind == "primitive":
        return primitive_parameters(y, alpha, ctx)
    if kind == "non-primitive":
        return nonprimitive_parameters(y, alpha, ctx)
    return horosphere_sample(y, alpha, cfg.samples, sub_seed(master_seed, counter), ctx)


def run_equidist(cfg: RunConfig, seed: int, out_dir: Path) -> RunManifest:
    """Full pipeline: ensembles, observables, KS table, residuals, D_K."""
    ctx = cfg.ctx
    out_dir.mkdir(parents=True, exist_ok=True)
    rid = _run_id(cfg.canonical_json(), seed)
    label = _field_label(ctx)
    ys = select_ys(cfg)
    for y in ys:
        for alpha in cfg.alphas:
            check_guards(y, alpha)

    values = CsvSink(out_dir / "values.csv", VALUE_HEADER)
    ks_sink = CsvSink(out_dir / "ks.csv",
                      "run_id,y,N_y,alpha,observable,ensemble,ks_vs_horosphere")
    convex_sink = CsvSink(out_dir / "convex.csv",
                          "run_id,y,N_y,alpha,observable,residual")
    dk_sink = (CsvSink(out_dir / "discrepancy.csv",
                       "run_id,y,N_y,alpha,observable,K,rms,reference_mean")
               if cfg.Ks else None)

    summary: dict = {"cells": 0}
    counter = 0
    for y in ys:
        n = abs(y.norm())
        phi = totient(ideal_of(y), ctx)
        for alpha in cfg.alphas:
            # one cell per (y, alpha); ensembles within a cell are independent
            dists: dict[tuple[str, str], EmpiricalDistribution] = {}
            sets: dict[str, ParameterSet] = {}
            for kind in cfg.ensembles:
                ps = _build_ensemble(kind, y, alpha, cfg, seed, counter)
                counter += 1
                if len(ps) == 0:
                    continue
                sets[kind] = ps
                for name in cfg.observables:
                    obs = make_observable(name)
                    dist = evaluate_ensemble(ps, obs)
                    dists[kind, name] = dist
                    for val in dist.values:
                        values.write(rid, label, y, n, phi, _fmt(alpha),
                                     kind, name, _fmt(val))
            for name in cfg.observables:
                if ("horosphere", name) in dists:
                    ref = dists["horosphere", name]
                    for kind in cfg.ensembles:
                        if kind == "horosphere" or (kind, name) not in dists:
                            continue
                        ks = ks_distance(dists[kind, name], ref)
                        ks_sink.write(rid, y, n, _fmt(alpha), name, kind, _fmt(ks))
                res = convex_combination_check(y, alpha, make_observable(name), ctx)
                convex_sink.write(rid, y, n, _fmt(alpha), name, _fmt(res))
                if dk_sink is not None and "primitive" in sets and n > 1:
                    ref_mean = (dists["horosphere", name].mean()
                                if ("horosphere", name) in dists
                                else dists["primitive", name].mean())
                    rep = discrepancy_DK(make_observable(name), sets["primitive"],
                                         cfg.Ks, ctx, ref_mean)
                    for K, rms in zip(rep.Ks, rep.rms):
                        dk_sink.write(rid, y, n, _fmt(alpha), name, K,
                                      _fmt(rms), _fmt(ref_mean))
            summary["cells"] += 1

    manifest = RunManifest(rid, "equidist", seed, json.loads(cfg.canonical_json()))
    manifest.outputs.append(values.close())
    manifest.outputs.append(ks_sink.close())
    manifest.outputs.append(convex_sink.close())
    if dk_sink is not None:
        manifest.outputs.append(dk_sink.close())
    manifest.summary = summary
    return manifest


def run_vonneumann(
    freqs: list[tuple[int, int]], Ks: list[int], sigma: float, out_dir: Path
) -> RunManifest:
    """Exact von Neumann verification for a sum of cosines; emits its report."""
    if not Ks:
        raise ConfigError("K list must be non-empty")
    if not 0 < sigma < 1:
        raise ConfigError(f"sigma must lie in (0, 1), got {sigma}")
    if not freqs:
        raise ConfigError("need at least one frequency")
    coeffs: dict[tuple[int, int], complex] = {}
    for k in freqs:
        if k == (0, 0):
            raise ConfigError("frequency (0, 0) only shifts the mean; drop it")
        for kk in (k, (-k[0], -k[1])):
            coeffs[kk] = coeffs.get(kk, 0j) + 0.5
    f = TrigPolynomial(coeffs)
    report = verify_vonneumann(cat_map(), f, Ks, sigma)

    out_dir.mkdir(parents=True, exist_ok=True)
    payload = json.dumps({"freqs": sorted(freqs), "Ks": sorted(Ks), "sigma": sigma},
                         sort_keys=True)
    rid = _run_id(payload, None)
    sink = CsvSink(out_dir / "vonneumann.csv", "K,exact_norm,envelope,ratio")
    for K, norm, env, ratio in zip(report.Ks, report.exact_norms,
                                   report.envelopes, report.ratios):
        sink.write(K, _fmt(norm), _fmt(env), _fmt(ratio))
    manifest = RunManifest(rid, "vonneumann", None, json.loads(payload),
                           schema="K,exact_norm,envelope,ratio")
    manifest.outputs.append(sink.close())
    manifest.summary = {
        "fitted_constant": float(report.fitted_constant),
        "max_ratio": float(report.max_ratio),
        "holds": bool(report.holds()),
    }
    return manifest


def run_totient(field_spec, norm_bound: int, out_dir: Path) -> RunManifest:
    """The totient ratio table N/(phi * (log log N)^d) over balanced y."""
    ctx = _field_context(field_spec)
    if norm_bound < 16:
        raise ConfigError("norm bound must be at least 16")
    rows = totient_ratio_scan(ctx, norm_bound)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = json.dumps({"field": field_spec, "bound": norm_bound}, sort_keys=True)
    rid = _run_id(payload, None)
    sink = CsvSink(out_dir / "totient.csv", "y,N_y,phi_y,ratio")
    finite = []
    for y, n, phi, ratio in rows:
        sink.write(y, n, phi, _fmt(ratio))
        if not math.isnan(ratio):
            finite.append((ratio, n, str(y)))
    manifest = RunManifest(rid, "totient", None, json.loads(payload),
                           schema="y,N_y,phi_y,ratio")
    manifest.outputs.append(sink.close())
    if finite:
        top = max(finite)
        manifest.summary = {
            "rows": len(rows),
            "empirical_sup_ratio": top[0],
            "argmax_norm": top[1],
            "argmax_y": top[2],
            "median_ratio": float(np.median([r for r, _, _ in finite])),
        }
    return manifest


def run_duality_check(field_spec, norm_bound: int, out_dir: Path,
                      tol: float = 1e-9) -> RunManifest:
    """Exercise the duality matrix on every balanced y up to the norm bound."""
    ctx = _field_context(field_spec)
    if norm_bound < 2:
        raise ConfigError("norm bound must be at least 2")
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = json.dumps({"field": field_spec, "bound": norm_bound}, sort_keys=True)
    rid = _run_id(payload, None)
    sink = CsvSink(out_dir / "duality.csv", "y,N_y,pairs_checked,max_residual")
    checked = 0
    worst = 0.0
    for y in enumerate_balanced(ctx, norm_bound):
        pairs = 0
        max_res = 0.0
        for j in residue_representatives(y):
            if not is_coprime(j, y):
                continue
            duality_gamma(j, y, ctx)  # integrality + exact det checked inside
            max_res = max(max_res, duality_residual(j, y, ctx))
            pairs += 1
        sink.write(y, y.norm(), pairs, _fmt(max_res))
        checked += pairs
        worst = max(worst, max_res)
    if worst > tol:
        raise GuardError(f"duality residual {worst} exceeds tolerance {tol}")
    manifest = RunManifest(rid, "duality-check", None, json.loads(payload),
                           schema="y,N_y,pairs_checked,max_residual")
    manifest.outputs.append(sink.close())
    manifest.summary = {"pairs_checked": checked, "max_residual": worst}
    return manifest


def parse_value_row(row: dict) -> dict:
    """Round-trip one values.csv row (as read by csv.DictReader) to typed data."""
    return {
        "run_id": row["run_id"],
        "field": row["field"],
        "y": row["y"],
        "N_y": int(row["N_y"]),
        "phi_y": int(row["phi_y"]),
        "alpha": float(row["alpha"]),
        "ensemble": row["ensemble"],
        "observable": row["observable"],
        "value": float(row["value"]),
    }
