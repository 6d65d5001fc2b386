"""Config-driven experiment runner with a digest-keyed result cache.

Runs are described by a sectioned key-value config file ([problem],
[grid], [solver], [bounds], [ritz], [output]); every command writes its
results plus a JSON manifest into a directory keyed by the sha256 digest
of the canonicalized config, and skips recomputation on a cache hit.
A manifest is itself accepted as a config file, so any run can be
reproduced from its manifest alone.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from configparser import ConfigParser, Error as IniError
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .asymptotics import (calibrate_constants, compare_bounds, default_window,
                          fit_exponent)
from .discretize import BoxGrid, MultiplierOperator, assemble_stiffness
from .eigensolve import DENSE_LIMIT, Spectrum, dense_lowest, lanczos_lowest
from .errors import (CacheCorrupt, ConfigError, DimensionTooLarge,
                     NumericalError)
from .operators import (AnisotropicSum, IsotropicStable, LevyStable,
                        PowerPotential, SimplePower, Symbol,
                        TwoSidedPowerPotential, VariableOrder)
from .rates import (curve_ex21, curve_thm23, curve_thm24, curve_trace,
                    ex21_delta_max, profile_from_parts, thm23_lower,
                    weyl_exponent)
from .ritz import build_basis, form_matrix, ritz_values

SCHEMA_VERSION = 1

_SECTIONS = ("problem", "grid", "solver", "bounds", "ritz", "output")


@dataclass
class RunConfig:
    """Effective run configuration as nested string maps."""

    data: dict[str, dict[str, str]] = field(default_factory=dict)

    def get(self, section: str, key: str, default: str | None = None) -> str:
        try:
            return self.data[section][key]
        except KeyError:
            if default is not None:
                return default
            raise ConfigError(f"missing field {section}.{key}") from None

    def get_float(self, section: str, key: str, default: str | None = None) -> float:
        raw = self.get(section, key, default)
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(
                f"field {section}.{key} must be a number, got {raw!r}") from None

    def get_int(self, section: str, key: str, default: str | None = None) -> int:
        raw = self.get(section, key, default)
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(
                f"field {section}.{key} must be an integer, got {raw!r}") from None

    def set(self, section: str, key: str, value: str) -> None:
        self.data.setdefault(section, {})[key] = value

    def canonical(self) -> str:
        """Stable serialization; the [output] block never affects identity."""
        keep = {s: dict(sorted(kv.items()))
                for s, kv in sorted(self.data.items()) if s != "output"}
        return json.dumps(keep, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def load_config(path: str) -> RunConfig:
    """Read an INI config or a previously written JSON manifest."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        head = fh.read(1)
    if head == "{":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"bad manifest JSON in {path}: {exc}") from None
        if "config" not in doc:
            raise ConfigError(f"manifest {path} has no config block")
        return RunConfig(data={s: dict(kv) for s, kv in doc["config"].items()})
    parser = ConfigParser()
    try:
        parser.read(path)
    except IniError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    data = {s: dict(parser.items(s)) for s in parser.sections()}
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    if "problem" not in data or "grid" not in data:
        raise ConfigError("config requires [problem] and [grid] sections")
    return RunConfig(data=data)


# ---------------------------------------------------------------------------
# problem construction


def build_potential(cfg: RunConfig):
    kind = cfg.get("problem", "potential", "power")
    if kind == "none":
        return None
    if kind == "power":
        return PowerPotential(cfg.get_float("problem", "c", "1.0"),
                              cfg.get_float("problem", "theta"))
    if kind == "twosided":
        return TwoSidedPowerPotential(
            cfg.get_float("problem", "c3"), cfg.get_float("problem", "theta1"),
            cfg.get_float("problem", "c4"), cfg.get_float("problem", "theta2"),
            cfg.get_float("problem", "crossover", "1.0"))
    raise ConfigError(f"unknown potential kind {kind!r}")


def build_kinetic(cfg: RunConfig):
    """The symbol or jump kernel named by problem.kind."""
    kind = cfg.get("problem", "kind", "symbol")
    d = cfg.get_int("problem", "d", "1")
    if kind == "symbol":
        sym = cfg.get("problem", "symbol", "stable")
        if sym == "stable":
            return IsotropicStable(cfg.get_float("problem", "alpha")), d
        if sym == "anisotropic":
            return _parse_anisotropic(cfg.get("problem", "terms"), d), d
        raise ConfigError(f"unknown symbol variant {sym!r}")
    if kind == "kernel":
        ker = cfg.get("problem", "kernel", "stable")
        kappa = cfg.get_float("problem", "kappa", "inf")
        if ker == "stable":
            return LevyStable(d, cfg.get_float("problem", "alpha"), kappa), d
        if ker == "variable":
            return VariableOrder(d, cfg.get_float("problem", "alpha0"),
                                 cfg.get_float("problem", "beta1"),
                                 cfg.get_float("problem", "beta2"), kappa), d
        raise ConfigError(f"unknown kernel variant {ker!r}")
    raise ConfigError(f"problem.kind must be symbol or kernel, got {kind!r}")


def _parse_anisotropic(raw: str, d: int) -> AnisotropicSum:
    """terms = c:a1,...,ad:b; ... one summand c*|<a,xi>|^b per entry."""
    terms = []
    for part in raw.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            c, vec, b = part.split(":")
            avec = tuple(float(v) for v in vec.split(","))
            terms.append((float(c), avec, float(b)))
        except ValueError:
            raise ConfigError(
                f"bad anisotropic term {part!r}, expected c:a1,..,ad:b") from None
        if len(avec) != d:
            raise ConfigError(
                f"anisotropic direction {avec} has wrong dimension, expected {d}")
    if not terms:
        raise ConfigError("problem.terms lists no summands")
    return AnisotropicSum(terms=tuple(terms))


def build_grid(cfg: RunConfig, d: int) -> BoxGrid:
    return BoxGrid(d=d, L=cfg.get_float("grid", "l"),
                   N=cfg.get_int("grid", "n"))


def _problem_exponents(cfg: RunConfig) -> tuple[float, float, int]:
    """(theta, alpha, d) of the configured problem, for bound curves."""
    kinetic, d = build_kinetic(cfg)
    if isinstance(kinetic, (IsotropicStable, LevyStable)):
        alpha = kinetic.alpha
    elif isinstance(kinetic, VariableOrder):
        alpha = kinetic.alpha0
    else:
        raise ConfigError("bound curves need a stable or variable-order kinetic term")
    if cfg.get("problem", "potential", "power") != "power":
        raise ConfigError("bound curves need a power potential")
    return cfg.get_float("problem", "theta"), alpha, d


# ---------------------------------------------------------------------------
# cache and serialization


def fmt_num(x) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(x))


def atomic_write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_num(v) if isinstance(v, float) else str(v)
                              for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def run_dir(cfg: RunConfig, out_dir: str) -> str:
    return os.path.join(out_dir, cfg.digest())


def manifest_path(cfg: RunConfig, out_dir: str, command: str) -> str:
    return os.path.join(run_dir(cfg, out_dir), f"manifest-{command}.json")


def write_manifest(cfg: RunConfig, out_dir: str, command: str,
                   outputs: list[str], extra: dict) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "digest": cfg.digest(),
        "config": cfg.data,
        "outputs": sorted(os.path.basename(p) for p in outputs),
        "versions": {"package": __version__, "numpy": np.__version__,
                     "python": sys.version.split()[0]},
        "results": extra,
    }
    path = manifest_path(cfg, out_dir, command)
    atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def cache_hit(cfg: RunConfig, out_dir: str, command: str, force: bool) -> bool:
    """True when a valid manifest and all its outputs already exist."""
    if force:
        return False
    path = manifest_path(cfg, out_dir, command)
    if not os.path.exists(path):
        return False
    try:
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("digest") != cfg.digest():
            raise CacheCorrupt(
                f"cache digest mismatch in {path}: "
                f"{doc.get('digest')} != {cfg.digest()}")
        base = run_dir(cfg, out_dir)
        return all(os.path.exists(os.path.join(base, p)) for p in doc["outputs"])
    except (json.JSONDecodeError, KeyError):
        raise CacheCorrupt(f"unreadable cache manifest {path}") from None


def _cache_hit_or_warn(cfg, out_dir, command, force) -> bool:
    """Digest mismatch means a stale or tampered entry: warn and recompute."""
    try:
        return cache_hit(cfg, out_dir, command, force)
    except CacheCorrupt as exc:
        print(f"warning: {exc}; recomputing", file=sys.stderr)
        return False


# ---------------------------------------------------------------------------
# shared computations


def compute_spectrum(cfg: RunConfig) -> Spectrum:
    kinetic, d = build_kinetic(cfg)
    V = build_potential(cfg)
    grid = build_grid(cfg, d)
    k = cfg.get_int("solver", "k", "10")
    tol = cfg.get_float("solver", "tol", "1e-8")
    seed = cfg.get_int("solver", "seed", "0")
    max_iter_raw = cfg.get("solver", "max_iter", "auto")
    max_iter = None if max_iter_raw == "auto" else int(max_iter_raw)
    method = cfg.get("solver", "method", "auto")

    if isinstance(kinetic, Symbol):
        op = MultiplierOperator.from_symbol(grid, kinetic, V)
        ceiling = op.spectral_ceiling()
        if method == "auto":
            method = "dense" if grid.size <= 1024 else "lanczos"
        if method == "dense":
            if grid.size > 1024:
                raise DimensionTooLarge(
                    "dense route materializes the multiplier operator; "
                    f"limited to 1024 unknowns, got {grid.size}")
            M = np.zeros((grid.size, grid.size))
            e = np.zeros(grid.size)
            for j in range(grid.size):
                e[j] = 1.0
                M[:, j] = op.apply(e.reshape(grid.shape)).ravel()
                e[j] = 0.0
            spec = dense_lowest(M, k)
        else:
            spec = lanczos_lowest(lambda v: op.apply(v.reshape(grid.shape)).ravel(),
                                  grid.size, k, tol=tol, seed=seed,
                                  max_iter=max_iter)
    else:
        S = assemble_stiffness(grid, kinetic, V)
        M = S.operator_matrix()
        ceiling = None
        if method == "auto":
            method = "dense" if grid.size <= DENSE_LIMIT else "lanczos"
        if method == "dense":
            spec = dense_lowest(M.toarray(), k)
        else:
            spec = lanczos_lowest(lambda v: M @ v, grid.size, k, tol=tol,
                                  seed=seed, max_iter=max_iter)
    spec.meta.update({"digest": cfg.digest(), "d": d, "L": grid.L, "N": grid.N,
                      "method": method})
    if ceiling is not None:
        spec.meta["spectral_ceiling"] = ceiling
    return spec


def _memo_spectrum(cfg: RunConfig, memo: dict) -> Spectrum:
    key = cfg.digest()
    if key not in memo:
        memo[key] = compute_spectrum(cfg)
    return memo[key]


def build_curves(cfg: RunConfig, spectrum: Spectrum):
    """Instantiate the bound curves named in bounds.curves.

    Constants default to "calibrate": undetermined prefactors are fixed
    so the curve envelopes the computed spectrum on the default window.
    """
    names = [s.strip() for s in
             cfg.get("bounds", "curves", "thm24,trace").split(",") if s.strip()]
    theta, alpha, d = _problem_exponents(cfg)
    e = weyl_exponent(d, theta, alpha)
    window = default_window(spectrum, spectrum.meta.get("spectral_ceiling"))
    curves = []
    for name in names:
        if name == "thm24":
            mode = cfg.get("bounds", "delta", "calibrate")
            if mode == "calibrate":
                lo, hi = calibrate_constants(spectrum, e, window)
            else:
                lo = hi = float(mode)
            curves.append(curve_thm24(d, theta, alpha, lo, "lower"))
            curves.append(curve_thm24(d, theta, alpha, hi, "upper"))
        elif name == "thm23":
            curves.append(_calibrated_thm23(cfg, spectrum, window, theta, d))
        elif name == "ex21":
            curves.append(_calibrated_ex21(cfg, spectrum, window, theta, d))
        elif name == "trace":
            kinetic, _ = build_kinetic(cfg)
            if not isinstance(kinetic, Symbol):
                raise ConfigError("the trace curve needs a symbol problem")
            curves.append(curve_trace(kinetic, build_potential(cfg), d))
        else:
            raise ConfigError(f"unknown bound curve {name!r}")
    return curves, window


def _calibrated_thm23(cfg, spectrum, window, theta, d):
    kinetic, _ = build_kinetic(cfg)
    V = build_potential(cfg)
    p = cfg.get_float("bounds", "phi_p", str(d / 4.0 + 0.01))
    phi = SimplePower(p)
    if isinstance(kinetic, Symbol):
        if not isinstance(kinetic, IsotropicStable):
            raise ConfigError("thm23 curve needs a stable order")
        profile = profile_from_parts(kinetic.alpha, V, phi, d)
    else:
        profile = profile_from_parts(kinetic, V, phi, d)
    n0, n1 = window
    probes = np.unique(np.geomspace(n0, n1, 8).astype(int))
    raw = np.array([thm23_lower(profile, 1.0, 1.0, float(n)) for n in probes])
    lam = spectrum.eigenvalues[probes - 1]
    delta1 = float((lam / raw).min())
    return curve_thm23(profile, delta1, 1.0)


def _calibrated_ex21(cfg, spectrum, window, theta, d):
    kinetic, _ = build_kinetic(cfg)
    if not isinstance(kinetic, VariableOrder):
        raise ConfigError("the ex21 curve needs a variable-order kernel")
    a0, b1 = kinetic.alpha0, kinetic.beta1
    delta_raw = cfg.get("bounds", "ex21_delta", "auto")
    delta = (0.5 * ex21_delta_max(d, theta, a0, b1)
             if delta_raw == "auto" else float(delta_raw))
    n0, n1 = window
    probes = np.unique(np.geomspace(n0, n1, 8).astype(int))
    shape = np.array([float(curve_ex21(d, theta, a0, b1, delta, 1.0)(int(n)))
                      for n in probes])
    lam = spectrum.eigenvalues[probes - 1]
    c_delta = float((lam / shape).min())
    return curve_ex21(d, theta, a0, b1, delta, c_delta)


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: RunConfig, out_dir: str, fmt: str = "csv",
                 force: bool = False, memo: dict | None = None) -> list[str]:
    command = "spectrum"
    base = run_dir(cfg, out_dir)
    if _cache_hit_or_warn(cfg, out_dir, command, force):
        return [manifest_path(cfg, out_dir, command)]
    spec = _memo_spectrum(cfg, memo if memo is not None else {})
    outputs = []
    if fmt == "csv":
        path = os.path.join(base, "spectrum.csv")
        write_csv(path, ["n", "lambda", "residual"], spec.to_rows())
    else:
        path = os.path.join(base, "spectrum.json")
        atomic_write(path, spec.to_json() + "\n")
    outputs.append(path)
    extra = {"k": len(spec), "converged": spec.converged,
             "solver": spec.solver, "iterations": spec.iterations}
    outputs.append(write_manifest(cfg, out_dir, command, outputs, extra))
    return outputs


def cmd_bounds(cfg: RunConfig, out_dir: str, fmt: str = "csv",
               force: bool = False, memo: dict | None = None) -> list[str]:
    command = "bounds"
    base = run_dir(cfg, out_dir)
    if _cache_hit_or_warn(cfg, out_dir, command, force):
        return [manifest_path(cfg, out_dir, command)]
    spec = _memo_spectrum(cfg, memo if memo is not None else {})
    curves, window = build_curves(cfg, spec)
    ns = range(1, len(spec) + 1)
    cols = {}
    for curve in curves:
        cols[curve.source] = [float(curve(n)) if n >= curve.n_min else math.nan
                              for n in ns]
    header = ["n", "lambda"] + list(cols)
    rows = [[n, float(spec.eigenvalues[n - 1])] + [cols[c][n - 1] for c in cols]
            for n in ns]
    outputs = []
    if fmt == "csv":
        path = os.path.join(base, "bounds.csv")
        write_csv(path, header, rows)
    else:
        path = os.path.join(base, "bounds.json")
        atomic_write(path, json.dumps(
            {"window": window,
             "curves": {c.source: {"side": c.side, "constants": c.constants}
                        for c in curves},
             "rows": rows}, indent=2, default=float) + "\n")
    outputs.append(path)
    violations = compare_bounds(spec, curves, window)
    extra = {"curves": [c.source for c in curves], "window": list(window),
             "violations": len(violations)}
    outputs.append(write_manifest(cfg, out_dir, command, outputs, extra))
    return outputs


def cmd_ritz(cfg: RunConfig, out_dir: str, fmt: str = "csv",
             force: bool = False, threads: int = 1) -> list[str]:
    command = "ritz"
    base = run_dir(cfg, out_dir)
    if _cache_hit_or_warn(cfg, out_dir, command, force):
        return [manifest_path(cfg, out_dir, command)]
    theta, alpha, d = _problem_exponents(cfg)
    kinetic, _ = build_kinetic(cfg)
    V = build_potential(cfg)
    n_list = [int(s) for s in cfg.get("ritz", "n_list", "4,8,16").split(",")]

    def one(n: int):
        basis = build_basis(n, d, theta, alpha)
        A = form_matrix(basis, kinetic, V)
        I = np.array([basis.norm_sq(kv) for kv in basis.indices()])
        return ritz_values(A, I)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        specs = list(pool.map(one, n_list))
    rows = []
    for n, spec in zip(n_list, specs):
        for j, mu in enumerate(spec.eigenvalues, start=1):
            rows.append([n, j, float(mu)])
    mu_max = [float(s.eigenvalues[-1]) for s in specs]
    slope = (float(np.polyfit(np.log(n_list), np.log(mu_max), 1)[0])
             if len(n_list) >= 2 else math.nan)
    outputs = []
    if fmt == "csv":
        path = os.path.join(base, "ritz.csv")
        write_csv(path, ["n", "j", "mu"], rows)
    else:
        path = os.path.join(base, "ritz.json")
        atomic_write(path, json.dumps(
            {"source": "ritz", "n_list": n_list, "rows": rows,
             "slope": slope}, indent=2) + "\n")
    outputs.append(path)
    extra = {"n_list": n_list, "mu_max": mu_max, "slope": slope,
             "target": theta * alpha / (theta + alpha)}
    outputs.append(write_manifest(cfg, out_dir, command, outputs, extra))
    return outputs


def cmd_fit(cfg: RunConfig, out_dir: str, fmt: str = "csv",
            force: bool = False, memo: dict | None = None) -> list[str]:
    command = "fit"
    base = run_dir(cfg, out_dir)
    if _cache_hit_or_warn(cfg, out_dir, command, force):
        return [manifest_path(cfg, out_dir, command)]
    spec = _memo_spectrum(cfg, memo if memo is not None else {})
    window = default_window(spec, spec.meta.get("spectral_ceiling"))
    fit = fit_exponent(spec, window)
    outputs = []
    doc = {"slope": fit.slope, "intercept": fit.intercept, "stderr": fit.stderr,
           "window": list(fit.window), "points": fit.points}
    if fmt == "csv":
        path = os.path.join(base, "fit.csv")
        write_csv(path, list(doc), [[float(doc["slope"]), float(doc["intercept"]),
                                     float(doc["stderr"]), f"{fit.window[0]}:{fit.window[1]}",
                                     fit.points]])
    else:
        path = os.path.join(base, "fit.json")
        atomic_write(path, json.dumps(doc, indent=2) + "\n")
    outputs.append(path)
    outputs.append(write_manifest(cfg, out_dir, command, outputs, doc))
    return outputs


def cmd_report(cfg: RunConfig, out_dir: str, fmt: str = "csv",
               force: bool = False, threads: int = 1,
               check: bool = False) -> tuple[list[str], bool]:
    """Combined run: spectrum, bounds, fit, Ritz, text report, figures.

    Returns (paths, ok); ok is False when --check finds an ordering or
    exponent failure.
    """
    command = "report"
    base = run_dir(cfg, out_dir)
    memo: dict = {}
    spec = _memo_spectrum(cfg, memo)
    outputs = list(cmd_spectrum(cfg, out_dir, fmt, force, memo))
    outputs += cmd_bounds(cfg, out_dir, fmt, force, memo)
    outputs += cmd_fit(cfg, out_dir, fmt, force, memo)
    ritz_ok = True
    try:
        outputs += cmd_ritz(cfg, out_dir, fmt, force, threads)
        with open(manifest_path(cfg, out_dir, "ritz")) as fh:
            ritz_res = json.load(fh)["results"]
    except (ConfigError, NumericalError):
        ritz_res = None

    curves, window = build_curves(cfg, spec)
    violations = compare_bounds(spec, curves, window)
    fit = fit_exponent(spec, default_window(spec, spec.meta.get("spectral_ceiling")))
    theta, alpha, d = _problem_exponents(cfg)
    target = weyl_exponent(d, theta, alpha)
    tol = cfg.get_float("bounds", "slope_tol", "0.1")
    slope_ok = abs(fit.slope - target) <= tol

    lines = [
        f"run {cfg.digest()}",
        f"eigenvalues: {len(spec)} ({spec.solver}, converged={spec.converged})",
        f"fit: slope {fit.slope:.6f} target {target:.6f} "
        f"(window {fit.window[0]}..{fit.window[1]}, stderr {fit.stderr:.2e})",
        "bound ordering:",
    ]
    for c in curves:
        nviol = sum(1 for v in violations if v.source == c.source)
        lines.append(f"  {c.source:12s} side={c.side:5s} violations={nviol}")
    if ritz_res is not None:
        lines.append(f"ritz: slope {ritz_res['slope']:.4f} over n_list "
                     f"{ritz_res['n_list']}")
        for n, spec_n in zip(ritz_res["n_list"], ritz_res["mu_max"]):
            lines.append(f"  n={n:4d} mu_max={spec_n:.6g}")
    lines.append(f"check: violations={len(violations)} slope_ok={slope_ok}")
    report_txt = os.path.join(base, "report.txt")
    atomic_write(report_txt, "\n".join(lines) + "\n")
    outputs.append(report_txt)
    outputs += _report_figures(base, spec, curves, window)
    outputs.append(write_manifest(cfg, out_dir, command,
                                  outputs,
                                  {"violations": len(violations),
                                   "slope": fit.slope, "target": target,
                                   "slope_ok": slope_ok}))
    ok = not violations and slope_ok
    return outputs, (ok if check else True)


def _report_figures(base: str, spec: Spectrum, curves, window) -> list[str]:
    """Log-log spectrum with every bound curve, rendered to PNG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = np.arange(1, len(spec) + 1)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.loglog(n, spec.eigenvalues, "k.", ms=4, label="computed")
    for curve in curves:
        ns = n[n >= curve.n_min]
        vals = [float(curve(int(m))) for m in ns]
        style = "--" if curve.side == "lower" else ":"
        ax.loglog(ns, vals, style, lw=1, label=f"{curve.source} ({curve.side})")
    ax.axvspan(window[0], window[1], color="0.92", zorder=0)
    ax.set_xlabel("n")
    ax.set_ylabel("eigenvalue")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(base, "report_spectrum.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlspec",
        description="Eigenvalues and spectral bounds for non-local "
                    "Schrodinger operators")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("spectrum", "compute the lowest eigenvalues"),
        ("bounds", "evaluate closed-form bound curves"),
        ("ritz", "variational upper bounds from the tent basis"),
        ("fit", "fit the growth exponent"),
        ("report", "combined report with figures"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="INI config or JSON manifest")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=None,
                       help="override solver.seed")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--force", action="store_true",
                       help="recompute even on a cache hit")
        if name == "report":
            p.add_argument("--check", action="store_true",
                           help="exit 3 unless orderings and exponent hold")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.set("solver", "seed", str(args.seed))
        out_dir = args.out or cfg.get("output", "directory", "runs")
        fmt = args.format or cfg.get("output", "format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json, got {fmt!r}")
        if args.command == "spectrum":
            paths = cmd_spectrum(cfg, out_dir, fmt, args.force)
        elif args.command == "bounds":
            paths = cmd_bounds(cfg, out_dir, fmt, args.force)
        elif args.command == "ritz":
            paths = cmd_ritz(cfg, out_dir, fmt, args.force, args.threads)
        elif args.command == "fit":
            paths = cmd_fit(cfg, out_dir, fmt, args.force)
        else:
            paths, ok = cmd_report(cfg, out_dir, fmt, args.force, args.threads,
                                   check=args.check)
            if not ok:
                for p in paths:
                    print(p)
                print("check failed", file=sys.stderr)
                return 3
        for p in paths:
            print(p)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except CacheCorrupt as exc:
        print(f"cache corrupt, rerun with --force: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
