"""
Command-line entry point.

Every subcommand reads an adjacency matrix (``--matrix`` file or
``--preset``), writes CSV/JSON into ``--out``, and prints a one-line
summary. The exit code is 0 when the subcommand's checks pass, 1 when a
check fails, and 2 for bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import formats
from .errors import CapacityError, InsufficientDepthError, PoleError
from .groupoid import BisectionIndex
from .heat import (heat_coefficients, heat_matrix_general, heat_trace_D, kernel_diagonal_finite,
                   kernel_heat_matrix, kernel_threshold)
from .isometry import (aut_group, decompose_monomial, is_in_G_A, isometry_verification,
                       random_element)
from .laplacian import spectrum_table
from .markov import (AdjacencyMatrix, ahlfors_constant, enumerate_words, metric_params,
                     parry_measure, perron_frobenius)
from .operators import (TruncationWindow, ck_relation_residual, commutator_norm, dirac_matrix,
                        fock_projection, generator_matrix, laplacian_window,
                        metric_block_norms, old_metric_counterexample, potential_matrix)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["RunConfig", "load_config", "main", "build_parser"]

PRESETS = {
    "full2": lambda: AdjacencyMatrix.full_shift(2),
    "full3": lambda: AdjacencyMatrix.full_shift(3),
    "full4": lambda: AdjacencyMatrix.full_shift(4),
    "golden": AdjacencyMatrix.golden_mean,
    "free2": lambda: AdjacencyMatrix.free_group(2),
}

SPECTRUM_TOL = 1e-9
KERNEL_TOL = 1e-10
ISOMETRY_TOL = 1e-10
BOUND_SLACK = 1e-9
MAX_WINDOW_DIM = 20000
MAX_DEPTH = 12


class InputError(ValueError):
    """Bad configuration or unreadable input; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by all subcommands."""

    matrix: str | None = None
    preset: str | None = None
    lam: float | None = 2.0
    L: int = 3
    R: int | None = None
    depth: int = 6
    t: tuple[float, ...] = (0.5, 1.0, 2.0)
    out: str = "out"
    family: str = "gram_schmidt"
    beta_max_len: int = 1
    k_max: int = 6
    samples: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.L < 1:
            raise InputError("L must be at least 1")
        if self.R is not None and self.R < self.L:
            raise InputError("need L <= R")
        if self.lam is not None and not self.lam > 1:
            raise InputError("lambda must exceed 1")
        if self.depth < 2:
            raise InputError("depth must be at least 2")
        if self.depth > MAX_DEPTH:
            raise InputError(f"depth is capped at {MAX_DEPTH}")
        if self.depth <= self.beta_max_len:
            raise InputError("depth must exceed beta_max_len")
        if any(not x > 0 for x in self.t):
            raise InputError("t values must be positive")

    @property
    def resolution(self) -> int:
        return self.L if self.R is None else self.R

    def adjacency(self) -> AdjacencyMatrix:
        if self.matrix is not None:
            try:
                return formats.read_matrix(self.matrix)
            except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read matrix {self.matrix!r}: {exc}") from exc
        name = self.preset or "full2"
        if name not in PRESETS:
            raise InputError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        return PRESETS[name]()


_ALIASES = {"lambda": "lam", "t_grid": "t", "window_L": "L", "window_R": "R"}


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Read a TOML or JSON config and apply flag overrides (``None`` means unset)."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        try:
            raw = path.read_bytes()
            data = tomllib.loads(raw.decode()) if path.suffix.lower() == ".toml" else json.loads(raw)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read config {str(path)!r}: {exc}") from exc
    merged = {_ALIASES.get(k, k): v for k, v in data.items()}
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise InputError(f"unknown config keys: {unknown}")
    if "t" in merged:
        t = merged["t"]
        merged["t"] = tuple(float(x) for x in (t if isinstance(t, (list, tuple)) else [t]))
    if merged.get("lam") == "max":
        merged["lam"] = None
    return RunConfig(**merged)


def _window(cfg: RunConfig, pf) -> TruncationWindow:
    window = TruncationWindow(pf, cfg.L, cfg.resolution, cfg.family)
    if window.dim > MAX_WINDOW_DIM:
        raise CapacityError(f"window has {window.dim} vectors, more than {MAX_WINDOW_DIM}")
    return window


def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.out) / name


# ---------------------------------------------------------------------------
# subcommands; each returns (ok, summary)


def cmd_pf(cfg: RunConfig) -> tuple[bool, str]:
    """PF data, metric exponents, Ahlfors constant and a Parry measure table."""
    a = cfg.adjacency()
    pf = perron_frobenius(a)
    params = metric_params(pf, cfg.lam)
    ahl = ahlfors_constant(pf, cfg.depth)
    rows = [{"word": w, "length": len(w), "measure": parry_measure(pf, w)}
            for level in enumerate_words(a, cfg.depth)[1:] for w in level]
    formats.write_csv(_out(cfg, "measure.csv"), rows)
    report = {
        "n": a.n,
        "matrix": a.entries,
        "lambda_max": pf.lambda_max,
        "u": pf.u,
        "v": pf.v,
        "lam": params.lam,
        "delta": params.delta,
        "delta_prime": params.delta_prime,
        "ahlfors_constant": ahl.constant,
        "ahlfors_min_ratio": ahl.min_ratio,
        "ahlfors_max_ratio": ahl.max_ratio,
        "primitivity_exponent": a.primitivity_exponent,
    }
    formats.write_json(_out(cfg, "pf.json"), report)
    ok = bool(abs(float(np.dot(pf.u, pf.v)) - 1.0) < 1e-12)
    return ok, f"lambda_max={formats.format_float(pf.lambda_max)} delta={formats.format_float(params.delta)} C={formats.format_float(ahl.constant)}"


def cmd_spectrum(cfg: RunConfig) -> tuple[bool, str]:
    """Closed-form eigenvalues against the exact Laplacian, for every beta up to ``beta_max_len``."""
    a = cfg.adjacency()
    pf = perron_frobenius(a)
    rows = []
    for level in enumerate_words(a, cfg.beta_max_len)[1:]:
        for beta in level:
            rows.extend(spectrum_table(pf, beta, cfg.depth, cfg.family))
    err = max((r["abs_error"] for r in rows), default=0.0)
    formats.write_csv(_out(cfg, "spectrum.csv"), rows,
                      ["beta", "nu", "multiplicity", "closed_form", "oracle_value", "abs_error"])
    formats.write_json(_out(cfg, "spectrum_summary.json"),
                       {"depth": cfg.depth, "rows": len(rows), "max_abs_error": err,
                        "tolerance": SPECTRUM_TOL})
    return err <= SPECTRUM_TOL, f"rows={len(rows)} max_abs_error={formats.format_float(err)}"


def cmd_heat(cfg: RunConfig) -> tuple[bool, str]:
    """Kernel-vs-spectral heat operators (full shifts) and windowed heat traces."""
    a = cfg.adjacency()
    pf = perron_frobenius(a)
    full = bool(a.entries.all())
    kernel_rows = []
    ok = True
    if full:
        gamma = BisectionIndex((), (1,))
        for t in cfg.t:
            row = {"t": t, "gamma": str(gamma), "depth": cfg.depth, "threshold": kernel_threshold(a.n),
                   "diagonal_finite": kernel_diagonal_finite(a.n, t), "status": "ok",
                   "max_abs_diff": None}
            try:
                heat_coefficients(a.n, len(gamma.beta), t)
                kern = kernel_heat_matrix(a.n, gamma, t, cfg.depth)
                spec = heat_matrix_general(pf, gamma.beta, t, cfg.depth, shift=gamma.length)
                row["max_abs_diff"] = float(np.max(np.abs(kern - spec)))
                if row["max_abs_diff"] > KERNEL_TOL:
                    row["status"] = "mismatch"
                    ok = False
            except PoleError:
                row["status"] = "pole"
            kernel_rows.append(row)
        formats.write_csv(_out(cfg, "heat_kernel.csv"), kernel_rows)
    window = _window(cfg, pf)
    trace_rows = []
    for t in cfg.t:
        for level in range(1, cfg.L + 1):
            sub = TruncationWindow(pf, level, level + (window.R - window.L), cfg.family)
            trace_rows.append({"t": t, "window_L": level, "window_R": sub.R,
                               "value": heat_trace_D(sub, t)})
    formats.write_csv(_out(cfg, "heat_trace.csv"), trace_rows)
    poles = sum(r["status"] == "pole" for r in kernel_rows)
    return ok, f"kernel_rows={len(kernel_rows)} poles={poles} trace_rows={len(trace_rows)}"


def cmd_operators(cfg: RunConfig) -> tuple[bool, str]:
    """Relation residuals, commutator bounds, D-spectrum identity and the counterexample table."""
    a = cfg.adjacency()
    pf = perron_frobenius(a)
    window = _window(cfg, pf)
    bound = ahlfors_constant(pf, max(cfg.depth, 2 * a.n)).constant
    res = ck_relation_residual(window)
    lap = laplacian_window(window)
    d = dirac_matrix(window)
    p = fock_projection(window).matrix
    eye = np.eye(window.dim)
    rebuilt = (2 * p - eye) @ (lap.matrix + potential_matrix(window).matrix)
    d_err = float(np.max(np.abs(d.matrix - rebuilt))) if window.dim else 0.0
    rows = []
    ok = d_err == 0.0
    for i in range(1, a.n + 1):
        norm = commutator_norm(lap, generator_matrix(window, i))
        rows.append({"letter": i, "L": window.L, "R": window.R, "commutator_norm": norm,
                     "bound": bound, "within_bound": norm <= bound + BOUND_SLACK})
        ok &= norm <= bound + BOUND_SLACK
    formats.write_csv(_out(cfg, "commutators.csv"), rows)
    growth = []
    for i in range(1, a.n + 1):
        for k in range(1, cfg.k_max + 1):
            depth = k + 2
            value, ratio = old_metric_counterexample(pf, i, k, depth)
            old, new = metric_block_norms(pf, i, k, depth)
            growth.append({"letter": i, "k": k, "depth": depth, "value": value, "ratio": ratio,
                           "old_norm": old, "new_norm": new, "bound": bound})
            ok &= new <= bound + BOUND_SLACK
    formats.write_csv(_out(cfg, "counterexample.csv"), growth)
    formats.write_sparse_triplets(_out(cfg, "dirac.txt"), d.matrix)
    formats.write_manifest(_out(cfg, "manifest.csv"), window.manifest())
    formats.write_json(_out(cfg, "operators.json"), {
        "L": window.L, "R": window.R, "dim": window.dim, "ahlfors_constant": bound,
        "ck_interior_residual": res.interior, "ck_full_residual": res.full,
        "dirac_identity_error": d_err,
        "max_commutator_norm": max(r["commutator_norm"] for r in rows),
    })
    ok &= res.interior < 1e-10
    return bool(ok), f"dim={window.dim} ck_interior={formats.format_float(res.interior)} C={formats.format_float(bound)}"


def _generating_set(group: list) -> list:
    """Greedy generating set: add an element whenever it is not yet generated."""
    gens: list = []
    closure = {group[0].identity(group[0].n).images} if group else set()
    for g in group:
        if g.images in closure:
            continue
        gens.append(g)
        frontier = list(closure)
        while frontier:
            new = []
            for x in frontier:
                for h in gens:
                    y = tuple(h.images[i - 1] for i in x)
                    if y not in closure:
                        closure.add(y)
                        new.append(y)
            frontier = new
    return gens


def cmd_isometry(cfg: RunConfig) -> tuple[bool, str]:
    """Automorphism group, membership audit of a random unitary, and sampled ``U_u`` checks."""
    a = cfg.adjacency()
    pf = perron_frobenius(a)
    group = aut_group(a)
    window = _window(cfg, pf)
    rng = np.random.default_rng(cfg.seed)
    samples = []
    worst = 0.0
    for _ in range(cfg.samples):
        element = random_element(group, rng)
        norms = isometry_verification(window, element)
        worst = max(worst, *norms.values())
        samples.append({"c": [complex(z) for z in element.c], "q": list(element.q.images),
                        "norms": norms})
    z = rng.normal(size=(a.n, a.n)) + 1j * rng.normal(size=(a.n, a.n))
    unitary, _ = np.linalg.qr(z)
    membership = is_in_G_A(a, unitary)
    try:
        decompose_monomial(a, unitary)
        monomial = True
    except ValueError:
        monomial = False
    formats.write_json(_out(cfg, "isometry.json"), {
        "aut_order": len(group),
        "aut_generators": [list(g.images) for g in _generating_set(group)],
        "sample_isometries": samples,
        "commutator_norms": {"max": worst, "tolerance": ISOMETRY_TOL},
        "random_unitary": {"in_G_A": membership.ok, "violations": list(membership.violations[:20]),
                           "monomial": monomial},
        "window": {"L": window.L, "R": window.R, "dim": window.dim},
    })
    return worst <= ISOMETRY_TOL, f"aut_order={len(group)} max_norm={formats.format_float(worst)}"


COMMANDS = {
    "pf": cmd_pf,
    "spectrum": cmd_spectrum,
    "heat": cmd_heat,
    "operators": cmd_operators,
    "isometry": cmd_isometry,
}


def _t_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad t list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ckspectral",
                                     description="Spectral triple computations for Cuntz-Krieger algebras.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        p.add_argument("--config", help="TOML or JSON config file")
        src = p.add_mutually_exclusive_group()
        src.add_argument("--matrix", help="adjacency matrix file (text or JSON)")
        src.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--lambda", dest="lam", type=float, help="metric scale (> 1)")
        p.add_argument("--L", type=int, help="max bisection length")
        p.add_argument("--R", type=int, help="max wavelet resolution")
        p.add_argument("--depth", type=int, help="cylinder depth m")
        p.add_argument("--t", type=_t_list, help="comma-separated times")
        p.add_argument("--out", help="output directory")
        p.add_argument("--family", choices=["gram_schmidt", "fourier"])
        p.add_argument("--seed", type=int)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        cfg = load_config(args.config, overrides)
        ok, summary = COMMANDS[args.command](cfg)
    except (InputError, CapacityError, InsufficientDepthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.command}: {'PASS' if ok else 'FAIL'} {summary}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
