"""Convergence studies and table output."""
from __future__ import annotations

import csv
import io
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import galerkin, hier1d, interp
from .femspace import FeSpace, FeSpace1D
from .mesh import MeshError, build_mesh_1d, build_mesh_2d, max_admissible_eps
from .norms import error_between, error_vs_exact, observed_order
from .problem import CosFactor, make_manufactured_problem, make_problem_1d

log = logging.getLogger(__name__)

MODES = ("galerkin-superclose", "interp-rates", "hier1d-checks", "identity-checks")
INTERPOLANTS = ("GL", "VEC", "both")
FORMATS = ("csv", "markdown")

_MEASURES = ("E_galerkin", "E_sc_GL", "E_sc_VEC", "L2_interp", "E_interp")
# declared schema first; the interpolant and status columns are appended
STUDY_COLUMNS = (["p", "N", "eps"]
                 + [f"err_{m}" for m in _MEASURES]
                 + [f"rate_{kind}_{m}" for m in _MEASURES for kind in ("raw", "adj")]
                 + ["interpolant", "status"])
IDENTITY_COLUMNS = ["p", "N", "function", "max_coeff_diff", "status"]
HIER1D_COLUMNS = ["p", "N", "eps", "roundtrip_err", "ratio_random_max", "ratio_random_min",
                  "ratio_sup", "total", "I", "II_III", "IV", "parity", "status"]

IDENTITY_FUNCTIONS = {
    "sin(x+2y)": lambda x, y: np.sin(x + 2 * y),
    "exp(x-y)": lambda x, y: np.exp(x - y),
    "cos(3x)y^2": lambda x, y: np.cos(3 * x) * y**2,
    "1/(1+x+y)": lambda x, y: 1.0 / (1.0 + x + y),
    "x^5y^4+xy": lambda x, y: x**5 * y**4 + x * y,
}


class ConfigError(ValueError):
    """Invalid study configuration."""


@dataclass
class StudyConfig:
    p: int = 3
    N_list: list = field(default_factory=lambda: [8, 16, 32])
    eps_list: list = field(default_factory=lambda: [1e-6])
    sigma: float | None = None
    problem: str = "layer2d"
    interpolant: str = "both"
    fmt: str = "csv"
    out: str | None = None
    mode: str = "galerkin-superclose"
    force: bool = False
    quad_order: int | None = None
    dump_matrix: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.sigma is None:
            self.sigma = self.p + 1.5

    def validate(self) -> "StudyConfig":
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.interpolant not in INTERPOLANTS:
            raise ConfigError(f"interpolant must be one of {INTERPOLANTS}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.p < 1 or (self.p % 2 == 0 and not self.force):
            raise ConfigError(f"p must be odd (got {self.p}); --force allows even p")
        if self.mode == "hier1d-checks" and (self.p < 3 or self.p % 2 == 0):
            raise ConfigError("hier1d checks need odd p >= 3")
        if not self.N_list or any(N < 4 or N % 2 for N in self.N_list):
            raise ConfigError("every N must be even and >= 4")
        if sorted(set(self.N_list)) != list(self.N_list):
            raise ConfigError("N values must be strictly increasing")
        if not self.eps_list or any(e <= 0 for e in self.eps_list):
            raise ConfigError("eps values must be positive")
        if self.sigma < self.p + 1.5 and not self.force:
            raise ConfigError(f"sigma={self.sigma:g} < p+3/2; use --force to override")
        if self.quad_order is not None and self.quad_order < self.p + 2:
            raise ConfigError(f"quad order must be >= p+2 = {self.p + 2}")
        expected = "layer1d" if self.mode == "hier1d-checks" else "layer2d"
        if self.mode != "identity-checks" and self.problem != expected:
            raise ConfigError(f"mode {self.mode} runs on problem {expected!r}")
        if not self.force and self.mode != "identity-checks":
            betas = (2.0,) if self.problem == "layer1d" else (2.0, 3.0)
            for eps in self.eps_list:
                for N in self.N_list:
                    bound = max_admissible_eps(N, self.sigma, min(betas))
                    if eps > bound:
                        raise ConfigError(
                            f"eps={eps:g} inadmissible for N={N} (bound {bound:.4g}); "
                            "use --force for a uniform-mesh fallback")
        return self


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.12g}"
    return str(v)


def _add_rates(rows: list[dict], key_fields=("eps", "interpolant")) -> None:
    groups: dict = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in key_fields), []).append(r)
    for group in groups.values():
        for m in _MEASURES:
            for a, b in zip(group, group[1:]):
                ea, eb = a.get(f"err_{m}"), b.get(f"err_{m}")
                if ea is None or eb is None or not ea > 0 or not eb > 0:
                    continue
                Ns = [a["N"], b["N"]]
                b[f"rate_raw_{m}"] = observed_order([ea, eb], Ns)[0]
                b[f"rate_adj_{m}"] = observed_order([ea, eb], Ns, True)[0]


def _galerkin_row(cfg: StudyConfig, N: int, eps: float, prob) -> dict:
    row = {"p": cfg.p, "N": N, "eps": eps, "interpolant": cfg.interpolant}
    mesh = build_mesh_2d(N, cfg.sigma, eps, prob.beta1, prob.beta2, cfg.force)
    space = FeSpace(mesh, cfg.p)
    system = galerkin.assemble(space, prob, cfg.quad_order)
    if cfg.dump_matrix:
        Path(cfg.dump_matrix).mkdir(parents=True, exist_ok=True)
        system.matrix.dump(Path(cfg.dump_matrix) / f"matrix_p{cfg.p}_N{N}_eps{eps:g}.mtx")
    uh = galerkin.solve(system)
    u = prob.exact
    row["err_E_galerkin"] = error_vs_exact(uh, u, eps).energy
    interps = {}
    if cfg.interpolant in ("GL", "both"):
        interps["GL"] = interp.gl_interpolate(u, space)
        row["err_E_sc_GL"] = error_between(interps["GL"], uh, eps).energy
    if cfg.interpolant in ("VEC", "both"):
        interps["VEC"] = interp.vec_interpolate(u, space)
        row["err_E_sc_VEC"] = error_between(interps["VEC"], uh, eps).energy
    first = interps["GL"] if "GL" in interps else interps["VEC"]
    rep = error_vs_exact(first, u, eps)
    row["err_L2_interp"] = rep.l2
    row["err_E_interp"] = rep.energy
    return row


def _interp_rows(cfg: StudyConfig, N: int, eps: float, prob) -> list[dict]:
    mesh = build_mesh_2d(N, cfg.sigma, eps, prob.beta1, prob.beta2, cfg.force)
    space = FeSpace(mesh, cfg.p)
    kinds = ["GL", "VEC"] if cfg.interpolant == "both" else [cfg.interpolant]
    rows = []
    for kind in kinds:
        if kind == "GL":
            Ju = interp.gl_interpolate(prob.exact, space)
        else:
            Ju = interp.vec_interpolate(prob.exact, space)
        rep = error_vs_exact(Ju, prob.exact, eps)
        rows.append({"p": cfg.p, "N": N, "eps": eps, "interpolant": kind,
                     "err_L2_interp": rep.l2, "err_E_interp": rep.energy})
    return rows


def _identity_rows(cfg: StudyConfig) -> list[dict]:
    rows = []
    eps = cfg.eps_list[0]
    for N in cfg.N_list:
        mesh = build_mesh_2d(N, cfg.sigma, eps, 2.0, 3.0, True)
        sp, sp1 = FeSpace(mesh, cfg.p), FeSpace(mesh, cfg.p + 1)
        for name, g in IDENTITY_FUNCTIONS.items():
            d = interp.identity_discrepancy(g, sp, sp1)
            rows.append({"p": cfg.p, "N": N, "function": name, "max_coeff_diff": d,
                         "status": "ok" if d < 1e-11 else "failed: identity"})
    return rows


def hier1d_row(p: int, N: int, eps: float, sigma: float, rng, n_random: int = 10,
               force: bool = False) -> dict:
    prob = make_problem_1d(eps)
    mesh = build_mesh_1d(N, sigma, eps, prob.beta, force)
    space = FeSpace1D(mesh, p)
    basis = hier1d.HierBasis(mesh, p)
    S = CosFactor()
    ratios = []
    worst_rt = 0.0
    v = None
    for _ in range(n_random):
        v = hier1d.random_coarse_function(space, mesh.lam, rng)
        ratios.append(hier1d.verify_convective_bound(S, v, basis, prob))
        rt = hier1d.reconstruct(hier1d.decompose(v, basis), basis)
        worst_rt = max(worst_rt, float(np.max(np.abs(rt.coeffs - v.coeffs))))
    diag = hier1d.convective_diagnostics(S, v, basis, prob)
    sup = hier1d.convective_dual_norm(S, space, prob) / N ** -(p + 0.25)
    return {"p": p, "N": N, "eps": eps, "roundtrip_err": worst_rt,
            "ratio_random_max": max(ratios), "ratio_random_min": min(ratios),
            "ratio_sup": sup, "total": diag["total"], "I": diag["I"],
            "II_III": diag["II_III"], "IV": diag["IV"], "parity": diag["parity"],
            "status": "ok"}


def run_study(cfg: StudyConfig) -> list[dict]:
    """Run the configured study; failures mark the row and the run continues."""
    cfg.validate()
    rows: list[dict] = []
    if cfg.mode == "identity-checks":
        return _identity_rows(cfg)
    if cfg.mode == "hier1d-checks":
        rng = np.random.default_rng(cfg.seed)
        for eps in cfg.eps_list:
            for N in cfg.N_list:
                try:
                    rows.append(hier1d_row(cfg.p, N, eps, cfg.sigma, rng, force=cfg.force))
                except (MeshError, galerkin.NumericalFailure, np.linalg.LinAlgError) as exc:
                    rows.append({"p": cfg.p, "N": N, "eps": eps, "status": f"failed: {exc}"})
        return rows
    for eps in cfg.eps_list:
        prob = make_manufactured_problem(eps, cfg.p)
        for N in cfg.N_list:
            log.info("p=%d N=%d eps=%g", cfg.p, N, eps)
            try:
                if cfg.mode == "galerkin-superclose":
                    new = [_galerkin_row(cfg, N, eps, prob)]
                else:
                    new = _interp_rows(cfg, N, eps, prob)
                for r in new:
                    r["status"] = "ok"
            except (MeshError, galerkin.NumericalFailure, np.linalg.LinAlgError) as exc:
                new = [{"p": cfg.p, "N": N, "eps": eps, "interpolant": cfg.interpolant,
                        "status": f"failed: {exc}"}]
            rows.extend(new)
    _add_rates([r for r in rows if r["status"] == "ok"])
    if cfg.mode == "interp-rates":
        rows.sort(key=lambda r: (cfg.eps_list.index(r["eps"]), r["interpolant"], r["N"]))
    return rows


def columns_for(mode: str) -> list[str]:
    return {"identity-checks": IDENTITY_COLUMNS,
            "hier1d-checks": HIER1D_COLUMNS}.get(mode, STUDY_COLUMNS)


def format_table(rows: list[dict], fmt: str = "csv", columns=None) -> str:
    if not rows:
        raise ValueError("no rows to emit")
    columns = list(columns or STUDY_COLUMNS)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(columns) + " |",
                 "|" + "|".join("---" for _ in columns) + "|"]
        for r in rows:
            lines.append("| " + " | ".join(_fmt(r.get(c)) for c in columns) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_table(rows: list[dict], fmt: str = "csv", path=None, columns=None) -> None:
    text = format_table(rows, fmt, columns)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def config_from_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def with_overrides(cfg: StudyConfig, **kw) -> StudyConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
