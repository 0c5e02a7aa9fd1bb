"""Command line entry point: ``layerfem <subcommand> [options]``.

Exit status is 0 on success, 1 for configuration errors and 2 when a
numerical step failed (the remaining rows are still written).
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import galerkin
from .mesh import MeshError, build_mesh_1d, build_mesh_2d, dump_mesh_csv
from .study import (ConfigError, StudyConfig, columns_for, config_from_file,
                    emit_table, run_study)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

_SUBCOMMAND_MODE = {
    "study": "galerkin-superclose",
    "interp": "interp-rates",
    "hier1d": "hier1d-checks",
    "identity": "identity-checks",
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


_CONVERT = {
    "p": int, "N": _int_list, "eps": _float_list, "sigma": float, "problem": str,
    "interpolant": str, "format": str, "out": str, "force": _bool,
    "quad_order": int, "dump_matrix": str, "seed": int,
}


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--p", type=str, help="polynomial degree (odd)")
    sp.add_argument("--N", type=str, help="comma separated mesh sizes, e.g. 8,16,32")
    sp.add_argument("--eps", type=str, help="comma separated diffusion values")
    sp.add_argument("--sigma", type=str, help="transition parameter (default p+1.5)")
    sp.add_argument("--problem", type=str, help="layer2d or layer1d")
    sp.add_argument("--interpolant", type=str, help="GL, VEC or both")
    sp.add_argument("--format", type=str, help="csv or markdown")
    sp.add_argument("--out", type=str, help="output file (default stdout)")
    sp.add_argument("--force", action="store_const", const="true", default=None,
                    help="allow sigma < p+1.5, even p and inadmissible eps")
    sp.add_argument("--quad-order", dest="quad_order", type=str,
                    help="Gauss points per direction for assembly")
    sp.add_argument("--config", type=str, help="key=value file; flags take precedence")
    sp.add_argument("--seed", type=str, help="random seed for hier1d samples")
    sp.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="layerfem",
                                 description="Shishkin-mesh FEM convergence studies")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "study": "Galerkin solve with supercloseness errors and rates",
        "interp": "interpolation errors for GL and vertex-edge-cell operators",
        "hier1d": "one-dimensional hierarchical basis and convective term checks",
        "identity": "check pi_p = I_p pi_{p+1} on smooth functions",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        _add_common(sp)
        if name == "study":
            sp.add_argument("--dump-matrix", dest="dump_matrix", type=str,
                            help="directory for MatrixMarket band dumps")
    md = sub.add_parser("mesh-dump", help="write Shishkin mesh nodes as CSV")
    _add_common(md)
    md.add_argument("--dim", type=int, choices=(1, 2), default=2)
    return ap


def _merge(args: argparse.Namespace) -> dict:
    """Defaults < config file < command line flags."""
    raw: dict = {}
    if args.config:
        raw.update(config_from_file(args.config))
    for key in _CONVERT:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    out = {}
    for key, val in raw.items():
        if key not in _CONVERT:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[key] = _CONVERT[key](val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return out


def _make_config(mode: str, opts: dict) -> StudyConfig:
    kw = {"mode": mode}
    rename = {"N": "N_list", "eps": "eps_list", "format": "fmt"}
    for key, val in opts.items():
        kw[rename.get(key, key)] = val
    if mode == "hier1d-checks":
        kw.setdefault("problem", "layer1d")
    return StudyConfig(**kw)


def _mesh_dump(opts: dict, dim: int) -> int:
    p = opts.get("p", 3)
    sigma = opts.get("sigma", p + 1.5)
    Ns = opts.get("N", [16])
    if len(Ns) != 1:
        raise ConfigError("mesh-dump takes a single N")
    eps = opts.get("eps", [1e-6])[0]
    if sigma < p + 1.5 and not opts.get("force", False):
        raise ConfigError(f"sigma={sigma:g} < p+3/2; use --force to override")
    force = opts.get("force", False)
    if dim == 1:
        mesh = build_mesh_1d(Ns[0], sigma, eps, 2.0, force)
    else:
        mesh = build_mesh_2d(Ns[0], sigma, eps, 2.0, 3.0, force)
    dump_mesh_csv(mesh, opts.get("out") or sys.stdout)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = _merge(args)
        if args.command == "mesh-dump":
            return _mesh_dump(opts, args.dim)
        cfg = _make_config(_SUBCOMMAND_MODE[args.command], opts)
        rows = run_study(cfg)
    except (ConfigError, MeshError, OSError) as exc:
        print(f"layerfem: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except galerkin.NumericalFailure as exc:
        print(f"layerfem: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        emit_table(rows, cfg.fmt, cfg.out, columns_for(cfg.mode))
    except OSError as exc:
        print(f"layerfem: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failed = [r for r in rows if str(r.get("status", "ok")) != "ok"]
    for r in failed:
        print(f"layerfem: row N={r.get('N')} {r['status']}", file=sys.stderr)
    return EXIT_NUMERIC if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
