"""Command line interface: ``stentnet solve|verify|kernel|single-rod <file>``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from .analysis import (assemble_block_saddle, discrete_infsup_constant, ellipticity_constant,
                       poincare_constant, pseudo_inverse, rigid_basis, single_rod_matrix)
from .fem import DofMap, Mesh, StentState, assemble_system, h1_norm_matrix, multiplier_mass_matrix
from .graph import class_s_check, numerical_rank
from .io import DEFAULT_SAMPLES, ResultBundle, StentFileError, atomic_write, fmt, format_value, load_stent
from .solver import (DEFAULT_TOL, SolverError, ToleranceNotMet, solve_mixed, solve_single_rod,
                     strong_residual)

EXIT_OK = 0
EXIT_TOLERANCE = 2
EXIT_VALIDATION = 3

log = logging.getLogger("stentnet")


def _thread_limit():
    n = os.environ.get("STENTNET_THREADS")
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=max(1, int(n)))


def _emit(lines, out: Path | None, name: str):
    text = "".join(lines)
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out / name, text)
        print(f"wrote {out / name}")


def _meshes(args):
    return [args.mesh * 2**k for k in range(max(1, args.refine))]


def _solve_one(g, loads, m, tol, clamped=False):
    mesh = Mesh.uniform(g, m)
    sys_ = assemble_system(g, mesh, DofMap(g, mesh, clamped=clamped), f=loads)
    rep = (solve_single_rod if clamped else solve_mixed)(sys_, tol)
    return mesh, rep


def _residual_meta(rep, res):
    return {"branch": rep.branch, "condition": rep.condition,
            "primal_residual": rep.primal_rel, "constraint_residual": rep.constraint_rel,
            "strong_inextensibility": float(np.sqrt(np.sum(res.constraint**2))),
            "strong_force": float(np.sqrt(np.sum(res.force**2))),
            "strong_moment": float(np.sqrt(np.sum(res.moment**2)))}


def cmd_solve(args) -> int:
    g, loads = load_stent(args.file)
    out = Path(args.out)
    rows = ["m\tprimal_residual\tconstraint_residual\tinextensibility\n"]
    status = EXIT_OK
    for m in _meshes(args):
        try:
            mesh, rep = _solve_one(g, loads, m, args.tol)
        except ToleranceNotMet as exc:
            print(f"mesh {m}: {exc}", file=sys.stderr)
            rep, status = exc.report, EXIT_TOLERANCE
            mesh = rep.state.mesh
        res = strong_residual(g, mesh, rep.state, loads)
        meta = {"mesh": m, **_residual_meta(rep, res)}
        rows.append(f"{m}\t{fmt(rep.primal_rel)}\t{fmt(rep.constraint_rel)}\t"
                    f"{fmt(meta['strong_inextensibility'])}\n")
        ResultBundle.from_state(rep.state, args.samples, meta).write(out, f"m{m}_")
    _emit(rows, out, "refinement.tsv")
    sys.stdout.write("".join(rows))
    return status


def cmd_verify(args) -> int:
    g, _ = load_stent(args.file)
    cs = class_s_check(g)
    lines = [f"class_S = {format_value(cs.in_class_S)}\n", f"kernel_dim = {cs.kernel_dim}\n"]
    bs = assemble_block_saddle(g)
    Hp = pseudo_inverse(bs.HH)
    lines.append(f"block_symmetry_defect = {fmt(bs.symmetry_defect())}\n")
    lines.append(f"hplus_norm = {fmt(np.linalg.norm(Hp, 2))}\n")
    for m in _meshes(args):
        mesh = Mesh.uniform(g, m)
        sys_ = assemble_system(g, mesh)
        X = h1_norm_matrix(g, mesh, sys_.dofs)
        b = discrete_infsup_constant(sys_.B, X, multiplier_mass_matrix(sys_.dofs))
        lines.append(f"mesh_{m}.beta_h = {fmt(b.beta_h)}\n")
        lines.append(f"mesh_{m}.dual_nullspace_dim = {b.dual_nullspace_dim}\n")
        lines.append(f"mesh_{m}.poincare = {fmt(poincare_constant(g, mesh, sys_.dofs))}\n")
        lines.append(f"mesh_{m}.ellipticity = {fmt(ellipticity_constant(sys_, X))}\n")
    sys.stdout.write("".join(lines))
    return EXIT_OK


def cmd_kernel(args) -> int:
    g, _ = load_stent(args.file)
    lines = ["mode\tedge_id\ts\ty1\ty2\ty3\ttheta1\ttheta2\ttheta3\n"]
    for k, r in enumerate(rigid_basis()):
        for i, e in enumerate(g.edges):
            s = np.linspace(0.0, e.length, args.samples + 1)
            y = r.y(e.curve.point(s))
            th = r.theta(y)
            for q in range(len(s)):
                vals = "\t".join(fmt(v) for v in (s[q], *y[q], *th[q]))
                lines.append(f"{k}\t{e.name or i}\t{vals}\n")
    _emit(lines, Path(args.out) if args.out else None, "kernel.tsv")
    return EXIT_OK


def cmd_single_rod(args) -> int:
    g, loads = load_stent(args.file)
    if g.n_edges != 1:
        print(f"single-rod needs exactly one edge, file has {g.n_edges}", file=sys.stderr)
        return EXIT_VALIDATION
    M6 = single_rod_matrix(g.edges[0].curve)
    status = EXIT_OK
    try:
        mesh, rep = _solve_one(g, loads, args.mesh, args.tol, clamped=args.clamped)
    except ToleranceNotMet as exc:
        print(str(exc), file=sys.stderr)
        rep, status = exc.report, EXIT_TOLERANCE
    meta = {"clamped": args.clamped, "rod_matrix_rank": numerical_rank(M6),
            "branch": rep.branch, "primal_residual": rep.primal_rel,
            "constraint_residual": rep.constraint_rel}
    if rep.dual_nullspace_dim is not None:
        meta["dual_nullspace_dim"] = rep.dual_nullspace_dim
    bundle = ResultBundle.from_state(rep.state, args.samples, meta)
    if args.out:
        bundle.write(Path(args.out))
    sys.stdout.write(bundle.summary())
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stentnet", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q, refine=True):
        q.add_argument("file")
        q.add_argument("--mesh", type=int, default=4, help="elements per edge (default 4)")
        if refine:
            q.add_argument("--refine", type=int, default=1,
                           help="number of meshes, doubling each time (default 1)")

    s = sub.add_parser("solve", help="solve the equilibrium problem and export fields")
    common(s)
    s.add_argument("--out", default="stentnet_out")
    s.add_argument("--tol", type=float, default=DEFAULT_TOL)
    s.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="samples per element")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="class-S test and stability constants")
    common(v)
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("kernel", help="the six rigid-motion fields")
    k.add_argument("file")
    k.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="samples per edge")
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_kernel)

    r = sub.add_parser("single-rod", help="solve a one-edge file, optionally clamped")
    common(r, refine=False)
    r.add_argument("--clamped", action="store_true")
    r.add_argument("--out", default=None)
    r.add_argument("--tol", type=float, default=DEFAULT_TOL)
    r.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    r.set_defaults(func=cmd_single_rod)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    for name in ("mesh", "refine", "samples"):
        if getattr(args, name, 1) < 1:
            print(f"--{name} must be positive", file=sys.stderr)
            return EXIT_VALIDATION
    try:
        with _thread_limit():
            return args.func(args)
    except StentFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
