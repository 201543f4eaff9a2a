"""Command line: canonical, build, verify, factor and willmore-demo.

Exit status is 0 when every check passes, 1 when a check fails and 2 on
parse or configuration errors.  Numbers are printed with 15 significant
digits.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import willmore as W
from .dpw import Grid, build_frame, cartan_embed, extended_solution, validate_potential
from .errors import DPWError, ParseError
from .factor import birkhoff, iwasawa
from .fileio import fmt, fmt_complex, read_frames, read_loop, read_potential, write_frames
from .laurent import circle_points, lmul
from .liectx import check_twisted, loop_real_residual, orthogonal, special_unitary, willmore_context
from .roots import cartan_data, enumerate_canonical, u0_dims
from .verify import VerificationReport, full_report, twisting_report, uniton_number

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2


class ConfigError(Exception):
    pass


def _emit(line="", out=None):
    print(line, file=out or sys.stdout)


def _parse_tols(items):
    """--tol VALUE sets the default; --tol NAME=VALUE targets one check."""
    default, named = None, {}
    for item in items or []:
        try:
            if "=" in item:
                k, v = item.split("=", 1)
                named[k.strip()] = float(v)
            else:
                default = float(item)
        except ValueError:
            raise ConfigError(f"bad --tol value {item!r}") from None
    return default, named


def _apply_tols(rep: VerificationReport, tols):
    default, named = tols
    for name, c in rep.checks.items():
        if name in named:
            c.tol = named[name]
        elif default is not None:
            c.tol = default
    unknown = set(named) - set(rep.checks)
    if unknown:
        rep.notes.append("unused --tol names: " + ", ".join(sorted(unknown)))
    return rep


def _lambdas(text):
    if text is None:
        return None
    try:
        deg = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad --lambda list {text!r}") from None
    if not deg:
        raise ConfigError("--lambda list is empty")
    return deg


def _center(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"bad --grid-center {text!r}") from None


def _grid(args, default=(0j, 1.0, 0.05)):
    c, r, h = default
    if args.grid_center is not None:
        c = _center(args.grid_center)
    if args.grid_radius is not None:
        r = args.grid_radius
    if args.grid_spacing is not None:
        h = args.grid_spacing
    if r <= 0 or h <= 0:
        raise ConfigError("grid radius and spacing must be positive")
    return c, r, h


def _header(out, **items):
    for k, v in items.items():
        _emit(f"# {k} = {v}", out)


# ---------------------------------------------------------------------------
# canonical


def _context_from(group, dim, signature=None):
    if group == "so":
        return orthogonal(dim, signature=signature)
    if group in ("su", "sl"):
        return special_unitary(dim, signature=signature or (0, dim))
    raise ConfigError(f"unknown group {group!r} (so or su)")


def cmd_canonical(args):
    ctx = _context_from(args.group, args.dim)
    cd = cartan_data(ctx)
    _emit(f"# group = {ctx.name}")
    _emit(f"# rank = {cd.rank}")
    _emit(f"# dual_check = {fmt(cd.dual_check())}")
    _emit("index_set\theight\tgrade_dims\tdim_u0\tdim_u0_T")
    for ce in enumerate_canonical(cd):
        dims = ce.dims()
        gd = ",".join(f"{j}:{dims[j]}" for j in sorted(dims))
        u, ut = u0_dims(ce)
        idx = "{" + ",".join(str(i) for i in ce.index_set) + "}"
        _emit(f"{idx}\t{ce.height}\t{gd}\t{u}\t{ut}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# build


def _write_map_csv(path, F, lam_deg):
    cart = cartan_embed(F)
    n = F.ctx.n
    with open(path, "w") as fh:
        fh.write("# harmonic map samples F h F^-1 at the listed lambda arguments\n")
        cols = ["z_re", "z_im", "lambda_arg_deg"] + [f"m{i + 1}{j + 1}_{p}" for i in range(n)
                                                      for j in range(n) for p in ("re", "im")]
        fh.write(",".join(cols) + "\n")
        for k, z in enumerate(F.points):
            G = cart.maps[k]
            if G is None:
                continue
            for d in lam_deg:
                M = G(np.exp(1j * np.deg2rad(d)))
                vals = [fmt(z.real), fmt(z.imag), fmt(d)]
                vals += [fmt(v) for x in M.ravel() for v in (x.real, x.imag)]
                fh.write(",".join(vals) + "\n")
    return cart


def cmd_build(args):
    pf = read_potential(args.potential)
    p = pf.spec
    center, radius, spacing = _grid(args, pf.grid)
    lam_deg = _lambdas(args.__dict__.get("lambda")) or pf.lambdas_deg
    tols = _parse_tols(args.tol)
    rep0 = validate_potential(p)
    grid = Grid.disc(center, radius, spacing)
    which = ["compact", "noncompact"] if args.which == "both" else [args.which]
    if args.which == "both" and p.ctx.is_compact and p.ctx.other_h is None:
        which = ["compact"]
        _emit(f"# {p.ctx.name} is compact with no recorded non-compact partner: compact build only")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    report = VerificationReport()
    fields = {}
    _header(None, potential=args.potential, group=p.ctx.name, points=len(grid),
            grid=f"center {fmt_complex(center)} radius {fmt(radius)} spacing {fmt(spacing)}",
            nilpotency_index=rep0.nilpotency_index)
    for w in which:
        try:
            F = build_frame(p, grid, w, trunc=args.trunc)
        except DPWError as exc:
            raise ConfigError(f"{w} build: {exc}") from None
        fields[w] = F
        r = twisting_report(F)
        cart = cartan_embed(F)
        r.add("cartan.involution", cart.involution_residual, None, 1e-9)
        r.add("cartan.basepoint_h", 0.0 if cart.basepoint_exact else 1.0, None, 0.5)
        lo, hi = p.window()
        over = max((Fm.outside_norm(lo, hi) for Fm in F.minus if Fm is not None), default=0.0)
        r.add("minus.degree_bound", over, None, 1e-11)
        r.values[f"failed_points"] = len(F.failures)
        report.merge(_prefix(r, w + "."))
        if args.out:
            with open(os.path.join(args.out, f"frames_{w}.txt"), "w") as fh:
                fh.write(write_frames(F, pf.index_set, [f"potential {args.potential}"]))
            _write_map_csv(os.path.join(args.out, f"map_{w}.csv"), F, lam_deg)
    if len(fields) == 2:
        a, b = fields["compact"], fields["noncompact"]
        worst = 0.0
        for fa, fb in zip(a.frames, b.frames):
            if fa is not None and fb is not None:
                ma = birkhoff(fa, a.ctx).minus
                mb = birkhoff(fb, b.ctx).minus
                worst = max(worst, ma.distance(mb))
        report.add("duality.minus_agreement", worst, None, 1e-10)
    _apply_tols(report, tols)
    for name in sorted(report.checks):
        c = report.checks[name]
        _emit(f"# tol {name} = {fmt(c.tol)}")
    for line in report.kv_lines():
        _emit(line)
    return EXIT_OK if report.passed else EXIT_FAIL


def _prefix(rep, pre):
    out = VerificationReport(notes=list(rep.notes))
    for k, v in rep.checks.items():
        out.checks[pre + k] = v
    for k, v in rep.values.items():
        out.values[pre + k] = v
    return out


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args):
    with open(args.frames) as fh:
        F, index_set = read_frames(fh.read(), args.frames)
    tols = _parse_tols(args.tol)
    lam_deg = _lambdas(args.__dict__.get("lambda"))
    lam = None if lam_deg is None else np.exp(1j * np.deg2rad(lam_deg))
    xi = None
    if index_set:
        from .fileio import _ce_for
        base = F.ctx
        xi = _ce_for(base, index_set).xi
    rep = full_report(F, xi, lam)
    _apply_tols(rep, tols)
    _emit(f"# frames = {args.frames}")
    _emit(f"# group = {F.ctx.name}")
    _emit(f"# points = {len(F.grid)}  failed = {len(F.failures)}")
    for name in sorted(rep.checks):
        _emit(f"# tol {name} = {fmt(rep.checks[name].tol)}")
    _emit(rep.text())
    _emit("")
    for line in rep.kv_lines():
        _emit(line)
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# factor


def _print_loop(name, g):
    _emit(f"{name} support {g.kmin} {g.kmax}")
    for k in range(g.kmin, g.kmax + 1):
        _emit(f"{name} coeff {k}")
        for row in g.coeff(k):
            _emit("  " + " ".join(fmt_complex(v) for v in row))


def cmd_factor(args):
    if args.loop:
        ctx, g = read_loop(args.loop)
        source = args.loop
    else:
        from .randloops import random_minus, random_plus
        ctx = willmore_context()
        rng = np.random.default_rng(args.seed)
        ce = W.example_canonical(ctx)
        g = lmul(random_minus(ce, rng, 0.4), random_plus(ce, rng, 0.4))
        source = f"random twisted loop minus * plus in {ctx.name}, seed {args.seed}"
    tols = _parse_tols(args.tol)
    tol = tols[0] if tols[0] is not None else 1e-9
    lam = circle_points(64, 0.05)
    rep = VerificationReport()
    _emit(f"# loop = {source}")
    _emit(f"# group = {ctx.name}")
    _emit(f"# input support = {g.kmin} {g.kmax}")
    _emit(f"# input twisting residual = {fmt(check_twisted(g, ctx))}")
    modes = ["birkhoff", "iwasawa"] if args.mode == "both" else [args.mode]
    for mode in modes:
        try:
            if mode == "birkhoff":
                res = birkhoff(g, ctx, trunc=args.trunc)
                a, b = res.minus, res.plus
                if args.print_factors:
                    _print_loop("minus", a)
                    _print_loop("plus", b)
            else:
                res = iwasawa(g, ctx, trunc=args.trunc)
                a, b = res.unitary, res.plus
                rep.add("iwasawa.reality", loop_real_residual(a, ctx), None, tol)
                if args.print_factors:
                    _print_loop("unitary", a)
                    _print_loop("plus", b)
        except DPWError as exc:
            _emit(f"{mode}.error={type(exc).__name__}: {exc}")
            rep.add(f"{mode}.split", 1.0, None, 0.5)
            continue
        recon = float(np.abs(lmul(a, b)(lam) - g(lam)).max())
        rep.add(f"{mode}.reconstruction", recon, None, tol)
        rep.add(f"{mode}.twisting", max(check_twisted(a, ctx), check_twisted(b, ctx)), None, tol)
        if hasattr(res, "trunc"):
            rep.values[f"{mode}.trunc"] = res.trunc
    _apply_tols(rep, (None, tols[1]))
    for name in sorted(rep.checks):
        _emit(f"# tol {name} = {fmt(rep.checks[name].tol)}")
    for line in rep.kv_lines():
        _emit(line)
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# willmore demo


def _write_surface_csv(path, grid, lam_deg, tol_lines):
    with open(path, "w") as fh:
        for t in tol_lines:
            fh.write(f"# {t}\n")
        fh.write("z_re,z_im,lambda_arg_deg," + ",".join(f"x{i}" for i in range(1, 8)) + "\n")
        for z in grid.points:
            for d in lam_deg:
                x = W.closed_form_x(z, np.exp(1j * np.deg2rad(d))).x
                fh.write(",".join([fmt(z.real), fmt(z.imag), fmt(d)] + [fmt(v) for v in x]) + "\n")


def _write_obj(path, grid, proj):
    table = grid.lookup()
    pts = grid.points
    with open(path, "w") as fh:
        fh.write(f"# lambda = 1 surface image, projection onto x{proj[0]}, x{proj[1]}, x{proj[2]}\n")
        for z in pts:
            x = W.closed_form_x(z, 1.0).x
            fh.write("v " + " ".join(fmt(x[i - 1]) for i in proj) + "\n")
        for k in range(len(grid)):
            a = k
            b = grid.neighbour(k, 1, 0, table)
            c = grid.neighbour(k, 1, 1, table)
            d = grid.neighbour(k, 0, 1, table)
            if None in (b, c, d):
                continue
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
            fh.write(f"f {a + 1} {c + 1} {d + 1}\n")


def cmd_willmore_demo(args):
    center, radius, spacing = _grid(args)
    lam_deg = _lambdas(args.__dict__.get("lambda")) or [0.0, 90.0, 180.0]
    tols = _parse_tols(args.tol)
    dev_tol = tols[1].get("max_plane_deviation", tols[0] if tols[0] is not None else 1e-5)
    proj = tuple(int(t) for t in args.projection.split(","))
    if len(proj) != 3 or not all(1 <= i <= 7 for i in proj):
        raise ConfigError("--projection takes three indices in 1..7")
    p = W.example_potential()
    grid = Grid.disc(center, radius, spacing)
    F = build_frame(p, grid, "noncompact", trunc=args.trunc)
    lams = np.exp(1j * np.deg2rad(lam_deg))
    dev, where = W.compare_pipeline_vs_oracle(F, lams)
    phi = extended_solution(F, p.ce.xi)
    r = uniton_number(phi, F.ctx)
    tol_lines = [f"tol max_plane_deviation = {fmt(dev_tol)}",
                 f"grid center {fmt_complex(center)} radius {fmt(radius)} spacing {fmt(spacing)}",
                 "lambda_deg " + " ".join(fmt(d) for d in lam_deg)]
    for t in tol_lines:
        _emit("# " + t)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_surface_csv(os.path.join(args.out, "surface.csv"), grid, lam_deg, tol_lines)
        if args.obj:
            _write_obj(os.path.join(args.out, "surface.obj"), grid, proj)
    _emit(f"points={len(grid)}")
    _emit(f"iwasawa_boundary_points={len(F.failures)}")
    _emit(f"uniton_number={r}")
    _emit(f"max_plane_deviation={fmt(dev)}")
    if where is not None:
        k, lam = where
        z = grid.points[k]
        _emit(f"max_plane_deviation.at=z={fmt_complex(z)} lambda={fmt_complex(lam)}")
    ok = dev < dev_tol and r == 2
    if ok:
        _emit(f"max_plane_deviation < {fmt(dev_tol)}")
    else:
        _emit(f"FAILED: max_plane_deviation = {fmt(dev)}, uniton_number = {r}")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------


def _common(sp, grid=False, lam=False):
    sp.add_argument("--tol", action="append", metavar="[NAME=]VALUE",
                    help="tolerance override (repeatable)")
    sp.add_argument("--trunc", type=int, default=None, help="Toeplitz truncation for the splits")
    sp.add_argument("--seed", type=int, default=0, help="random seed")
    sp.add_argument("--out", default=None, help="output directory")
    if grid:
        sp.add_argument("--grid-center", default=None)
        sp.add_argument("--grid-radius", type=float, default=None)
        sp.add_argument("--grid-spacing", type=float, default=None)
    if lam:
        sp.add_argument("--lambda", default=None, help="comma list of lambda arguments in degrees")


def build_parser():
    ap = argparse.ArgumentParser(prog="dpwloop", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("canonical", help="table of canonical elements")
    sp.add_argument("group", choices=["so", "su"])
    sp.add_argument("dim", type=int)
    sp.set_defaults(func=cmd_canonical)

    sp = sub.add_parser("build", help="frame fields from a potential file")
    sp.add_argument("potential")
    sp.add_argument("--which", choices=["compact", "noncompact", "both"], default="both")
    _common(sp, grid=True, lam=True)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("verify", help="check a saved frame field")
    sp.add_argument("frames")
    _common(sp, lam=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("factor", help="Birkhoff and Iwasawa splits of a loop")
    sp.add_argument("loop", nargs="?", default=None,
                    help="loop file (omitted: a random minus*plus loop from --seed)")
    sp.add_argument("--mode", choices=["birkhoff", "iwasawa", "both"], default="both")
    sp.add_argument("--print-factors", action="store_true")
    _common(sp)
    sp.set_defaults(func=cmd_factor)

    sp = sub.add_parser("willmore-demo", help="pipeline against the closed-form Willmore sphere")
    sp.add_argument("--obj", action="store_true", help="also write a triangulated OBJ mesh")
    sp.add_argument("--projection", default="2,3,4", help="three coordinates of x for the OBJ")
    _common(sp, grid=True, lam=True)
    sp.set_defaults(func=cmd_willmore_demo)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DPWError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
