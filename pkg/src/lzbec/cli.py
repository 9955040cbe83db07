"""Command-line front end.  Every subcommand writes CSV with a one-line header.

Exit codes: 0 success, 2 usage or parameter error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import formula, ica, spectrum
from .integrators import IntegrationError, IntegratorConfig
from .model import ModelParams, diabatic_level, meanfield_stationary_energies
from .propagate import (DEFAULT_WINDOW_FACTOR, SweepWindow, default_jobs, integrate_manybody,
                        integrate_meanfield, run_sweep_grid)
from .special import GammaConvergenceError
from .tridiag import ConvergenceError

EXIT_USAGE = 2
EXIT_NUMERIC = 3
NUMERIC_ERRORS = (IntegrationError, ConvergenceError, GammaConvergenceError,
                  formula.QuadratureError, ArithmeticError)
FIGURES = tuple(range(1, 8))


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Shortest round-trip decimal; integers stay integers."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_csv(stream, header, rows):
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(fmt(v) for v in row) + "\n")


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit(path, header, rows):
    stream, close = _open_out(path)
    try:
        write_csv(stream, header, rows)
    finally:
        if close:
            stream.close()


# -- configuration -----------------------------------------------------------

# key -> (type, default); flag values of None mean "not given"
CONFIG_KEYS = {
    "v": (float, None),
    "g": (float, None),
    "gbar": (float, None),
    "n": (int, 1),
    "alpha": (float, None),
    "window_factor": (float, DEFAULT_WINDOW_FACTOR),
    "samples": (int, 401),
    "rel_tol": (float, IntegratorConfig.rel_tol),
    "abs_tol": (float, IntegratorConfig.abs_tol),
    "method": (str, IntegratorConfig.method),
    "kappa": (float, 1.0),
    "a": (float, spectrum.XC_FIT_CONSTANT),
    "out": (str, None),
    "format": (str, "csv"),
    "jobs": (int, None),
}


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment.  Unknown keys are rejected."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        typ = CONFIG_KEYS[key][0]
        try:
            values[key] = typ(val)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    return values


def resolve(args):
    """Effective configuration: flags over config file over defaults."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    eff = {}
    for key, (_, default) in CONFIG_KEYS.items():
        flag = getattr(args, key, None)
        eff[key] = flag if flag is not None else cfg.get(key, default)
    if eff["g"] is not None and eff["gbar"] is not None:
        if getattr(args, "g", None) is not None:
            eff["gbar"] = None
        elif getattr(args, "gbar", None) is not None:
            eff["g"] = None
        else:
            raise UsageError("config sets both g and gbar")
    if eff["jobs"] is None:
        eff["jobs"] = default_jobs()
    if eff["format"] != "csv":
        raise UsageError(f"unsupported output format {eff['format']!r}; only csv")
    return eff


def _require(eff, *keys):
    missing = [k for k in keys if eff.get(k) is None]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join("--" + k.replace("_", "-")
                                                                       for k in missing))


def make_params(eff, need_alpha=True):
    _require(eff, "v")
    if need_alpha:
        _require(eff, "alpha")
    alpha = eff["alpha"] if eff["alpha"] is not None else 1.0
    g = eff["g"] if eff["g"] is not None else (None if eff["gbar"] is not None else 0.0)
    try:
        return ModelParams.create(eff["v"], alpha, eff["n"], g=g, gbar=eff["gbar"])
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def make_integrator(eff):
    try:
        return IntegratorConfig(rel_tol=eff["rel_tol"], abs_tol=eff["abs_tol"], method=eff["method"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def make_window(params, eff):
    try:
        return SweepWindow.symmetric(params, eff["window_factor"], eff["samples"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- subcommands -------------------------------------------------------------

def cmd_sim(args):
    eff = resolve(args)
    params = make_params(eff)
    window = make_window(params, eff)
    run = integrate_meanfield if args.kind == "meanfield" else integrate_manybody
    rec = run(params, window, make_integrator(eff))
    rows = zip(rec.times, rec.epsilon, rec.n1_fraction, rec.norm)
    _emit(eff["out"], ["t", "epsilon", "n1_fraction", "norm"], rows)
    print(f"p_lz={rec.p_lz:#.12g}")
    return 0


def _eps_grid(args):
    if args.eps is not None:
        return np.array([args.eps])
    if args.eps_min is None or args.eps_max is None:
        raise UsageError("give --eps or both --eps-min and --eps-max")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.steps == 1:
        return np.array([args.eps_min])
    return np.linspace(args.eps_min, args.eps_max, args.steps)


def spectrum_rows(params, eps_grid):
    for eps in eps_grid:
        yield [eps, *spectrum.spectrum_slice(params, eps).eigenvalues]


def cmd_spectrum(args):
    eff = resolve(args)
    params = make_params(eff, need_alpha=False)
    grid = _eps_grid(args)
    header = ["epsilon"] + [f"E{k}" for k in range(params.n + 1)]
    _emit(eff["out"], header, list(spectrum_rows(params, grid)))
    return 0


def splitting_rows(params, kappa=1.0, a=spectrum.XC_FIT_CONSTANT, rule="adjacent",
                   refine_min=False, form="expanded"):
    x, w = spectrum.splitting_profile(params, refine_min, rule)
    if abs(params.g) > 2 * params.v:
        approx = spectrum.w2_supercritical(params, x, a)
    elif abs(params.g) <= 2 * params.v:
        approx = np.asarray(spectrum.w_subcritical(params, x, form)) ** 2
    else:
        approx = np.full_like(x, math.nan)
    conv = ica.GapConvention(kappa)
    for ell in range(params.n):
        b = spectrum.slope_difference(params, ell)
        yield [ell, x[ell], spectrum.crossing_time(params, ell), b, w[ell], w[ell] ** 2,
               ica.crossing_probability(w[ell], b, conv), approx[ell]]


SPLITTING_HEADER = ["ell", "x", "t_cross", "b", "w", "w2", "p", "w2_approx"]


def cmd_splittings(args):
    eff = resolve(args)
    params = make_params(eff)
    rows = splitting_rows(params, _kappa(eff), eff["a"], args.rule, args.refine_min, args.form)
    _emit(eff["out"], SPLITTING_HEADER, list(rows))
    return 0


def _kappa(eff):
    if not eff["kappa"] > 0:
        raise UsageError("--kappa must be > 0")
    return eff["kappa"]


def cmd_ica(args):
    eff = resolve(args)
    params = make_params(eff)
    try:
        res = ica.plz_ica(params, ica.GapConvention(_kappa(eff)), args.source, eff["a"],
                          args.form, args.rule, args.refine_min)
    except spectrum.RegimeError as exc:
        raise UsageError(str(exc)) from exc
    rows = [[c.ell, c.x, c.t_cross, c.b, c.w, c.p, res.s_row[c.ell]] for c in res.crossings]
    if eff["out"] is not None:
        _emit(eff["out"], ["ell", "x", "t_cross", "b", "w", "p", "s"], rows)
    print(f"s_NN={res.s_row[-1]:#.12g}")
    print(f"p_lz_ica={res.p_lz:#.12g}")
    return 0


def cmd_formula(args):
    eff = resolve(args)
    params = make_params(eff)
    try:
        inp = formula.ClosedFormInput(params.v, params.g, params.alpha, eff["a"], _kappa(eff))
        p = formula.plz_closed_form(inp, args.form)
    except (ValueError, spectrum.RegimeError) as exc:
        raise UsageError(str(exc)) from exc
    print(f"regime={inp.regime}")
    if inp.regime == "supercritical":
        print(f"x_c={spectrum.critical_index(inp, inp.a):#.12g}")
    elif abs(inp.g) == 2 * inp.v:
        # both fits are approximate at the boundary; report the other one too
        print(f"p_lz_supercritical={formula.plz_supercritical(inp, strict=False):#.12g}")
    print(f"p_lz_formula={p:#.12g}")
    return 0


# -- figures -----------------------------------------------------------------

def _alpha_grid(args, lo=0.01, hi=1.0):
    lo = args.alpha_min if args.alpha_min is not None else lo
    hi = args.alpha_max if args.alpha_max is not None else hi
    pts = args.points if args.points is not None else 9
    if not 0 < lo <= hi or pts < 1:
        raise UsageError("need 0 < alpha-min <= alpha-max and points >= 1")
    return np.geomspace(lo, hi, pts) if pts > 1 else np.array([lo])


class FigureWriter:
    def __init__(self, out_dir, fig_id, eff):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.fig_id = fig_id
        self.eff = eff
        self.series = []

    def series_csv(self, name, header, rows, params, source):
        fname = f"fig{self.fig_id}_{name}.csv"
        with open(self.dir / fname, "w", newline="") as fh:
            write_csv(fh, header, rows)
        self.series.append({"name": name, "file": fname, "parameters": params, "source": source})

    def close(self, notes=None):
        from . import __version__

        manifest = {"figure": self.fig_id, "version": __version__, "series": self.series,
                    "effective_config": self.eff}
        if notes:
            manifest["notes"] = notes
        with open(self.dir / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")


def _sweep_series(fw, name, params, axis, values, eff, kinds, extra_cols=None):
    pts = run_sweep_grid(params, axis, values, eff["window_factor"], make_integrator(eff),
                         jobs=eff["jobs"], kinds=kinds)
    rows, failed = [], []
    for pt in pts:
        row = [pt.value]
        if "meanfield" in kinds:
            row.append(pt.p_lz_mf)
        if "manybody" in kinds:
            row.append(pt.p_lz_mp)
        rows.append(row)
        if not pt.ok:
            failed.append({"value": pt.value, "error": pt.error})
    header = [axis] + [{"meanfield": "p_lz_mf", "manybody": "p_lz_mp"}[k] for k in kinds]
    pars = _pdict(params)
    pars[axis] = [float(v) for v in values]
    fw.series_csv(name, header, rows, pars, f"numeric propagation over {axis}")
    return failed


def _pdict(params, **extra):
    d = {"v": params.v, "g": params.g, "n": params.n, "alpha": params.alpha}
    d.update(extra)
    return d


def figure_1(fw, args, eff):
    params = ModelParams(v=0.2, alpha=1.0, n=args.n or 20, g=-1.0)
    grid = np.linspace(-1.0, 1.0, args.points or 201)
    mf_rows = []
    for eps in grid:
        levels = meanfield_stationary_energies(params, eps)
        mf_rows.append([eps, *levels, *([math.nan] * (4 - len(levels)))])
    fw.series_csv("meanfield_levels", ["epsilon", "E0", "E1", "E2", "E3"], mf_rows,
                  _pdict(params), "stationary mean-field total energies (nan: branch absent)")
    fw.series_csv("manybody_levels", ["epsilon"] + [f"E{k}" for k in range(params.n + 1)],
                  [[r[0], *(np.asarray(r[1:]) / params.n)] for r in spectrum_rows(params, grid)],
                  _pdict(params), "many-body eigenvalues divided by N")


def figure_2(fw, args, eff):
    params = ModelParams(v=0.2, alpha=eff["alpha"] or 0.1, n=3, g=-1.0)
    tc = [spectrum.crossing_time(params, ell) for ell in range(params.n)]
    ts = np.linspace(min(tc) - 5, max(tc) + 5, args.points or 201)
    rows = [[t] + [diabatic_level(params, k, t) for k in range(params.n + 1)] for t in ts]
    fw.series_csv("diabatic_levels", ["t"] + [f"h{k}" for k in range(params.n + 1)], rows,
                  _pdict(params), "diabatic energies")
    res = ica.plz_ica(params, ica.GapConvention(_kappa(eff)))
    fw.series_csv("s_row", ["k", "s"], list(enumerate(res.s_row)), _pdict(params, kappa=eff["kappa"]),
                  "ICA S-matrix row from exact splittings")


def figure_3(fw, args, eff):
    alphas = _alpha_grid(args)
    notes = {}
    for g in (-0.1, -1.0, -2.0):
        params = ModelParams(v=0.2, alpha=1.0, n=args.n or 100, g=g)
        tag = f"g{g:g}"
        failed = _sweep_series(fw, f"numeric_{tag}", params, "alpha", alphas, eff,
                               ("meanfield", "manybody"))
        if failed:
            notes[tag] = failed
        conv = ica.GapConvention(_kappa(eff))
        ica_rows, cf_rows = [], []
        for al in alphas:
            p = params.replace(alpha=float(al))
            ica_rows.append([al, ica.plz_ica(p, conv).p_lz])
            inp = formula.ClosedFormInput(p.v, p.g, p.alpha, eff["a"], eff["kappa"])
            cf_rows.append([al, formula.plz_closed_form(inp)])
        pars = _pdict(params, alpha=[float(al) for al in alphas], kappa=eff["kappa"])
        fw.series_csv(f"ica_{tag}", ["alpha", "p_lz_ica"], ica_rows, pars,
                      "ICA with exact splittings")
        fw.series_csv(f"formula_{tag}", ["alpha", "p_lz_formula"], cf_rows, dict(pars, a=eff["a"]),
                      "closed form")
    return notes


def figure_4(fw, args, eff):
    for g in (-0.1, -2.0):
        params = ModelParams(v=0.2, alpha=1.0, n=args.n or 50, g=g)
        ev = spectrum.spectrum_slice(params, 0.0).eigenvalues
        rows = [[k, e] for k, e in enumerate(ev)]
        fw.series_csv(f"spectrum_g{g:g}", ["index", "E"], rows, _pdict(params, epsilon=0.0),
                      "many-body eigenvalues at epsilon = 0")


def figure_5(fw, args, eff):
    for g in (-0.1, -1.0):
        params = ModelParams(v=0.2, alpha=1.0, n=args.n or 100, g=g)
        rows = list(splitting_rows(params, _kappa(eff), eff["a"]))
        fw.series_csv(f"w2_g{g:g}", SPLITTING_HEADER, rows, _pdict(params, a=eff["a"]),
                      "exact splittings with the analytic profile")


def figure_6(fw, args, eff):
    alpha, a, v, w = 0.2, 0.5, 0.2, 0.3
    betas, offsets, coupling = ica.three_level_hamiltonian(alpha, a, v, w)
    ts = np.linspace(-10, 10, args.points or 401)
    dia, adia = [], []
    for t in ts:
        diag = betas * t + offsets
        dia.append([t, *diag])
        adia.append([t, *np.linalg.eigvalsh(np.diag(diag) + coupling)])
    pars = {"alpha": alpha, "a": a, "v": v, "w": w}
    fw.series_csv("diabatic", ["t", "h1", "h2", "h3"], dia, pars, "diagonal of the 3x3 model")
    fw.series_csv("adiabatic", ["t", "E0", "E1", "E2"], adia, pars, "eigenvalues of the 3x3 model")
    rep = ica.three_level_demo(alpha, a, v, w, make_integrator(eff))
    fw.series_csv("smatrix", ["element", "numeric", "ica"],
                  [["S33", rep.s33_numeric, rep.s33_ica], ["S32", rep.s32_numeric, rep.s32_ica],
                   ["S31", rep.s31_numeric, rep.s31_ica]], pars, "start in diabatic level 3")


def figure_7(fw, args, eff):
    params = ModelParams(v=0.2, alpha=eff["alpha"] or 0.01, n=args.n or 100, g=-1.0)
    gs = np.linspace(-2.0, 0.0, args.points or 11)
    failed = _sweep_series(fw, "numeric", params, "g", gs, eff, ("meanfield", "manybody"))
    rows = []
    for g in gs:
        inp = formula.ClosedFormInput(params.v, float(g), params.alpha, eff["a"], eff["kappa"])
        rows.append([g, formula.plz_closed_form(inp)])
    pars = _pdict(params, g=[float(g) for g in gs], a=eff["a"], kappa=eff["kappa"])
    fw.series_csv("formula", ["g", "p_lz_formula"], rows, pars, "closed form")
    return {"failed": failed} if failed else None


FIGURE_BUILDERS = {1: figure_1, 2: figure_2, 3: figure_3, 4: figure_4, 5: figure_5,
                   6: figure_6, 7: figure_7}


def cmd_figure(args):
    if args.id not in FIGURE_BUILDERS:
        raise UsageError(f"unknown figure {args.id}; choose from {FIGURES}")
    eff = resolve(args)
    out = eff["out"] or f"figure{args.id}"
    fw = FigureWriter(out, args.id, eff)
    notes = FIGURE_BUILDERS[args.id](fw, args, eff)
    fw.close(notes)
    print(f"wrote {len(fw.series)} series to {out}")
    return 0


# -- parser ------------------------------------------------------------------

def _common(p, model=True, sweep=False):
    p.add_argument("--config", help="key = value file; flags take precedence")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=["csv"], help="output format")
    if model:
        p.add_argument("--v", type=float, help="hopping v")
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--g", type=float, help="interaction g (= gbar N)")
        grp.add_argument("--gbar", type=float, help="per-particle interaction gbar")
        p.add_argument("--n", type=int, help="particle number N")
        p.add_argument("--alpha", type=float, help="sweep rate")
        p.add_argument("--kappa", type=float, help="gap convention factor in exp(-kappa pi w^2/|b|)")
        p.add_argument("--a", type=float, help="critical-index fit constant")
    if sweep:
        p.add_argument("--window-factor", type=float, dest="window_factor")
        p.add_argument("--samples", type=int, help="number of output time samples")
        p.add_argument("--rel-tol", type=float, dest="rel_tol")
        p.add_argument("--abs-tol", type=float, dest="abs_tol")
        p.add_argument("--method", choices=["dopri5", "rk4"])
        p.add_argument("--jobs", type=int, help="worker processes (default LZBEC_JOBS or cpu count)")


def build_parser():
    parser = argparse.ArgumentParser(prog="lzbec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim", help="propagate a sweep and report p_lz")
    p.add_argument("kind", choices=["meanfield", "manybody"])
    _common(p, sweep=True)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("spectrum", help="many-body eigenvalues over epsilon")
    _common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-min", type=float, dest="eps_min")
    p.add_argument("--eps-max", type=float, dest="eps_max")
    p.add_argument("--steps", type=int, default=101)
    p.set_defaults(func=cmd_spectrum)

    for name, func, help_ in (("splittings", cmd_splittings, "anti-crossing data per crossing"),
                              ("ica", cmd_ica, "independent crossings approximation")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--rule", choices=spectrum.PAIR_RULES, default="adjacent")
        p.add_argument("--refine-min", action="store_true", dest="refine_min")
        p.add_argument("--form", choices=spectrum.SUBCRITICAL_FORMS, default="expanded")
        if name == "ica":
            p.add_argument("--source", choices=ica.SPLITTING_SOURCES, default="exact")
        p.set_defaults(func=func)

    p = sub.add_parser("formula", help="closed-form transition probability")
    _common(p)
    p.add_argument("--form", choices=spectrum.SUBCRITICAL_FORMS, default="expanded")
    p.set_defaults(func=cmd_formula)

    p = sub.add_parser("figure", help="data series for a figure")
    p.add_argument("id", type=int)
    _common(p, sweep=True)
    p.add_argument("--points", type=int, help="grid density")
    p.add_argument("--alpha-min", type=float, dest="alpha_min")
    p.add_argument("--alpha-max", type=float, dest="alpha_max")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lzbec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except spectrum.RegimeError as exc:
        print(f"lzbec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        where = getattr(exc, "t_fail", None)
        suffix = f" (t={where:.12g})" if where is not None else ""
        print(f"lzbec: numeric failure: {exc}{suffix}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
