"""Command-line entry point: ``sumphase <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import enumeration, poisson, sim, theory
from .errors import AmbiguousRegime, EpsilonNonpositive, SumphaseError, TooLarge
from .forms import parse_form
from .sets import SubsetBitVector, complement_size, evaluate_image, representation_count, sample_subset


def sci_int(text: str) -> int:
    """Integer flag that also accepts integral scientific notation such as 1e6."""
    try:
        d = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not d.is_finite() or d != d.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(d)


def positive_int(text: str) -> int:
    n = sci_int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text!r}")
    return n


def alpha_value(text: str):
    """Float, or an exact fraction when written as a/b."""
    if "/" in text:
        return Fraction(text)
    return float(text)


def form_arg(text: str):
    try:
        return parse_form(text)
    except (SumphaseError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def offset_arg(text: str):
    return "mid" if text == "mid" else sci_int(text)


def _dump(obj) -> None:
    print(json.dumps(obj, indent=2, default=str))


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


# -- subcommands -----------------------------------------------------------------


def cmd_predict(args) -> int:
    if (args.alpha is None) == (args.critical_c is None):
        raise AmbiguousRegime("give exactly one of --alpha or --critical-c")
    form = args.form
    if args.critical_c is not None:
        img, comp = theory.predict_critical(form, args.critical_c)
        _dump({"form": list(form.coeffs), "c": args.critical_c, "image_coeff": img, "complement_coeff": comp,
               "tag": "critical"})
        return 0
    if args.N is None:
        raise SumphaseError("--alpha needs --N")
    regime = theory.RegimeSpec(args.c, args.alpha, form.h)
    preds = theory.predict(form, args.N, regime)
    _dump({"form": list(form.coeffs), "N": args.N, "p": regime.p(args.N), "regime": regime.to_json(),
           "predictions": {q: None if v is None else v.to_json() for q, v in preds.items()}})
    return 0


def cmd_enumerate(args) -> int:
    form, N = args.form, args.N
    if args.all_k:
        sys.stdout.write(enumeration.count_table(form, N).to_csv())
        return 0
    if args.k is None:
        raise SumphaseError("give --k or --all-k")
    k = form.m * N // 2 if args.k == "mid" else args.k
    if args.count_only:
        counts = enumeration.count_by_ground_size(form, N, k) if 0 <= k <= form.m * N else []
        _dump({"form": list(form.coeffs), "N": N, "k": k, "count": enumeration.count_expressions(form, N, k),
               "by_ground_size": {j: c for j, c in enumerate(counts) if c}})
        return 0
    if not 0 <= k <= form.m * N:
        classes = []
    else:
        classes = enumeration.enumerate_expressions(form, N, k, cap=args.cap)
    print("k,representative,ground_set_size")
    for cl in classes:
        print(f"{k},{' '.join(map(str, cl.rep))},{len(cl.ground_set)}")
    print(f"# count: {len(classes)}", file=sys.stderr)
    return 0


def cmd_count(args) -> int:
    form, N = args.form, args.N
    if args.elements is not None:
        elems = [sci_int(x) for x in args.elements.split(",") if x.strip()]
        subset = SubsetBitVector.from_elements(N, elems)
    else:
        if args.p is None:
            raise SumphaseError("give --elements or --p")
        subset = sample_subset(N, args.p, _seed(args))
    image = evaluate_image(form, subset, distinct=args.distinct)
    ks = [form.m * N // 2 if k == "mid" else k for k in (args.k or [])]
    _dump({
        "form": list(form.coeffs),
        "N": N,
        "seed": args.seed,
        "subset_size": subset.cardinality,
        "image_size": image.size,
        "complement_size": complement_size(image),
        "W": {str(k): representation_count(form, subset, k, distinct=args.distinct) for k in ks},
    })
    return 0


def _config_from_args(args, single: bool) -> sim.ExperimentConfig:
    if args.config:
        if not os.path.exists(args.config):
            raise FileNotFoundError(args.config)
        cfg = sim.ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg = sim.ExperimentConfig(**{**cfg.__dict__, "master_seed": args.seed})
        return cfg
    if args.form is None or not args.N:
        raise SumphaseError("give --config or at least --form and --N")
    Ns, cs, alphas = tuple(args.N), tuple(args.c or [1.0]), tuple(args.alpha or [0.5])
    if single and len(Ns) * len(cs) * len(alphas) != 1:
        raise SumphaseError("simulate runs one cell; use sweep for grids")
    return sim.ExperimentConfig(
        form=args.form, N_values=Ns, c_values=cs, alpha_values=alphas, trials=args.trials,
        master_seed=_seed(args), quantities=tuple(args.quantities), k_values=tuple(args.k or ()),
        output_csv=args.out_csv, output_json=args.out_json,
    )


PLOT_TEMPLATE = '''\
"""Plot per-cell means from {csv_name}."""
import csv
import os
from collections import defaultdict

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(HERE, {csv_rel!r}))))
cells = defaultdict(list)
for r in rows:
    cells[(int(r["cell_id"]), r["N"], r["alpha"])].append(r)

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for ax, col in zip(axes, ["image_size", "complement_size"]):
    labels, means = [], []
    for (cid, N, alpha), rs in sorted(cells.items()):
        vals = [float(r[col]) / (int(N) * {m}) for r in rs if r[col]]
        if vals:
            labels.append(f"N={{N}}\\nalpha={{alpha}}")
            means.append(sum(vals) / len(vals))
    ax.bar(range(len(means)), means)
    ax.set_xticks(range(len(means)), labels, fontsize=7)
    ax.set_ylabel(col + " / (m N)")
fig.tight_layout()
fig.savefig(os.path.join(HERE, {png_name!r}))
'''


def _emit_plot(csv_path: str, m: int) -> str:
    base = os.path.splitext(csv_path)[0]
    script = base + "_plot.py"
    rel = os.path.relpath(csv_path, os.path.dirname(os.path.abspath(script)))
    with open(script, "w") as fh:
        fh.write(PLOT_TEMPLATE.format(csv_name=os.path.basename(csv_path), csv_rel=rel, m=m,
                                      png_name=os.path.basename(base) + ".png"))
    return script


def _run_experiment(args, single: bool) -> int:
    cfg = _config_from_args(args, single)
    summaries, records = sim.sweep(cfg, workers=args.workers)
    csv_path = args.out_csv or cfg.output_csv
    json_path = args.out_json or cfg.output_json
    written = sim.write_outputs(cfg, summaries, records, csv_path, json_path)
    if args.emit_plot:
        if not csv_path:
            raise SumphaseError("--emit-plot needs a CSV output path")
        written.append(_emit_plot(csv_path, cfg.form.m))
    print("cell_id\tN\tc\talpha\tp\tquantity\tmean\tsd\tpredicted\tratio")
    failed = 0
    for s in summaries:
        head = f"{s.cell.cell_id}\t{s.cell.N}\t{s.cell.c}\t{s.cell.alpha}\t{s.p!r}"
        if s.error:
            failed += 1
            print(f"{head}\tERROR\t{s.error}")
            continue
        for q, st in s.stats.items():
            print(f"{head}\t{q}\t{st.mean!r}\t{st.sd!r}\t{s.predicted.get(q)!r}\t{s.ratio(q)!r}")
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    if failed:
        print(f"error: {failed} of {len(summaries)} cells failed", file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args) -> int:
    return _run_experiment(args, single=True)


def cmd_sweep(args) -> int:
    return _run_experiment(args, single=False)


def cmd_poisson(args) -> int:
    form, N = args.form, args.N
    k = form.m * N // 2 if args.k == "mid" else args.k
    regime = theory.RegimeSpec(args.c, args.alpha, form.h)
    p = regime.p(N)
    seed = _seed(args)
    acc = poisson.stein_chen_bounds(form, N, k, p)
    pmf = poisson.empirical_count_law(form, N, k, p, args.trials, seed)
    out = {
        "form": list(form.coeffs), "N": N, "k": k, "p": p, "seed": seed, "trials": args.trials,
        "local_classification": regime.local_classification,
        "mu": acc.mu, "b1": acc.b1, "b2": acc.b2, "b3": acc.b3, "upper_bound": acc.upper_bound,
        "empirical_mean": pmf.mean, "empirical_tv": poisson.tv_to_poisson(pmf, acc.mu),
        "empirical_tv_se": poisson.tv_standard_error(pmf),
    }
    try:
        out["certificate"] = poisson.lower_bound_certificate(form, N, k, p, args.trials, seed, pmf=pmf).to_json()
    except EpsilonNonpositive as exc:
        out["certificate"] = None
        out["certificate_note"] = str(exc)
    _dump(out)
    return 0


def cmd_mstd(args) -> int:
    seed = _seed(args)
    frac = sim.mstd_frequency(args.N, args.p, args.trials, seed)
    _dump({"N": args.N, "p": args.p, "trials": args.trials, "seed": seed, "mstd_fraction": frac})
    return 0


def cmd_identity_check(args) -> int:
    rows = []
    for c in args.c:
        lhs, rhs = theory.hm_identity_sides(args.u1, args.u2, c)
        rows.append({"u1": args.u1, "u2": args.u2, "c": c, "lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)})
    _dump(rows)
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sumphase", description="Random linear-form images: theory, counts, simulation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="asymptotic prediction for |L(A)| or |L(A)^c|")
    p.add_argument("--form", type=form_arg, required=True, help="coefficients, e.g. 1,-1")
    p.add_argument("--alpha", type=alpha_value, help="decay exponent in p = c N^-alpha")
    p.add_argument("--critical-c", type=float, help="c at the critical exponent (h-1)/h")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--N", type=sci_int)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("enumerate", help="classes of representations at offset k, or the count table")
    p.add_argument("--form", type=form_arg, required=True)
    p.add_argument("--N", type=sci_int, required=True)
    p.add_argument("--k", type=offset_arg, help="offset (value = -dN + k) or 'mid'")
    p.add_argument("--all-k", action="store_true", help="stream the count table for every k as CSV")
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--cap", type=sci_int, default=enumeration.ENUMERATION_CAP)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("count", help="|L(A)|, |L(A)^c| and W_k for one subset")
    p.add_argument("--form", type=form_arg, required=True)
    p.add_argument("--N", type=sci_int, required=True)
    p.add_argument("--elements", help="comma-separated elements of A")
    p.add_argument("--p", type=float, help="sample A with this density instead")
    p.add_argument("--seed", type=sci_int)
    p.add_argument("--k", type=offset_arg, action="append")
    p.add_argument("--distinct", action="store_true", help="only pairwise distinct summands")
    p.set_defaults(func=cmd_count)

    for name, fn, text in (("simulate", cmd_simulate, "one Monte-Carlo cell"),
                           ("sweep", cmd_sweep, "Monte-Carlo cells over an (N, c, alpha) grid")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON experiment config (schema 1)")
        p.add_argument("--form", type=form_arg)
        p.add_argument("--N", type=sci_int, nargs="+")
        p.add_argument("--c", type=float, nargs="+")
        p.add_argument("--alpha", type=alpha_value, nargs="+")
        p.add_argument("--trials", type=positive_int, default=10)
        p.add_argument("--seed", type=sci_int)
        p.add_argument("--k", type=offset_arg, nargs="+")
        p.add_argument("--quantities", nargs="+", default=["image_size", "complement_size"], choices=sim.QUANTITIES)
        p.add_argument("--out-csv")
        p.add_argument("--out-json")
        p.add_argument("--emit-plot", action="store_true", help="also write a matplotlib script next to the CSV")
        p.add_argument("--workers", type=positive_int, default=os.cpu_count() or 1)
        p.set_defaults(func=fn)

    p = sub.add_parser("poisson", help="Poisson diagnostics for W_k")
    p.add_argument("--form", type=form_arg, required=True)
    p.add_argument("--N", type=sci_int, required=True)
    p.add_argument("--k", type=offset_arg, default="mid")
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--trials", type=positive_int, default=10_000)
    p.add_argument("--seed", type=sci_int)
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("mstd", help="frequency of |A+A| > |A-A|")
    p.add_argument("--N", type=sci_int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=positive_int, default=1000)
    p.add_argument("--seed", type=sci_int)
    p.set_defaults(func=cmd_mstd)

    p = sub.add_parser("identity-check", help="residual of the two-variable critical identity")
    p.add_argument("--u1", type=int, required=True)
    p.add_argument("--u2", type=int, required=True)
    p.add_argument("--c", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    p.set_defaults(func=cmd_identity_check)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except (SumphaseError, TooLarge) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
