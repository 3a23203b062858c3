"""Command-line interface: ``hgm <subcommand> [--param P] [--t T] [--json] ...``.

Exit status 0 on success, 1 on a domain error, 2 on a usage error.  Data
goes to stdout, diagnostics to stderr.
"""

import argparse
import json
import sys
from fractions import Fraction

from .census import MOD_NEGATION, RAW, census, census_total, mum_counts, sato_tate_samples
from .errors import HGMError, ValidationError
from .family import parse_family, stats
from .geometry import count_points, polytope_stats, splicings, toric_model
from .hodge import hodge_vector, hodge_vector_at_one
from .lseries import (TraceCache, conductor, dirichlet_coefficients, export_motive,
                      format_poly, gamma_factors, load_fixtures, local_data)
from .monodromy import classify, det, drop_rank, levelt
from .util import parse_rational, prime_power

SCHEMA = "hgm/1"
EXTENDED_CENSUS = 14


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    return str(x)


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps({"schema": SCHEMA, **payload}, default=_jsonable, sort_keys=False))
    else:
        print(text)


def _param(args):
    if not args.param:
        raise UsageError(f"{args.command}: --param is required")
    return parse_family(args.param)


def _t(args, default=None):
    if args.t is None:
        if default is None:
            raise UsageError(f"{args.command}: --t is required")
        return Fraction(default)
    return parse_rational(args.t)


def _cache(args):
    return TraceCache(args.cache_dir) if args.cache_dir else None


def _fixtures(args):
    return load_fixtures(args.fixtures) if args.fixtures else None


def _require(args, name):
    v = getattr(args, name)
    if v is None:
        raise UsageError(f"{args.command}: --{name.replace('_', '-')} is required")
    return v


def _hodge_text(h):
    return "(" + ",".join(map(str, h)) + ")"


# ---------------------------------------------------------------------------
# subcommands

def cmd_info(args):
    par = _param(args)
    st = stats(par)
    hd = hodge_vector(par)
    payload = {"param": par.key(), "cyclotomic": str(par.cyc), **st,
               "hodge": list(hd.h), "weight": hd.w}
    text = "\n".join(f"{k}: {_jsonable(v) if isinstance(v, Fraction) else v}"
                     for k, v in payload.items())
    _emit(args, payload, text)


def cmd_hodge(args):
    par = _param(args)
    hd = hodge_vector_at_one(par) if args.at_one else hodge_vector(par)
    payload = {"param": par.key(), "hodge": list(hd.h), "weight": hd.w, "phi0": hd.phi0,
               "at_one": bool(args.at_one)}
    _emit(args, payload, _hodge_text(hd.h))


def cmd_monodromy(args):
    par = _param(args)
    kind = classify(par)
    trip = levelt(par)
    payload = {"param": par.key(), "kind": kind, "det_h1": det(trip.h_1)}
    lines = [f"kind: {kind}", f"det(h_1): {det(trip.h_1)}"]
    if args.k is not None:
        cusp = args.cusp or ("infinity" if args.k < 0 else "zero")
        r = drop_rank(par, cusp, abs(args.k))
        payload.update({"cusp": cusp, "k": args.k, "drop_rank": r})
        lines.append(f"rank(h_{cusp}^{abs(args.k)} - I): {r}")
    if args.matrices:
        mats = {name: [[_jsonable(x) for x in row] for row in getattr(trip, name)]
                for name in ("h_inf", "h_1", "h_0")}
        payload["matrices"] = mats
        for name, m in mats.items():
            lines.append(f"{name}:")
            lines += ["  " + " ".join(str(x) for x in row) for row in m]
    _emit(args, payload, "\n".join(lines))


def cmd_toric(args):
    par = _param(args)
    model = toric_model(par.gamma, seed=args.seed)
    st = polytope_stats(model)
    payload = {**model.to_json(), "polytope": st}
    lines = ["m:"] + ["  " + " ".join(map(str, r)) for r in model.m]
    lines += [f"k: {' '.join(map(str, model.k))}", f"u = {model.u_factor} * t",
              "equation: " + " + ".join(model.monomials()) + " = 0",
              f"volumes: {st['vols']} total {st['total']} chi {st['chi']}"]
    if "genus" in st:
        lines.append(f"genus {st['genus']} punctures {st['punctures']}")
    _emit(args, payload, "\n".join(lines))


def cmd_count(args):
    par = _param(args)
    t = _t(args)
    q = _require(args, "q")
    n = count_points(par.gamma, t, q)
    _emit(args, {"param": par.key(), "t": str(t), "q": q, "count": n}, str(n))


def cmd_splice(args):
    par = _param(args)
    sp = splicings(par.gamma)
    text = "\n".join(f"{list(a)} + {list(b)}" for a, b in sp) or "none"
    _emit(args, {"param": par.key(), "splicings": [[list(a), list(b)] for a, b in sp]}, text)


def cmd_trace(args):
    from .arith import trace, trace_erased
    par = _param(args)
    t = _t(args)
    if args.e is not None:
        p, e = _require(args, "p"), args.e
        compute = trace_erased
    else:
        try:
            p, e = prime_power(_require(args, "q"))
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        compute = trace
    q = p ** e
    cache = _cache(args)
    v = cache.get_trace(par, t, p, e) if cache else None
    if v is None:
        v = compute(par, t, p, e) if compute is trace_erased else compute(par, t, q)
        if cache:
            cache.put_trace(par, t, p, e, v)
    _emit(args, {"param": par.key(), "t": str(t), "q": q, "trace": v}, str(v))


def cmd_euler(args):
    par = _param(args)
    t = _t(args)
    p = _require(args, "p")
    ld = local_data(par, t, p, _cache(args), _fixtures(args))
    f = ld.factor
    payload = {"param": par.key(), "t": str(t), "p": p, "kind": ld.kind, "c_p": ld.c_p,
               "c_exact": ld.exact, "coeffs": list(f.coeffs) if f.known else None,
               "degree": f.degree, "provenance": f.provenance,
               "known_divisor": list(f.known_divisor) if f.known_divisor else None,
               "note": ld.note}
    if ld.sigma_profile:
        payload["sigma_profile"] = {k: v for k, v in ld.sigma_profile.items() if k != "s_values"}
    text = str(f)
    if not args.quiet_meta:
        extra = f"  [{ld.kind}, c_p={ld.c_p}{'' if ld.exact else ' (bound)'}, {f.provenance}]"
        text += extra
    _emit(args, payload, text)


def cmd_conductor(args):
    par = _param(args)
    t = _t(args)
    res = conductor(par, t, fixtures=_fixtures(args), cache=_cache(args))
    table = {p: {"c_p": ld.c_p, "source": res.flags[p], "kind": ld.kind}
             for p, ld in res.exponents.items()}
    payload = {"param": par.key(), "t": str(t), "value": res.value, "exact": res.exact,
               "factored": res.factored(), "exponents": table}
    text = f"{res.value} = {res.factored()}" + ("" if res.exact else "  (upper bound)")
    for p, row in sorted(table.items()):
        text += f"\n  p={p}: c_p={row['c_p']} ({row['source']}, {row['kind']})"
    _emit(args, payload, text)


def cmd_dirichlet(args):
    par = _param(args)
    t = _t(args)
    N = _require(args, "n")
    a = dirichlet_coefficients(par, t, N, _fixtures(args), cache=_cache(args),
                               workers=args.threads)
    _emit(args, {"param": par.key(), "t": str(t), "dirichlet": a}, " ".join(map(str, a)))


def cmd_export(args):
    par = _param(args)
    t = _t(args)
    data = export_motive(par, t, args.n or 100, _fixtures(args), sigma=args.sigma,
                         cache=_cache(args), workers=args.threads)
    text = json.dumps(data, default=_jsonable, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        print(text)


def cmd_census(args):
    n = _require(args, "n")
    if n > EXTENDED_CENSUS and not args.extended:
        raise UsageError(f"census: n > {EXTENDED_CENSUS} needs --extended")
    modes = [RAW, MOD_NEGATION] if args.mode == "both" else [args.mode]
    recs = [census(n, m, workers=args.threads, budget=args.budget, checkpoint_dir=args.cache_dir)
            for m in modes]
    payload = {"n": n, "records": [r.to_json() for r in recs], "dp_total": census_total(n)}
    lines = []
    for r in recs:
        lines.append(f"# n={n} mode={r.mode} total={r.total}" + (" PARTIAL" if r.partial else ""))
        lines += [f"({k})\t{c}" for k, c in sorted(r.counts.items(), key=lambda kv: (kv[1], kv[0]))]
    _emit(args, payload, "\n".join(lines))


def cmd_mum(args):
    n = _require(args, "n")
    c = mum_counts(n)
    _emit(args, {"n_max": n, "counts": c}, " ".join(map(str, c)))


def cmd_satotate(args):
    par = _param(args)
    t = _t(args)
    pmax = _require(args, "p_max")
    s = sato_tate_samples(par, t, pmax, _fixtures(args), out_dir=args.out_dir,
                          cache=_cache(args))
    _emit(args, {"param": par.key(), "t": str(t), "samples": [[p, x] for p, x in s]},
          "\n".join(f"{p}\t{x:.6f}" for p, x in s))


def cmd_cache_compact(args):
    d = _require(args, "cache_dir")
    res = TraceCache(d).compact()
    _emit(args, {"cache_dir": d, **res}, f"traces: {res['traces']}, factors: {res['factors']}")


COMMANDS = {
    "info": (cmd_info, "family invariants"),
    "hodge": (cmd_hodge, "Hodge vector by the zigzag procedure"),
    "monodromy": (cmd_monodromy, "Levelt matrices, classification, drop ranks"),
    "toric": (cmd_toric, "toric model and polytope statistics"),
    "count": (cmd_count, "brute-force point count on the toric model"),
    "splice": (cmd_splice, "splittings into two zero-sum parts"),
    "trace": (cmd_trace, "trace of Frobenius over F_q"),
    "euler": (cmd_euler, "local Euler factor and conductor exponent at p"),
    "conductor": (cmd_conductor, "conductor with exactness flags"),
    "dirichlet": (cmd_dirichlet, "Dirichlet coefficients a_1..a_n"),
    "export": (cmd_export, "JSON export of the local L-data"),
    "census": (cmd_census, "Hodge-vector census of rank-n parameters"),
    "mum": (cmd_mum, "MUM counts c_0..c_n"),
    "satotate": (cmd_satotate, "normalized a_p samples and histogram"),
    "cache-compact": (cmd_cache_compact, "sort and de-duplicate the trace cache"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--param", help='family parameter, "[g1,...]" or "[beta];[alpha]"')
    g.add_argument("--t", help="specialization point, e.g. 2 or 3/2")
    g.add_argument("--json", action="store_true", help="machine-readable output")
    g.add_argument("--cache-dir", help="directory of the on-disk trace cache")
    g.add_argument("--threads", type=int, default=1, help="worker processes")
    g.add_argument("--fixtures", help="JSON file of extra bad-prime fixtures")

    parser = argparse.ArgumentParser(prog="hgm", description="hypergeometric motive toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    ps = {}
    for name, (_, help_) in COMMANDS.items():
        ps[name] = sub.add_parser(name, parents=[common], help=help_)
    ps["hodge"].add_argument("--at-one", action="store_true", help="Hodge vector at t = 1")
    ps["monodromy"].add_argument("--k", type=int)
    ps["monodromy"].add_argument("--cusp", choices=["zero", "infinity"])
    ps["monodromy"].add_argument("--matrices", action="store_true")
    ps["toric"].add_argument("--seed", type=int, help="random equivalent model")
    ps["count"].add_argument("--q", type=int)
    ps["trace"].add_argument("--q", type=int)
    ps["trace"].add_argument("--p", type=int)
    ps["trace"].add_argument("--e", type=int, help="erased trace over F_(p^e) at a wild p")
    ps["euler"].add_argument("--p", type=int)
    ps["euler"].add_argument("--quiet-meta", action="store_true", help="polynomial only")
    ps["dirichlet"].add_argument("--n", type=int)
    ps["export"].add_argument("--n", type=int, help="number of Dirichlet coefficients")
    ps["export"].add_argument("--sigma", type=int)
    ps["export"].add_argument("--out")
    ps["census"].add_argument("--n", type=int)
    ps["census"].add_argument("--mode", choices=[RAW, MOD_NEGATION, "both"], default="both")
    ps["census"].add_argument("--budget", type=int, help="max pairs examined")
    ps["census"].add_argument("--extended", action="store_true")
    ps["mum"].add_argument("--n", type=int)
    ps["satotate"].add_argument("--p-max", type=int)
    ps["satotate"].add_argument("--out-dir")
    parser._subparsers_map = ps
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if extra:
        sub = parser._subparsers_map[args.command]
        sub.print_help(sys.stderr)
        print(f"hgm {args.command}: error: unrecognized arguments: {' '.join(extra)}",
              file=sys.stderr)
        return 2
    func = COMMANDS[args.command][0]
    try:
        func(args)
    except UsageError as exc:
        parser._subparsers_map[args.command].print_usage(sys.stderr)
        print(f"hgm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except HGMError as exc:
        print(f"hgm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
