"""``aec`` command line: DFA rewrites, energy reports, QFA simulation, and oracle searches.

Data goes to stdout (or ``-o``), diagnostics to stderr. Exit status is 0 on
success, 1 when a check fails or an input is invalid, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .automata import (
    Dfa,
    DfaError,
    equivalent,
    fingerprint,
    format_word,
    in_degree_profile,
    is_group_language,
    is_reversible_dfa,
    minimize,
    parse_dfa,
    renumber_canonical,
    serialize_dfa,
)
from .energy import (
    bits_to_joules,
    energy_curve,
    energy_rate,
    expected_step_energy,
    margin_terms,
    restricted_profile,
    stationary,
)
from .oracles import (
    SearchSpaceError,
    brute_force_energy,
    find_reversible_recognizer,
    min_inflow_over_recognizers,
    monte_carlo_step_energy,
)
from .qfa import (
    QfaError,
    accept_prob,
    branch_run,
    extract_dfa,
    from_dfa,
    gen_M2,
    gen_Mj,
    is_zero_error,
    parse_qfa,
    serialize_qfa,
    step_energy,
    validate_qfa,
    worst_error,
)
from .report import Report, curve_csv, num, prob_text, sha256_file, write_output
from .transforms import (
    cycle_expand,
    gen_LI,
    gen_Lbb,
    gen_Lj,
    in_Lbb,
    in_LI,
    in_Lj,
    rebalance,
    tree_expand,
)


class Failed(Exception):
    """A check ran and came out negative; exit status 1."""


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _load_dfa(path: str) -> Dfa:
    return parse_dfa(_read(path))


def _inputs(*paths: str) -> dict[str, str]:
    return {p: sha256_file(p) for p in paths if p != "-"}


# -- dfa ------------------------------------------------------------------------

def cmd_dfa_validate(args, out):
    d = _load_dfa(args.file)
    out.write(
        f"ok: {d.state_count} states, alphabet {' '.join(d.alphabet)}, "
        f"max in-degree {in_degree_profile(d).max()}, "
        f"reversible {'yes' if is_reversible_dfa(d) else 'no'}, "
        f"group language {'yes' if is_group_language(d) else 'no'}\n"
    )


def _emit_dfa(d: Dfa, args, out):
    write_output(serialize_dfa(d), args.output, out)


def cmd_dfa_minimize(args, out):
    _emit_dfa(minimize(_load_dfa(args.file)), args, out)


def cmd_dfa_canon(args, out):
    _emit_dfa(renumber_canonical(_load_dfa(args.file)), args, out)


def cmd_dfa_rebalance(args, out):
    _emit_dfa(rebalance(_load_dfa(args.file)), args, out)


def cmd_dfa_expand(args, out):
    _emit_dfa(tree_expand(_load_dfa(args.file), args.depth, max_states=args.max_states), args, out)


def cmd_dfa_cycle_expand(args, out):
    _emit_dfa(cycle_expand(_load_dfa(args.file), args.state, args.m), args, out)


def cmd_dfa_equiv(args, out):
    same, witness = equivalent(_load_dfa(args.a), _load_dfa(args.b))
    if not same:
        raise Failed(f"not equivalent; shortest counterexample: {format_word(witness)!r}")
    out.write("equivalent\n")


# -- energy ---------------------------------------------------------------------

def _emit_report(report: Report, args, out, text: str):
    if getattr(args, "format", "text") == "json":
        write_output(report.to_json(), args.output, out)
    else:
        write_output(text, args.output, out)


def cmd_energy_profile(args, out):
    d = _load_dfa(args.file)
    curve = energy_curve(d, args.max_len, witnesses=True)
    words = [format_word(w) for w in curve.witnesses]
    if args.format == "csv":
        write_output(curve_csv(curve.values, curve.witnesses), args.output, out)
        return
    report = Report(
        "energy-curve",
        {"rows": [{"n": n, "bits": num(b), "witness": w} for n, (b, w) in enumerate(zip(curve.values, words))]},
        {args.file: curve.fingerprint},
        {"max_len": args.max_len},
        _inputs(args.file),
    )
    lines = [f"{'n':>5}  {'bits':>20}  witness"]
    lines += [f"{n:>5}  {num(b):>20}  {w}" for n, (b, w) in enumerate(zip(curve.values, words))]
    _emit_report(report, args, out, "\n".join(lines) + "\n")


def cmd_energy_rate(args, out):
    d = _load_dfa(args.file)
    rate = energy_rate(d)
    report = Report("rate", {"bits_per_step": num(rate)}, {args.file: fingerprint(d)}, {}, _inputs(args.file))
    _emit_report(report, args, out, num(rate) + "\n")


def cmd_energy_expected(args, out):
    d = _load_dfa(args.file)
    dist = stationary(d)
    chi_bits = expected_step_energy(d, dist, in_degree_profile(d))
    psi_bits = expected_step_energy(d, dist, restricted_profile(d, dist))
    terms = margin_terms(d)
    margin = max((t.value for t in terms), default=0.0)
    payload = {
        "stationary": [num(p) for p in dist.probs],
        "expected_bits_chi": num(chi_bits),
        "expected_bits_psi": num(psi_bits),
        "margin": num(margin),
    }
    lines = [
        "stationary: " + " ".join(num(p) for p in dist.probs),
        f"expected bits/step (all sources): {num(chi_bits)}",
        f"expected bits/step (stationary sources): {num(psi_bits)}",
        f"margin: {num(margin)}",
    ]
    params = {}
    if args.temperature is not None:
        joules = bits_to_joules(chi_bits, args.temperature)
        payload["expected_joules_per_step"] = num(joules)
        params["temperature_kelvin"] = args.temperature
        lines.append(f"expected joules/step at {args.temperature:g} K: {num(joules)}")
    report = Report("expectation", payload, {args.file: fingerprint(d)}, params, _inputs(args.file))
    _emit_report(report, args, out, "\n".join(lines) + "\n")


def cmd_energy_margin(args, out):
    d = _load_dfa(args.file)
    terms = margin_terms(d)
    margin = max((t.value for t in terms), default=0.0)
    rows = [
        {"state": t.state, "symbol": t.symbol, "probability": num(t.probability),
         "chi": t.chi, "psi": t.psi, "value": num(t.value)}
        for t in terms
    ]
    report = Report("expectation", {"margin": num(margin), "terms": rows},
                    {args.file: fingerprint(d)}, {}, _inputs(args.file))
    lines = [num(margin)]
    lines += [f"  state {r['state']} on {r['symbol']}: P={r['probability']} chi={r['chi']} "
              f"psi={r['psi']} -> {r['value']}" for r in rows]
    _emit_report(report, args, out, "\n".join(lines) + "\n")


# -- qfa ------------------------------------------------------------------------

def _load_qfa(path: str):
    return parse_qfa(_read(path))


def cmd_qfa_validate(args, out):
    m = _load_qfa(args.file)
    validate_qfa(m)
    out.write(f"ok: {m.n} states, {m.l} operation elements, step energy {num(step_energy(m))} bits\n")


def cmd_qfa_sim(args, out):
    m = _load_qfa(args.file)
    validate_qfa(m)
    if args.engine == "branch":
        p = branch_run(m, args.word).accept_prob(m.accepting)
    else:
        p = accept_prob(m, args.word)
    out.write(prob_text(p) + "\n")


def cmd_qfa_from_dfa(args, out):
    write_output(serialize_qfa(from_dfa(_load_dfa(args.file))), args.output, out)


def cmd_qfa_extract(args, out):
    m = _load_qfa(args.file)
    validate_qfa(m)
    write_output(serialize_dfa(extract_dfa(m, verify_len=args.verify_len)), args.output, out)


def cmd_qfa_zero_error(args, out):
    m = _load_qfa(args.file)
    validate_qfa(m)
    ok, witness = is_zero_error(m, args.max_len)
    if not ok:
        raise Failed(f"not zero-error: {format_word(witness)!r} accepted with probability "
                     f"{prob_text(accept_prob(m, witness))}")
    out.write(f"zero-error on all words up to length {args.max_len}\n")


def _membership(lang: list[str]):
    name = lang[0]
    if name == "lbb" and len(lang) == 1:
        return in_Lbb
    if name == "li" and len(lang) == 1:
        return in_LI
    if name == "lj" and len(lang) == 2 and lang[1].isdigit():
        j = int(lang[1])
        return lambda w: in_Lj(j, w)
    raise argparse.ArgumentTypeError("--lang expects 'lbb', 'li', or 'lj J'")


def cmd_qfa_max_error(args, out):
    m = _load_qfa(args.file)
    validate_qfa(m)
    err, witness = worst_error(m, _membership(args.lang), args.max_len)
    out.write(f"{prob_text(err)} (worst word {format_word(witness)!r}, lengths <= {args.max_len})\n")


def cmd_qfa_gen_m2(args, out):
    write_output(serialize_qfa(gen_M2()), args.output, out)


def cmd_qfa_gen_mj(args, out):
    write_output(serialize_qfa(gen_Mj(args.j)), args.output, out)


# -- gen ------------------------------------------------------------------------

def cmd_gen_lbb(args, out):
    _emit_dfa(gen_Lbb(), args, out)


def cmd_gen_li(args, out):
    _emit_dfa(gen_LI(args.alphabet), args, out)


def cmd_gen_lj(args, out):
    _emit_dfa(gen_Lj(args.j), args, out)


# -- oracle ---------------------------------------------------------------------

def cmd_oracle_thm5(args, out):
    target = gen_Lj(args.j)
    bound = args.j + 1
    best = min_inflow_over_recognizers(target, args.max_states, threads=args.threads)
    scope = f"verified for ≤{args.max_states} states"
    if best is None:
        out.write(f"no recognizer with ≤{args.max_states} states "
                  f"(minimal DFA has {minimize(target).state_count}); bound j+1={bound} holds vacuously; {scope}\n")
        return
    status = "attained" if best == bound else "holds" if best > bound else "VIOLATED"
    out.write(f"min inflow = {best} (bound j+1={bound} {status}; {scope})\n")
    if best < bound:
        raise Failed("recognizer below the in-degree bound found")


def cmd_oracle_energy(args, out):
    out.write(num(brute_force_energy(_load_dfa(args.file), args.len)) + "\n")


def cmd_oracle_reversible(args, out):
    d = _load_dfa(args.file)
    found = find_reversible_recognizer(d, args.max_states)
    if found is None:
        out.write(f"no reversible recognizer with ≤{args.max_states} states\n")
        return
    out.write(f"# reversible recognizer found ({found.state_count} states; searched ≤{args.max_states})\n")
    _emit_dfa(found, args, out)


def cmd_oracle_mc(args, out):
    mean, stderr = monte_carlo_step_energy(_load_dfa(args.file), args.len, args.samples, args.seed)
    out.write(f"{num(mean)} ± {num(stderr)} bits/step\n")


# -- parser ---------------------------------------------------------------------

def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"aec {__version__}")
    p.add_argument("--threads", type=_positive, default=1, help="worker processes for oracle searches")
    groups = p.add_subparsers(dest="group", required=True)

    def cmd(sub, name, func, *, output=False, fmt=None, help=None):
        c = sub.add_parser(name, help=help)
        c.set_defaults(func=func)
        if output:
            c.add_argument("-o", "--output", default=None, help="write here instead of stdout")
        if fmt:
            c.add_argument("--format", choices=fmt, default=fmt[0])
        return c

    dfa = groups.add_parser("dfa", help="DFA utilities").add_subparsers(dest="cmd", required=True)
    cmd(dfa, "validate", cmd_dfa_validate).add_argument("file")
    cmd(dfa, "minimize", cmd_dfa_minimize, output=True).add_argument("file")
    c = cmd(dfa, "equiv", cmd_dfa_equiv)
    c.add_argument("a")
    c.add_argument("b")
    cmd(dfa, "rebalance", cmd_dfa_rebalance, output=True).add_argument("file")
    c = cmd(dfa, "expand", cmd_dfa_expand, output=True)
    c.add_argument("file")
    c.add_argument("--depth", type=_positive, required=True)
    c.add_argument("--max-states", type=_positive, default=10**6)
    c = cmd(dfa, "cycle-expand", cmd_dfa_cycle_expand, output=True)
    c.add_argument("file")
    c.add_argument("--state", type=_nonneg, required=True)
    c.add_argument("--m", type=int, required=True)
    cmd(dfa, "canon", cmd_dfa_canon, output=True).add_argument("file")

    energy = groups.add_parser("energy", help="forgotten-bit reports").add_subparsers(dest="cmd", required=True)
    c = cmd(energy, "profile", cmd_energy_profile, output=True, fmt=["text", "csv", "json"])
    c.add_argument("file")
    c.add_argument("--max-len", type=_nonneg, required=True)
    cmd(energy, "rate", cmd_energy_rate, output=True, fmt=["text", "json"]).add_argument("file")
    c = cmd(energy, "expected", cmd_energy_expected, output=True, fmt=["text", "json"])
    c.add_argument("file")
    c.add_argument("--temperature", type=float, default=None, help="kelvin; adds a joule figure")
    cmd(energy, "margin", cmd_energy_margin, output=True, fmt=["text", "json"]).add_argument("file")

    qfa = groups.add_parser("qfa", help="quantum finite automata").add_subparsers(dest="cmd", required=True)
    cmd(qfa, "validate", cmd_qfa_validate).add_argument("file")
    c = cmd(qfa, "sim", cmd_qfa_sim)
    c.add_argument("file")
    c.add_argument("--word", required=True, help="space-separated symbols (may be empty)")
    c.add_argument("--engine", choices=["density", "branch"], default="density")
    cmd(qfa, "from-dfa", cmd_qfa_from_dfa, output=True).add_argument("file")
    c = cmd(qfa, "extract", cmd_qfa_extract, output=True)
    c.add_argument("file")
    c.add_argument("--verify-len", type=_nonneg, default=6)
    c = cmd(qfa, "zero-error", cmd_qfa_zero_error)
    c.add_argument("file")
    c.add_argument("--max-len", type=_nonneg, required=True)
    c = cmd(qfa, "max-error", cmd_qfa_max_error)
    c.add_argument("file")
    c.add_argument("--lang", nargs="+", required=True, metavar="LANG", help="lbb | li | lj J")
    c.add_argument("--max-len", type=_nonneg, required=True)
    cmd(qfa, "gen-m2", cmd_qfa_gen_m2, output=True)
    cmd(qfa, "gen-mj", cmd_qfa_gen_mj, output=True).add_argument("--j", type=int, required=True)

    gen = groups.add_parser("gen", help="language-family DFAs").add_subparsers(dest="cmd", required=True)
    cmd(gen, "lbb", cmd_gen_lbb, output=True)
    cmd(gen, "li", cmd_gen_li, output=True).add_argument("--alphabet", nargs="+", default=["a", "b"])
    cmd(gen, "lj", cmd_gen_lj, output=True).add_argument("--j", type=_positive, required=True)

    oracle = groups.add_parser("oracle", help="exhaustive checks").add_subparsers(dest="cmd", required=True)
    c = cmd(oracle, "thm5", cmd_oracle_thm5)
    c.add_argument("--j", type=_positive, required=True)
    c.add_argument("--max-states", type=_positive, required=True)
    c = cmd(oracle, "energy", cmd_oracle_energy)
    c.add_argument("file")
    c.add_argument("--len", type=_nonneg, required=True)
    c = cmd(oracle, "reversible", cmd_oracle_reversible, output=True)
    c.add_argument("file")
    c.add_argument("--max-states", type=_positive, required=True)
    c = cmd(oracle, "mc", cmd_oracle_mc)
    c.add_argument("file")
    c.add_argument("--len", type=_positive, required=True)
    c.add_argument("--samples", type=_positive, required=True)
    c.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args.func(args, stdout)
    except argparse.ArgumentTypeError as e:
        stderr.write(f"aec: usage error: {e}\n")
        return 2
    except Failed as e:
        stderr.write(f"{e}\n")
        return 1
    except (DfaError, QfaError, SearchSpaceError, ValueError, OSError) as e:
        stderr.write(f"error: {e}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
