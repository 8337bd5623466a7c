"""Command-line interface and the plain-text file formats.

Action file (one directive per line, ``#`` starts a comment)::

    name crossed
    budget 3
    gen f 0/1,0/1 1/4,1/2 3/4,3/4 1/1,1/1
    gen g 0/1,0/1 1/4,1/4 1/2,3/4 1/1,1/1
    equivariant c 1/2 5/8      # optional: extend the other generators c-equivariantly

Witness file: an action file for the maps (their order is the index order)
plus::

    interval 1/2 5/8           # J_1, then J_2, ... (outermost first)
    u 1
    sequence 0                 # s_n cycles through these indices
    certificates 1 2           # default certificate for every step
    certificates@3 2 2         # override at step n = 3
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, TextIO

from . import dynamics, exact_pl, feasibility, regularity, stochastic, tsuboi
from .exact_pl import GroupWord, Interval, PLHomeo

EXIT_OK = 0
EXIT_INPUT = 2


class InputError(ValueError):
    pass


# ------------------------------------------------------------ formatting ---

def fmt_real(x: float) -> str:
    return f"{float(x):.17g}"


def fmt_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def fmt_interval(J: Interval) -> str:
    return f"({fmt_rational(J.lo)}, {fmt_rational(J.hi)})"


def parse_rational(text: str) -> Fraction:
    try:
        return exact_pl.as_rational(text.strip())
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InputError(f"not a rational: {text!r}") from exc


# ----------------------------------------------------------- action files ---

class ActionFile:
    """Named PL generators with metadata; ``dumps`` is canonical."""

    def __init__(self, generators: Dict[str, PLHomeo], name: str = "action", budget: int = 3,
                 equivariant: Optional[tuple] = None, extra: Optional[List[List[str]]] = None):
        self.generators = dict(generators)
        self.name = name
        self.budget = budget
        self.equivariant = equivariant      # (translation name, lo, hi)
        self.extra = extra or []            # unparsed directives (witness data)

    @classmethod
    def loads(cls, text: str) -> "ActionFile":
        gens: Dict[str, PLHomeo] = {}
        name, budget, equiv, extra = "action", 3, None, []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, *rest = line.split()
            try:
                if head == "name":
                    name = " ".join(rest)
                elif head == "budget":
                    budget = int(rest[0])
                elif head == "gen":
                    if len(rest) < 3:
                        raise InputError("a generator needs a name and at least two breakpoints")
                    pts = []
                    for tok in rest[1:]:
                        x, y = tok.split(",")
                        pts.append((parse_rational(x), parse_rational(y)))
                    if rest[0] in gens:
                        raise InputError(f"duplicate generator {rest[0]}")
                    gens[rest[0]] = PLHomeo(pts)
                elif head == "equivariant":
                    equiv = (rest[0], parse_rational(rest[1]), parse_rational(rest[2]))
                else:
                    extra.append([head] + rest)
            except InputError as exc:
                raise InputError(f"line {lineno}: {exc}") from exc
            except (ValueError, IndexError) as exc:
                raise InputError(f"line {lineno}: {exc}") from exc
        if not gens:
            raise InputError("no generators")
        if equiv is not None and equiv[0] not in gens:
            raise InputError(f"unknown translation {equiv[0]}")
        return cls(gens, name, budget, equiv, extra)

    def dumps(self) -> str:
        lines = [f"name {self.name}", f"budget {self.budget}"]
        for n, g in self.generators.items():
            pts = " ".join(f"{fmt_rational(x)},{fmt_rational(y)}" for x, y in g.breakpoints)
            lines.append(f"gen {n} {pts}")
        if self.equivariant is not None:
            c, lo, hi = self.equivariant
            lines.append(f"equivariant {c} {fmt_rational(lo)} {fmt_rational(hi)}")
        for d in self.extra:
            lines.append(" ".join(d))
        return "\n".join(lines) + "\n"

    def maps(self) -> Dict[str, object]:
        """Generators as evaluable maps (equivariant extensions when requested)."""
        if self.equivariant is None:
            return dict(self.generators)
        c_name, lo, hi = self.equivariant
        c = self.generators[c_name]
        window = Interval(lo, hi)
        out: Dict[str, object] = {c_name: c}
        for n, g in self.generators.items():
            if n != c_name:
                out[n] = dynamics.EquivariantExtension(c, g, window)
        return out

    def action(self, budget: Optional[int] = None, exclude: Sequence[str] = ()) -> dynamics.ActionSpec:
        maps = self.maps()
        if self.equivariant is not None:
            exclude = tuple(exclude) + (self.equivariant[0],)
        gens = {n: m for n, m in maps.items() if n not in exclude}
        if not gens:
            raise InputError("no generators left for the action")
        return dynamics.ActionSpec(gens, budget or self.budget, self.name)


def read_action(path: str) -> ActionFile:
    try:
        with open(path) as fh:
            return ActionFile.loads(fh.read())
    except OSError as exc:
        raise InputError(str(exc)) from exc


def witness_from_file(af: ActionFile) -> regularity.NestingWitness:
    maps = af.maps()
    names = list(maps)
    intervals, u, sequence, default, overrides = [], 1.0, None, None, {}
    for d in af.extra:
        head, rest = d[0], d[1:]
        try:
            if head == "interval":
                intervals.append((parse_rational(rest[0]), parse_rational(rest[1])))
            elif head == "u":
                u = float(rest[0])
            elif head == "sequence":
                sequence = [int(v) for v in rest]
            elif head == "certificates":
                default = [int(v) for v in rest]
            elif head.startswith("certificates@"):
                overrides[int(head.split("@", 1)[1])] = [int(v) for v in rest]
            else:
                raise InputError(f"unknown directive {head!r}")
        except (ValueError, IndexError) as exc:
            raise InputError(f"bad {head} line: {exc}") from exc
    if not intervals or sequence is None or default is None:
        raise InputError("witness needs interval, sequence and certificates lines")

    def rule(n):
        step = sequence[(n - 1) % len(sequence)] if n > 0 else None
        return step, overrides.get(n, default)

    return regularity.NestingWitness(maps=[maps[n] for n in names], intervals=intervals, u=u,
                                     rule=rule, names=names)


# --------------------------------------------------------------- output ---

def _emit(out: TextIO, key: str, value) -> None:
    if isinstance(value, Fraction):
        value = fmt_rational(value)
    elif isinstance(value, float):
        value = fmt_real(value)
    elif isinstance(value, Interval):
        value = fmt_interval(value)
    out.write(f"{key}: {value}\n")


def _emit_chain(out, chain: Optional[dynamics.TwoChain], budget: int):
    _emit(out, "budget", budget)
    if chain is None:
        _emit(out, "witness", "none")
        return
    _emit(out, "witness", "two-chain")
    _emit(out, "J1", chain.J1)
    _emit(out, "g1", str(chain.g1))
    _emit(out, "J2", chain.J2)
    _emit(out, "g2", str(chain.g2))


def _csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_real(v) if isinstance(v, float) else v for v in row])


# ------------------------------------------------------------- commands ---

def cmd_pl(args, out):
    af = read_action(args.file)
    gens = af.generators
    if args.gen not in gens:
        raise InputError(f"unknown generator {args.gen}")
    f = gens[args.gen]
    if args.op == "evaluate":
        x = parse_rational(args.x)
        if not 0 <= x <= 1:
            raise InputError("x must lie in [0,1]")
        _emit(out, "value", exact_pl.evaluate(f, x))
    elif args.op == "invert":
        out.write(ActionFile({f"{args.gen}_inv": exact_pl.invert(f)}, af.name, af.budget).dumps())
    elif args.op == "compose":
        if args.gen2 not in gens:
            raise InputError("compose needs --gen2")
        h = exact_pl.compose(f, gens[args.gen2])
        out.write(ActionFile({f"{args.gen}_{args.gen2}": h}, af.name, af.budget).dumps())
    elif args.op == "support":
        comps = exact_pl.support_components(f)
        _emit(out, "components", len(comps))
        for J in comps:
            _emit(out, "component", J)


def cmd_dynamics(args, out):
    if args.op == "f-check":
        _emit(out, "budget", args.budget or 2)
        _emit(out, "disjoint", dynamics.f_disjoint_commutators_check(args.budget or 2))
        return
    if not args.file:
        raise InputError("--file is required")
    af = read_action(args.file)
    exclude = [args.c] if args.c else []
    action = af.action(args.budget, exclude)
    if args.op == "two-chain":
        _emit_chain(out, dynamics.find_two_chain(action), action.word_budget)
    elif args.op == "crossed-pair":
        w = dynamics.find_crossed_pair(action, args.variant)
        _emit(out, "budget", action.word_budget)
        if w is None:
            _emit(out, "witness", "none")
        else:
            _emit(out, "witness", w.variant)
            _emit(out, "f", str(w.f))
            _emit(out, "g", str(w.g))
            if w.J is not None:
                _emit(out, "J", w.J)
            if w.a is not None:
                _emit(out, "a", w.a)
                _emit(out, "b", w.b)
    elif args.op == "conradian":
        v = dynamics.conradian_diagnostic(action)
        if isinstance(v, dynamics.NonConradian):
            _emit(out, "verdict", "non-conradian")
            _emit_chain(out, v.witness, v.budget)
        else:
            _emit(out, "verdict", "no-witness")
            _emit(out, "budget", v.budget)
    elif args.op == "classify":
        cls = dynamics.classify_supports(action)
        _emit(out, "budget", cls.budget)
        for J, w in cls.nested:
            _emit(out, "nested", f"{fmt_interval(J)} {w}")
        for J in cls.crossed_candidates:
            _emit(out, "crossed", fmt_interval(J))
    elif args.op in ("centralizer-obstruction", "extract-nesting"):
        c_name = args.c or (af.equivariant[0] if af.equivariant else None)
        if c_name is None or c_name not in af.generators:
            raise InputError("--c must name the centralizing generator")
        c = af.generators[c_name]
        if args.op == "centralizer-obstruction":
            _emit_chain(out, dynamics.centralizer_obstruction(c, action), action.word_budget)
        else:
            w = dynamics.extract_nesting_witness(action, args.k, c)
            _emit(out, "budget", action.word_budget)
            if w is None:
                _emit(out, "witness", "none")
                return
            _emit(out, "witness", f"({w.k},1)-nesting")
            for i, (lo, hi) in enumerate(w.intervals, 1):
                _emit(out, f"J{i}", Interval(lo, hi))
            for i, n in enumerate(w.names):
                _emit(out, f"map{i}", n)
            rep = regularity.verify_nesting_witness(w, args.n_max, args.tail_tol)
            _emit(out, "condition_ii", rep.condition_ii)


def _params(args) -> tsuboi.Params:
    return tsuboi.Params(tau=args.tau, p=args.p, q=args.q, q_prime=args.qprime, r=args.r)


def cmd_tsuboi(args, out):
    params = _params(args)
    st = tsuboi.build_level_structure(params, args.N)
    if args.op == "build":
        _emit(out, "blocks", st.count)
        _emit(out, "gap_left", float(st.gap_left))
        _emit(out, "gap_right", float(st.gap_right))
        if args.csv:
            labels = st.label(range(st.count))
            _csv(out, ["i", "j", "k", "start", "length"],
                 [(int(i), int(j), int(k), float(s), float(l))
                  for (i, j, k), s, l in zip(labels, st.starts, st.lengths)])
        return
    action = tsuboi.build_generators(st)
    comm = tsuboi.verify_commutations(action, args.samples, args.seed)
    for k, v in comm.items():
        _emit(out, f"commutator {k}", v)
    for k, v in tsuboi.junction_mismatch(action).items():
        _emit(out, f"junction {k}", v)
    for name in ("a", "b", "t"):
        h = tsuboi.sampled_derivative_holder(action, name, max(args.N - 2, 0))
        _emit(out, f"holder {name}'", h.value)
    disp = tsuboi.block_displacement_check(action, args.points)
    _emit(out, "displacement_blocks", disp["blocks"])
    _emit(out, "displacement_worst_ratio", disp["worst_ratio"])
    _emit(out, "displacement_passed", disp["passed"])


def cmd_feasibility(args, out):
    if args.op == "check":
        res = feasibility.check_conditions(_params(args))
        for k, v in res.as_dict().items():
            _emit(out, k, v)
        _emit(out, "feasible", res.feasible)
    elif args.op == "find":
        p = feasibility.find_feasible(args.tau)
        if p is None:
            _emit(out, "tuple", "none")
            return
        for k in ("tau", "p", "q", "q_prime", "r"):
            _emit(out, k, float(getattr(p, k)))
    elif args.op == "sup-tau":
        _emit(out, "sup_tau", feasibility.sup_tau(args.tol))
    elif args.op == "region":
        taus = _grid(args.taus)
        qs = [2.0 ** k for k in range(1, 21)] if args.qs is None else _grid(args.qs)
        rows = feasibility.emit_region(taus, qs)
        _csv(out, ["tau", "q", "lower", "upper", "feasible"],
             [(r["tau"], r["q"], r["lower"], r["upper"], r["feasible"]) for r in rows])


def _grid(text: str) -> List[float]:
    """"a:b:n" (n evenly spaced points) or a comma list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            a, b, n = float(a), float(b), int(n)
            return [a + (b - a) * i / (n - 1) for i in range(n)] if n > 1 else [a]
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}") from exc


def cmd_nesting(args, out):
    af = read_action(args.file)
    w = witness_from_file(af)
    rep = regularity.verify_nesting_witness(w, args.n_max, args.tail_tol)
    _emit(out, "accepted", rep.accepted)
    _emit(out, "condition_ii", rep.condition_ii)
    if rep.failing_step is not None:
        _emit(out, "failing_step", f"n={rep.failing_step[0]} i={rep.failing_step[1]}")
        _emit(out, "reason", rep.reason)
    _emit(out, "partial_sum", rep.partial_sum)
    _emit(out, "rho", rep.rho)
    _emit(out, "tail_bound", rep.tail_bound)
    if args.tau is not None:
        kq = regularity.knest_contradiction_quantities(w, args.tau, n_max=args.n_max)
        _emit(out, "lemma_applies", kq.lemma_applies)
        _emit(out, "N", kq.N)
        _emit(out, "N_bar", kq.N_bar)
        _emit(out, "implied_holder", kq.implied_holder)
        _emit(out, "inconsistent", kq.inconsistent)
    if args.csv:
        _csv(out, ["n", "length_J1", "partial_sum"], rep.csv_rows())


def cmd_stochastic(args, out):
    if args.op == "omega":
        weight = stochastic.test_weight(args.d)
        st = stochastic.omega_sum_monte_carlo(weight, args.tau, args.n_max, args.trials, args.seed)
        partial, closed = stochastic.expectation_bound(args.d, args.tau, args.n_max)
        _emit(out, "mean", st.mean)
        _emit(out, "stderr", st.stderr)
        _emit(out, "max", st.max)
        _emit(out, "bound_partial", partial)
        _emit(out, "bound_closed", closed)
        if args.csv:
            steps = st.checkpoint_steps
            _csv(out, ["trial"] + [f"n={s}" for s in steps], st.csv_rows())
        return
    af = read_action(args.file)
    try:
        g1 = exact_pl.word_map(GroupWord.parse(args.g1), af.generators)
        g2 = exact_pl.word_map(GroupWord.parse(args.g2), af.generators)
    except KeyError as exc:
        raise InputError(f"unknown generator {exc}") from exc
    lo, hi = args.u0.split(",")
    U0 = Interval(parse_rational(lo), parse_rational(hi))
    m, n = stochastic.ping_powers(g1, g2, U0)
    rep = stochastic.ping_orbit_sums(g1 ** m, g2 ** n, U0, args.tau, args.n_max, args.trials, args.seed)
    _emit(out, "powers", f"{m} {n}")
    _emit(out, "disjoint", rep.disjoint)
    _emit(out, "words_checked", rep.words_checked)
    _emit(out, "max_layer_mass", rep.max_layer_mass)
    _emit(out, "mean", rep.stats.mean)
    _emit(out, "stderr", rep.stats.stderr)
    _emit(out, "bound", rep.bound)


# --------------------------------------------------------------- parser ---

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="critreg", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1, help="worker cap (computations here are single-threaded)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pl", help="exact PL algebra on action files")
    p.add_argument("op", choices=["compose", "invert", "evaluate", "support"])
    p.add_argument("--file", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--gen2")
    p.add_argument("--x")
    p.set_defaults(func=cmd_pl)

    p = sub.add_parser("dynamics", help="two-chains, crossed pairs and certificates")
    p.add_argument("op", choices=["two-chain", "crossed-pair", "conradian", "classify",
                                  "centralizer-obstruction", "extract-nesting", "f-check"])
    p.add_argument("--file")
    p.add_argument("--budget", type=int)
    p.add_argument("--variant", choices=["boundary", "ping"], default="boundary")
    p.add_argument("--c", help="generator used as the centralizing map")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--tail-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("tsuboi", help="three-level block construction")
    p.add_argument("op", choices=["build", "verify"])
    for flag in ("--tau", "--p", "--q", "--qprime", "--r"):
        p.add_argument(flag, type=float, required=True)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--points", type=int, default=1000, help="displacement grid points per block")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_tsuboi)

    p = sub.add_parser("feasibility", help="parameter inequalities and threshold")
    p.add_argument("op", choices=["check", "find", "sup-tau", "region"])
    p.add_argument("--tau", type=float)
    for flag in ("--p", "--q", "--qprime", "--r"):
        p.add_argument(flag, type=float)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--taus", default="0.05:0.95:19")
    p.add_argument("--qs")
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("nesting", help="verify a (k,u)-nesting witness file")
    p.add_argument("op", choices=["verify"])
    p.add_argument("--file", required=True)
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--tail-tol", type=float, default=1e-6)
    p.add_argument("--tau", type=float)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_nesting)

    p = sub.add_parser("stochastic", help="Monte Carlo summability")
    p.add_argument("op", choices=["omega", "ping"])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--file")
    p.add_argument("--g1", help="word moving U0 right, e.g. f")
    p.add_argument("--g2", help="word moving U0 left, e.g. g^-1")
    p.add_argument("--u0", help="lo,hi")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_stochastic)
    return ap


_REQUIRED = {
    ("feasibility", "check"): ("tau", "p", "q", "qprime", "r"),
    ("feasibility", "find"): ("tau",),
    ("stochastic", "ping"): ("file", "g1", "g2", "u0"),
}


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_INPUT
    missing = [f for f in _REQUIRED.get((args.command, getattr(args, "op", None)), ())
               if getattr(args, f) is None]
    if missing:
        print(f"error: missing --{', --'.join(missing)}", file=sys.stderr)
        return EXIT_INPUT
    try:
        args.func(args, out)
    except (InputError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); silence the flush at exit
        sys.stdout = open(os.devnull, "w")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
