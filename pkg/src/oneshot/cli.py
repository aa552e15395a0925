"""Command-line interface: ``oneshot <command> [options]``.

Inputs are JSON files in the formats of the owning modules, or built-ins:
``builtin:prevedel`` and ``builtin:peres`` (channels with their encodings),
``builtin:peres24`` and ``builtin:ck31`` (ray sets).

Exit codes: 0 success, 1 computation failure, 2 input error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .bounds import beta, check_noncontextual_bounds, cig_classical_max, classical_max, scenario_gamma
from .channel import (
    ClassicalChannel,
    Encoding,
    MessageEnsemble,
    admits_zero_error_code,
    eta_extremes,
    prevedel_channel,
    prevedel_encoding,
    validate_encoding,
)
from .errors import BudgetExceeded, ComputationError, InputError, OneshotError
from .hypergraph import DEFAULT_NODE_BUDGET, Hypergraph, SimpleGraph, independence_number, ks_colourable, orthogonality_graph
from .kssets import (
    VectorSet,
    complete_basis,
    completion_closure,
    load_builtin,
    max_disjoint_bases,
    orthogonality_scenario,
    peres_channel,
    ks_basis_set_search,
    verify_conway_kochen,
)
from .nonlocalgame import GameSpec, affine_check, affine_image, build_game, chsh_value, local_max, s_bell
from .polytope import DEFAULT_VERTEX_CAP
from .quantum import validate_strategy
from .rational import jsonable, to_fraction
from .strategy import (
    CorrelationBox,
    box_from_strategy,
    cig_joint_from_box,
    corr,
    cubitt_strategy,
    effective_box,
    pr_box,
    prevedel_strategy,
    prevedel_wiring,
    random_chsh_box,
    random_nonsignalling_box,
    random_wiring,
    success_probability,
    success_probability_cig,
)

THREADS_ENV = "ONESHOT_THREADS"


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    exact: dict = field(default_factory=dict)
    floating: dict = field(default_factory=dict)
    tolerance: float | None = None
    witnesses: dict = field(default_factory=dict)
    ok: bool = True
    wall_time: float = 0.0

    def body(self) -> dict:
        out = {"command": self.command, "inputs_digest": self.inputs_digest, "ok": self.ok, "exact": self.exact}
        if self.floating:
            out["floating"] = self.floating
            out["tolerance"] = self.tolerance
        if self.witnesses:
            out["witnesses"] = self.witnesses
        return jsonable(out)

    def to_json(self) -> dict:
        return {**self.body(), "wall_time": round(self.wall_time, 6)}

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"inputs_digest: {self.inputs_digest}", f"ok: {self.ok}"]
        body = self.body()
        for section in ("exact", "floating", "witnesses"):
            if section in body and body[section]:
                lines.append(f"{section}:")
                lines.extend(_text_lines(body[section], 1))
        if "tolerance" in body:
            lines.append(f"tolerance: {body['tolerance']}")
        lines.append(f"wall_time: {self.wall_time:.6f}")
        return "\n".join(lines)


def _text_lines(obj, depth):
    pad = "  " * depth
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                out.append(f"{pad}{k}:")
                out.extend(_text_lines(v, depth + 1))
            else:
                out.append(f"{pad}{k}: {_inline(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat(v):
                out.append(f"{pad}-")
                out.extend(_text_lines(v, depth + 1))
            else:
                out.append(f"{pad}- {_inline(v)}")
    return out


def _flat(v):
    if isinstance(v, list):
        return all(not isinstance(x, (dict, list)) for x in v)
    return False


def _inline(v):
    if isinstance(v, list):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return str(v)


# -- input handling -----------------------------------------------------------------


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _peek(path) -> dict:
    data = _read_json(path)
    return data if isinstance(data, dict) else {}


class Inputs:
    """Collects everything read so the report can carry a digest of it."""

    def __init__(self):
        self.parts = []

    def note(self, label, content):
        self.parts.append((label, json.dumps(jsonable(content), sort_keys=True)))

    def digest(self) -> str:
        h = hashlib.sha256()
        for label, text in self.parts:
            h.update(label.encode())
            h.update(b"\0")
            h.update(text.encode())
            h.update(b"\0")
        return h.hexdigest()[:16]

    def channel(self, spec: str):
        """(channel, encoding or None)."""
        if spec == "builtin:prevedel":
            self.note("channel", spec)
            return prevedel_channel(), prevedel_encoding()
        if spec in ("builtin:peres", "builtin:cubitt"):
            self.note("channel", spec)
            return peres_channel()
        if spec.startswith("builtin:"):
            raise InputError(f"unknown built-in channel {spec!r} (known: builtin:prevedel, builtin:peres)")
        data = _read_json(spec)
        self.note("channel", data)
        if "inputs" not in data and "output_uniform" not in data and "hyperedges" in data:
            from .channel import output_uniform_channel

            return output_uniform_channel(Hypergraph.from_json(data)), None
        return ClassicalChannel.from_json(data), None

    def encoding(self, spec):
        data = _read_json(spec)
        self.note("encoding", data)
        return Encoding.from_json(data)

    def hypergraph(self, spec: str) -> Hypergraph:
        if spec.startswith("builtin:"):
            name = spec.split(":", 1)[1]
            if name in ("prevedel", "peres", "cubitt"):
                return self.channel(spec)[0].hypergraph()
            self.note("hypergraph", spec)
            return load_builtin(name).hypergraph
        data = _read_json(spec)
        self.note("hypergraph", data)
        if "hyperedges" in data:
            return Hypergraph.from_json(data)
        if "inputs" in data or "output_uniform" in data:
            return ClassicalChannel.from_json(data).hypergraph()
        if "rays" in data:
            return orthogonality_scenario(VectorSet.from_json(data)).hypergraph
        raise InputError(f"{spec}: not a hypergraph, channel or ray-set file")

    def graph(self, spec: str) -> SimpleGraph:
        """Orthogonality graph: exact ray orthogonality for ray sets, shared hyperedges otherwise."""
        if spec in ("builtin:ck31", "builtin:peres24") or (not spec.startswith("builtin:") and "rays" in _peek(spec)):
            return self.rays(spec).orthogonality_graph()
        return orthogonality_graph(self.hypergraph(spec))

    def rays(self, spec: str):
        if spec.startswith("builtin:"):
            self.note("rays", spec)
            return load_builtin(spec.split(":", 1)[1])
        data = _read_json(spec)
        self.note("rays", data)
        return orthogonality_scenario(VectorSet.from_json(data))

    def box(self, spec: str) -> CorrelationBox:
        data = _read_json(spec)
        self.note("box", data)
        return CorrelationBox.from_json(data)


def _channel_and_messages(inp: Inputs, args):
    N, E = inp.channel(args.channel)
    if getattr(args, "encoding", None):
        E = inp.encoding(args.encoding)
    if E is not None:
        msgs = E.messages
    else:
        q = getattr(args, "messages", None) or 2
        msgs = [f"m{i}" for i in range(q)]
    inp.note("messages", list(msgs))
    return N, E, MessageEnsemble.uniform(msgs)


def _need_encoding(E):
    if E is None:
        raise InputError("this command needs --encoding (or a built-in channel that carries one)")
    return E


# -- commands -------------------------------------------------------------------------


def cmd_alpha(args, inp, rep):
    size, wit = independence_number(inp.graph(args.input), args.budget_nodes)
    rep.exact["alpha"] = size
    rep.witnesses["independent_set"] = list(wit)


def cmd_colourable(args, inp, rep):
    H = inp.hypergraph(args.input)
    ok, col = ks_colourable(H, args.budget_nodes)
    rep.exact["colourable"] = ok
    if ok:
        rep.witnesses["ones"] = col.ones()


def cmd_channel_info(args, inp, rep):
    N, E, p = _channel_and_messages(inp, args)
    H = N.hypergraph()
    rep.exact.update(
        {
            "inputs": len(N.inputs),
            "outputs": len(N.outputs),
            "regularity": N.regularity(),
            "output_uniform": N.is_output_uniform(),
            "alpha": independence_number(N.confusability_graph(), args.budget_nodes)[0],
            "ks_colourable": ks_colourable(H, args.budget_nodes)[0],
        }
    )
    if E is not None:
        problems = validate_encoding(N, E)
        rep.exact["encoding_valid"] = not problems
        if problems:
            rep.witnesses["encoding_violations"] = problems
        else:
            lo, hi = eta_extremes(N, E)
            rep.exact["eta_min"], rep.exact["eta_max"] = lo, hi
            ok, code = admits_zero_error_code(N, E, args.budget_nodes)
            rep.exact["zero_error_code"] = ok
            if ok:
                rep.witnesses["zero_error_code"] = code


def cmd_classical_bound(args, inp, rep):
    N, E, p = _channel_and_messages(inp, args)
    cert = classical_max(N, p, args.budget_nodes)
    rep.exact["classical_max"] = cert.value
    rep.exact["method"] = cert.method
    rep.witnesses.update(cert.witness)


def cmd_cig_bound(args, inp, rep):
    N, E, p = _channel_and_messages(inp, args)
    E = _need_encoding(E)
    cert = cig_classical_max(N, E, p, args.method, args.vertex_cap, args.budget_nodes, args.threads)
    rep.exact["cig_classical_max"] = cert.value
    rep.exact["method"] = cert.method
    b = beta(scenario_gamma(N, E), E, p, "vertices", args.vertex_cap, args.budget_nodes)
    lo, hi = eta_extremes(N, E)
    rep.exact["eta_max_plus_beta_bound"] = hi + (1 - hi) * b.value
    rep.witnesses.update(cert.witness)


def cmd_beta(args, inp, rep):
    N, E, p = _channel_and_messages(inp, args)
    E = _need_encoding(E)
    cert = beta(scenario_gamma(N, E), E, p, args.method, args.vertex_cap, args.budget_nodes, args.threads)
    rep.exact["beta"] = cert.value
    rep.exact["method"] = cert.method
    rep.witnesses.update(cert.witness)


def cmd_simulate(args, inp, rep):
    rep.tolerance = args.tolerance
    inp.note("strategy", [args.strategy, args.visibility])
    if args.strategy == "cubitt":
        S = load_builtin("peres24")
        strat, wiring, N, E = cubitt_strategy(S, args.visibility)
        problems = validate_strategy(strat, args.tolerance)
        if problems:
            raise ComputationError("invalid strategy: " + "; ".join(problems))
        p = MessageEnsemble.uniform(E.messages)
        raw = box_from_strategy(strat, N.inputs, N.inputs)
        eff = effective_box(raw, wiring, N.inputs, N.outputs, E.messages)
        joint = cig_joint_from_box(raw, N, E)
        S_val = success_probability(N, p, eff)
        c = corr(joint, p)
        rep.floating.update({"S": S_val, "S_cig": success_probability_cig(N, E, p, joint), "Corr": c})
        b = beta(scenario_gamma(N, E), E, p, "vertices", args.vertex_cap, args.budget_nodes)
        lo, hi = eta_extremes(N, E)
        verdict = check_noncontextual_bounds(c, b, lo, hi, S_val, tol=args.tolerance)
        rep.exact["beta"] = b.value
        rep.exact["verdict"] = verdict["verdict"]
        rep.floating["S_bell"] = s_bell(build_game(N, p), eff)
        return
    if args.strategy in ("prevedel", "pr"):
        N, E = prevedel_channel(), prevedel_encoding()
        p = MessageEnsemble.uniform(E.messages)
        if args.strategy == "prevedel":
            strat, wiring = prevedel_strategy(args.visibility)
            problems = validate_strategy(strat, args.tolerance)
            if problems:
                raise ComputationError("invalid strategy: " + "; ".join(problems))
            raw = box_from_strategy(strat)
        else:
            raw, wiring = pr_box(), prevedel_wiring()
        eff = effective_box(raw, wiring, N.inputs, N.outputs)
        rep.floating.update(
            {
                "S": success_probability(N, p, eff),
                "S_CHSH": chsh_value(raw),
                "S_bell": s_bell(build_game(N, p), eff),
                "quantum_target": 1 / 3 + (2 + math.sqrt(2)) / 6,
            }
        )
        rep.exact["classical_max"] = classical_max(N, p, args.budget_nodes).value
        return
    # file: an effective box on a given channel
    if not args.box or not args.channel:
        raise InputError("--strategy file needs --box and --channel")
    N, E, p = _channel_and_messages(inp, args)
    box = inp.box(args.box)
    problems = box.violations(args.tolerance)
    if problems:
        raise InputError("box invalid: " + "; ".join(problems))
    rep.floating["S"] = success_probability(N, p, box)


def cmd_game(args, inp, rep):
    if args.action == "local-bound" and args.game:
        data = _read_json(args.game)
        inp.note("game", data)
        cert = local_max(GameSpec.from_json(data), args.budget_nodes)
        rep.exact["local_max"] = cert.value
        rep.witnesses.update(cert.witness)
        return
    if not args.channel:
        raise InputError("game needs a channel (or --game for local-bound)")
    N, E, p = _channel_and_messages(inp, args)
    G = build_game(N, p)
    if args.action == "build":
        if args.out:
            with open(args.out, "w") as fh:
                json.dump(G.to_json(), fh, indent=1)
            rep.exact["written"] = args.out
        else:
            rep.witnesses["game"] = G.to_json()
        rep.exact["questions"] = [len(G.alice_questions), len(G.bob_questions)]
        rep.exact["answers"] = [len(G.alice_answers), len(G.bob_answers)]
    elif args.action == "local-bound":
        cert = local_max(G, args.budget_nodes)
        cl = classical_max(N, p, args.budget_nodes)
        rep.exact.update(
            {"local_max": cert.value, "classical_max": cl.value, "affine_image": affine_image(N, cl.value), "equal": cert.value == affine_image(N, cl.value)}
        )
        rep.witnesses.update(cert.witness)
        rep.ok = cert.value == affine_image(N, cl.value)
    else:  # affine-check
        rep.tolerance = args.tolerance
        if args.box:
            boxes = [inp.box(args.box)]
        else:
            rng = np.random.default_rng(args.seed)
            inp.note("random", [args.seed, args.random])
            boxes = [random_nonsignalling_box(p.messages, N.inputs, N.outputs, p.messages, rng, d=2) for _ in range(args.random)]
        worst = max(affine_check(N, p, b, args.tolerance) for b in boxes)
        rep.floating["max_residual"] = worst
        rep.exact["boxes"] = len(boxes)
        rep.ok = worst < 1e-12


def cmd_ks(args, inp, rep):
    if args.action == "complete" and args.vectors:
        vecs = [[to_fraction(c.strip()) for c in v.split(",")] for v in args.vectors.split(";")]
        inp.note("vectors", vecs)
        rep.exact["completion"] = list(complete_basis(vecs))
        return
    if not args.input:
        raise InputError("ks needs a ray-set file or builtin:ck31 / builtin:peres24")
    S = inp.rays(args.input)
    if args.action == "bases":
        rep.exact.update({"rays": len(S.hypergraph.vertices), "complete_bases": len(S.bases), "incomplete_bases": len(S.incomplete)})
        rep.witnesses["complete"] = [list(b) for b in S.bases]
        rep.witnesses["incomplete"] = [list(b) for b in S.incomplete]
    elif args.action == "complete":
        if S.vectors is None:
            raise InputError("completion needs rays")
        final, log = completion_closure(S.vectors, args.max_stages)
        rep.exact["stages"] = [st.to_json() for st in log]
        rep.exact["final_rays"] = len(final.ids)
        rep.witnesses["rays"] = final.to_json()["rays"]
    elif args.action == "disjoint":
        size, count, found = max_disjoint_bases(S, budget=args.budget_nodes)
        rep.exact.update({"max_disjoint": size, "count": count})
        rep.witnesses["families"] = [list(f) for f in found[: args.show]]
    else:  # ksbasis
        q_min = args.q_min
        if q_min is None:
            q_min = independence_number(S.orthogonality_graph(), args.budget_nodes)[0] + 1
        res = ks_basis_set_search(S, q_min, args.budget_nodes)
        rep.exact.update(res.to_json())
        if res.best is not None:
            rep.witnesses["refutation"] = [[list(pfx), j] for pfx, j in res.refutation.trace]


def cmd_verify(args, inp, rep):
    data = None
    if args.data:
        data = _read_json(args.data)
        inp.note("data", data)
    else:
        inp.note("data", "builtin:ck31")
    report = verify_conway_kochen(data, args.budget_nodes)
    rep.exact.update(report.to_json())
    rep.ok = report.passed


def cmd_suite(args, inp, rep):
    from .suite import run_suite

    only = {int(x) for x in args.only.split(",")} if args.only else None
    inp.note("suite", [sorted(only) if only else "all", args.seed])
    results = run_suite(only, args.seed)
    # timings vary run to run, so they stay out of the exact part of the report
    rows = []
    for r in results:
        row = r.to_json()
        del row["seconds"]
        row["checks"] = [c for c in row["checks"] if c["name"] != "runtime"]
        rows.append(row)
    rep.exact["criteria"] = rows
    rep.ok = all(r.passed for r in results)
    rep.floating["seconds"] = {str(r.number): round(r.seconds, 3) for r in results}
    rep.floating["runtime_ok"] = {str(r.number): next((ok for n, ok, _ in r.checks if n == "runtime"), True) for r in results}


COMMANDS = {
    "alpha": cmd_alpha,
    "colourable": cmd_colourable,
    "channel-info": cmd_channel_info,
    "classical-bound": cmd_classical_bound,
    "cig-bound": cmd_cig_bound,
    "beta": cmd_beta,
    "simulate": cmd_simulate,
    "game": cmd_game,
    "ks": cmd_ks,
    "verify-appendix-f": cmd_verify,
    "paper-suite": cmd_suite,
}


def _threads_default():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-nodes", type=int, default=DEFAULT_NODE_BUDGET, help="search-node budget (exit 3 when exceeded)")
    common.add_argument("--vertex-cap", type=int, default=DEFAULT_VERTEX_CAP, help="maximum polytope vertices")
    common.add_argument("--tolerance", type=float, default=1e-9, help="tolerance for floating (quantum-side) checks")
    common.add_argument("--seed", type=int, default=0, help="seed for random boxes")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--threads", type=int, default=_threads_default(), help=f"worker processes (default ${THREADS_ENV} or 1)")

    parser = argparse.ArgumentParser(prog="oneshot", description="One-shot communication bounds, strategies and KS-set checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def channel_args(p, encoding=True):
        p.add_argument("channel", help="channel JSON file, hypergraph file (output-uniform) or builtin:prevedel / builtin:peres")
        if encoding:
            p.add_argument("--encoding", help="encoding JSON {message: [inputs]}")
        p.add_argument("--messages", type=int, help="number of uniform messages when no encoding is given (default 2)")

    p = sub.add_parser("alpha", parents=[common], help="independence number of the orthogonality graph")
    p.add_argument("input", help="hypergraph, channel or ray-set file, or a builtin")
    p = sub.add_parser("colourable", parents=[common], help="KS-colourability with witness")
    p.add_argument("input")
    p = sub.add_parser("channel-info", parents=[common], help="structural facts about a channel")
    channel_args(p)
    p = sub.add_parser("classical-bound", parents=[common], help="exact classical maximum success probability")
    channel_args(p)
    for name, helptext in (("cig-bound", "classical maximum under context-independent guessing"), ("beta", "weighted max-predictability")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        channel_args(p)
        p.add_argument("--method", choices=("vertices", "lp", "both"), default="vertices")
    p = sub.add_parser("simulate", parents=[common], help="evaluate a named strategy or a box file")
    p.add_argument("--strategy", choices=("cubitt", "prevedel", "pr", "file"), required=True)
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--box")
    p.add_argument("--channel")
    p.add_argument("--encoding")
    p.add_argument("--messages", type=int)
    p = sub.add_parser("game", parents=[common], help="nonlocal game from a channel")
    p.add_argument("action", choices=("build", "local-bound", "affine-check"))
    p.add_argument("channel", nargs="?")
    p.add_argument("--encoding")
    p.add_argument("--messages", type=int)
    p.add_argument("--game", help="game JSON (local-bound only)")
    p.add_argument("--box", help="box JSON (affine-check)")
    p.add_argument("--random", type=int, default=100, help="number of random boxes for affine-check")
    p.add_argument("--out")
    p = sub.add_parser("ks", parents=[common], help="KS-set tools")
    p.add_argument("action", choices=("bases", "complete", "disjoint", "ksbasis"))
    p.add_argument("input", nargs="?", help="ray-set file or builtin:ck31 / builtin:peres24")
    p.add_argument("--vectors", help="complete one basis: 'a,b,c;d,e,f'")
    p.add_argument("--max-stages", type=int, default=16)
    p.add_argument("--q-min", type=int)
    p.add_argument("--show", type=int, default=10, help="witness families to print")
    p = sub.add_parser("verify-appendix-f", parents=[common], help="recheck every Conway-Kochen claim")
    p.add_argument("--data", help="alternative reference data file")
    p = sub.add_parser("paper-suite", parents=[common], help="run the acceptance criteria")
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def dispatch(argv=None) -> tuple[int, RunReport | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    inp = Inputs()
    rep = RunReport(args.command, "")
    t0 = time.perf_counter()
    code = 0
    try:
        COMMANDS[args.command](args, inp, rep)
        if not rep.ok:
            code = 1
    except InputError as exc:
        rep.ok, code = False, 2
        rep.exact["error"] = f"input error: {exc}"
    except BudgetExceeded as exc:
        rep.ok, code = False, 3
        rep.exact["error"] = f"budget exceeded: {exc}"
        if exc.best is not None:
            rep.exact["best_found"] = exc.best
    except (ComputationError, OneshotError) as exc:
        rep.ok, code = False, 1
        rep.exact["error"] = f"computation failed: {exc}"
    rep.inputs_digest = inp.digest()
    rep.wall_time = time.perf_counter() - t0
    text = json.dumps(rep.to_json(), indent=1) if args.format == "json" else rep.to_text()
    stream = sys.stdout if code == 0 else sys.stderr if code != 1 else sys.stdout
    print(text, file=stream)
    return code, rep


def main(argv=None) -> int:
    code, _ = dispatch(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
