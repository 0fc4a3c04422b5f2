"""
Scenario runner: configures protocols from a JSON document, executes
experiment suites in a thread pool, and writes ``report.csv`` plus
``summary.json`` (and, by default, simple matplotlib figures) to an output
directory.

CSV column order (fixed; floats use 12 significant digits):
scenario_id, seed, accept_probability, td_to_target, td_to_approx_target,
reject_flag_prob, reject_swap_prob, bound_lhs, bound_rhs, bound_holds,
wall_time_s. The leading '# generated ...' comment line and the wall_time_s
column are excluded from determinism comparisons.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import targets as target_lib
from .qcore import QuantumState, RegisterLayout, trace_distance
from .stateproto import (
    EntanglementAttackProver,
    HonestProver,
    LyingProver,
    PhaseAttackProver,
    ProtocolConfig,
    SubVerifier,
    SwapSabotageProver,
    build_target_approximation,
    check_soundness_bound,
    constant_round_protocol,
    flawed_protocol,
    run_protocol,
)
from .tomography import OracleBackend
from .uniproto import lmr_apply, unitary_qip_apply

SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "scenario_id", "seed", "accept_probability", "td_to_target",
    "td_to_approx_target", "reject_flag_prob", "reject_swap_prob",
    "bound_lhs", "bound_rhs", "bound_holds", "wall_time_s",
]

SCENARIO_KINDS = (
    "state-synthesis", "unitary-synthesis", "attack-gallery",
    "tomography-bench", "lmr-bench", "constant-round",
)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Registries
# ---------------------------------------------------------------------------

def make_target_state(spec: dict) -> QuantumState:
    family = spec.get("family")
    n = int(spec.get("n", 1))
    if family == "zero":
        return target_lib.zero_state(n)
    if family == "plus":
        return target_lib.plus_state(n)
    if family == "ghz":
        return target_lib.ghz_state(n)
    if family == "w":
        return target_lib.w_state(n)
    if family == "random":
        return target_lib.random_state(n, int(spec.get("seed", 0)))
    if family == "random-circuit":
        return target_lib.random_circuit_state(
            n, int(spec.get("depth", 8)), int(spec.get("seed", 0)))
    raise UsageError(f"unknown target family {family!r}")


def make_unitary(spec: dict) -> np.ndarray:
    family = spec.get("family")
    if family == "diag-unitary":
        return target_lib.diag_unitary(spec["angles"])
    if family == "reflection":
        n = int(spec.get("n", 1))
        d = np.ones(2 ** n)
        d[-1] = -1.0
        return np.diag(d)
    if family == "random-unitary":
        return target_lib.random_unitary(
            2 ** int(spec.get("n", 1)), int(spec.get("seed", 0)))
    raise UsageError(f"unknown unitary family {family!r}")


def make_prover(spec: dict, approx):
    name = spec.get("name", "honest")
    if name == "honest":
        return HonestProver(approx)
    if name == "lying":
        wrong = {str(x): int(v) for x, v in spec.get("wrong", {}).items()}
        return LyingProver(approx, wrong)
    if name == "swap-sabotage":
        return SwapSabotageProver(approx, float(spec.get("overlap", 0.0)))
    if name == "phase-attack":
        base = make_prover(spec.get("base", {"name": "honest"}), approx)
        phases = {str(x): complex(np.exp(2j * np.pi * float(turns)))
                  for x, turns in spec.get("phases", {}).items()}
        return PhaseAttackProver(base, phases,
                                 trigger_k=spec.get("trigger_k"))
    if name == "entanglement-attack":
        base = make_prover(spec.get("base", {"name": "honest"}), approx)
        return EntanglementAttackProver(base, qubits=spec.get("qubits"),
                                        trigger_k=spec.get("trigger_k"))
    raise UsageError(f"unknown prover {name!r}")


DESCRIPTIONS = {
    "state-synthesis": "Run the interactive state-synthesis protocol "
    "(parameters: target, prover, protocol {t, b_string}, repetitions).",
    "unitary-synthesis": "Verified unitary application: synthesize the "
    "program state interactively and apply it by partial swaps "
    "(parameters: unitary, input, k).",
    "attack-gallery": "Run an adversarial prover against the flawed "
    "single-register protocol and/or the full protocol "
    "(parameters: target, attack, variant flawed|full).",
    "tomography-bench": "Build the dyadic approximation of a target from "
    "the cp/ph oracles and report its reconstruction distance "
    "(parameters: target, backend {mode, m, ell}).",
    "lmr-bench": "Density-matrix exponentiation error versus copy count "
    "(parameters: unitary or program, input, t, k).",
    "constant-round": "Run the constant-round protocol variant "
    "(parameters: target, messages overrides).",
    "zero": "Target family: the all-zeros computational basis state.",
    "plus": "Target family: the uniform superposition |+>^n.",
    "ghz": "Target family: (|0..0> + |1..1>)/sqrt(2).",
    "w": "Target family: uniform superposition of weight-1 strings.",
    "random": "Target family: Haar-like random state (parameters: n, seed).",
    "random-circuit": "Target family: random H/T/CNOT circuit applied to "
    "|0..0> (parameters: n, depth, seed).",
    "diag-unitary": "Unitary family: diagonal with eigenphases given in "
    "turns (parameter: angles).",
    "reflection": "Unitary family: I - 2|1..1><1..1|.",
    "random-unitary": "Unitary family: Haar-random (parameters: n, seed).",
    "honest": "Prover following the protocol exactly.",
    "lying": "Honest-shaped prover writing wrong oracle values for selected "
    "prefixes (parameter: wrong, a prefix -> numerator map).",
    "phase-attack": "Prover injecting branch-dependent phases during the "
    "forward step (parameters: phases, a bit-string -> turns map; "
    "trigger_k).",
    "entanglement-attack": "Prover copying message bits into its private "
    "register during the backward step (parameters: qubits, trigger_k).",
    "swap-sabotage": "Honest prover that rotates its B block to a state of "
    "configured squared overlap with the verifier's (parameter: overlap).",
    "sub-verifier": "Unitary lie detector with completeness 1 and "
    "configurable soundness (default 1/2; parameter: lie_soundness).",
}


# ---------------------------------------------------------------------------
# Scenario execution
# ---------------------------------------------------------------------------

@dataclass
class Row:
    scenario_id: str
    seed: int
    accept_probability: float = float("nan")
    td_to_target: float = float("nan")
    td_to_approx_target: float = float("nan")
    reject_flag_prob: float = 0.0
    reject_swap_prob: float = 0.0
    bound_lhs: float = float("nan")
    bound_rhs: float = float("nan")
    bound_holds: bool = True
    wall_time_s: float = 0.0


def _protocol_config(scn: dict, n: int, mode: str, seed: int) -> ProtocolConfig:
    proto = scn.get("protocol", {})
    return ProtocolConfig(
        n=n, t=proto.get("t"), ell=int(proto.get("ell", 10)),
        m=int(proto.get("m", 10)), mode=mode, seed=seed,
        b_string=proto.get("b_string"))


def _rejection_totals(result) -> tuple[float, float]:
    flag = sum(v["flag"] for v in result.branch_rejections.values())
    swap = sum(v["swap"] for v in result.branch_rejections.values())
    return flag, swap


def _fill_bound(row: Row, result, approx) -> None:
    if result.mode != "exact" or not result.leaves:
        return
    chk = check_soundness_bound(result, approx)
    if chk.lhs is not None:
        row.bound_lhs = chk.lhs
        row.bound_rhs = chk.rhs
    row.bound_holds = chk.holds


def run_one(scn: dict, rep: int, mode: str, base_seed: int) -> Row:
    seed = int(scn.get("seed", base_seed)) + rep
    row = Row(scenario_id=scn["id"], seed=seed)
    start = time.perf_counter()
    kind = scn["kind"]

    if kind in ("state-synthesis", "attack-gallery", "constant-round"):
        target = make_target_state(scn["target"])
        n = target.layout.total_width
        approx = build_target_approximation(target)
        subv = SubVerifier(approx, float(scn.get("lie_soundness", 0.5)))
        prover = make_prover(scn.get("prover", {"name": "honest"}), approx)
        cfg = _protocol_config(scn, n, mode, seed)
        if kind == "constant-round":
            result = constant_round_protocol(target, prover, subv, cfg)
        elif kind == "attack-gallery" and scn.get("variant", "flawed") == "flawed":
            result = flawed_protocol(target, prover, subv, cfg)
        else:
            result = run_protocol(target, prover, subv, cfg)
        row.accept_probability = result.accept_probability
        if result.td_to_target is not None:
            row.td_to_target = result.td_to_target
            row.td_to_approx_target = result.td_to_approx_target
        row.reject_flag_prob, row.reject_swap_prob = _rejection_totals(result)
        if kind != "constant-round" and result.metadata.get("t"):
            _fill_bound(row, result, approx)

    elif kind == "unitary-synthesis":
        u = make_unitary(scn["unitary"])
        phi = make_target_state(scn["input"])
        k = scn.get("k")
        result = unitary_qip_apply(u, phi, k=None if k is None else int(k))
        row.accept_probability = result.accept_probability
        if result.td_to_target is not None:
            row.td_to_target = result.td_to_target
        row.reject_flag_prob, row.reject_swap_prob = _rejection_totals(result)

    elif kind == "tomography-bench":
        target = make_target_state(scn["target"])
        bk = scn.get("backend", {})
        backend = OracleBackend(mode=bk.get("mode", "exact"),
                                m=int(bk.get("m", 10)), ell=bk.get("ell"),
                                seed=seed)
        approx = build_target_approximation(target, backend=backend)
        row.accept_probability = 1.0
        row.td_to_target = approx.td_to_target
        row.bound_lhs = approx.td_to_target
        row.bound_rhs = approx.td_bound
        row.bound_holds = approx.td_to_target <= approx.td_bound + 1e-9

    elif kind == "lmr-bench":
        u = make_unitary(scn["unitary"])
        phi = make_target_state(scn["input"])
        from .uniproto import canonical_program
        prog = canonical_program(u)
        k = int(scn.get("k", 200))
        sigma = lmr_apply(phi.density(), prog.rho, prog.t, k)
        exact = u @ phi.density().matrix @ u.conj().T
        from .qcore import DensityMatrix
        row.accept_probability = 1.0
        row.td_to_target = trace_distance(
            sigma, DensityMatrix(phi.layout, exact))

    else:
        raise UsageError(f"unknown scenario kind {kind!r}")

    row.wall_time_s = time.perf_counter() - start
    return row


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def write_report(rows: list[Row], out_dir: Path, config: dict,
                 figures: bool = True) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = sorted(rows, key=lambda r: (r.scenario_id, r.seed))
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    with open(out_dir / "report.csv", "w", newline="") as fh:
        fh.write(f"# generated {stamp}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])

    per_scenario: dict = {}
    for r in rows:
        agg = per_scenario.setdefault(r.scenario_id, {"rows": []})
        agg["rows"].append({c: getattr(r, c) for c in CSV_COLUMNS})
    for sid, agg in per_scenario.items():
        accepts = [x["accept_probability"] for x in agg["rows"]]
        tds = [x["td_to_target"] for x in agg["rows"]
               if np.isfinite(x["td_to_target"])]
        agg["accept_mean"] = float(np.mean(accepts))
        agg["td_to_target_max"] = float(max(tds)) if tds else None
        agg["bound_holds_all"] = all(x["bound_holds"] for x in agg["rows"])
    summary = {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "scenarios": per_scenario,
        "all_bounds_hold": all(agg["bound_holds_all"]
                               for agg in per_scenario.values()),
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, default=str)

    if figures:
        render_figures(rows, out_dir)
    return summary


def render_figures(rows: list[Row], out_dir: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig_dir = out_dir / "figures"
    fig_dir.mkdir(exist_ok=True)
    by_id: dict = {}
    for r in rows:
        by_id.setdefault(r.scenario_id, []).append(r)
    for sid, group in by_id.items():
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3))
        seeds = [r.seed for r in group]
        ax1.bar(range(len(group)), [r.accept_probability for r in group])
        ax1.set_xticks(range(len(group)), [str(s) for s in seeds])
        ax1.set_ylabel("accept probability")
        ax1.set_xlabel("seed")
        tds = [r.td_to_target for r in group]
        ax2.bar(range(len(group)), tds, color="tab:orange")
        ax2.set_xticks(range(len(group)), [str(s) for s in seeds])
        ax2.set_ylabel("td to target")
        ax2.set_xlabel("seed")
        fig.suptitle(sid)
        fig.tight_layout()
        fig.savefig(fig_dir / f"{sid}.png", dpi=100)
        plt.close(fig)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def run_scenarios(config: dict, out_dir: Path, threads: int = 1,
                  mode: str | None = None, seed: int | None = None,
                  figures: bool = True) -> int:
    if config.get("schema_version") != SCHEMA_VERSION:
        raise UsageError(f"config schema_version must be {SCHEMA_VERSION}")
    scenarios = config.get("scenarios")
    if not isinstance(scenarios, list) or not scenarios:
        raise UsageError("config must contain a non-empty 'scenarios' list")
    seen = set()
    jobs = []
    for scn in scenarios:
        if "id" not in scn or "kind" not in scn:
            raise UsageError("every scenario needs 'id' and 'kind'")
        if scn["kind"] not in SCENARIO_KINDS:
            raise UsageError(f"unknown scenario kind {scn['kind']!r}")
        if scn["id"] in seen:
            raise UsageError(f"duplicate scenario id {scn['id']!r}")
        seen.add(scn["id"])
        scn_mode = mode or scn.get("mode", "exact")
        for rep in range(int(scn.get("repetitions", 1))):
            jobs.append((scn, rep, scn_mode))
    base_seed = 0 if seed is None else int(seed)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda j: run_one(j[0], j[1], j[2], base_seed), jobs))
    else:
        rows = [run_one(scn, rep, m, base_seed) for scn, rep, m in jobs]
    summary = write_report(rows, out_dir, config, figures=figures)
    return 0 if summary["all_bounds_hold"] else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qsynth",
        description="Interactive quantum state/unitary synthesis scenarios.")
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="execute a JSON scenario config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", type=Path, default=Path("qsynth-out"))
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--mode", choices=["exact", "trajectory"], default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--no-figures", action="store_true")
    sub.add_parser("list", help="list scenario kinds, families and provers")
    p_desc = sub.add_parser("describe", help="describe a named component")
    p_desc.add_argument("name")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            try:
                config = json.loads(args.config.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config: {exc}") from exc
            return run_scenarios(config, args.out, threads=args.threads,
                                 mode=args.mode, seed=args.seed,
                                 figures=not args.no_figures)
        if args.command == "list":
            print("scenario kinds: " + ", ".join(SCENARIO_KINDS))
            print("target families: zero, plus, ghz, w, random, "
                  "random-circuit")
            print("unitary families: diag-unitary, reflection, "
                  "random-unitary")
            print("provers: honest, lying, phase-attack, "
                  "entanglement-attack, swap-sabotage")
            print("sub-verifiers: sub-verifier (lie_soundness in (0, 1])")
            return 0
        if args.command == "describe":
            if args.name not in DESCRIPTIONS:
                raise UsageError(f"unknown component {args.name!r}")
            print(f"{args.name}: {DESCRIPTIONS[args.name]}")
            return 0
        parser.print_help()
        return 1
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
