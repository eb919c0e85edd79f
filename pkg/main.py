"""
ShareChain Command Line
Reproduces the worked share tables, runs sessions and chain scenarios, inspects stored chains

Usage:
    python main.py paper-example 1|2
    python main.py run <scenario> [--allow-abort] [--reveal] [--transcript PATH] [--view public|private] [--chain PATH]
    python main.py chain-inspect <store>

Exit codes: 0 success, 1 protocol abort or invalid chain, 2 usage/config error, 3 self-check failure
"""

import argparse
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import pandas as pd

import config
from chain import load_store, save_store, validate_chain
from consortium import BlockStatus, ConsortiumWorld
from errors import ConfigInvalid, CorruptStore, SelfCheckFailed, ShareChainError, UnknownExample
from logger import logger, print_banner, print_outcome, print_table, set_level
from mss_core import SecretVector, mss_build_session, mss_recover_secrets
from poly import poly_eval
from protocol import identify_cheaters, run_session
from scenario import ScenarioConfig
from sss_core import level2_polynomial, sss_level1_recover, sss_level1_shares, sss_setup, sss_verify_and_release

EXIT_OK = 0
EXIT_ABORT = 1
EXIT_USAGE = 2
EXIT_SELF_CHECK = 3


# =============================================================================
# Worked examples
# =============================================================================

@dataclass(frozen=True)
class WorkedExample:
    prime: int
    threshold: int
    participants: int
    public_keys: Sequence[int]
    secret: Sequence[int]
    message_bits: int
    oneway: str
    s_tilde: int
    alphas: Sequence[int]
    h_alphas: Sequence[int]
    f_row: Sequence[int]
    h_row: Sequence[int]
    message: Sequence[int]


WORKED_EXAMPLES: Dict[int, WorkedExample] = {
    1: WorkedExample(
        prime=199, threshold=5, participants=11,
        public_keys=(7, 5, 4, 3, 2, 9, 6, 8, 11, 10, 12),
        secret=(7, 9, 2, 3, 7, 5, 4, 9, 3, 21, 27),
        message_bits=5,
        oneway="modexp:3",
        s_tilde=97,
        alphas=(90, 88, 95, 94, 90),
        h_alphas=(188, 43, 113, 104, 188),
        f_row=(167, 61, 173, 92, 52, 147, 90, 170, 70, 117, 166),
        h_row=(163, 0, 38, 67, 188, 40, 185, 36, 65, 147, 34),
        message=(7, 9, 2, 3, 7),
    ),
    2: WorkedExample(
        prime=113, threshold=9, participants=17,
        public_keys=tuple(range(1, 18)),
        secret=(3, 5, 7, 9, 11, 3, 5, 6, 2, 1, 7, 8, 6, 2, 5, 1, 4),
        message_bits=6,
        oneway="modsquare",
        s_tilde=85,
        alphas=(82, 80, 78, 76, 74, 82, 80, 79, 83),
        h_alphas=(57, 72, 95, 13, 52, 57, 72, 26, 109),
        f_row=(36, 92, 92, 63, 16, 9, 28, 96, 68, 104, 52, 106, 84, 47, 73, 3, 41),
        h_row=(101, 83, 44, 108, 1, 65, 66, 89, 100, 37, 3, 105, 19, 27, 45, 25, 0),
        message=(3, 5, 7, 9, 11, 3),
    ),
}


def compute_example(example: WorkedExample) -> Dict[str, List[int]]:
    """Recompute every table of a worked example, recovering through the gated API"""
    params, oneway = sss_setup(example.prime, example.threshold, example.participants,
                               example.public_keys, example.oneway)
    secret = SecretVector.from_ints(params.field, example.secret, example.message_bits)
    session, derived = mss_build_session(secret, params, oneway, strict=True)

    t = params.threshold_t
    first_t = params.public_keys[:t]
    claim_poly, _ = sss_level1_recover(sss_level1_shares(session, first_t), t)
    verdict = sss_verify_and_release(session, claim_poly, first_t)
    if not verdict.accepted:
        raise SelfCheckFailed(f"honest level-1 claim rejected: {verdict.reason.value}")
    recovered_f = level2_polynomial(verdict.released[:t], t)
    message = mss_recover_secrets(recovered_f, derived.s_tilde, example.message_bits)

    return {
        "s_tilde": [derived.s_tilde.value],
        "alphas": [a.value for a in derived.alphas],
        "h_alphas": [h.value for h in derived.h_alphas],
        "f_row": [poly_eval(session.polynomials.f, a).value for a in params.public_keys],
        "h_row": [session.record(a).h_share.value for a in params.public_keys],
        "message": [s.value for s in message],
    }


def cmd_paper_example(which: int, show: bool = True) -> Dict[str, List[int]]:
    """
    Regenerate and check the share tables of worked example 1 or 2

    Raises:
        UnknownExample: which is not 1 or 2
        SelfCheckFailed: any value differs from the embedded expected tables
    """
    if which not in WORKED_EXAMPLES:
        raise UnknownExample(f"no worked example {which}; choose one of {sorted(WORKED_EXAMPLES)}")
    example = WORKED_EXAMPLES[which]
    computed = compute_example(example)

    if show:
        names = [f"P{i}" for i in range(1, example.participants + 1)]
        coeffs = [f"c{i}" for i in range(example.threshold)]
        print_table(f"Example {which}: p={example.prime}, (t, m)=({example.threshold}, "
                    f"{example.participants}), H={example.oneway}, s~={computed['s_tilde'][0]}",
                    pd.DataFrame([computed["alphas"], computed["h_alphas"]],
                                 index=["alpha", "H(alpha)"], columns=coeffs))
        print_table("Shares", pd.DataFrame([list(example.public_keys), computed["f_row"], computed["h_row"]],
                                           index=["a_i", "f(a_i)", "h(a_i)"], columns=names))
        print_table("Recovered message", pd.DataFrame(
            [computed["message"]], index=["s_j"],
            columns=[f"s{j}" for j in range(1, example.message_bits + 1)]))

    expected = {
        "s_tilde": [example.s_tilde],
        "alphas": list(example.alphas),
        "h_alphas": list(example.h_alphas),
        "f_row": list(example.f_row),
        "h_row": list(example.h_row),
        "message": list(example.message),
    }
    mismatches = [name for name in expected if computed[name] != expected[name]]
    if mismatches:
        for name in mismatches:
            logger.error(f"❌ {name}: expected {expected[name]}, got {computed[name]}")
        raise SelfCheckFailed(f"example {which} differs in {', '.join(mismatches)}")
    logger.info(f"✅ Example {which} matches all expected tables")
    return computed


# =============================================================================
# Runs
# =============================================================================

def _run_session_scenario(scenario: ScenarioConfig, allow_abort: bool, reveal: bool) -> int:
    params, oneway = scenario.scheme_params()
    if scenario.scheme == "multi":
        secret = scenario.secret_vector(params)
    else:
        secret = scenario.secret[0]

    outcome = run_session(params, oneway, secret, scenario.profiles, scenario.active_set(),
                          scenario.seed, strict=scenario.strict, tick_budget=scenario.tau1)
    print_outcome(outcome.summary(reveal=reveal), outcome.recovered)

    if scenario.strict:
        cheaters = identify_cheaters(outcome.transcript, outcome.session)
        if cheaters:
            names = sorted(c.private_name if reveal else c.alias for c in cheaters)
            print(f"Cheaters: {', '.join(names)}")

    if scenario.transcript_path:
        outcome.transcript.write(scenario.transcript_path, scenario.transcript_view)
        logger.info(f"📝 Transcript ({scenario.transcript_view}) written to {scenario.transcript_path}")

    if outcome.recovered or allow_abort:
        return EXIT_OK
    return EXIT_ABORT


def _run_chain_scenario(scenario: ScenarioConfig, allow_abort: bool) -> int:
    world = ConsortiumWorld(scenario.world_settings())
    outcomes = world.run(scenario.chain_intervals)

    rows = []
    for o in outcomes:
        session = o.final_session
        rows.append({
            "interval": o.interval,
            "txs": len(o.transactions),
            "committee": len(o.committee),
            "evicted": len(o.evicted),
            "t/m": f"{o.threshold}/{len(o.recipients)}" if o.recipients else "-",
            "sessions": len(o.sessions),
            "outcome": (session.status.value if session.recovered else f"Aborted({session.reason.value})")
            if session else "-",
            "status": o.status.value,
            "height": o.block.height if o.block else None,
        })
    print_table("Block intervals", pd.DataFrame(rows).set_index("interval"))

    report = validate_chain(world.store)
    print(f"Tip {world.store.tip.hex()[:16]} at height {world.store.height}, "
          f"chain {'valid' if report.clean else 'INVALID'}")

    if scenario.chain_path:
        save_store(world.store, scenario.chain_path)

    aborted = any(o.status is not BlockStatus.VALIDATED for o in outcomes)
    if not report.clean or (aborted and not allow_abort):
        return EXIT_ABORT
    return EXIT_OK


def cmd_run(path: str, allow_abort: bool = False, reveal: bool = False, transcript: Optional[str] = None,
            view: Optional[str] = None, chain: Optional[str] = None) -> int:
    """Run a scenario file; CLI flags override its output section"""
    scenario = ScenarioConfig.load(path)
    if transcript:
        scenario.transcript_path = transcript
    if view:
        scenario.transcript_view = view
    if chain:
        scenario.chain_path = chain

    if scenario.scheme == "chain":
        return _run_chain_scenario(scenario, allow_abort)
    return _run_session_scenario(scenario, allow_abort, reveal)


def cmd_chain_inspect(path: str) -> int:
    """Print height, tip and per-block validation status of a stored chain"""
    store = load_store(path)
    report = validate_chain(store)
    print(f"Blocks: {len(store)}  height: {store.height}  tip: {store.tip.hex()}")
    if report.entries:
        frame = pd.DataFrame([{
            "height": e.height,
            "hash": e.block_hash[:16],
            "status": e.status,
            "timeout_validated": e.timeout_validated,
        } for e in report.entries])
        print_table("Blocks", frame.sort_values(["height", "hash"], kind="stable").reset_index(drop=True))
    return EXIT_OK if report.clean else EXIT_ABORT


# =============================================================================
# Entry point
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharechain",
        description="Two-level (multi)secret sharing and a consortium chain validated by it.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    example = sub.add_parser("paper-example", help="regenerate and self-check a worked share table")
    example.add_argument("which", type=int, help="example number (1 or 2)")

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("config", help="scenario file (dotenv syntax)")
    run.add_argument("--allow-abort", action="store_true", help="exit 0 even if the protocol aborts")
    run.add_argument("--reveal", action="store_true", help="print recovered secrets and real identities")
    run.add_argument("--transcript", help="write the session transcript here")
    run.add_argument("--view", choices=("public", "private"), help="transcript view")
    run.add_argument("--chain", help="persist the chain store here")

    inspect = sub.add_parser("chain-inspect", help="validate and list a stored chain")
    inspect.add_argument("store", help="chain store file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point, returns the process exit code"""
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_level("DEBUG")
    if getattr(config, 'SHOW_BANNER', False):
        print_banner()

    try:
        if args.command == "paper-example":
            cmd_paper_example(args.which)
            return EXIT_OK
        if args.command == "run":
            return cmd_run(args.config, args.allow_abort, args.reveal, args.transcript, args.view, args.chain)
        return cmd_chain_inspect(args.store)
    except SelfCheckFailed as e:
        logger.error(f"❌ Self-check failed: {e}")
        return EXIT_SELF_CHECK
    except (ConfigInvalid, UnknownExample, CorruptStore) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_USAGE
    except ShareChainError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_ABORT
    except KeyboardInterrupt:
        logger.info("⏹️ Interrupted")
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
