"""Command-line surface: one subcommand per pipeline stage."""
import argparse
import asyncio
import json
import logging
import os
import sys

from .ccot import plan_trip
from .common import (
    PreconditionError,
    TourPlannerError,
    atomic_write,
    canonical_json,
    load_json,
)
from .config import (
    build_providers,
    check_hash,
    close_providers,
    config_hash,
    load_config,
)
from .const import (
    CONF_CLUSTER,
    CONF_EPS0,
    CONF_EPS_DECAY,
    CONF_EPS_FLOOR,
    CONF_EVALUATION,
    CONF_GATE,
    CONF_GSPO,
    CONF_GRADE_FLOOR,
    CONF_MIN_SAMPLES,
    CONF_RECALL,
    CONF_REFERENCE_KM,
    CONF_REWARD,
    CONF_SANDBOX,
    CONF_SCHEDULE,
    CONF_SEED,
    CONF_SEMANTIC_PER_DAY,
    CONF_TOTAL_PER_DAY,
    KIND_ATTRACTION,
)
from .constraints import ScheduleRules, check_itinerary, hard_score
from .evaluation import evaluate_cases, load_cases
from .geo import ClusterConfig, adaptive_cluster, point_of
from .itinerary import dump_itinerary, load_itinerary, render_markdown
from .profile import UserProfile, build_profile
from .providers import Transcript
from .recall import RecallConfig, recall_candidates, recall_rate
from .reward import GateConfig, evaluate_batch, score_itinerary
from .sandbox import generate_synthetic, load_sandbox, save_sandbox

_LOGGER = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser():
    """Return the argument parser of every subcommand."""
    parser = argparse.ArgumentParser(
        prog="tourplanner", description="Personalized multi-day itinerary planning."
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--config", help="JSON run config")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one config value (repeatable)",
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    sandbox = commands.add_parser("sandbox", help="check or generate sandbox files")
    sandbox_commands = sandbox.add_subparsers(dest="action", metavar="ACTION")
    sandbox_commands.required = True
    validate = sandbox_commands.add_parser("validate", help="load and check a sandbox")
    validate.add_argument("path")
    gen = sandbox_commands.add_parser("gen", help="generate a synthetic sandbox")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--spec", help="JSON document of per-city counts")
    gen.add_argument("--out", required=True)

    recall = commands.add_parser("recall", help="candidate recall")
    recall_commands = recall.add_subparsers(dest="action", metavar="ACTION")
    recall_commands.required = True
    report = recall_commands.add_parser("report", help="channel counts and recall rate")
    _add_query(report)
    report.add_argument("--sandbox")
    report.add_argument("--truth", help="JSON array of ground-truth attraction ids")
    report.add_argument("--out")

    geo = commands.add_parser("geo", help="spatial clustering")
    geo_commands = geo.add_subparsers(dest="action", metavar="ACTION")
    geo_commands.required = True
    cluster = geo_commands.add_parser("cluster", help="cluster a city's attractions")
    cluster.add_argument("--sandbox")
    cluster.add_argument("--city", required=True)
    cluster.add_argument("--duration", type=int, required=True)
    cluster.add_argument("--out")

    plan = commands.add_parser("plan", help="plan an itinerary")
    _add_query(plan)
    plan.add_argument("--sandbox")
    plan.add_argument("--seed", type=int)
    plan.add_argument("--out", required=True, help="itinerary JSON path")
    plan.add_argument("--record", help="arbitration record JSON path")
    plan.add_argument("--markdown", help="Markdown rendering path")
    plan.add_argument("--transcript", help="record provider calls to this JSON-lines file")
    plan.add_argument("--replay", help="answer provider calls from this transcript")

    check = commands.add_parser("validate", help="hard constraint check of an itinerary")
    check.add_argument("--itinerary", required=True)
    check.add_argument("--sandbox")
    check.add_argument("--profile")
    check.add_argument("--out")

    score = commands.add_parser("score", help="reward breakdown of an itinerary")
    score.add_argument("--itinerary", required=True)
    score.add_argument("--sandbox")
    score.add_argument("--profile")
    score.add_argument("--reference")
    score.add_argument("--out")

    gspo = commands.add_parser("gspo", help="sequence policy optimization math")
    gspo_commands = gspo.add_subparsers(dest="action", metavar="ACTION")
    gspo_commands.required = True
    batch = gspo_commands.add_parser("eval", help="evaluate a rollout batch")
    batch.add_argument("--batch", required=True)
    batch.add_argument("--out")

    evaluate = commands.add_parser("evaluate", help="benchmark metrics over cases")
    evaluate.add_argument("--cases", required=True, help="directory of case documents")
    evaluate.add_argument("--sandbox")
    evaluate.add_argument("--out", required=True)
    evaluate.add_argument("--judge", action="store_true", help="run the pairwise judge")
    return parser


def _add_query(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--query")
    group.add_argument("--query-file")


def _query(args):
    if args.query is not None:
        return args.query
    with open(args.query_file, encoding="utf-8") as source:
        return source.read().strip()


def _sandbox(args, config):
    path = getattr(args, "sandbox", None) or config[CONF_SANDBOX]
    if not path:
        raise PreconditionError("no sandbox: pass --sandbox or set it in the config")
    return load_sandbox(path)


async def _profile(args, itinerary, sandbox):
    if args.profile:
        return UserProfile.from_dict(load_json(args.profile))
    return await build_profile(itinerary.query, sandbox)


class Run:
    """Artifacts written by one command and the manifest describing them."""

    def __init__(self, args, argv, config):
        """Initialize a new Run."""
        self.args = args
        self.argv = list(argv)
        self.config = config
        self.hash = config_hash(config)
        self.artifacts = []
        self.transcript = None

    def emit(self, document, path=None):
        """Write a JSON document to path, or stdout when there is none."""
        text = canonical_json(document)
        if path is None:
            sys.stdout.write(text)
        else:
            self.write(path, text)

    def write(self, path, text):
        """Write one artifact atomically."""
        atomic_write(path, text)
        self.artifacts.append(path)
        _LOGGER.debug("Wrote %s", path)

    def finish(self):
        """Write the manifest next to the first artifact."""
        if not self.artifacts:
            return
        directory = os.path.dirname(os.path.abspath(self.artifacts[0]))
        atomic_write(
            os.path.join(directory, MANIFEST_NAME),
            canonical_json(
                {
                    "command": _command_name(self.args),
                    "argv": self.argv,
                    "config_hash": self.hash,
                    "seed": self.config[CONF_SEED],
                    "transcript": self.transcript,
                    "artifacts": self.artifacts,
                }
            ),
        )


def _command_name(args):
    action = getattr(args, "action", None)
    return f"{args.command} {action}" if action else args.command


def cmd_sandbox(run):
    """Validate or generate a sandbox file."""
    args = run.args
    if args.action == "validate":
        sandbox = load_sandbox(args.path)
        run.emit({"valid": True, "counts": sandbox.counts()})
        return 0
    spec = load_json(args.spec) if args.spec else None
    sandbox = generate_synthetic(args.seed, spec)
    save_sandbox(sandbox, args.out)
    run.artifacts.append(args.out)
    _LOGGER.info("Generated %r", sandbox)
    return 0


async def cmd_recall(run):
    """Report recall channel sizes and the recall rate against a truth set."""
    args, config = run.args, run.config
    sandbox = _sandbox(args, config)
    providers = build_providers(config, sandbox)
    try:
        profile = await build_profile(_query(args), sandbox, providers.chat)
        recall_conf = config[CONF_RECALL]
        cfg = RecallConfig.for_duration(
            profile.explicit.duration_days,
            recall_conf[CONF_SEMANTIC_PER_DAY],
            recall_conf[CONF_TOTAL_PER_DAY],
            recall_conf[CONF_GRADE_FLOOR],
        )
        candidates = await recall_candidates(
            profile, sandbox, providers.chat, providers.embed, cfg
        )
    finally:
        await close_providers(providers)
    document = {"config_hash": run.hash, **candidates.to_dict(), "recall_rate": None}
    if args.truth:
        document["recall_rate"] = recall_rate(candidates, load_json(args.truth))
    run.emit(document, args.out)
    return 0


def cmd_geo(run):
    """Cluster the attractions of one city."""
    args, config = run.args, run.config
    sandbox = _sandbox(args, config)
    attractions = sandbox.in_city(KIND_ATTRACTION, sandbox.city(args.city).name)
    cluster_conf = config[CONF_CLUSTER]
    cfg = ClusterConfig(
        min_clusters=args.duration,
        min_samples=cluster_conf[CONF_MIN_SAMPLES],
        eps0=cluster_conf[CONF_EPS0],
        eps_decay=cluster_conf[CONF_EPS_DECAY],
        eps_floor=cluster_conf[CONF_EPS_FLOOR],
    )
    clusters = adaptive_cluster([point_of(item) for item in attractions], cfg)
    run.emit(
        {
            "config_hash": run.hash,
            "ids": [item.id for item in attractions],
            **clusters.to_dict(),
        },
        args.out,
    )
    return 0


def _check_replay(config, replay):
    manifest = os.path.join(os.path.dirname(os.path.abspath(replay)), MANIFEST_NAME)
    if os.path.exists(manifest):
        check_hash(config, load_json(manifest).get("config_hash"))


async def cmd_plan(run):
    """Plan one query and write the itinerary and its records."""
    args, config = run.args, run.config
    sandbox = _sandbox(args, config)
    transcript = None
    if args.replay:
        if args.transcript and os.path.samefile(args.replay, args.transcript):
            raise PreconditionError("cannot record into the transcript being replayed")
        _check_replay(config, args.replay)
    if args.transcript:
        atomic_write(args.transcript, "")
        transcript = Transcript(args.transcript)
        run.transcript = args.transcript
    providers = build_providers(config, sandbox, transcript, args.replay)
    try:
        result = await plan_trip(_query(args), sandbox, providers, config, run.hash)
    finally:
        await close_providers(providers)
    run.write(args.out, dump_itinerary(result.itinerary))
    if args.record:
        run.write(args.record, canonical_json(result.records_dict()))
    if args.markdown:
        run.write(args.markdown, render_markdown(result.itinerary))
    return 0


async def cmd_validate(run):
    """Score the hard constraints; exit 0 only for a perfect plan."""
    args, config = run.args, run.config
    sandbox = _sandbox(args, config)
    itinerary = load_itinerary(args.itinerary)
    if args.config:
        check_hash(config, itinerary.config_hash)
    profile = await _profile(args, itinerary, sandbox)
    hard = hard_score(itinerary, sandbox, profile)
    reports = check_itinerary(itinerary, sandbox, ScheduleRules.from_config(config[CONF_SCHEDULE]))
    run.emit(
        {"hard": hard.to_dict(), "days": [report.to_dict() for report in reports]},
        args.out,
    )
    return 0 if hard.eta == 1 else 1


async def cmd_score(run):
    """Compute the full reward breakdown."""
    args, config = run.args, run.config
    sandbox = _sandbox(args, config)
    itinerary = load_itinerary(args.itinerary)
    if args.config:
        check_hash(config, itinerary.config_hash)
    profile = await _profile(args, itinerary, sandbox)
    reference = load_itinerary(args.reference) if args.reference else None
    providers = build_providers(config, sandbox)
    try:
        breakdown = await score_itinerary(
            itinerary,
            sandbox,
            profile,
            providers.reward,
            GateConfig.from_config(config[CONF_GATE]),
            reference,
            config[CONF_REWARD][CONF_REFERENCE_KM],
        )
    finally:
        await close_providers(providers)
    run.emit(breakdown.to_dict(), args.out)
    return 0


def cmd_gspo(run):
    """Evaluate the group objective of a rollout batch."""
    args = run.args
    run.emit(evaluate_batch(load_json(args.batch), run.config[CONF_GSPO]), args.out)
    return 0


async def cmd_evaluate(run):
    """Compute benchmark metrics over a directory of cases."""
    args, config = run.args, run.config
    sandbox = _sandbox(args, config)
    cases = load_cases(args.cases)
    providers = build_providers(config, sandbox) if args.judge else None
    try:
        report = await evaluate_cases(
            cases,
            sandbox,
            config[CONF_EVALUATION],
            providers.judge if providers else None,
        )
    finally:
        if providers is not None:
            await close_providers(providers)
    run.emit({"config_hash": run.hash, **report.to_dict()}, args.out)
    return 0


COMMANDS = {
    "sandbox": cmd_sandbox,
    "recall": cmd_recall,
    "geo": cmd_geo,
    "plan": cmd_plan,
    "validate": cmd_validate,
    "score": cmd_score,
    "gspo": cmd_gspo,
    "evaluate": cmd_evaluate,
}


def setup_logging(verbosity):
    """Configure the root logger once; each -v lowers the threshold."""
    level = max(logging.DEBUG, logging.WARNING - 10 * verbosity)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def _error(ex):
    sys.stderr.write(
        json.dumps({"error": type(ex).__name__, "message": str(ex)}, ensure_ascii=False) + "\n"
    )
    return 1


def main(argv=None):
    """Run one command and return its exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    overrides = list(args.overrides)
    if getattr(args, "seed", None) is not None and args.command != "sandbox":
        overrides.append(f"{CONF_SEED}={args.seed}")
    try:
        config = load_config(args.config, overrides)
        run = Run(args, argv, config)
        result = COMMANDS[args.command](run)
        if asyncio.iscoroutine(result):
            result = asyncio.run(result)
        run.finish()
        return result
    except (TourPlannerError, OSError) as ex:
        _LOGGER.debug("Command %s failed", args.command, exc_info=True)
        return _error(ex)
