# cli/command_handler.py - v0.1.0
import argparse
import logging
import sys
from dataclasses import dataclass, field

from config import settings
from core.orchestrator import PRESETS, SUITES, Orchestrator, preset_problem
from enveloping.structure import EnvelopingError
from flow.diagnostics import summarize, within_bounds
from flow.solver import METHODS, FlowError, FlowProblem, ProblemValidationError, solve
from lie.algebra import LieAlgebraError
from lie.splitting import CUSTOM, KINDS, SplittingSpec, random_pairs, validate_splitting
from persistence.store import (
    FormatError,
    dumps,
    load_problem,
    load_spec,
    trajectory_csv,
    trajectory_document,
    write_json,
    write_trajectory,
)
from utils.helpers import make_rng

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_SOLVER_ERROR = 3

FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    """Parsed command line; every randomized command records its seed in the output."""
    command: str
    seed: int
    tol: float | None = None
    out: str | None = None
    spec_path: str | None = None
    kind: str | None = None
    dim: int | None = None
    samples: int | None = None
    problem_path: str | None = None
    preset: str | None = None
    method: str | None = None
    h: float | None = None
    order: int | None = None
    degree: int | None = None
    algebra: str | None = None
    suite: str | None = None
    formats: tuple = field(default=FORMATS)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = vars(args)
        seed = values.get("seed")
        fmt = values.get("format")
        return cls(
            command=args.command,
            seed=settings.SEED if seed is None else seed,
            tol=values.get("tol"),
            out=values.get("out"),
            spec_path=values.get("spec"),
            kind=values.get("kind"),
            dim=values.get("dim"),
            samples=values.get("samples"),
            problem_path=values.get("problem"),
            preset=values.get("preset"),
            method=values.get("method"),
            h=values.get("h"),
            order=values.get("order"),
            degree=values.get("degree"),
            algebra=values.get("algebra"),
            suite=values.get("suite"),
            formats=(fmt,) if fmt else FORMATS,
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="postlie",
        description="R-matrix splittings, the BCH-recursion, post-Lie Magnus expansions and isospectral flows.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="Check the R-matrix identities of a splitting on random pairs.")
    source = validate.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", metavar="PATH", help="Splitting JSON {dim, kind, matrix?}.")
    source.add_argument("--kind", choices=[k for k in KINDS if k != CUSTOM], help="Built-in splitting.")
    validate.add_argument("--dim", type=int, default=4, help="Matrix size for --kind (default 4).")
    validate.add_argument("--samples", type=int, default=None, help="Number of random pairs.")
    validate.add_argument("--seed", type=int, default=None)
    validate.add_argument("--tol", type=float, default=None)
    validate.add_argument("--out", metavar="PATH", help="Also write the report here.")

    solve_cmd = commands.add_parser("solve", help="Integrate da/dt = [a, pi_+ a] and report drift and defect.")
    problem = solve_cmd.add_mutually_exclusive_group(required=True)
    problem.add_argument("--problem", metavar="PATH", help="Flow problem JSON.")
    problem.add_argument("--preset", choices=PRESETS)
    solve_cmd.add_argument("--method", choices=METHODS, default=None)
    solve_cmd.add_argument("--h", type=float, default=None, help="RK4 step size.")
    solve_cmd.add_argument("--order", type=int, default=None, help="Magnus truncation order.")
    solve_cmd.add_argument("--seed", type=int, default=None, help="Seed for random presets.")
    solve_cmd.add_argument("--tol", type=float, default=None, help="Spectral drift bound (default POSTLIE_DRIFT_BOUND).")
    solve_cmd.add_argument("--out", metavar="STEM", help="Write STEM.json and/or STEM.csv.")
    solve_cmd.add_argument("--format", choices=FORMATS, default=None, help="Restrict output to one format.")

    verify = commands.add_parser("verify", help="Run a verification suite.")
    verify.add_argument("suite", choices=SUITES + ("all",))
    verify.add_argument("--order", type=int, default=None)
    verify.add_argument("--degree", type=int, default=None)
    verify.add_argument("--algebra", choices=("sl2", "gl2", "gl3"), default="sl2")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--tol", type=float, default=None)
    verify.add_argument("--out", metavar="PATH", help="Also write the report here.")
    return parser


class CommandHandler:
    """Runs one parsed command and maps its outcome to an exit code."""

    def __init__(self, stdout=None):
        self.stdout = stdout or sys.stdout
        self.handlers = {
            "validate": self.validate_command,
            "solve": self.solve_command,
            "verify": self.verify_command,
        }
        logger.info("CommandHandler initialized.")

    def _emit(self, text: str):
        self.stdout.write(text if text.endswith("\n") else text + "\n")

    def _report(self, config: RunConfig, document: dict):
        if config.out:
            write_json(config.out, document)
        self._emit(dumps(document))

    def dispatch(self, config: RunConfig) -> int:
        handler = self.handlers[config.command]
        try:
            return handler(config)
        except FormatError as e:
            logger.error(f"Input error: {e}")
            for detail in e.errors:
                logger.error(f"  {detail}")
            return EXIT_INPUT_ERROR
        except ProblemValidationError as e:
            logger.error(f"Invalid problem: {e}")
            return EXIT_INPUT_ERROR
        except FlowError as e:
            logger.error(f"Solver error: {e}")
            return EXIT_SOLVER_ERROR
        except LieAlgebraError as e:
            logger.error(f"{type(e).__name__}: {e}")
            return EXIT_SOLVER_ERROR if config.command == "solve" else EXIT_INPUT_ERROR
        except (EnvelopingError, ValueError) as e:
            logger.error(f"Invalid input: {e}")
            return EXIT_INPUT_ERROR

    def validate_command(self, config: RunConfig) -> int:
        spec = load_spec(config.spec_path) if config.spec_path else SplittingSpec(config.dim, config.kind)
        count = settings.VALIDATION_SAMPLES if config.samples is None else config.samples
        if count < 1:
            raise ValueError(f"--samples must be positive, got {count}.")
        pairs = random_pairs(spec.dim, count, make_rng(config.seed))
        report = validate_splitting(spec, pairs, tol=config.tol, seed=config.seed)
        document = report.to_dict()
        document["max_residual"] = max(report.residuals.values())
        document["failures"] = report.failures()
        document["projector"] = spec.is_projector()
        self._report(config, document)
        return EXIT_OK if report.validated else EXIT_CHECK_FAILED

    def _problem(self, config: RunConfig) -> FlowProblem:
        problem = load_problem(config.problem_path) if config.problem_path else preset_problem(config.preset, config.seed)
        overrides = {}
        if config.h is not None:
            overrides["rk4_step"] = config.h
        if config.order is not None:
            overrides["magnus_order"] = config.order
        if config.method or overrides:
            problem = problem.with_method(config.method or problem.method, **overrides)
        return problem

    def solve_command(self, config: RunConfig) -> int:
        if config.tol is not None and not config.tol > 0.0:
            raise ValueError(f"--tol must be positive, got {config.tol}.")
        problem = self._problem(config)
        logger.info(f"Solving on gl({problem.a0.dim}) with {problem.method} over {len(problem.t_grid)} samples.")
        trajectory = solve(problem)
        summary = summarize(trajectory)
        summary["seed"] = config.seed
        if config.out:
            write_trajectory(config.out, trajectory, config.formats, summary)
        if config.formats == ("csv",):
            self._emit(trajectory_csv(trajectory, summary))
        else:
            self._emit(dumps(trajectory_document(trajectory, summary)))
        passed = within_bounds(summary, drift_bound=config.tol)
        if not passed:
            logger.warning(f"Trajectory outside bounds: drift {summary['max_drift']:.3e}, "
                           f"defect {summary['max_lax_defect']:.3e}.")
        return EXIT_OK if passed else EXIT_CHECK_FAILED

    def verify_command(self, config: RunConfig) -> int:
        orchestrator = Orchestrator(seed=config.seed, tol=config.tol, order=config.order,
                                    degree=config.degree, algebra=config.algebra)
        report = orchestrator.verify(config.suite)
        self._report(config, report)
        return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def main(argv=None, stdout=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT_ERROR
    return CommandHandler(stdout).dispatch(RunConfig.from_args(args))
