"""
Command-line interface for the obstacle-avoiding spline planner.

Subcommands read a scenario file, run one library operation and write CSV
trajectories and JSON reports into the output directory.

Exit codes: 0 success, 2 invalid input, 3 solver did not converge,
4 hybrid segment failure.
"""
import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional, Tuple

import numpy as np

from src.config.settings import ConfigError, Settings, load_settings
from src.models.jet import JetState, Trajectory
from src.models.obstacle import ToleranceBands
from src.models.potential import PotentialSum
from src.models.scenario import AUTO, Scenario
from src.output.csv_generator import CSVGenerator
from src.output.json_generator import JSONGenerator
from src.solver.avoidance import (
    AvoidanceError,
    build_avoidance_potential,
    certify,
    min_distances_to_centers,
    select_parameters,
)
from src.solver.covering import CoveringError, cover_obstacle, cover_radii
from src.solver.hybrid_planner import (
    HybridPlanner,
    HybridValidationError,
    SegmentFailure,
    boundary_residual,
    validate_zeno,
)
from src.solver.integrator import (
    IntegrationError,
    action_value,
    integrate,
    necessary_condition_residual,
)
from src.solver.reference_simulation import ReferenceSimulation
from src.solver.shooting import ShootingError, ShootingSolver, hermite_jets
from src.utils.csv_parser import CloudParserError
from src.utils.guards import GuardError
from src.utils.manifold import ManifoldError
from src.utils.potential import PotentialError
from src.utils.scenario_parser import ScenarioParser, ScenarioParserError

logger = logging.getLogger("app")

COMMANDS = ("integrate", "shoot", "cover", "certify", "plan-hybrid", "repro-sim")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3
EXIT_SEGMENT_FAILURE = 4

VALIDATION_ERRORS = (
    ValueError,
    ConfigError,
    ScenarioParserError,
    CloudParserError,
    ManifoldError,
    GuardError,
    PotentialError,
    ShootingError,
    CoveringError,
    AvoidanceError,
    HybridValidationError,
)


class CommandError(Exception):
    """Custom exception for missing scenario sections."""
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="app.py",
        description="Obstacle-avoiding Riemannian spline planner",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", help="Scenario file (JSON or YAML)")
    parser.add_argument("--out", default="results", help="Output directory")
    parser.add_argument("--seed", type=int, help="Seed (overrides the scenario)")
    parser.add_argument("--method", choices=("euler", "rk4"), help="Integration method")
    parser.add_argument("--step", type=float, help="Integration step")
    parser.add_argument("--config", default="conf.yaml", help="Settings file")
    return parser


def configure_logging(settings: Settings):
    level = logging.DEBUG if settings.debug.enabled else getattr(
        logging, str(settings.debug.log_level).upper(), logging.INFO
    )
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def apply_flags(settings: Settings, args: argparse.Namespace) -> Settings:
    """CLI flags override configuration and scenario values."""
    integrator = settings.integrator
    if args.method is not None:
        integrator = replace(integrator, method=args.method)
    if args.step is not None:
        integrator = replace(integrator, step=args.step)
    return replace(settings, integrator=integrator)


def _require(scenario: Scenario, *sections: str):
    missing = [s for s in sections if getattr(scenario, s) is None]
    if missing:
        raise CommandError(f"Scenario {scenario.path} is missing {', '.join(missing)}")


def flat_reference(scenario: Scenario) -> Trajectory:
    """Scenario reference, or the V ≡ 0 trajectory from the boundary cubic's jets."""
    if scenario.reference is not None:
        return scenario.reference
    bd = scenario.boundary
    a0, j0 = hermite_jets(bd)
    s0 = JetState(q=bd.q0, v=bd.v0, a=a0, j=j0)
    cfg = scenario.settings.integrator
    return integrate(scenario.chart, PotentialSum(terms=[]), s0, bd.T, cfg.step, cfg.method)


def obstacle_centers(scenario: Scenario, seed: int) -> Tuple[np.ndarray, ToleranceBands, dict]:
    """Point obstacles and bands of the obstacle section."""
    obs = scenario.obstacle
    notes = {}
    if obs.centers is not None:
        centers = obs.centers
        r_star = obs.r_star if obs.r_star is not None else cover_radii(obs.r, obs.R)[1]
    else:
        cover = cover_obstacle(scenario.chart, obs.cloud, obs.r, obs.R,
                               scenario.settings.avoidance, seed=seed)
        centers = cover.centers
        r_star = obs.r_star if obs.r_star is not None else cover.r_star
        notes["cover"] = cover.to_dict()
    return centers, ToleranceBands(obs.r, r_star, obs.R), notes


def select_obstacle_parameters(
    scenario: Scenario,
    reference,
    centers: np.ndarray,
    bands: ToleranceBands,
):
    """Certified (τ, k) for the obstacle section; an explicit τ or k stays pinned."""
    obs = scenario.obstacle
    bd = scenario.boundary
    return select_parameters(
        scenario.chart, reference, centers, bands,
        scenario.chart.norm(bd.q0, bd.v0), bd.T, scenario.sensing_radius,
        scenario.settings.avoidance,
        k_values=None if obs.k == AUTO else [int(obs.k)],
        tau_values=None if obs.tau == AUTO else [float(obs.tau)],
    )


def obstacle_potential(scenario: Scenario, seed: int) -> Tuple[PotentialSum, dict]:
    """Avoidance potential of the obstacle section, selecting (τ, k) when asked."""
    obs = scenario.obstacle
    centers, bands, notes = obstacle_centers(scenario, seed)
    if obs.auto:
        tau, k, certificate = select_obstacle_parameters(scenario, flat_reference(scenario), centers, bands)
        notes["certificate"] = certificate.to_dict()
    else:
        tau, k = float(obs.tau), int(obs.k)
    notes.update({"tau": tau, "k": k, "centers": centers})
    return build_avoidance_potential(centers, bands.R, tau, k, scenario.sensing_radius), notes


def run_integrate(scenario: Scenario, csv_out: CSVGenerator, json_out: JSONGenerator) -> int:
    _require(scenario, "chart", "initial", "horizon")
    cfg = scenario.settings.integrator
    traj = integrate(scenario.chart, scenario.potential, scenario.initial, scenario.horizon,
                     cfg.step, cfg.method)
    csv_out.generate_trajectory(traj, "trajectory")
    json_out.generate({
        "command": "integrate",
        "samples": traj.num_samples,
        "method": cfg.method,
        "step": cfg.step,
        "action": action_value(scenario.chart, scenario.potential, traj),
        "equation_residual": necessary_condition_residual(scenario.chart, scenario.potential, traj),
        "potential": scenario.potential.to_list(),
    }, "integrate")
    return EXIT_OK


def run_shoot(scenario: Scenario, csv_out: CSVGenerator, json_out: JSONGenerator, seed: int) -> int:
    _require(scenario, "chart", "boundary")
    potential, notes = scenario.potential, {}
    if scenario.obstacle is not None:
        extra, notes = obstacle_potential(scenario, seed)
        potential = potential + extra
    solver = ShootingSolver(scenario.chart, potential, scenario.settings.solver,
                            scenario.settings.integrator)
    result = solver.solve(scenario.boundary)
    csv_out.generate_trajectory(result.trajectory, "trajectory")
    report = {"command": "shoot", "boundary": scenario.boundary.to_dict(), **result.to_dict()}
    if scenario.obstacle is not None:
        report["obstacle"] = notes
        report["min_distances"] = [
            {"distance": d, "time": t}
            for d, t in min_distances_to_centers(scenario.chart, result.trajectory, notes["centers"])
        ]
    json_out.generate(report, "shoot")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def run_cover(scenario: Scenario, csv_out: CSVGenerator, json_out: JSONGenerator, seed: int) -> int:
    _require(scenario, "chart", "obstacle")
    obs = scenario.obstacle
    if obs.cloud is None:
        raise CommandError("The cover command needs an obstacle cloud")
    cover = cover_obstacle(scenario.chart, obs.cloud, obs.r, obs.R, scenario.settings.avoidance, seed=seed)
    csv_out.generate_points(cover.centers, "centers")
    json_out.generate({"command": "cover", **cover.to_dict()}, "cover")
    return EXIT_OK


def run_certify(scenario: Scenario, json_out: JSONGenerator, seed: int) -> int:
    _require(scenario, "chart", "boundary", "obstacle")
    obs = scenario.obstacle
    reference = flat_reference(scenario)
    centers, bands, notes = obstacle_centers(scenario, seed)
    v0_norm = scenario.chart.norm(scenario.boundary.q0, scenario.boundary.v0)
    if obs.auto:
        tau, k, certificate = select_obstacle_parameters(scenario, reference, centers, bands)
    else:
        tau, k = float(obs.tau), int(obs.k)
        potential = build_avoidance_potential(centers, bands.R, tau, k, scenario.sensing_radius)
        certificate = certify(scenario.chart, reference, potential, bands, v0_norm, scenario.boundary.T)
    json_out.generate({
        "command": "certify",
        "tau": tau,
        "k": k,
        "num_centers": int(np.atleast_2d(centers).shape[0]),
        "certificate": certificate.to_dict(),
        **notes,
    }, "certificate")
    return EXIT_OK


def run_plan_hybrid(scenario: Scenario, csv_out: CSVGenerator, json_out: JSONGenerator, seed: int) -> int:
    _require(scenario, "hybrid")
    spec = scenario.hybrid
    settings = scenario.settings
    planner = HybridPlanner(
        spec.system, settings.hybrid, settings.solver, settings.integrator,
        seed=seed, avoidance=settings.avoidance,
    )
    zeno = validate_zeno(spec.system, settings.hybrid.zeno_margin)
    hybrid = planner.interpolate(spec.knots, spec.guard_targets)
    csv_out.generate_hybrid(hybrid, "hybrid_trajectory")
    json_out.generate({
        "command": "plan-hybrid",
        "zeno": zeno.to_dict(),
        "impacts": [impact.to_dict() for impact in hybrid.impacts],
        "pieces": [
            {
                "piece_id": i,
                "vertex": p.vertex,
                "kind": p.kind,
                "segment": p.segment,
                "start_time": p.start_time,
                "end_time": p.end_time,
                "boundary_residual": boundary_residual(spec.system.chart(p.vertex), p.trajectory),
            }
            for i, p in enumerate(hybrid.pieces)
        ],
    }, "impacts")
    return EXIT_OK


def run_repro_sim(settings: Settings, csv_out: CSVGenerator, json_out: JSONGenerator, seed: int) -> int:
    report = ReferenceSimulation(settings, seed=seed).run()
    csv_out.generate_trajectory(report.shooting.trajectory, "trajectory")
    json_out.generate({"command": "repro-sim", **report.to_dict()}, "repro_sim")
    return EXIT_OK if report.shooting.converged else EXIT_NOT_CONVERGED


def dispatch(args: argparse.Namespace, settings: Settings) -> int:
    if args.command == "repro-sim" and not args.scenario:
        seed = args.seed if args.seed is not None else 0
        csv_out = CSVGenerator(args.out)
        json_out = JSONGenerator(args.out, seed=seed, settings=settings)
        return run_repro_sim(settings, csv_out, json_out, seed)

    if not args.scenario:
        raise CommandError(f"The {args.command} command needs --scenario")
    scenario = ScenarioParser(args.scenario, settings).parse()
    scenario.settings = apply_flags(scenario.settings, args)
    seed = args.seed if args.seed is not None else scenario.seed
    scenario.seed = seed

    csv_out = CSVGenerator(args.out)
    json_out = JSONGenerator(args.out, seed=seed, settings=scenario.settings)
    logger.info(f"Running {args.command} on {args.scenario} (seed {seed})")

    if args.command == "integrate":
        return run_integrate(scenario, csv_out, json_out)
    if args.command == "shoot":
        return run_shoot(scenario, csv_out, json_out, seed)
    if args.command == "cover":
        return run_cover(scenario, csv_out, json_out, seed)
    if args.command == "certify":
        return run_certify(scenario, json_out, seed)
    if args.command == "plan-hybrid":
        return run_plan_hybrid(scenario, csv_out, json_out, seed)
    return run_repro_sim(scenario.settings, csv_out, json_out, seed)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    try:
        settings = apply_flags(load_settings(args.config), args)
    except (ConfigError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID
    configure_logging(settings)

    try:
        return dispatch(args, settings)
    except SegmentFailure as e:
        logger.error(f"{e} {e.diagnostics}")
        return EXIT_SEGMENT_FAILURE
    except IntegrationError as e:
        logger.error(f"Integration failed: {e}")
        return EXIT_NOT_CONVERGED
    except (CommandError,) + VALIDATION_ERRORS as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
